//
// Copyright 2026 The OTAFD Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "otafd/horizon.hpp"

using namespace otafd;

namespace {

HyperParams basic_hyper(int devices) {
  HyperParams h;
  h.gamma = 1.0;
  h.eta0 = 0.01;
  h.l1 = 1.0;
  h.l2 = 1.0;
  h.grad_bound = 10.0;
  h.f_max.assign(static_cast<std::size_t>(devices), 1.0);
  return h;
}

// Straight-line re-implementation of the bound for the dual-route check.
double bound_reference(std::int64_t rounds, const HyperParams& h,
                       const BoundSummands& s, int device) {
  double total = 8.0 * h.gamma * h.l2 * h.grad_bound;
  total += 3.0 * h.f_max[static_cast<std::size_t>(device)] /
           (h.eta0 * std::sqrt(static_cast<double>(rounds)));
  for (std::int64_t t = 0; t < rounds; ++t) {
    const double eta = h.eta0 / std::sqrt(static_cast<double>(t + 1));
    total += 6.0 * h.eta0 * h.gamma * h.gamma * h.l2 * h.l2 * h.l1 *
             s.quad(device, t) / std::pow(static_cast<double>(rounds), 1.5);
    total += 6.0 * h.gamma * h.eta0 * h.l2 * (h.l1 * eta + 1.0) *
             s.cross(device, t) / (eta * std::pow(static_cast<double>(rounds), 1.5));
  }
  return total;
}

}  // namespace

TEST_CASE("bound reduces to the optimization term when gamma is zero") {
  HyperParams h = basic_hyper(1);
  h.gamma = 0.0;
  const BoundSummands s = BoundSummands::zeros(1, 16);
  const double bound = convergence_bound(16, h, s, 0);
  CHECK(bound == doctest::Approx(3.0 * 1.0 / (0.01 * 4.0)).epsilon(1e-12));
}

TEST_CASE("bound with vanishing Phi terms keeps only the constant and 1/sqrt(T) parts") {
  const HyperParams h = basic_hyper(2);
  const BoundSummands s = BoundSummands::zeros(2, 25);
  const double bound = convergence_bound(25, h, s, 1);
  CHECK(bound == doctest::Approx(8.0 * 10.0 + 3.0 / (0.01 * 5.0)).epsilon(1e-12));
}

TEST_CASE("bound matches an independent straight-line evaluation") {
  Rng rng(123);
  for (int n = 0; n < 20; ++n) {
    const int devices = 1 + static_cast<int>(rng.below(4));
    const auto rounds = static_cast<std::int64_t>(1 + rng.below(30));
    HyperParams h;
    h.l1 = rng.uniform(1.0, 10.0);
    h.eta0 = rng.uniform(0.2, 1.0) / h.l1;
    h.gamma = rng.uniform(0.0, 2.0);
    h.l2 = rng.uniform(0.5, 2.0);
    h.grad_bound = rng.uniform(1.0, 20.0);
    h.f_max.resize(static_cast<std::size_t>(devices));
    for (double& f : h.f_max) f = rng.uniform(0.1, 5.0);
    BoundSummands s = BoundSummands::zeros(devices, rounds);
    for (double& v : s.phi1_sq_plus_phi2) v = rng.uniform(0.0, 3.0);
    for (double& v : s.grad_times_phi1) v = rng.uniform(0.0, 3.0);
    for (int i = 0; i < devices; ++i) {
      const double got = convergence_bound(rounds, h, s, i);
      const double expected = bound_reference(rounds, h, s, i);
      CHECK(got == doctest::Approx(expected).epsilon(1e-12));
    }
  }
}

TEST_CASE("bound decreases in T when the Phi terms vanish") {
  const HyperParams h = basic_hyper(1);
  double previous = std::numeric_limits<double>::infinity();
  for (std::int64_t t : {1, 2, 4, 16, 64, 256}) {
    const BoundSummands s = BoundSummands::zeros(1, t);
    const double bound = convergence_bound(t, h, s, 0);
    CHECK(bound < previous);
    previous = bound;
  }
}

TEST_CASE("worked horizon instance lands on 12500") {
  HyperParams h = basic_hyper(2);  // gamma = L1 = L2 = 1, eta0 = 0.01, f_max = 1
  const ClassPartition partition = ClassPartition::from_counts(2, 2, {5, 5, 5, 5});
  const std::vector<double> rhos{0.2, 0.1};
  CHECK(continuous_optimal_rounds(h, partition, rhos) ==
        doctest::Approx(12500.0).epsilon(1e-12));
  CHECK(optimal_rounds(h, partition, rhos).value() == 12500);
}

TEST_CASE("horizon scalings") {
  HyperParams h = basic_hyper(2);
  const ClassPartition partition = ClassPartition::from_counts(2, 2, {5, 5, 5, 5});
  const std::vector<double> rhos{0.2, 0.1};
  const double base = continuous_optimal_rounds(h, partition, rhos);

  HyperParams scaled = h;
  for (double& f : scaled.f_max) f *= 4.0;
  CHECK(continuous_optimal_rounds(scaled, partition, rhos) ==
        doctest::Approx(4.0 * base).epsilon(1e-12));

  const std::vector<double> doubled{0.4, 0.1};
  CHECK(continuous_optimal_rounds(h, partition, doubled) ==
        doctest::Approx(base / 2.0).epsilon(1e-12));
}

TEST_CASE("no privacy demand leaves the horizon unbounded") {
  const HyperParams h = basic_hyper(2);
  const ClassPartition partition = ClassPartition::from_counts(2, 2, {5, 5, 5, 5});
  const std::vector<double> rhos{0.0, 0.0};
  CHECK(std::isinf(continuous_optimal_rounds(h, partition, rhos)));
  CHECK_FALSE(optimal_rounds(h, partition, rhos).has_value());
  // The grid search runs off the end of the grid.
  CHECK(brute_force_rounds(h, partition, rhos, 500) == 500);
}

TEST_CASE("grid search returns t_max when the optimum lies beyond it") {
  const HyperParams h = basic_hyper(2);
  const ClassPartition partition = ClassPartition::from_counts(2, 2, {5, 5, 5, 5});
  const std::vector<double> rhos{0.2, 0.1};
  CHECK(brute_force_rounds(h, partition, rhos, 100) == 100);
}

TEST_CASE("closed form agrees with the grid search within one round") {
  const HyperParams h = basic_hyper(2);
  const ClassPartition partition = ClassPartition::from_counts(2, 2, {5, 5, 5, 5});
  const std::vector<double> rhos{0.2, 0.1};
  const std::int64_t oracle = brute_force_rounds(h, partition, rhos, 25002);
  CHECK(std::llabs(oracle - optimal_rounds(h, partition, rhos).value()) <= 1);

  Rng rng(321);
  for (int n = 0; n < 5; ++n) {
    const int devices = 2 + static_cast<int>(rng.below(5));
    const int classes = 2 + static_cast<int>(rng.below(4));
    std::vector<std::int64_t> counts(static_cast<std::size_t>(devices) * classes);
    for (auto& c : counts) c = 1 + static_cast<std::int64_t>(rng.below(15));
    const ClassPartition p = ClassPartition::from_counts(devices, classes, counts);
    HyperParams hp;
    hp.l1 = rng.uniform(1.0, 10.0);
    hp.eta0 = rng.uniform(0.2, 1.0) / hp.l1;
    hp.gamma = rng.uniform(0.2, 2.0);
    hp.l2 = rng.uniform(0.5, 2.0);
    hp.grad_bound = 5.0;
    hp.f_max.resize(static_cast<std::size_t>(devices));
    for (double& f : hp.f_max) f = rng.uniform(0.5, 5.0);
    std::vector<double> rs(static_cast<std::size_t>(devices));
    for (double& r : rs) r = std::pow(10.0, rng.uniform(-3.0, 1.0));
    const double target = std::pow(10.0, rng.uniform(0.5, 3.5));
    const double raw = continuous_optimal_rounds(hp, p, rs);
    for (double& f : hp.f_max) f *= target / raw;

    const std::int64_t closed = optimal_rounds(hp, p, rs).value();
    const std::int64_t t_max = static_cast<std::int64_t>(
        std::ceil(2.0 * continuous_optimal_rounds(hp, p, rs))) + 2;
    CHECK(std::llabs(closed - brute_force_rounds(hp, p, rs, t_max)) <= 1);
  }
}

TEST_CASE("the continuous objective is convex with minimum 2 sqrt(ab)") {
  Rng rng(11);
  for (int n = 0; n < 20; ++n) {
    const double a = rng.uniform(0.5, 100.0);
    const double b = rng.uniform(1e-4, 1.0);
    auto objective = [&](double t) { return a / std::sqrt(t) + b * std::sqrt(t); };
    const double t_star = a / b;
    const double minimum = objective(t_star);
    CHECK(minimum == doctest::Approx(2.0 * std::sqrt(a * b)).epsilon(1e-12));
    for (double t : {t_star * 0.25, t_star * 0.5, t_star * 2.0, t_star * 7.0, 1.0}) {
      CHECK(objective(t) >= minimum * (1.0 - 1e-12));
    }
  }
}

TEST_CASE("hyperparameter validation") {
  HyperParams h = basic_hyper(1);
  h.eta0 = 2.0;  // violates eta0 <= 1/L1 with L1 = 1
  const BoundSummands s = BoundSummands::zeros(1, 4);
  CHECK_THROWS_AS(convergence_bound(4, h, s, 0), std::domain_error);

  HyperParams bad = basic_hyper(1);
  bad.f_max = {-1.0};
  CHECK_THROWS_AS(convergence_bound(4, bad, s, 0), std::domain_error);
}

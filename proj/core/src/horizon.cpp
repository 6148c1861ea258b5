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

#include "otafd/horizon.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace otafd {

namespace {

// The closed-form horizon and its oracle share one (a, b) assembly so that
// a/b is exactly the continuous minimizer of a/sqrt(T) + b sqrt(T).
struct HorizonObjective {
  double a = 0.0;
  double b = 0.0;

  double value(double t) const { return a / std::sqrt(t) + b * std::sqrt(t); }
};

HorizonObjective horizon_objective(const HyperParams& hyper,
                                   const ClassPartition& partition,
                                   std::span<const double> stringencies) {
  const int devices = partition.num_devices;
  hyper.validate(devices);
  if (static_cast<int>(stringencies.size()) != devices) {
    throw std::invalid_argument("horizon: stringencies size mismatch");
  }

  int worst = 0;
  for (int i = 1; i < devices; ++i) {
    if (stringencies[static_cast<std::size_t>(i)] > stringencies[static_cast<std::size_t>(worst)]) {
      worst = i;
    }
  }
  const double max_rho = stringencies[static_cast<std::size_t>(worst)];

  double f_sum = 0.0;
  for (double f : hyper.f_max) f_sum += f;

  double share_sq = 0.0;
  for (int k = 0; k < partition.num_classes; ++k) {
    const double s = partition.share(worst, k);
    share_sq += s * s;
  }

  HorizonObjective obj;
  obj.a = 3.0 / devices * f_sum;
  obj.b = 24.0 * hyper.eta0 * hyper.eta0 * hyper.gamma * hyper.gamma *
          hyper.l2 * hyper.l2 * hyper.l1 * max_rho * share_sq;
  if (max_rho > 0.0 && !(share_sq > 0.0)) {
    throw std::domain_error("horizon: the most stringent device holds no samples");
  }
  return obj;
}

}  // namespace

void HyperParams::validate(int num_devices) const {
  if (gamma < 0.0) throw std::domain_error("HyperParams: gamma must be >= 0");
  if (!(eta0 > 0.0)) throw std::domain_error("HyperParams: eta0 must be > 0");
  if (!(l1 > 0.0) || !(l2 > 0.0) || !(grad_bound > 0.0)) {
    throw std::domain_error("HyperParams: L1, L2 and the gradient bound must be > 0");
  }
  if (eta0 > 1.0 / l1 + 1e-12) {
    throw std::domain_error("HyperParams: step-size condition eta0 <= 1/L1 violated");
  }
  if (static_cast<int>(f_max.size()) != num_devices) {
    throw std::domain_error("HyperParams: f_max must have one entry per device");
  }
  for (double f : f_max) {
    if (!(f > 0.0)) throw std::domain_error("HyperParams: f_max entries must be > 0");
  }
}

BoundSummands BoundSummands::zeros(int devices, std::int64_t rounds) {
  BoundSummands s;
  s.num_devices = devices;
  s.num_rounds = rounds;
  s.phi1_sq_plus_phi2.assign(static_cast<std::size_t>(devices) * rounds, 0.0);
  s.grad_times_phi1.assign(static_cast<std::size_t>(devices) * rounds, 0.0);
  return s;
}

double convergence_bound(std::int64_t rounds, const HyperParams& hyper,
                         const BoundSummands& summands, int device) {
  hyper.validate(summands.num_devices);
  if (rounds < 1) {
    throw std::invalid_argument("convergence_bound: rounds must be >= 1");
  }
  if (summands.num_rounds < rounds || device < 0 ||
      device >= summands.num_devices) {
    throw std::invalid_argument("convergence_bound: summands do not cover the horizon");
  }
  const double t_pow = std::pow(static_cast<double>(rounds), 1.5);
  double bound = 8.0 * hyper.gamma * hyper.l2 * hyper.grad_bound +
                 3.0 * hyper.f_max[static_cast<std::size_t>(device)] /
                     (hyper.eta0 * std::sqrt(static_cast<double>(rounds)));
  const double quad_coeff =
      6.0 * hyper.eta0 * hyper.gamma * hyper.gamma * hyper.l2 * hyper.l2 * hyper.l1;
  const double cross_coeff = 6.0 * hyper.gamma * hyper.eta0 * hyper.l2;
  for (std::int64_t s = 0; s < rounds; ++s) {
    // Summand slot s is the executed (1-indexed) round s+1.
    const double eta_t = hyper.eta0 / std::sqrt(static_cast<double>(s + 1));
    bound += quad_coeff * summands.quad(device, s) / t_pow;
    bound += cross_coeff * (hyper.l1 * eta_t + 1.0) *
             summands.cross(device, s) / (eta_t * t_pow);
  }
  return bound;
}

double continuous_optimal_rounds(const HyperParams& hyper,
                                 const ClassPartition& partition,
                                 std::span<const double> stringencies) {
  const HorizonObjective obj = horizon_objective(hyper, partition, stringencies);
  if (obj.b == 0.0) return std::numeric_limits<double>::infinity();
  return obj.a / obj.b;
}

std::optional<std::int64_t> optimal_rounds(const HyperParams& hyper,
                                           const ClassPartition& partition,
                                           std::span<const double> stringencies) {
  const double continuous = continuous_optimal_rounds(hyper, partition, stringencies);
  if (std::isinf(continuous)) return std::nullopt;
  return std::max<std::int64_t>(1, std::llround(continuous));
}

std::int64_t brute_force_rounds(const HyperParams& hyper,
                                const ClassPartition& partition,
                                std::span<const double> stringencies,
                                std::int64_t t_max) {
  if (t_max < 1) {
    throw std::invalid_argument("brute_force_rounds: t_max must be >= 1");
  }
  const HorizonObjective obj = horizon_objective(hyper, partition, stringencies);
  std::int64_t best = 1;
  double best_value = obj.value(1.0);
  for (std::int64_t t = 2; t <= t_max; ++t) {
    const double v = obj.value(static_cast<double>(t));
    if (v < best_value) {
      best_value = v;
      best = t;
    }
  }
  return best;
}

}  // namespace otafd

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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include "otafd/experiment.hpp"

namespace otafd {

namespace {

struct CheckResult {
  std::string name;
  bool pass = false;
  double measured = 0.0;
  double tolerance = 0.0;
};

struct RandomInstance {
  int devices = 0;
  int classes = 0;
  ChannelRealization channel;
  ClassPartition partition;
  std::vector<double> powers;
  std::vector<double> stringencies;
  std::int64_t rounds = 1;
};

RandomInstance random_instance(std::uint64_t seed) {
  Rng rng(seed);
  RandomInstance inst;
  inst.devices = 1 + static_cast<int>(rng.below(50));
  inst.classes = 1 + static_cast<int>(rng.below(10));

  inst.channel.noise_var = std::pow(10.0, rng.uniform(-9.0, -6.0));
  inst.channel.coeffs.resize(static_cast<std::size_t>(inst.devices));
  for (auto& h : inst.channel.coeffs) {
    const double scale = std::pow(10.0, rng.uniform(-3.0, 0.0));
    h = {scale * rng.normal(), scale * rng.normal()};
    if (std::norm(h) == 0.0) h = {scale, 0.0};
  }

  std::vector<std::int64_t> counts(
      static_cast<std::size_t>(inst.devices) * inst.classes, 0);
  for (int i = 0; i < inst.devices; ++i) {
    bool any = false;
    for (int k = 0; k < inst.classes; ++k) {
      if (rng.uniform() < 0.3) continue;  // exercise B_i^k == 0
      const std::int64_t c = 1 + static_cast<std::int64_t>(rng.below(40));
      counts[static_cast<std::size_t>(i) * inst.classes + k] = c;
      any = true;
    }
    if (!any) {
      counts[static_cast<std::size_t>(i) * inst.classes +
             static_cast<int>(rng.below(static_cast<std::uint64_t>(inst.classes)))] =
          1 + static_cast<std::int64_t>(rng.below(40));
    }
  }
  inst.partition =
      ClassPartition::from_counts(inst.devices, inst.classes, std::move(counts));

  inst.powers.resize(static_cast<std::size_t>(inst.devices));
  for (double& p : inst.powers) p = std::pow(10.0, rng.uniform(-4.0, -2.0));

  inst.stringencies.resize(static_cast<std::size_t>(inst.devices));
  for (double& r : inst.stringencies) r = std::pow(10.0, rng.uniform(-14.0, 2.0));

  inst.rounds = 1 + static_cast<std::int64_t>(
                        std::floor(std::pow(10.0, rng.uniform(0.0, 5.0))));
  return inst;
}

std::vector<LocalKnowledge> random_knowledge(const RandomInstance& inst, Rng& rng) {
  std::vector<LocalKnowledge> knowledge(static_cast<std::size_t>(inst.devices));
  for (int i = 0; i < inst.devices; ++i) {
    LocalKnowledge& lk = knowledge[static_cast<std::size_t>(i)];
    lk.num_classes = inst.classes;
    lk.q.assign(static_cast<std::size_t>(inst.classes) * inst.classes, 0.0);
    lk.present.assign(static_cast<std::size_t>(inst.classes), 0);
    for (int k = 0; k < inst.classes; ++k) {
      if (inst.partition.count(i, k) == 0) continue;
      lk.present[static_cast<std::size_t>(k)] = 1;
      const SimplexVector q = sample_simplex(inst.classes, rng);
      std::copy(q.probs.begin(), q.probs.end(),
                lk.q.begin() + static_cast<std::size_t>(k) * inst.classes);
    }
  }
  return knowledge;
}

CheckResult check_simplex_diameter(int pairs) {
  Rng rng(derive_seed(20260808, StreamTag::kTest, 1));
  double worst = 0.0;
  for (int i = 0; i < pairs; ++i) {
    const int k = 2 + static_cast<int>(rng.below(9));
    const SimplexVector a = sample_simplex(k, rng);
    const SimplexVector b = sample_simplex(k, rng);
    worst = std::max(worst, simplex_distance(a, b));
  }
  SimplexVector e1, e2;
  e1.probs = {1.0, 0.0, 0.0};
  e2.probs = {0.0, 1.0, 0.0};
  const bool vertex_exact = simplex_distance(e1, e2) == std::numbers::sqrt2;
  const double tol = std::numbers::sqrt2 + 1e-12;
  return {"simplex-diameter", worst <= tol && vertex_exact, worst, tol};
}

CheckResult check_phi1_alignment(int instances) {
  double worst = 0.0;
  for (int n = 0; n < instances; ++n) {
    const RandomInstance inst =
        random_instance(derive_seed(31, StreamTag::kTest, static_cast<std::uint64_t>(n)));
    Rng rng(derive_seed(32, StreamTag::kTest, static_cast<std::uint64_t>(n)));
    const TransceiverDesign design =
        design_round(inst.rounds, inst.channel, inst.partition, inst.powers,
                     inst.stringencies, inst.classes);
    const std::vector<LocalKnowledge> knowledge = random_knowledge(inst, rng);
    const std::vector<double> misalignment =
        phi1(design, inst.channel, inst.partition, knowledge);
    for (double m : misalignment) worst = std::max(worst, m);
  }
  return {"phi1-alignment", worst <= 1e-9, worst, 1e-9};
}

CheckResult check_dp_equality(int instances) {
  double worst = 0.0;
  bool ok = true;
  for (int n = 0; n < instances; ++n) {
    const RandomInstance inst =
        random_instance(derive_seed(33, StreamTag::kTest, static_cast<std::uint64_t>(n)));
    const TransceiverDesign design =
        design_round(inst.rounds, inst.channel, inst.partition, inst.powers,
                     inst.stringencies, inst.classes);
    const std::vector<double> margin = dp_margin(design, inst.channel, inst.rounds,
                                                 inst.classes, inst.stringencies);
    for (int k = 0; k < inst.classes; ++k) {
      const double scale = inst.channel.noise_var + std::abs(margin[static_cast<std::size_t>(k)]);
      if (design.dp_constrained(k)) {
        double rhs = 0.0;
        for (int i = 0; i < inst.devices; ++i) {
          const double d = std::abs(inst.channel.coeffs[static_cast<std::size_t>(i)]) *
                           std::abs(design.p1_at(i, k));
          rhs = std::max(rhs, 4.0 * static_cast<double>(inst.rounds) * inst.classes *
                                  d * d * inst.stringencies[static_cast<std::size_t>(i)]);
        }
        const double rel = std::abs(margin[static_cast<std::size_t>(k)]) / rhs;
        worst = std::max(worst, rel);
        if (rel > 1e-9) ok = false;
      } else {
        for (int i = 0; i < inst.devices; ++i) {
          if (design.p2_at(i, k) != 0.0) ok = false;
        }
        if (margin[static_cast<std::size_t>(k)] < -1e-9 * scale) ok = false;
      }
    }
  }
  return {"dp-equality", ok, worst, 1e-9};
}

CheckResult check_power_feasibility(int instances) {
  double worst = 0.0;
  bool ok = true;
  for (int n = 0; n < instances; ++n) {
    const RandomInstance inst =
        random_instance(derive_seed(34, StreamTag::kTest, static_cast<std::uint64_t>(n)));
    const TransceiverDesign design =
        design_round(inst.rounds, inst.channel, inst.partition, inst.powers,
                     inst.stringencies, inst.classes);
    for (int i = 0; i < inst.devices; ++i) {
      for (int k = 0; k < inst.classes; ++k) {
        const double used = design.power_used(i, k);
        const double cap = inst.powers[static_cast<std::size_t>(i)];
        worst = std::max(worst, used / cap);
        if (used > cap * (1.0 + 1e-9)) ok = false;
        if (design.branch[static_cast<std::size_t>(k)] == DesignCase::kPeakPower &&
            inst.partition.count(i, k) > 0) {
          if (std::abs(used - cap) > 1e-9 * cap) ok = false;
        }
      }
    }
  }
  return {"power-feasibility", ok, worst, 1.0 + 1e-9};
}

CheckResult check_gradient(int instances) {
  double worst = 0.0;
  for (int n = 0; n < instances; ++n) {
    Rng rng(derive_seed(35, StreamTag::kTest, static_cast<std::uint64_t>(n)));
    Architecture arch;
    arch.input_dim = 2 + static_cast<int>(rng.below(4));
    arch.num_classes = 2 + static_cast<int>(rng.below(4));
    arch.hidden_dim = (n % 2 == 0) ? 0 : 3 + static_cast<int>(rng.below(3));
    ModelParams params = init_params(arch, 0.5, rng);

    LabeledDataset data;
    data.dims = arch.input_dim;
    data.num_classes = arch.num_classes;
    const int samples = 3 + static_cast<int>(rng.below(6));
    for (int s = 0; s < samples; ++s) {
      for (int d = 0; d < arch.input_dim; ++d) data.features.push_back(rng.normal());
      data.labels.push_back(1 + static_cast<int>(rng.below(
                                    static_cast<std::uint64_t>(arch.num_classes))));
    }
    ClassTargets targets(static_cast<std::size_t>(arch.num_classes));
    for (auto& t : targets) {
      t.resize(static_cast<std::size_t>(arch.num_classes));
      for (double& v : t) v = rng.normal();  // targets may sit off the simplex
    }
    const double gamma = (n % 3 == 0) ? 0.0 : rng.uniform(0.1, 2.0);

    const std::vector<double> analytic = gradient(params, data, targets, gamma);
    const double step = 1e-5;
    for (std::size_t p = 0; p < params.theta.size(); ++p) {
      ModelParams hi = params, lo = params;
      hi.theta[p] += step;
      lo.theta[p] -= step;
      const double fd =
          (loss(hi, data, targets, gamma) - loss(lo, data, targets, gamma)) / (2 * step);
      const double rel = std::abs(fd - analytic[p]) /
                         std::max({1.0, std::abs(analytic[p]), std::abs(fd)});
      worst = std::max(worst, rel);
    }
  }
  return {"gradient-check", worst <= 1e-5, worst, 1e-5};
}

CheckResult check_horizon_oracle(int instances) {
  std::int64_t worst = 0;
  for (int n = 0; n < instances; ++n) {
    Rng rng(derive_seed(36, StreamTag::kTest, static_cast<std::uint64_t>(n)));
    const int devices = 2 + static_cast<int>(rng.below(7));
    const int classes = 2 + static_cast<int>(rng.below(5));
    std::vector<std::int64_t> counts(static_cast<std::size_t>(devices) * classes);
    for (auto& c : counts) c = 1 + static_cast<std::int64_t>(rng.below(20));
    const ClassPartition partition =
        ClassPartition::from_counts(devices, classes, std::move(counts));

    HyperParams hyper;
    hyper.l1 = rng.uniform(1.0, 20.0);
    hyper.eta0 = rng.uniform(0.2, 1.0) / hyper.l1;
    hyper.gamma = rng.uniform(0.2, 2.0);
    hyper.l2 = rng.uniform(0.5, 2.0);
    hyper.grad_bound = 10.0;
    hyper.f_max.resize(static_cast<std::size_t>(devices));
    for (double& f : hyper.f_max) f = rng.uniform(0.5, 5.0);

    std::vector<double> rhos(static_cast<std::size_t>(devices));
    for (double& r : rhos) r = std::pow(10.0, rng.uniform(-3.0, 1.0));

    // Rescale the loss caps so the continuous optimum lands on a searchable grid.
    const double target = std::pow(10.0, rng.uniform(0.5, 4.0));
    const double raw = continuous_optimal_rounds(hyper, partition, rhos);
    for (double& f : hyper.f_max) f *= target / raw;

    const std::optional<std::int64_t> closed = optimal_rounds(hyper, partition, rhos);
    const std::int64_t t_max =
        static_cast<std::int64_t>(
            std::ceil(2.0 * continuous_optimal_rounds(hyper, partition, rhos))) + 2;
    const std::int64_t oracle = brute_force_rounds(hyper, partition, rhos, t_max);
    worst = std::max<std::int64_t>(worst, std::llabs(*closed - oracle));
  }
  return {"horizon-oracle", worst <= 1, static_cast<double>(worst), 1.0};
}

CheckResult check_phi2_lambda_invariance() {
  Rng rng(derive_seed(37, StreamTag::kTest));
  const int devices = 3;
  const int classes = 2;
  ChannelRealization channel;
  channel.noise_var = 1e-12;
  for (int i = 0; i < devices; ++i) {
    channel.coeffs.push_back(sample_small_scale(rng) * 0.1);
  }
  const ClassPartition partition =
      ClassPartition::from_counts(devices, classes, {4, 6, 5, 5, 3, 7});
  const std::vector<double> powers(static_cast<std::size_t>(devices), 1e-3);
  const std::vector<double> rhos{50.0, 80.0, 20.0};
  const std::int64_t rounds = 1000;

  const TransceiverDesign design =
      design_round(rounds, channel, partition, powers, rhos, classes);
  const std::vector<double> base = phi2(design, channel, partition, classes);

  double worst = 0.0;
  for (double factor : {0.9, 1.1}) {
    TransceiverDesign perturbed = design;
    for (int k = 0; k < classes; ++k) {
      if (!design.dp_constrained(k)) continue;
      const double lambda = design.lambda[static_cast<std::size_t>(k)] * factor;
      perturbed.lambda[static_cast<std::size_t>(k)] = lambda;
      double worst_share = 0.0;
      for (int i = 0; i < devices; ++i) {
        const double s = partition.share(i, k);
        worst_share = std::max(worst_share, s * s * rhos[static_cast<std::size_t>(i)]);
      }
      // Re-solve the noise total on the equality manifold at the new lambda;
      // an even split across devices is enough for the Phi2 value.
      const double demand = 4.0 * static_cast<double>(rounds) * worst_share *
                                lambda * lambda - channel.noise_var;
      for (int i = 0; i < devices; ++i) {
        const double h_mag = std::abs(channel.coeffs[static_cast<std::size_t>(i)]);
        perturbed.p2_mag[static_cast<std::size_t>(i) * classes + k] =
            std::sqrt(demand / devices) / h_mag;
      }
    }
    const std::vector<double> shifted = phi2(perturbed, channel, partition, classes);
    for (int i = 0; i < devices; ++i) {
      const double rel = std::abs(shifted[static_cast<std::size_t>(i)] -
                                  base[static_cast<std::size_t>(i)]) /
                         base[static_cast<std::size_t>(i)];
      worst = std::max(worst, rel);
    }
  }
  return {"phi2-lambda-invariance", worst <= 1e-9, worst, 1e-9};
}

}  // namespace

int run_validate(std::ostream& out) {
  const std::vector<CheckResult> results = {
      check_simplex_diameter(100000),
      check_phi1_alignment(200),
      check_dp_equality(200),
      check_power_feasibility(200),
      check_gradient(10),
      check_horizon_oracle(10),
      check_phi2_lambda_invariance(),
  };
  int failures = 0;
  for (const CheckResult& r : results) {
    out << (r.pass ? "PASS" : "FAIL") << ' ' << r.name
        << " measured=" << r.measured << " tolerance=" << r.tolerance << '\n';
    if (!r.pass) ++failures;
  }
  return failures;
}

}  // namespace otafd

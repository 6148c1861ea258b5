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

// End-to-end acceptance suite. Each criterion prints one PASS/FAIL line with
// the measured quantity and its tolerance; the process exits nonzero if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "otafd/experiment.hpp"
#include "support/instances.hpp"

using namespace otafd;

namespace {

int g_failures = 0;

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

void report(int criterion, const std::string& name, bool pass,
            const std::string& detail, double seconds) {
  std::printf("%s criterion %2d (%s): %s [%.2fs]\n", pass ? "PASS" : "FAIL",
              criterion, name.c_str(), detail.c_str(), seconds);
  if (!pass) ++g_failures;
}

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), pattern, a, b, c);
  return buf;
}

// Shared corpus for criteria 1-3: the same 1000 random co-design instances.
struct DesignedInstance {
  testing::Instance instance;
  TransceiverDesign design;
};

std::vector<DesignedInstance> designed_corpus(int count) {
  std::vector<DesignedInstance> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int n = 0; n < count; ++n) {
    testing::InstanceOptions opt;
    opt.stringency_from_privacy = (n % 2 == 1);  // half use the reference ranges
    testing::Instance inst = testing::make_instance(
        derive_seed(0xACCE97, StreamTag::kTest, static_cast<std::uint64_t>(n)), opt);
    TransceiverDesign design =
        design_round(inst.rounds, inst.channel, inst.partition, inst.powers,
                     inst.stringencies, inst.classes);
    out.push_back({std::move(inst), std::move(design)});
  }
  return out;
}

void criterion_alignment(const std::vector<DesignedInstance>& corpus) {
  Timer timer;
  double worst_rel = 0.0;
  for (std::size_t n = 0; n < corpus.size(); ++n) {
    const testing::Instance& inst = corpus[n].instance;
    Rng rng(derive_seed(0xA11, StreamTag::kTest, n));
    const std::vector<LocalKnowledge> knowledge = testing::make_knowledge(inst, rng);
    const std::vector<double> misalignment =
        phi1(corpus[n].design, inst.channel, inst.partition, knowledge);
    for (int i = 0; i < inst.devices; ++i) {
      // Scale: the aligned signal magnitude sum_k (B_ik/B_i) sum_j s_j ||q||.
      double scale = 0.0;
      const std::int64_t total = inst.partition.device_totals[static_cast<std::size_t>(i)];
      for (int k = 0; k < inst.classes; ++k) {
        double inner = 0.0;
        for (int j = 0; j < inst.devices; ++j) {
          if (inst.partition.count(j, k) == 0) continue;
          double norm_q = 0.0;
          const auto q = knowledge[static_cast<std::size_t>(j)].vec(k);
          for (int d = 0; d < inst.classes; ++d) norm_q += q[d] * q[d];
          inner += inst.partition.share(j, k) * std::sqrt(norm_q);
        }
        scale += static_cast<double>(inst.partition.count(i, k)) / total * inner;
      }
      if (scale > 0.0) {
        worst_rel = std::max(worst_rel, misalignment[static_cast<std::size_t>(i)] / scale);
      }
    }
  }
  const bool pass = worst_rel <= 1e-9 && timer.seconds() < 10.0;
  report(1, "alignment", pass,
         fmt("max relative Phi1 = %.3e, tolerance 1e-9 over 1000 instances", worst_rel),
         timer.seconds());
}

void criterion_dp_equality(const std::vector<DesignedInstance>& corpus) {
  Timer timer;
  double worst_rel = 0.0;
  double worst_case1_margin = 0.0;
  long case1 = 0, case2 = 0;
  bool pass = true;
  for (const DesignedInstance& d : corpus) {
    const testing::Instance& inst = d.instance;
    const std::vector<double> margins = dp_margin(d.design, inst.channel, inst.rounds,
                                                  inst.classes, inst.stringencies);
    for (int k = 0; k < inst.classes; ++k) {
      if (d.design.branch[static_cast<std::size_t>(k)] == DesignCase::kInactive) continue;
      double rhs = 0.0;
      for (int i = 0; i < inst.devices; ++i) {
        const double disclosed =
            std::abs(inst.channel.coeffs[static_cast<std::size_t>(i)]) *
            std::abs(d.design.p1_at(i, k));
        rhs = std::max(rhs, 4.0 * static_cast<double>(inst.rounds) * inst.classes *
                                disclosed * disclosed *
                                inst.stringencies[static_cast<std::size_t>(i)]);
      }
      if (d.design.dp_constrained(k)) {
        ++case2;
        const double rel = std::abs(margins[static_cast<std::size_t>(k)]) / rhs;
        worst_rel = std::max(worst_rel, rel);
        if (rel > 1e-9) pass = false;
      } else {
        ++case1;
        for (int i = 0; i < inst.devices; ++i) {
          if (d.design.p2_at(i, k) != 0.0) pass = false;
        }
        const double floor = -1e-9 * std::max(rhs, inst.channel.noise_var);
        worst_case1_margin =
            std::min(worst_case1_margin, margins[static_cast<std::size_t>(k)]);
        if (margins[static_cast<std::size_t>(k)] < floor) pass = false;
      }
    }
  }
  pass = pass && case1 > 0 && case2 > 0;
  report(2, "dp-equality", pass,
         fmt("max |margin|/RHS = %.3e (tol 1e-9) over %.0f case-II and %.0f case-I classes",
             worst_rel, static_cast<double>(case2), static_cast<double>(case1)),
         timer.seconds());
}

void criterion_power(const std::vector<DesignedInstance>& corpus) {
  Timer timer;
  double worst_ratio = 0.0;
  double worst_peak_gap = 0.0;
  bool pass = true;
  for (const DesignedInstance& d : corpus) {
    const testing::Instance& inst = d.instance;
    for (int i = 0; i < inst.devices; ++i) {
      const double cap = inst.powers[static_cast<std::size_t>(i)];
      for (int k = 0; k < inst.classes; ++k) {
        const double used = d.design.power_used(i, k);
        worst_ratio = std::max(worst_ratio, used / cap);
        if (used > cap * (1.0 + 1e-9)) pass = false;
        if (d.design.branch[static_cast<std::size_t>(k)] == DesignCase::kPeakPower &&
            inst.partition.count(i, k) > 0) {
          const double gap = std::abs(used - cap) / cap;
          worst_peak_gap = std::max(worst_peak_gap, gap);
          if (gap > 1e-9) pass = false;
        }
      }
    }
  }
  report(3, "power-feasibility", pass,
         fmt("max used/cap = %.12f (tol 1+1e-9); max peak-power gap = %.3e", worst_ratio,
             worst_peak_gap),
         timer.seconds());
}

void criterion_horizon() {
  Timer timer;
  bool pass = true;
  std::int64_t worst_gap = 0;
  for (int n = 0; n < 20; ++n) {
    Rng rng(derive_seed(0x40, StreamTag::kTest, static_cast<std::uint64_t>(n)));
    const int devices = 2 + static_cast<int>(rng.below(8));
    const int classes = 2 + static_cast<int>(rng.below(6));
    std::vector<std::int64_t> counts(static_cast<std::size_t>(devices) * classes);
    for (auto& c : counts) c = 1 + static_cast<std::int64_t>(rng.below(25));
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
    const double target = std::pow(10.0, rng.uniform(0.5, 4.0));
    const double raw = continuous_optimal_rounds(hyper, partition, rhos);
    for (double& f : hyper.f_max) f *= target / raw;

    const std::int64_t closed = optimal_rounds(hyper, partition, rhos).value();
    const std::int64_t t_max = static_cast<std::int64_t>(
        std::ceil(2.0 * continuous_optimal_rounds(hyper, partition, rhos))) + 2;
    const std::int64_t oracle = brute_force_rounds(hyper, partition, rhos, t_max);
    worst_gap = std::max<std::int64_t>(worst_gap, std::llabs(closed - oracle));
    if (std::llabs(closed - oracle) > 1) pass = false;
  }

  // The worked instance: equal two-class split, max rho 0.2.
  HyperParams hyper;
  hyper.gamma = 1.0;
  hyper.eta0 = 0.01;
  hyper.l1 = 1.0;
  hyper.l2 = 1.0;
  hyper.grad_bound = 10.0;
  hyper.f_max = {1.0, 1.0};
  const ClassPartition partition = ClassPartition::from_counts(2, 2, {5, 5, 5, 5});
  const std::vector<double> rhos{0.2, 0.1};
  const std::int64_t worked = optimal_rounds(hyper, partition, rhos).value();
  if (worked != 12500) pass = false;
  pass = pass && timer.seconds() < 5.0;
  report(4, "horizon-oracle", pass,
         fmt("max |closed-oracle| = %.0f (tol 1); worked instance T* = %.0f (want 12500)",
             static_cast<double>(worst_gap), static_cast<double>(worked)),
         timer.seconds());
}

void criterion_simplex() {
  Timer timer;
  Rng rng(derive_seed(0x55, StreamTag::kTest));
  double worst = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const int k = 2 + static_cast<int>(rng.below(9));
    worst = std::max(worst,
                     simplex_distance(sample_simplex(k, rng), sample_simplex(k, rng)));
  }
  SimplexVector e1, e2;
  e1.probs = {1.0, 0.0, 0.0, 0.0, 0.0};
  e2.probs = {0.0, 1.0, 0.0, 0.0, 0.0};
  const bool vertex_exact = simplex_distance(e1, e2) == std::numbers::sqrt2;
  const bool pass = worst <= std::numbers::sqrt2 + 1e-12 && vertex_exact;
  report(5, "simplex-diameter", pass,
         fmt("max distance = %.15f (bound sqrt2+1e-12 = %.15f); vertex pair exact: %.0f",
             worst, std::numbers::sqrt2 + 1e-12, vertex_exact ? 1.0 : 0.0),
         timer.seconds());
}

void criterion_gradient() {
  Timer timer;
  double worst = 0.0;
  for (int n = 0; n < 50; ++n) {
    Rng rng(derive_seed(0x66, StreamTag::kTest, static_cast<std::uint64_t>(n)));
    Architecture arch;
    arch.num_classes = 2 + static_cast<int>(rng.below(4));
    arch.hidden_dim = (n % 2 == 0) ? 0 : 2 + static_cast<int>(rng.below(4));
    // Keep the parameter count under 100.
    const int max_in = arch.hidden_dim == 0
                           ? 100 / arch.num_classes - 1
                           : (100 - arch.num_classes * (arch.hidden_dim + 1)) /
                                     arch.hidden_dim - 1;
    arch.input_dim = 2 + static_cast<int>(rng.below(
                             static_cast<std::uint64_t>(std::max(1, max_in - 2))));
    ModelParams params = init_params(arch, 0.5, rng);
    if (params.arch.param_count() > 100) continue;

    LabeledDataset data;
    data.dims = arch.input_dim;
    data.num_classes = arch.num_classes;
    const int samples = 3 + static_cast<int>(rng.below(8));
    for (int s = 0; s < samples; ++s) {
      for (int d = 0; d < arch.input_dim; ++d) data.features.push_back(rng.normal());
      data.labels.push_back(
          1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(arch.num_classes))));
    }
    ClassTargets targets(static_cast<std::size_t>(arch.num_classes));
    for (auto& t : targets) {
      t.resize(static_cast<std::size_t>(arch.num_classes));
      for (double& v : t) v = rng.normal();
    }
    const double gamma = (n % 4 == 0) ? 0.0 : rng.uniform(0.1, 2.0);
    const std::vector<double> analytic = gradient(params, data, targets, gamma);
    const double step = 1e-5;
    for (std::size_t p = 0; p < params.theta.size(); ++p) {
      ModelParams hi = params, lo = params;
      hi.theta[p] += step;
      lo.theta[p] -= step;
      const double fd = (loss(hi, data, targets, gamma) -
                         loss(lo, data, targets, gamma)) / (2 * step);
      worst = std::max(worst, std::abs(fd - analytic[p]) /
                                  std::max({1.0, std::abs(fd), std::abs(analytic[p])}));
    }
  }
  report(6, "gradient-correctness", worst <= 1e-5,
         fmt("max relative error vs central differences = %.3e (tol 1e-5)", worst),
         timer.seconds());
}

void criterion_estimator() {
  Timer timer;
  bool pass = true;
  double worst_exact = 0.0;

  // Noise-free: the estimate equals the share-weighted average.
  for (int n = 0; n < 10; ++n) {
    testing::InstanceOptions opt;
    opt.max_devices = 8;
    opt.max_classes = 5;
    testing::Instance inst = testing::make_instance(
        derive_seed(0x77, StreamTag::kTest, static_cast<std::uint64_t>(n)), opt);
    inst.channel.noise_var = 0.0;
    std::fill(inst.stringencies.begin(), inst.stringencies.end(), 0.0);
    const TransceiverDesign design =
        design_round(inst.rounds, inst.channel, inst.partition, inst.powers,
                     inst.stringencies, inst.classes);
    Rng rng(derive_seed(0x78, StreamTag::kTest, static_cast<std::uint64_t>(n)));
    const std::vector<LocalKnowledge> knowledge = testing::make_knowledge(inst, rng);
    std::vector<std::vector<std::complex<double>>> signals;
    for (int i = 0; i < inst.devices; ++i) {
      Rng dp(derive_seed(0x79, StreamTag::kTest, static_cast<std::uint64_t>(n),
                         static_cast<std::uint64_t>(i)));
      signals.push_back(encode_signal(
          knowledge[static_cast<std::size_t>(i)],
          {design.p1.data() + static_cast<std::size_t>(i) * inst.classes,
           static_cast<std::size_t>(inst.classes)},
          {design.p2_mag.data() + static_cast<std::size_t>(i) * inst.classes,
           static_cast<std::size_t>(inst.classes)},
          dp));
    }
    Rng awgn(1);
    const ClassTargets estimate =
        estimate_knowledge(ota_aggregate(signals, inst.channel, awgn), design.lambda);
    for (int k = 0; k < inst.classes; ++k) {
      if (inst.partition.class_totals[static_cast<std::size_t>(k)] == 0) continue;
      for (int d = 0; d < inst.classes; ++d) {
        double expected = 0.0;
        for (int i = 0; i < inst.devices; ++i) {
          if (inst.partition.count(i, k) == 0) continue;
          expected += inst.partition.share(i, k) *
                      knowledge[static_cast<std::size_t>(i)].vec(k)[static_cast<std::size_t>(d)];
        }
        const double err = std::abs(
            estimate[static_cast<std::size_t>(k)][static_cast<std::size_t>(d)] - expected);
        worst_exact = std::max(worst_exact, err);
        if (err > 1e-12) pass = false;
      }
    }
  }

  // With noise: the Monte Carlo mean stays within 3 standard errors on a
  // fixed multi-device, multi-class instance deep in the noise regime.
  Rng rng(derive_seed(0x7A, StreamTag::kTest));
  testing::Instance inst;
  inst.devices = 4;
  inst.classes = 3;
  inst.channel.noise_var = 1e-9;
  for (int i = 0; i < inst.devices; ++i) {
    inst.channel.coeffs.push_back(sample_small_scale(rng) * 0.3);
  }
  inst.partition = ClassPartition::from_counts(4, 3, {3, 2, 4, 1, 5, 2, 2, 2, 3, 4, 1, 1});
  inst.powers.assign(4, 1e-3);
  inst.stringencies = {2.0, 0.5, 1.5, 3.0};
  inst.rounds = 5000;
  const TransceiverDesign design =
      design_round(inst.rounds, inst.channel, inst.partition, inst.powers,
                   inst.stringencies, inst.classes);
  const std::vector<LocalKnowledge> knowledge = testing::make_knowledge(inst, rng);
  const int draws = 10000;
  std::vector<double> mean(static_cast<std::size_t>(inst.classes) * inst.classes, 0.0);
  std::vector<double> second(mean.size(), 0.0);
  for (int it = 0; it < draws; ++it) {
    std::vector<std::vector<std::complex<double>>> signals;
    for (int i = 0; i < inst.devices; ++i) {
      Rng dp(derive_seed(0x7C, StreamTag::kTest, static_cast<std::uint64_t>(it),
                         static_cast<std::uint64_t>(i)));
      signals.push_back(encode_signal(
          knowledge[static_cast<std::size_t>(i)],
          {design.p1.data() + static_cast<std::size_t>(i) * inst.classes,
           static_cast<std::size_t>(inst.classes)},
          {design.p2_mag.data() + static_cast<std::size_t>(i) * inst.classes,
           static_cast<std::size_t>(inst.classes)},
          dp));
    }
    Rng awgn(derive_seed(0x7D, StreamTag::kTest, static_cast<std::uint64_t>(it)));
    const ClassTargets estimate =
        estimate_knowledge(ota_aggregate(signals, inst.channel, awgn), design.lambda);
    for (int k = 0; k < inst.classes; ++k) {
      for (int d = 0; d < inst.classes; ++d) {
        const double v = estimate[static_cast<std::size_t>(k)][static_cast<std::size_t>(d)];
        mean[static_cast<std::size_t>(k * inst.classes + d)] += v;
        second[static_cast<std::size_t>(k * inst.classes + d)] += v * v;
      }
    }
  }
  double worst_sigmas = 0.0;
  for (int k = 0; k < inst.classes; ++k) {
    if (inst.partition.class_totals[static_cast<std::size_t>(k)] == 0) continue;
    for (int d = 0; d < inst.classes; ++d) {
      const std::size_t idx = static_cast<std::size_t>(k * inst.classes + d);
      const double m = mean[idx] / draws;
      const double var = second[idx] / draws - m * m;
      const double se = std::sqrt(std::max(var, 1e-300) / draws);
      double expected = 0.0;
      for (int i = 0; i < inst.devices; ++i) {
        if (inst.partition.count(i, k) == 0) continue;
        expected += inst.partition.share(i, k) *
                    knowledge[static_cast<std::size_t>(i)].vec(k)[static_cast<std::size_t>(d)];
      }
      const double sigmas = std::abs(m - expected) / se;
      worst_sigmas = std::max(worst_sigmas, sigmas);
      if (sigmas > 3.0) pass = false;
    }
  }
  report(7, "estimator-fidelity", pass,
         fmt("noise-free max error = %.3e (tol 1e-12); noisy max deviation = %.2f sigma (tol 3)",
             worst_exact, worst_sigmas),
         timer.seconds());
}

void criterion_phi2_closed_form() {
  Timer timer;
  double worst_rel = 0.0;
  for (int n = 0; n < 20; ++n) {
    testing::InstanceOptions opt;
    opt.max_devices = 8;
    opt.max_classes = 4;
    opt.rho_log10_min = -2.0;
    opt.rho_log10_max = 1.0;
    const testing::Instance inst = testing::make_instance(
        derive_seed(0x88, StreamTag::kTest, static_cast<std::uint64_t>(n)), opt);
    const TransceiverDesign design =
        design_round(inst.rounds, inst.channel, inst.partition, inst.powers,
                     inst.stringencies, inst.classes);
    const std::vector<double> closed =
        phi2(design, inst.channel, inst.partition, inst.classes);

    Rng rng(derive_seed(0x89, StreamTag::kTest, static_cast<std::uint64_t>(n)));
    const int draws = 100000;
    std::vector<double> ratio(static_cast<std::size_t>(inst.classes), 0.0);
    std::vector<double> estimate(static_cast<std::size_t>(inst.devices), 0.0);
    for (int it = 0; it < draws; ++it) {
      for (int k = 0; k < inst.classes; ++k) {
        double acc = 0.0;
        for (int entry = 0; entry < inst.classes; ++entry) {
          std::complex<double> noise{0.0, 0.0};
          for (int j = 0; j < inst.devices; ++j) {
            const double p2 = design.p2_at(j, k);
            if (p2 == 0.0) continue;
            noise += inst.channel.coeffs[static_cast<std::size_t>(j)] * p2 * rng.normal();
          }
          if (inst.channel.noise_var > 0.0) {
            noise += std::sqrt(inst.channel.noise_var) * rng.normal();
          }
          acc += std::norm(noise);
        }
        ratio[static_cast<std::size_t>(k)] =
            acc / (design.lambda[static_cast<std::size_t>(k)] *
                   design.lambda[static_cast<std::size_t>(k)]);
      }
      for (int i = 0; i < inst.devices; ++i) {
        const std::int64_t total =
            inst.partition.device_totals[static_cast<std::size_t>(i)];
        double weighted = 0.0;
        for (int k = 0; k < inst.classes; ++k) {
          weighted += static_cast<double>(inst.partition.count(i, k)) / total *
                      ratio[static_cast<std::size_t>(k)];
        }
        estimate[static_cast<std::size_t>(i)] += weighted;
      }
    }
    for (int i = 0; i < inst.devices; ++i) {
      const double mc = estimate[static_cast<std::size_t>(i)] / draws;
      const double cf = closed[static_cast<std::size_t>(i)];
      if (cf == 0.0 && mc == 0.0) continue;
      worst_rel = std::max(worst_rel, std::abs(mc - cf) / cf);
    }
  }
  report(8, "phi2-closed-form", worst_rel <= 0.02,
         fmt("max |MC - closed|/closed = %.4f over 20 designs x 1e5 draws (tol 0.02)",
             worst_rel),
         timer.seconds());
}

void criterion_epsilon_sweep() {
  Timer timer;
  ExperimentConfig config = parse_config(R"json({
    "devices": 10,
    "classes": 10,
    "channel": {"carrier_hz": 915e6, "distance_m": {"min": 100, "max": 500},
                 "pathloss_exp": 3, "noise_var": 1e-8},
    "power": 0.001,
    "privacy": {"enabled": true},
    "hyper": {"gamma": 0.1, "eta0": 0.01, "l1": 100},
    "rounds": 400,
    "data": {"synthetic": {"dims": 10, "per_class": 20, "separation": 8.0,
                            "test_per_class": 10}},
    "seeds": {"master": 17, "replications": 10},
    "sweep": {"epsilon_grid": [0.001, 0.0031622776601683794, 0.01,
                                0.03162277660168379, 0.1],
               "delta": 1e-11}
  })json");
  const auto dir = std::filesystem::temp_directory_path() / "otafd_acceptance_sweep";
  std::filesystem::remove_all(dir);
  const SweepResult result = run_sweep_epsilon(config, dir);
  bool pass = true;
  std::string trend;
  for (std::size_t g = 0; g < result.points.size(); ++g) {
    trend += fmt("%.3e", result.points[g].mean_phi2);
    if (g + 1 < result.points.size()) trend += " >= ";
    if (g > 0 && result.points[g].mean_phi2 >
                     result.points[g - 1].mean_phi2 * (1.0 + 1e-12)) {
      pass = false;
    }
  }
  pass = pass && timer.seconds() < 300.0;
  std::filesystem::remove_all(dir);
  report(9, "epsilon-sweep-trend", pass, "mean Phi2 across the grid: " + trend,
         timer.seconds());
}

void criterion_end_to_end() {
  Timer timer;
  const int seeds = 10;
  double ideal_acc = 0.0;
  double noisy_acc = 0.0;
  for (int s = 0; s < seeds; ++s) {
    for (const bool privacy : {false, true}) {
      Rng data_rng(derive_seed(0xE2E, StreamTag::kDataGen,
                               static_cast<std::uint64_t>(s), 1));
      Rng test_rng(derive_seed(0xE2E, StreamTag::kDataGen,
                               static_cast<std::uint64_t>(s), 2));
      TrainingSetup setup;
      const LabeledDataset train = synth_dataset(3, 2, 30, 10.0, data_rng);
      setup.test_set = synth_dataset(3, 2, 60, 10.0, test_rng);
      PartitionSpec spec;
      spec.mode = PartitionSpec::Mode::kIid;
      spec.num_devices = 5;
      spec.seed = static_cast<std::uint64_t>(s);
      PartitionResult split = partition(train, spec);
      setup.device_data = std::move(split.device_data);
      setup.partition = std::move(split.partition);
      setup.ideal_channel = true;
      setup.noise_var = 0.0;
      setup.powers.assign(5, 1e-3);
      setup.stringencies.assign(5, 0.0);
      if (privacy) {
        for (int i = 0; i < 5; ++i) {
          const PrivacyRequirement req{
              0.001, 1e-11, setup.partition.device_totals[static_cast<std::size_t>(i)]};
          setup.stringencies[static_cast<std::size_t>(i)] = stringency(req).rho;
        }
      }
      setup.arch = {2, 0, 3};
      setup.init_scale = 0.01;
      setup.hyper.gamma = 0.1;
      setup.hyper.eta0 = 0.05;
      setup.hyper.l1 = 20.0;
      setup.hyper.l2 = 1.0;
      setup.hyper.grad_bound = 10.0;
      setup.rounds = 200;
      setup.num_classes = 3;
      const TrainingLog log =
          run_training(setup, derive_seed(0xE2E, StreamTag::kReplication,
                                          static_cast<std::uint64_t>(s)));
      double mean_acc = 0.0;
      for (double a : log.final_accuracy) mean_acc += a;
      mean_acc /= static_cast<double>(log.final_accuracy.size());
      (privacy ? noisy_acc : ideal_acc) += mean_acc / seeds;
    }
  }
  const double floor = 1.0 / 3.0 + 0.3;
  const bool pass =
      ideal_acc >= floor && noisy_acc <= ideal_acc && timer.seconds() < 120.0;
  report(10, "end-to-end-learning", pass,
         fmt("ideal accuracy = %.4f (floor %.4f); heavy-DP accuracy = %.4f (must not exceed ideal)",
             ideal_acc, floor, noisy_acc),
         timer.seconds());
}

void criterion_determinism() {
  Timer timer;
  const ExperimentConfig config = parse_config(R"json({
    "devices": 3,
    "classes": 3,
    "channel": {"noise_var": 1e-8},
    "power": 0.001,
    "privacy": {"epsilon": 0.01, "delta": 1e-10},
    "hyper": {"gamma": 0.1, "eta0": 0.05, "l1": 20},
    "rounds": 10,
    "data": {"synthetic": {"dims": 2, "per_class": 10, "separation": 8.0,
                            "test_per_class": 15}},
    "seeds": {"master": 33, "replications": 2}
  })json");
  const auto dir_a = std::filesystem::temp_directory_path() / "otafd_acc_det_a";
  const auto dir_b = std::filesystem::temp_directory_path() / "otafd_acc_det_b";
  std::filesystem::remove_all(dir_a);
  std::filesystem::remove_all(dir_b);
  const SimulateResult a = run_simulate(config, dir_a);
  const SimulateResult b = run_simulate(config, dir_b);
  bool pass = true;
  for (std::size_t r = 0; r < a.replications.size(); ++r) {
    std::ifstream fa(a.replications[r].csv_path, std::ios::binary);
    std::ifstream fb(b.replications[r].csv_path, std::ios::binary);
    const std::string ca{std::istreambuf_iterator<char>(fa),
                         std::istreambuf_iterator<char>()};
    const std::string cb{std::istreambuf_iterator<char>(fb),
                         std::istreambuf_iterator<char>()};
    if (ca.empty() || ca != cb) pass = false;
  }
  std::filesystem::remove_all(dir_a);
  std::filesystem::remove_all(dir_b);
  report(11, "determinism", pass,
         "identical config+seed reruns produce byte-identical CSV outputs",
         timer.seconds());
}

void criterion_uplink() {
  Timer timer;
  const double total = uplink_time(400, 10);
  const bool pass = std::abs(total - 0.144) <= 1e-12;
  report(12, "uplink-time", pass,
         fmt("K=10, T=400 -> %.17g s (want 0.144)", total), timer.seconds());
}

}  // namespace

int main() {
  std::printf("otafd acceptance suite\n");
  const std::vector<DesignedInstance> corpus = designed_corpus(1000);
  criterion_alignment(corpus);
  criterion_dp_equality(corpus);
  criterion_power(corpus);
  criterion_horizon();
  criterion_simplex();
  criterion_gradient();
  criterion_estimator();
  criterion_phi2_closed_form();
  criterion_epsilon_sweep();
  criterion_end_to_end();
  criterion_determinism();
  criterion_uplink();
  if (g_failures > 0) {
    std::printf("%d criterion(s) FAILED\n", g_failures);
    return 1;
  }
  std::printf("all 12 criteria passed\n");
  return 0;
}

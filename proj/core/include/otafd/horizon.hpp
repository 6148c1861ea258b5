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

#ifndef OTAFD_HORIZON_HPP_
#define OTAFD_HORIZON_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "otafd/transceiver.hpp"

namespace otafd {

// Analysis constants of the convergence bound. eta0 must respect the
// step-size condition eta0 <= 1/l1.
struct HyperParams {
  double gamma = 0.0;       // distillation weight
  double eta0 = 0.0;        // initial learning rate
  double l1 = 0.0;          // gradient smoothness constant
  double l2 = 0.0;          // model-output Lipschitz constant
  double grad_bound = 0.0;  // uniform gradient-norm bound S
  std::vector<double> f_max;  // per-device loss cap

  void validate(int num_devices) const;
};

// Per (device, round) inputs to the bound: Phi1^2 + Phi2, and the logged
// gradient norm times Phi1. Round slot s corresponds to executed round s+1.
struct BoundSummands {
  int num_devices = 0;
  std::int64_t num_rounds = 0;
  std::vector<double> phi1_sq_plus_phi2;  // device-major, M x T
  std::vector<double> grad_times_phi1;    // device-major, M x T

  double quad(int device, std::int64_t t) const {
    return phi1_sq_plus_phi2[static_cast<std::size_t>(device) * num_rounds + t];
  }
  double cross(int device, std::int64_t t) const {
    return grad_times_phi1[static_cast<std::size_t>(device) * num_rounds + t];
  }
  static BoundSummands zeros(int devices, std::int64_t rounds);
};

// Expected-gradient-norm bound for one device after T rounds:
//   8 gamma L2 S + 3 f_max / (eta0 sqrt(T))
//   + sum_t 6 eta0 gamma^2 L2^2 L1 (Phi1^2 + Phi2) / T^{3/2}
//   + sum_t 6 gamma eta0 L2 (L1 eta_t + 1) ||grad|| Phi1 / (eta_t T^{3/2}).
double convergence_bound(std::int64_t rounds, const HyperParams& hyper,
                         const BoundSummands& summands, int device);

// Continuous minimizer T^ of the noise-dominated bound a/sqrt(T) + b sqrt(T);
// +infinity when nobody demands privacy.
double continuous_optimal_rounds(const HyperParams& hyper,
                                 const ClassPartition& partition,
                                 std::span<const double> stringencies);

// Nearest-integer training horizon (clamped below at 1). Empty when no device
// demands privacy; the caller must then supply an explicit horizon.
std::optional<std::int64_t> optimal_rounds(const HyperParams& hyper,
                                           const ClassPartition& partition,
                                           std::span<const double> stringencies);

// Integer grid search over the same objective; test oracle for
// optimal_rounds. Returns t_max when the minimum lies beyond the grid.
std::int64_t brute_force_rounds(const HyperParams& hyper,
                                const ClassPartition& partition,
                                std::span<const double> stringencies,
                                std::int64_t t_max);

}  // namespace otafd

#endif  // OTAFD_HORIZON_HPP_

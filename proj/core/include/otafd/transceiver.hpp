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

#ifndef OTAFD_TRANSCEIVER_HPP_
#define OTAFD_TRANSCEIVER_HPP_

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "otafd/channel.hpp"
#include "otafd/simplex.hpp"

namespace otafd {

// Per-device per-class sample counts B_i^k with cached row/column totals.
struct ClassPartition {
  int num_devices = 0;
  int num_classes = 0;
  std::vector<std::int64_t> counts;         // device-major, num_devices x num_classes
  std::vector<std::int64_t> device_totals;  // B_i
  std::vector<std::int64_t> class_totals;   // B^k

  static ClassPartition from_counts(int devices, int classes,
                                    std::vector<std::int64_t> counts);

  std::int64_t count(int device, int cls) const {
    return counts[static_cast<std::size_t>(device) * num_classes + cls];
  }
  // B_i^k / B^k; zero for globally empty classes.
  double share(int device, int cls) const {
    const std::int64_t total = class_totals[static_cast<std::size_t>(cls)];
    return total == 0 ? 0.0 : static_cast<double>(count(device, cls)) / total;
  }
  std::int64_t total_samples() const;
};

// Which branch of the per-round optimization produced a class's design.
enum class DesignCase : std::uint8_t {
  kInactive = 0,         // B^k == 0: nothing transmitted
  kChannelNoiseOnly,     // Case I: channel noise alone covers the DP demand
  kPeakPower,            // Case II, interior lambda: all holders at peak power
  kCappedLambda,         // Case II, lambda limited by a device's power budget
};

// One round's transmit/receive configuration: knowledge gain P1 and DP-noise
// magnitude |P2| per (device, class), plus the server-side scaling lambda per
// class. Inactive classes carry lambda = 1 and all-zero powers.
struct TransceiverDesign {
  int num_devices = 0;
  int num_classes = 0;
  std::vector<std::complex<double>> p1;  // device-major
  std::vector<double> p2_mag;            // device-major
  std::vector<double> lambda;            // per class
  std::vector<DesignCase> branch;        // per class

  std::complex<double> p1_at(int device, int cls) const {
    return p1[static_cast<std::size_t>(device) * num_classes + cls];
  }
  double p2_at(int device, int cls) const {
    return p2_mag[static_cast<std::size_t>(device) * num_classes + cls];
  }
  // |P1|^2 + |P2|^2, the per-slot transmit power of one device for one class.
  double power_used(int device, int cls) const {
    const double a = std::norm(p1_at(device, cls));
    const double b = p2_at(device, cls);
    return a + b * b;
  }
  bool dp_constrained(int cls) const {
    return branch[static_cast<std::size_t>(cls)] == DesignCase::kPeakPower ||
           branch[static_cast<std::size_t>(cls)] == DesignCase::kCappedLambda;
  }
};

// Per-device local knowledge for one round: K class vectors of K entries,
// with a presence flag per class (absent where B_i^k == 0).
struct LocalKnowledge {
  int num_classes = 0;
  std::vector<double> q;             // class-major, num_classes x num_classes
  std::vector<std::uint8_t> present; // per class

  std::span<const double> vec(int cls) const {
    return {q.data() + static_cast<std::size_t>(cls) * num_classes,
            static_cast<std::size_t>(num_classes)};
  }
};

// Horizon below which the channel noise alone satisfies every device's DP
// demand (Prop.-1 case threshold). +infinity when no device requires privacy.
double threshold_rounds(const ChannelRealization& channel,
                        std::span<const double> powers, int num_classes,
                        std::span<const double> stringencies);

// Knowledge transmit gains aligning every holder's signal with its data share:
// P1 = B_i^k lambda^k conj(h_i) / (B^k sqrt(K) |h_i|^2).
std::vector<std::complex<double>> optimal_p1(const ClassPartition& partition,
                                             const ChannelRealization& channel,
                                             std::span<const double> lambda);

// The per-round optimum: aligned P1, and per class either no artificial noise
// (channel noise covers the DP demand at the max-power lambda) or the unique
// deterministic point on the DP-equality manifold described in the docs.
TransceiverDesign design_round(std::int64_t rounds,
                               const ChannelRealization& channel,
                               const ClassPartition& partition,
                               std::span<const double> powers,
                               std::span<const double> stringencies,
                               int num_classes);

// Misalignment error per device:
//   Phi1_i = sum_k (B_i^k/B_i) || sum_j (h_j P1_j^k sqrt(K)/lambda^k - B_j^k/B^k) q_j^k ||_2.
std::vector<double> phi1(const TransceiverDesign& design,
                         const ChannelRealization& channel,
                         const ClassPartition& partition,
                         std::span<const LocalKnowledge> knowledge);

// Aggregated-noise error per device, in closed form:
//   Phi2_i = sum_k (B_i^k/B_i) K (sum_j |h_j P2_j^k|^2 + sigma_n^2) / (lambda^k)^2.
std::vector<double> phi2(const TransceiverDesign& design,
                         const ChannelRealization& channel,
                         const ClassPartition& partition, int num_classes);

// Received-noise-power allocation that puts (lambda, P2) on the DP-equality
// manifold for one class; exposed so tests can re-solve at a perturbed lambda.
// `headroom` is each holder's remaining received-power budget; `noise_demand`
// is the required total received noise power beyond sigma_n^2.
std::vector<double> solve_noise_split(std::span<const double> headroom,
                                      double noise_demand);

}  // namespace otafd

#endif  // OTAFD_TRANSCEIVER_HPP_

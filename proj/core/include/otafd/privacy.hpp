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

#ifndef OTAFD_PRIVACY_HPP_
#define OTAFD_PRIVACY_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "otafd/channel.hpp"
#include "otafd/transceiver.hpp"

namespace otafd {

// One device's (epsilon, delta) demand over its dataset of B samples,
// neighboring datasets differing by a single replaced sample.
struct PrivacyRequirement {
  double epsilon = 0.0;
  double delta = 0.0;
  std::int64_t dataset_size = 0;

  void validate() const;  // throws std::domain_error on violation
};

// rho = ln(1/delta) / (B^2 eps^2): the scalar through which a device's demand
// enters the co-design. Larger rho = more stringent.
struct PrivacyStringency {
  double rho = 0.0;
};

PrivacyStringency stringency(const PrivacyRequirement& req);

// l2 sensitivity bound of the disclosed per-class signal under replace-one
// neighboring: sqrt(2K) |h P1| / B.
double sensitivity_bound(double h_mag_times_p1, int num_classes,
                         std::int64_t dataset_size);

// Per-round Gaussian noise scale meeting (eps, delta)-DP across T rounds:
// sigma = Delta sqrt(2 T ln(1/delta)) / eps.
double gaussian_sigma(double sensitivity, std::int64_t rounds,
                      const PrivacyRequirement& req);

// A device's per-class disclosure strength |h_i P1_i^k| paired with rho_i.
struct DeviceDisclosure {
  double h_p1_mag = 0.0;
  double rho = 0.0;
};

// Right-hand side of the aggregated-noise DP condition for one class:
// max_i 4 T K |h_i P1_i|^2 rho_i. The condition holds when the total received
// noise power (artificial plus channel) is at least this value.
double required_aggregate_noise(std::int64_t rounds, int num_classes,
                                std::span<const DeviceDisclosure> devices);

// Signed slack of the DP condition per class: LHS - RHS. Non-negative iff the
// class's aggregated noise satisfies every device's demand.
std::vector<double> dp_margin(const TransceiverDesign& design,
                              const ChannelRealization& channel,
                              std::int64_t rounds, int num_classes,
                              std::span<const double> stringencies);

}  // namespace otafd

#endif  // OTAFD_PRIVACY_HPP_

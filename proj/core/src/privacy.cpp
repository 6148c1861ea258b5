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

#include "otafd/privacy.hpp"

#include <cmath>
#include <stdexcept>

namespace otafd {

void PrivacyRequirement::validate() const {
  if (!(epsilon > 0.0)) {
    throw std::domain_error("PrivacyRequirement: epsilon must be > 0");
  }
  if (!(delta > 0.0) || delta > 1.0) {
    throw std::domain_error("PrivacyRequirement: delta must be in (0, 1]");
  }
  if (dataset_size < 1) {
    throw std::domain_error("PrivacyRequirement: dataset_size must be >= 1");
  }
}

PrivacyStringency stringency(const PrivacyRequirement& req) {
  req.validate();
  const double b = static_cast<double>(req.dataset_size);
  return {std::log(1.0 / req.delta) / (b * b * req.epsilon * req.epsilon)};
}

double sensitivity_bound(double h_mag_times_p1, int num_classes,
                         std::int64_t dataset_size) {
  if (num_classes < 1) {
    throw std::domain_error("sensitivity_bound: num_classes must be >= 1");
  }
  if (dataset_size < 1) {
    throw std::domain_error("sensitivity_bound: dataset_size must be >= 1");
  }
  if (h_mag_times_p1 < 0.0) {
    throw std::domain_error("sensitivity_bound: |h P1| must be >= 0");
  }
  return std::sqrt(2.0 * num_classes) * h_mag_times_p1 /
         static_cast<double>(dataset_size);
}

double gaussian_sigma(double sensitivity, std::int64_t rounds,
                      const PrivacyRequirement& req) {
  req.validate();
  if (rounds < 1) {
    throw std::domain_error("gaussian_sigma: rounds must be >= 1");
  }
  if (sensitivity < 0.0) {
    throw std::domain_error("gaussian_sigma: sensitivity must be >= 0");
  }
  return sensitivity *
         std::sqrt(2.0 * static_cast<double>(rounds) * std::log(1.0 / req.delta)) /
         req.epsilon;
}

double required_aggregate_noise(std::int64_t rounds, int num_classes,
                                std::span<const DeviceDisclosure> devices) {
  if (devices.empty()) {
    throw std::domain_error("required_aggregate_noise: empty device list");
  }
  if (rounds < 1 || num_classes < 1) {
    throw std::domain_error("required_aggregate_noise: rounds and num_classes must be >= 1");
  }
  double worst = 0.0;
  for (const DeviceDisclosure& d : devices) {
    const double demand = 4.0 * static_cast<double>(rounds) * num_classes *
                          d.h_p1_mag * d.h_p1_mag * d.rho;
    if (demand > worst) worst = demand;
  }
  return worst;
}

std::vector<double> dp_margin(const TransceiverDesign& design,
                              const ChannelRealization& channel,
                              std::int64_t rounds, int num_classes,
                              std::span<const double> stringencies) {
  const int devices = design.num_devices;
  if (channel.devices() != devices ||
      static_cast<int>(stringencies.size()) != devices ||
      design.num_classes != num_classes) {
    throw std::invalid_argument("dp_margin: dimension mismatch");
  }
  std::vector<double> margin(static_cast<std::size_t>(num_classes));
  for (int k = 0; k < num_classes; ++k) {
    double lhs = channel.noise_var;
    double rhs = 0.0;
    for (int i = 0; i < devices; ++i) {
      const double h_mag = std::abs(channel.coeffs[static_cast<std::size_t>(i)]);
      const double received_noise = h_mag * design.p2_at(i, k);
      lhs += received_noise * received_noise;
      const double disclosed = h_mag * std::abs(design.p1_at(i, k));
      const double demand = 4.0 * static_cast<double>(rounds) * num_classes *
                            disclosed * disclosed * stringencies[static_cast<std::size_t>(i)];
      if (demand > rhs) rhs = demand;
    }
    margin[static_cast<std::size_t>(k)] = lhs - rhs;
  }
  return margin;
}

}  // namespace otafd

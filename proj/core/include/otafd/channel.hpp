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

#ifndef OTAFD_CHANNEL_HPP_
#define OTAFD_CHANNEL_HPP_

#include <complex>
#include <span>
#include <vector>

#include "otafd/rng.hpp"

namespace otafd {

// Large-scale geometry of one device-to-server link.
struct DeviceGeometry {
  double distance_m = 0.0;
  double carrier_hz = 0.0;
  double pathloss_exp = 0.0;
};

// One round's block-fading snapshot: per-device complex coefficients plus the
// receiver noise variance. Coefficients are constant within the round.
struct ChannelRealization {
  std::vector<std::complex<double>> coeffs;
  double noise_var = 0.0;

  int devices() const { return static_cast<int>(coeffs.size()); }
};

// Free-space power gain (c / (4 pi f d))^PL. Strictly decreasing in both
// distance and carrier for a positive exponent.
double path_loss_gain(const DeviceGeometry& geom);

// One draw of circularly symmetric complex Gaussian CN(0,1): real and
// imaginary parts are independent N(0, 1/2), so E|g|^2 = 1.
std::complex<double> sample_small_scale(Rng& rng);

// h_i = sqrt(path_loss_gain(geom_i)) * g_i with independent small-scale draws.
// Coefficients are redrawn independently every call (no temporal correlation).
ChannelRealization realize_round(std::span<const DeviceGeometry> geoms,
                                 double noise_var, Rng& rng);

// The error-free reference: unit channels, zero receiver noise.
ChannelRealization ideal_channel(int devices, double noise_var = 0.0);

}  // namespace otafd

#endif  // OTAFD_CHANNEL_HPP_

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

#include "otafd/channel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace otafd {

namespace {
constexpr double kSpeedOfLight = 3.0e8;
}  // namespace

double path_loss_gain(const DeviceGeometry& geom) {
  if (!(geom.distance_m > 0.0)) {
    throw std::domain_error("path_loss_gain: distance_m must be > 0");
  }
  if (!(geom.carrier_hz > 0.0)) {
    throw std::domain_error("path_loss_gain: carrier_hz must be > 0");
  }
  if (geom.pathloss_exp < 0.0) {
    throw std::domain_error("path_loss_gain: pathloss_exp must be >= 0");
  }
  const double wavelength_ratio =
      kSpeedOfLight / (4.0 * std::numbers::pi * geom.carrier_hz * geom.distance_m);
  return std::pow(wavelength_ratio, geom.pathloss_exp);
}

std::complex<double> sample_small_scale(Rng& rng) {
  // Real part first, then imaginary: the draw order is part of the
  // reproducibility contract.
  const double re = rng.normal();
  const double im = rng.normal();
  return {re * std::numbers::sqrt2 / 2.0, im * std::numbers::sqrt2 / 2.0};
}

ChannelRealization realize_round(std::span<const DeviceGeometry> geoms,
                                 double noise_var, Rng& rng) {
  if (geoms.empty()) {
    throw std::domain_error("realize_round: need at least one device");
  }
  if (!(noise_var > 0.0)) {
    throw std::domain_error("realize_round: noise_var must be > 0");
  }
  ChannelRealization out;
  out.noise_var = noise_var;
  out.coeffs.reserve(geoms.size());
  for (const DeviceGeometry& geom : geoms) {
    const double amplitude = std::sqrt(path_loss_gain(geom));
    out.coeffs.push_back(amplitude * sample_small_scale(rng));
  }
  return out;
}

ChannelRealization ideal_channel(int devices, double noise_var) {
  ChannelRealization out;
  out.noise_var = noise_var;
  out.coeffs.assign(static_cast<std::size_t>(devices), {1.0, 0.0});
  return out;
}

}  // namespace otafd

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

#include "otafd/transceiver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace otafd {

ClassPartition ClassPartition::from_counts(int devices, int classes,
                                           std::vector<std::int64_t> counts) {
  if (devices < 1 || classes < 1) {
    throw std::invalid_argument("ClassPartition: need >= 1 device and class");
  }
  if (counts.size() != static_cast<std::size_t>(devices) * classes) {
    throw std::invalid_argument("ClassPartition: counts size mismatch");
  }
  ClassPartition p;
  p.num_devices = devices;
  p.num_classes = classes;
  p.counts = std::move(counts);
  p.device_totals.assign(static_cast<std::size_t>(devices), 0);
  p.class_totals.assign(static_cast<std::size_t>(classes), 0);
  for (int i = 0; i < devices; ++i) {
    for (int k = 0; k < classes; ++k) {
      const std::int64_t c = p.count(i, k);
      if (c < 0) throw std::invalid_argument("ClassPartition: negative count");
      p.device_totals[static_cast<std::size_t>(i)] += c;
      p.class_totals[static_cast<std::size_t>(k)] += c;
    }
  }
  return p;
}

std::int64_t ClassPartition::total_samples() const {
  std::int64_t total = 0;
  for (std::int64_t b : device_totals) total += b;
  return total;
}

double threshold_rounds(const ChannelRealization& channel,
                        std::span<const double> powers, int num_classes,
                        std::span<const double> stringencies) {
  const int devices = channel.devices();
  if (devices < 1 || static_cast<int>(powers.size()) != devices ||
      static_cast<int>(stringencies.size()) != devices) {
    throw std::invalid_argument("threshold_rounds: dimension mismatch");
  }
  if (num_classes < 1) {
    throw std::invalid_argument("threshold_rounds: num_classes must be >= 1");
  }
  double min_received = std::numeric_limits<double>::infinity();
  double max_rho = 0.0;
  for (int i = 0; i < devices; ++i) {
    const double gain = std::norm(channel.coeffs[static_cast<std::size_t>(i)]);
    const double power = powers[static_cast<std::size_t>(i)];
    if (!(gain > 0.0)) {
      throw std::domain_error("threshold_rounds: zero channel coefficient");
    }
    if (!(power > 0.0)) {
      throw std::domain_error("threshold_rounds: non-positive transmit power");
    }
    min_received = std::min(min_received, gain * power);
    max_rho = std::max(max_rho, stringencies[static_cast<std::size_t>(i)]);
  }
  if (max_rho == 0.0) {
    // No device demands privacy: the channel-noise-only regime never ends.
    return std::numeric_limits<double>::infinity();
  }
  return channel.noise_var / (4.0 * num_classes * min_received * max_rho);
}

std::vector<std::complex<double>> optimal_p1(const ClassPartition& partition,
                                             const ChannelRealization& channel,
                                             std::span<const double> lambda) {
  const int devices = partition.num_devices;
  const int classes = partition.num_classes;
  if (channel.devices() != devices ||
      static_cast<int>(lambda.size()) != classes) {
    throw std::invalid_argument("optimal_p1: dimension mismatch");
  }
  const double sqrt_k = std::sqrt(static_cast<double>(classes));
  std::vector<std::complex<double>> p1(
      static_cast<std::size_t>(devices) * classes, {0.0, 0.0});
  for (int i = 0; i < devices; ++i) {
    const std::complex<double> h = channel.coeffs[static_cast<std::size_t>(i)];
    const double gain = std::norm(h);
    for (int k = 0; k < classes; ++k) {
      if (partition.count(i, k) == 0 || partition.class_totals[static_cast<std::size_t>(k)] == 0) {
        continue;
      }
      if (!(gain > 0.0)) {
        throw std::domain_error("optimal_p1: zero channel for a device holding samples");
      }
      const double scale = partition.share(i, k) *
                           lambda[static_cast<std::size_t>(k)] / (sqrt_k * gain);
      p1[static_cast<std::size_t>(i) * classes + k] = scale * std::conj(h);
    }
  }
  return p1;
}

std::vector<double> solve_noise_split(std::span<const double> headroom,
                                      double noise_demand) {
  std::vector<double> alloc(headroom.size(), 0.0);
  if (noise_demand <= 0.0) return alloc;
  double total_headroom = 0.0;
  for (double h : headroom) total_headroom += std::max(h, 0.0);
  if (!(total_headroom > 0.0)) {
    throw std::domain_error("solve_noise_split: no headroom for required noise");
  }
  // The demand never exceeds the total headroom in exact arithmetic; the
  // clamp absorbs cancellation error in the demand when sigma_n^2 nearly
  // covers the requirement, keeping every allocation within budget.
  const double scale = std::min(noise_demand / total_headroom, 1.0);
  for (std::size_t j = 0; j < headroom.size(); ++j) {
    alloc[j] = std::max(headroom[j], 0.0) * scale;
  }
  return alloc;
}

TransceiverDesign design_round(std::int64_t rounds,
                               const ChannelRealization& channel,
                               const ClassPartition& partition,
                               std::span<const double> powers,
                               std::span<const double> stringencies,
                               int num_classes) {
  const int devices = partition.num_devices;
  const int classes = partition.num_classes;
  if (rounds < 1) {
    throw std::invalid_argument("design_round: rounds must be >= 1");
  }
  if (classes != num_classes) {
    throw std::invalid_argument("design_round: num_classes disagrees with partition");
  }
  if (channel.devices() != devices ||
      static_cast<int>(powers.size()) != devices ||
      static_cast<int>(stringencies.size()) != devices) {
    throw std::invalid_argument("design_round: dimension mismatch");
  }

  TransceiverDesign design;
  design.num_devices = devices;
  design.num_classes = classes;
  design.p2_mag.assign(static_cast<std::size_t>(devices) * classes, 0.0);
  design.lambda.assign(static_cast<std::size_t>(classes), 1.0);
  design.branch.assign(static_cast<std::size_t>(classes), DesignCase::kInactive);

  std::vector<int> holders;
  std::vector<double> budget;    // x_j = |h_j|^2 P_j, received power budget
  std::vector<double> weight;    // c_j = (B_j^k / (B^k sqrt(K)))^2
  std::vector<double> headroom;

  for (int k = 0; k < classes; ++k) {
    if (partition.class_totals[static_cast<std::size_t>(k)] == 0) continue;

    holders.clear();
    budget.clear();
    weight.clear();
    double lambda_max_sq = std::numeric_limits<double>::infinity();
    double worst_demand = 0.0;  // max_i (B_i^k/B^k)^2 rho_i
    double sum_budget = 0.0;
    double sum_weight = 0.0;
    for (int j = 0; j < devices; ++j) {
      const double share = partition.share(j, k);
      worst_demand = std::max(worst_demand,
                              share * share * stringencies[static_cast<std::size_t>(j)]);
      if (partition.count(j, k) == 0) continue;
      const double gain = std::norm(channel.coeffs[static_cast<std::size_t>(j)]);
      const double power = powers[static_cast<std::size_t>(j)];
      if (!(gain > 0.0)) {
        throw std::domain_error("design_round: zero channel for a device holding samples");
      }
      if (!(power > 0.0)) {
        throw std::domain_error("design_round: non-positive transmit power");
      }
      const double x = gain * power;
      const double c = share * share / classes;
      holders.push_back(j);
      budget.push_back(x);
      weight.push_back(c);
      sum_budget += x;
      sum_weight += c;
      lambda_max_sq = std::min(lambda_max_sq, x / c);
    }

    const double dp_coeff = 4.0 * static_cast<double>(rounds) * worst_demand;

    // Case split: does the channel noise alone satisfy the DP condition at
    // the max-power lambda? The boundary belongs to the noise-only case.
    if (dp_coeff * lambda_max_sq <= channel.noise_var) {
      design.lambda[static_cast<std::size_t>(k)] = std::sqrt(lambda_max_sq);
      design.branch[static_cast<std::size_t>(k)] = DesignCase::kChannelNoiseOnly;
      continue;
    }

    // DP-equality manifold. The interior lambda spends every holder's full
    // budget; the cap keeps each holder's knowledge signal affordable.
    const double interior_sq = (sum_budget + channel.noise_var) / (dp_coeff + sum_weight);
    const bool capped = interior_sq > lambda_max_sq;
    const double lambda_sq = capped ? lambda_max_sq : interior_sq;
    design.lambda[static_cast<std::size_t>(k)] = std::sqrt(lambda_sq);
    design.branch[static_cast<std::size_t>(k)] =
        capped ? DesignCase::kCappedLambda : DesignCase::kPeakPower;

    const double noise_demand = dp_coeff * lambda_sq - channel.noise_var;
    headroom.assign(holders.size(), 0.0);
    for (std::size_t j = 0; j < holders.size(); ++j) {
      headroom[j] = budget[j] - weight[j] * lambda_sq;
    }
    const std::vector<double> alloc = solve_noise_split(headroom, noise_demand);
    for (std::size_t j = 0; j < holders.size(); ++j) {
      const double h_mag =
          std::abs(channel.coeffs[static_cast<std::size_t>(holders[j])]);
      design.p2_mag[static_cast<std::size_t>(holders[j]) * classes + k] =
          std::sqrt(alloc[j]) / h_mag;
    }
  }

  design.p1 = optimal_p1(partition, channel, design.lambda);
  return design;
}

std::vector<double> phi1(const TransceiverDesign& design,
                         const ChannelRealization& channel,
                         const ClassPartition& partition,
                         std::span<const LocalKnowledge> knowledge) {
  const int devices = partition.num_devices;
  const int classes = partition.num_classes;
  if (design.num_devices != devices || design.num_classes != classes ||
      channel.devices() != devices ||
      static_cast<int>(knowledge.size()) != devices) {
    throw std::invalid_argument("phi1: dimension mismatch");
  }
  const double sqrt_k = std::sqrt(static_cast<double>(classes));

  // The misaligned aggregate per class is device-independent; the per-device
  // value only reweights class norms by B_i^k / B_i.
  std::vector<double> class_norm(static_cast<std::size_t>(classes), 0.0);
  std::vector<std::complex<double>> residual(static_cast<std::size_t>(classes));
  for (int k = 0; k < classes; ++k) {
    std::fill(residual.begin(), residual.end(), std::complex<double>{0.0, 0.0});
    for (int j = 0; j < devices; ++j) {
      const std::complex<double> gain_ratio =
          channel.coeffs[static_cast<std::size_t>(j)] * design.p1_at(j, k) *
          sqrt_k / design.lambda[static_cast<std::size_t>(k)];
      const std::complex<double> coeff = gain_ratio - partition.share(j, k);
      if (coeff == std::complex<double>{0.0, 0.0}) continue;
      if (!knowledge[static_cast<std::size_t>(j)].present[static_cast<std::size_t>(k)]) {
        continue;  // nothing disclosed, nothing misaligned
      }
      const std::span<const double> q = knowledge[static_cast<std::size_t>(j)].vec(k);
      for (int d = 0; d < classes; ++d) {
        residual[static_cast<std::size_t>(d)] += coeff * q[static_cast<std::size_t>(d)];
      }
    }
    double sq = 0.0;
    for (int d = 0; d < classes; ++d) sq += std::norm(residual[static_cast<std::size_t>(d)]);
    class_norm[static_cast<std::size_t>(k)] = std::sqrt(sq);
  }

  std::vector<double> out(static_cast<std::size_t>(devices), 0.0);
  for (int i = 0; i < devices; ++i) {
    const std::int64_t total = partition.device_totals[static_cast<std::size_t>(i)];
    if (total == 0) continue;
    double acc = 0.0;
    for (int k = 0; k < classes; ++k) {
      acc += static_cast<double>(partition.count(i, k)) / total *
             class_norm[static_cast<std::size_t>(k)];
    }
    out[static_cast<std::size_t>(i)] = acc;
  }
  return out;
}

std::vector<double> phi2(const TransceiverDesign& design,
                         const ChannelRealization& channel,
                         const ClassPartition& partition, int num_classes) {
  const int devices = partition.num_devices;
  const int classes = partition.num_classes;
  if (design.num_devices != devices || design.num_classes != classes ||
      channel.devices() != devices || classes != num_classes) {
    throw std::invalid_argument("phi2: dimension mismatch");
  }
  std::vector<double> class_ratio(static_cast<std::size_t>(classes), 0.0);
  for (int k = 0; k < classes; ++k) {
    const double lambda = design.lambda[static_cast<std::size_t>(k)];
    if (!(lambda > 0.0)) {
      throw std::domain_error("phi2: lambda must be positive");
    }
    double received_noise = channel.noise_var;
    for (int j = 0; j < devices; ++j) {
      const double r = std::abs(channel.coeffs[static_cast<std::size_t>(j)]) *
                       design.p2_at(j, k);
      received_noise += r * r;
    }
    class_ratio[static_cast<std::size_t>(k)] =
        classes * received_noise / (lambda * lambda);
  }
  std::vector<double> out(static_cast<std::size_t>(devices), 0.0);
  for (int i = 0; i < devices; ++i) {
    const std::int64_t total = partition.device_totals[static_cast<std::size_t>(i)];
    if (total == 0) continue;
    double acc = 0.0;
    for (int k = 0; k < classes; ++k) {
      acc += static_cast<double>(partition.count(i, k)) / total *
             class_ratio[static_cast<std::size_t>(k)];
    }
    out[static_cast<std::size_t>(i)] = acc;
  }
  return out;
}

}  // namespace otafd

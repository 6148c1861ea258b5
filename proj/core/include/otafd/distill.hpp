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

#ifndef OTAFD_DISTILL_HPP_
#define OTAFD_DISTILL_HPP_

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "otafd/channel.hpp"
#include "otafd/horizon.hpp"
#include "otafd/learner.hpp"
#include "otafd/privacy.hpp"
#include "otafd/transceiver.hpp"

namespace otafd {

// Everything one round of training needs to observe.
struct RoundRecord {
  std::int64_t round = 0;
  std::vector<double> phi1;        // per device
  std::vector<double> phi2;        // per device
  std::vector<double> train_loss;  // per device, against the received targets
  std::vector<double> device_accuracy;
  double test_accuracy = 0.0;      // mean of per-device accuracies
  std::vector<double> dp_margin;   // per class
  std::vector<double> power_used;  // device-major, M x K
  ClassTargets estimator_output;   // per class, K entries each
};

struct TrainingLog {
  std::vector<RoundRecord> records;
  std::string config_digest;
  double wall_seconds = 0.0;
  std::int64_t rounds = 0;
  bool auto_horizon = false;
  std::vector<double> final_accuracy;  // per device
};

// Fully resolved inputs for one training run.
struct TrainingSetup {
  std::vector<LabeledDataset> device_data;
  ClassPartition partition;
  LabeledDataset test_set;

  std::vector<DeviceGeometry> geometry;  // ignored when ideal_channel
  bool ideal_channel = false;            // unit coefficients, no fading
  double noise_var = 0.0;

  std::vector<double> powers;        // peak P_i per device
  std::vector<double> stringencies;  // rho_i; zero disables the DP constraint

  Architecture arch;
  double init_scale = 0.01;
  HyperParams hyper;  // f_max may be empty: measured from the initial loss
  std::int64_t rounds = 0;  // 0 = choose via optimal_rounds
  int num_classes = 0;
  double slot_seconds = 3.6e-6;
  std::string config_digest;

  void validate() const;
};

struct TrainingState {
  std::vector<ModelParams> models;
};

// Per-class mean soft prediction over the device's samples of that class;
// classes the device holds no samples of are marked absent.
LocalKnowledge local_knowledge(const ModelParams& params,
                               const LabeledDataset& dataset, int num_classes);

// One device's uplink payload: per class, P1 sqrt(K) q + P2 m with m i.i.d.
// standard real Gaussian entries. Absent classes transmit zeros.
std::vector<std::complex<double>> encode_signal(const LocalKnowledge& knowledge,
                                                std::span<const std::complex<double>> p1_row,
                                                std::span<const double> p2_row,
                                                Rng& rng);

// The multiple-access superposition y[d] = sum_i h_i x_i[d] + n[d] with real
// AWGN of variance noise_var.
std::vector<std::complex<double>> ota_aggregate(
    std::span<const std::vector<std::complex<double>>> signals,
    const ChannelRealization& channel, Rng& rng);

// Per-class linear estimate: slice k, divide by lambda^k, take the real part.
ClassTargets estimate_knowledge(std::span<const std::complex<double>> received,
                                std::span<const double> lambda);

// Executes round t (1-indexed) of a horizon of `rounds`: fading draw,
// transceiver design, knowledge upload, aggregation, broadcast, local step.
RoundRecord run_round(TrainingState& state, const TrainingSetup& setup,
                      std::int64_t t, std::int64_t rounds, std::uint64_t master_seed);

// Hyperparameters with f_max populated: empty f_max is measured as each
// device's loss at its initial parameters, the distillation targets standing
// on the device's own initial knowledge.
HyperParams resolve_f_max(const TrainingSetup& setup, std::uint64_t master_seed);

// Full run; a pure function of (setup, master_seed) apart from wall_seconds.
TrainingLog run_training(const TrainingSetup& setup, std::uint64_t master_seed);

}  // namespace otafd

#endif  // OTAFD_DISTILL_HPP_

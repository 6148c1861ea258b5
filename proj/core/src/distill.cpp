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

#include "otafd/distill.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace otafd {

void TrainingSetup::validate() const {
  const int devices = partition.num_devices;
  if (devices < 1 || static_cast<int>(device_data.size()) != devices) {
    throw std::invalid_argument("TrainingSetup: device data does not match partition");
  }
  if (num_classes != partition.num_classes) {
    throw std::invalid_argument("TrainingSetup: num_classes does not match partition");
  }
  if (static_cast<int>(powers.size()) != devices ||
      static_cast<int>(stringencies.size()) != devices) {
    throw std::invalid_argument("TrainingSetup: powers/stringencies size mismatch");
  }
  if (!ideal_channel && static_cast<int>(geometry.size()) != devices) {
    throw std::invalid_argument("TrainingSetup: geometry size mismatch");
  }
  if (noise_var < 0.0) {
    throw std::invalid_argument("TrainingSetup: noise_var must be >= 0");
  }
  if (rounds < 0) {
    throw std::invalid_argument("TrainingSetup: rounds must be >= 0 (0 = auto)");
  }
  if (!(slot_seconds > 0.0)) {
    throw std::invalid_argument("TrainingSetup: slot_seconds must be > 0");
  }
  for (int i = 0; i < devices; ++i) {
    if (device_data[static_cast<std::size_t>(i)].size() !=
        partition.device_totals[static_cast<std::size_t>(i)]) {
      throw std::invalid_argument("TrainingSetup: partition counts disagree with data");
    }
  }
}

LocalKnowledge local_knowledge(const ModelParams& params,
                               const LabeledDataset& dataset, int num_classes) {
  LocalKnowledge lk;
  lk.num_classes = num_classes;
  lk.q.assign(static_cast<std::size_t>(num_classes) * num_classes, 0.0);
  lk.present.assign(static_cast<std::size_t>(num_classes), 0);
  std::vector<std::int64_t> counts(static_cast<std::size_t>(num_classes), 0);
  for (std::int64_t b = 0; b < dataset.size(); ++b) {
    const int cls = dataset.labels[static_cast<std::size_t>(b)] - 1;
    const SimplexVector pred = forward(params, dataset.row(b));
    double* row = lk.q.data() + static_cast<std::size_t>(cls) * num_classes;
    for (int d = 0; d < num_classes; ++d) row[d] += pred[d];
    ++counts[static_cast<std::size_t>(cls)];
  }
  for (int k = 0; k < num_classes; ++k) {
    if (counts[static_cast<std::size_t>(k)] == 0) continue;
    lk.present[static_cast<std::size_t>(k)] = 1;
    double* row = lk.q.data() + static_cast<std::size_t>(k) * num_classes;
    for (int d = 0; d < num_classes; ++d) {
      row[d] /= static_cast<double>(counts[static_cast<std::size_t>(k)]);
    }
  }
  return lk;
}

std::vector<std::complex<double>> encode_signal(const LocalKnowledge& knowledge,
                                                std::span<const std::complex<double>> p1_row,
                                                std::span<const double> p2_row,
                                                Rng& rng) {
  const int classes = knowledge.num_classes;
  if (static_cast<int>(p1_row.size()) != classes ||
      static_cast<int>(p2_row.size()) != classes) {
    throw std::invalid_argument("encode_signal: design row size mismatch");
  }
  const double sqrt_k = std::sqrt(static_cast<double>(classes));
  std::vector<std::complex<double>> signal(
      static_cast<std::size_t>(classes) * classes, {0.0, 0.0});
  for (int k = 0; k < classes; ++k) {
    if (!knowledge.present[static_cast<std::size_t>(k)]) continue;
    const std::complex<double> gain = p1_row[static_cast<std::size_t>(k)] * sqrt_k;
    const double noise_mag = p2_row[static_cast<std::size_t>(k)];
    const std::span<const double> q = knowledge.vec(k);
    for (int d = 0; d < classes; ++d) {
      std::complex<double> entry = gain * q[static_cast<std::size_t>(d)];
      if (noise_mag != 0.0) entry += noise_mag * rng.normal();
      signal[static_cast<std::size_t>(k) * classes + d] = entry;
    }
  }
  return signal;
}

std::vector<std::complex<double>> ota_aggregate(
    std::span<const std::vector<std::complex<double>>> signals,
    const ChannelRealization& channel, Rng& rng) {
  if (static_cast<int>(signals.size()) != channel.devices()) {
    throw std::invalid_argument("ota_aggregate: signal/channel device mismatch");
  }
  if (signals.empty()) {
    throw std::invalid_argument("ota_aggregate: no signals");
  }
  const std::size_t len = signals[0].size();
  for (const auto& s : signals) {
    if (s.size() != len) {
      throw std::invalid_argument("ota_aggregate: signal length mismatch");
    }
  }
  std::vector<std::complex<double>> received(len, {0.0, 0.0});
  for (std::size_t i = 0; i < signals.size(); ++i) {
    const std::complex<double> h = channel.coeffs[i];
    for (std::size_t d = 0; d < len; ++d) {
      received[d] += h * signals[i][d];
    }
  }
  if (channel.noise_var > 0.0) {
    const double sigma = std::sqrt(channel.noise_var);
    for (std::size_t d = 0; d < len; ++d) {
      received[d] += sigma * rng.normal();
    }
  }
  return received;
}

ClassTargets estimate_knowledge(std::span<const std::complex<double>> received,
                                std::span<const double> lambda) {
  const int classes = static_cast<int>(lambda.size());
  if (received.size() != static_cast<std::size_t>(classes) * classes) {
    throw std::invalid_argument("estimate_knowledge: received length must be K^2");
  }
  ClassTargets targets(static_cast<std::size_t>(classes));
  for (int k = 0; k < classes; ++k) {
    const double scale = lambda[static_cast<std::size_t>(k)];
    if (!(scale > 0.0)) {
      throw std::domain_error("estimate_knowledge: lambda must be positive");
    }
    std::vector<double>& t = targets[static_cast<std::size_t>(k)];
    t.resize(static_cast<std::size_t>(classes));
    for (int d = 0; d < classes; ++d) {
      t[static_cast<std::size_t>(d)] =
          received[static_cast<std::size_t>(k) * classes + d].real() / scale;
    }
  }
  return targets;
}

RoundRecord run_round(TrainingState& state, const TrainingSetup& setup,
                      std::int64_t t, std::int64_t rounds, std::uint64_t master_seed) {
  const int devices = setup.partition.num_devices;
  const int classes = setup.num_classes;
  const auto ut = static_cast<std::uint64_t>(t);

  // Fading first (perfect CSI at the server), then the design for this round.
  Rng fading_rng(derive_seed(master_seed, StreamTag::kFading, ut));
  const ChannelRealization channel =
      setup.ideal_channel
          ? ideal_channel(devices, setup.noise_var)
          : realize_round(setup.geometry, setup.noise_var, fading_rng);
  const TransceiverDesign design =
      design_round(rounds, channel, setup.partition, setup.powers,
                   setup.stringencies, classes);

  std::vector<LocalKnowledge> knowledge;
  knowledge.reserve(static_cast<std::size_t>(devices));
  std::vector<std::vector<std::complex<double>>> signals;
  signals.reserve(static_cast<std::size_t>(devices));
  for (int i = 0; i < devices; ++i) {
    knowledge.push_back(local_knowledge(state.models[static_cast<std::size_t>(i)],
                                        setup.device_data[static_cast<std::size_t>(i)],
                                        classes));
    Rng dp_rng(derive_seed(master_seed, StreamTag::kDpNoise, ut,
                           static_cast<std::uint64_t>(i)));
    std::span<const std::complex<double>> p1_row{
        design.p1.data() + static_cast<std::size_t>(i) * classes,
        static_cast<std::size_t>(classes)};
    std::span<const double> p2_row{
        design.p2_mag.data() + static_cast<std::size_t>(i) * classes,
        static_cast<std::size_t>(classes)};
    signals.push_back(encode_signal(knowledge.back(), p1_row, p2_row, dp_rng));
  }

  Rng awgn_rng(derive_seed(master_seed, StreamTag::kChannelNoise, ut));
  const std::vector<std::complex<double>> received =
      ota_aggregate(signals, channel, awgn_rng);
  ClassTargets targets = estimate_knowledge(received, design.lambda);
  for (int k = 0; k < classes; ++k) {
    if (setup.partition.class_totals[static_cast<std::size_t>(k)] == 0) {
      // Nobody holds this class; its slot carries noise only and its target
      // is never consumed. Pin it to the uniform vector.
      targets[static_cast<std::size_t>(k)] = uniform_simplex(classes).probs;
    }
  }

  RoundRecord record;
  record.round = t;
  record.phi1 = phi1(design, channel, setup.partition, knowledge);
  record.phi2 = phi2(design, channel, setup.partition, classes);
  record.dp_margin =
      dp_margin(design, channel, rounds, classes, setup.stringencies);
  record.estimator_output = targets;
  record.power_used.resize(static_cast<std::size_t>(devices) * classes);
  for (int i = 0; i < devices; ++i) {
    for (int k = 0; k < classes; ++k) {
      record.power_used[static_cast<std::size_t>(i) * classes + k] =
          design.power_used(i, k);
    }
  }

  record.train_loss.resize(static_cast<std::size_t>(devices));
  record.device_accuracy.resize(static_cast<std::size_t>(devices));
  double accuracy_sum = 0.0;
  for (int i = 0; i < devices; ++i) {
    ModelParams& model = state.models[static_cast<std::size_t>(i)];
    const LabeledDataset& local = setup.device_data[static_cast<std::size_t>(i)];
    record.train_loss[static_cast<std::size_t>(i)] =
        loss(model, local, targets, setup.hyper.gamma);
    const std::vector<double> grad =
        gradient(model, local, targets, setup.hyper.gamma);
    model = sgd_step(model, grad, t, setup.hyper.eta0);
    const double acc = evaluate(model, setup.test_set);
    record.device_accuracy[static_cast<std::size_t>(i)] = acc;
    accuracy_sum += acc;
  }
  record.test_accuracy = accuracy_sum / devices;
  return record;
}

HyperParams resolve_f_max(const TrainingSetup& setup, std::uint64_t master_seed) {
  HyperParams hyper = setup.hyper;
  if (!hyper.f_max.empty()) return hyper;
  const int devices = setup.partition.num_devices;
  const int classes = setup.num_classes;
  hyper.f_max.resize(static_cast<std::size_t>(devices));
  for (int i = 0; i < devices; ++i) {
    Rng init_rng(derive_seed(master_seed, StreamTag::kModelInit,
                             static_cast<std::uint64_t>(i)));
    const ModelParams model = init_params(setup.arch, setup.init_scale, init_rng);
    const LabeledDataset& local = setup.device_data[static_cast<std::size_t>(i)];
    // The global average does not exist before round 1; the device's own
    // initial knowledge stands in for it.
    const LocalKnowledge lk = local_knowledge(model, local, classes);
    ClassTargets own(static_cast<std::size_t>(classes));
    for (int k = 0; k < classes; ++k) {
      const std::span<const double> q = lk.vec(k);
      own[static_cast<std::size_t>(k)] =
          lk.present[static_cast<std::size_t>(k)]
              ? std::vector<double>(q.begin(), q.end())
              : uniform_simplex(classes).probs;
    }
    hyper.f_max[static_cast<std::size_t>(i)] = loss(model, local, own, setup.hyper.gamma);
  }
  return hyper;
}

TrainingLog run_training(const TrainingSetup& setup, std::uint64_t master_seed) {
  setup.validate();
  const auto start = std::chrono::steady_clock::now();
  const int devices = setup.partition.num_devices;

  TrainingState state;
  state.models.reserve(static_cast<std::size_t>(devices));
  for (int i = 0; i < devices; ++i) {
    Rng init_rng(derive_seed(master_seed, StreamTag::kModelInit,
                             static_cast<std::uint64_t>(i)));
    state.models.push_back(init_params(setup.arch, setup.init_scale, init_rng));
  }

  TrainingSetup resolved = setup;
  resolved.hyper = resolve_f_max(setup, master_seed);

  TrainingLog log;
  log.config_digest = setup.config_digest;
  log.auto_horizon = setup.rounds == 0;
  if (log.auto_horizon) {
    const std::optional<std::int64_t> chosen =
        optimal_rounds(resolved.hyper, setup.partition, setup.stringencies);
    if (!chosen) {
      throw std::domain_error(
          "run_training: no privacy demand, horizon unbounded; supply rounds explicitly");
    }
    log.rounds = *chosen;
  } else {
    log.rounds = setup.rounds;
  }

  log.records.reserve(static_cast<std::size_t>(log.rounds));
  for (std::int64_t t = 1; t <= log.rounds; ++t) {
    log.records.push_back(run_round(state, resolved, t, log.rounds, master_seed));
  }
  log.final_accuracy.resize(static_cast<std::size_t>(devices));
  for (int i = 0; i < devices; ++i) {
    log.final_accuracy[static_cast<std::size_t>(i)] =
        log.records.empty()
            ? evaluate(state.models[static_cast<std::size_t>(i)], setup.test_set)
            : log.records.back().device_accuracy[static_cast<std::size_t>(i)];
  }
  log.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return log;
}

}  // namespace otafd

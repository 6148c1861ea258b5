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

#ifndef OTAFD_EXPERIMENT_HPP_
#define OTAFD_EXPERIMENT_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "otafd/distill.hpp"

namespace otafd {

// Configuration problems carry the offending field path; the CLI maps this
// to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// A per-device quantity given either as an inclusive uniform range (drawn
// once from the master seed) or as explicit values.
struct RangeOrValues {
  bool is_range = true;
  double min = 0.0;
  double max = 0.0;
  std::vector<double> values;  // broadcast when a single entry

  std::vector<double> resolve(int devices, Rng& rng) const;
};

struct ExperimentConfig {
  int devices = 0;
  int classes = 0;

  // channel
  double carrier_hz = 915e6;
  double pathloss_exp = 3.0;
  double noise_var = 1e-8;
  bool ideal_channel = false;
  RangeOrValues distance_m{true, 100.0, 500.0, {}};

  std::vector<double> powers;  // per device

  // privacy
  bool privacy_enabled = true;
  RangeOrValues epsilon{true, 0.001, 0.1, {}};
  RangeOrValues delta{true, 1e-11, 1e-9, {}};

  // hyperparameters
  double gamma = 0.1;
  double eta0 = 0.01;
  double l1 = 10.0;
  double l2 = 1.0;
  double grad_bound = 10.0;
  std::vector<double> f_max;  // empty = measure the initial loss

  std::int64_t rounds = 0;  // 0 = auto
  int hidden_dim = 0;
  double init_scale = 0.01;

  // data
  bool use_idx = false;
  std::filesystem::path idx_train_images, idx_train_labels;
  std::filesystem::path idx_test_images, idx_test_labels;
  int synth_dims = 0;  // 0 = max(2, classes - 1)
  std::int64_t synth_per_class = 50;
  std::int64_t synth_test_per_class = 50;
  double synth_separation = 10.0;
  PartitionSpec::Mode partition_mode = PartitionSpec::Mode::kIid;
  double dirichlet_alpha = 1.0;

  std::uint64_t master_seed = 1;
  int replications = 1;
  double slot_seconds = 3.6e-6;

  // sweep-epsilon settings
  std::vector<double> sweep_epsilon_grid{0.001, 0.0031622776601683794, 0.01,
                                         0.03162277660168379, 0.1};
  double sweep_delta = 1e-11;

  std::vector<std::string> defaulted_fields;
};

ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const std::string& text);

// Per-device quantities drawn once from the master seed.
struct DrawnEnvironment {
  std::vector<double> distances;
  std::vector<double> epsilons;
  std::vector<double> deltas;
};
DrawnEnvironment draw_environment(const ExperimentConfig& config);

// Canonical resolved-config JSON (with drawn values and defaulted fields
// echoed) plus its 64-bit FNV-1a digest.
struct ConfigDigest {
  std::string json;
  std::string hash;
};
ConfigDigest config_digest(const ExperimentConfig& config, const DrawnEnvironment& env);

// Materializes one replication's full training input (data generation and
// partitioning use the replication seed; the environment is shared).
TrainingSetup build_setup(const ExperimentConfig& config, const DrawnEnvironment& env,
                          std::uint64_t replication_seed);

struct ReplicationOutput {
  int replication = 0;
  std::uint64_t seed = 0;
  std::filesystem::path csv_path;
  std::filesystem::path json_path;
  double final_mean_accuracy = 0.0;
  double mean_phi2 = 0.0;  // over rounds of per-round device means
};

struct SimulateResult {
  std::vector<ReplicationOutput> replications;
  ConfigDigest digest;
};

// Runs every replication (parallel up to OTAFD_THREADS) and writes one
// CSV/JSON pair per replication under out_dir, atomically.
SimulateResult run_simulate(const ExperimentConfig& config,
                            const std::filesystem::path& out_dir);

struct SweepPoint {
  double epsilon = 0.0;
  double mean_phi2 = 0.0;
  double std_phi2 = 0.0;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
  double uplink_seconds = 0.0;
  int replications = 0;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  std::filesystem::path csv_path;
};

// Fig.-2(a)-style sweep: every device gets the grid epsilon and the fixed
// sweep delta; replication seeds are shared across grid points.
SweepResult run_sweep_epsilon(const ExperimentConfig& config,
                              const std::filesystem::path& out_dir);

// Total uplink airtime of a run: K^2 slots per round, T rounds.
double uplink_time(std::int64_t rounds, int num_classes,
                   double slot_seconds = 3.6e-6);

// Serializes a training log as the per-round CSV (17 significant digits).
void write_training_csv(const TrainingLog& log, int num_classes,
                        double slot_seconds, const std::filesystem::path& path);

// Invariant suite behind the `validate` subcommand; returns the number of
// failed checks and prints one line per check.
int run_validate(std::ostream& out);

}  // namespace otafd

#endif  // OTAFD_EXPERIMENT_HPP_

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

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "otafd/experiment.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitValidationFailure = 1;
constexpr int kExitConfigError = 2;

struct CommonOptions {
  std::string config_path;
  std::string out_dir = "out";
  std::string out_file;  // design subcommand; empty = stdout
  std::optional<std::uint64_t> seed;
  std::optional<int> replications;
};

otafd::ExperimentConfig load_with_overrides(const CommonOptions& opts) {
  otafd::ExperimentConfig config = otafd::load_config(opts.config_path);
  if (opts.seed) config.master_seed = *opts.seed;
  if (opts.replications) config.replications = *opts.replications;
  return config;
}

const char* branch_name(otafd::DesignCase branch) {
  switch (branch) {
    case otafd::DesignCase::kInactive: return "inactive";
    case otafd::DesignCase::kChannelNoiseOnly: return "channel-noise-only";
    case otafd::DesignCase::kPeakPower: return "peak-power";
    case otafd::DesignCase::kCappedLambda: return "capped-lambda";
  }
  return "?";
}

int cmd_simulate(const CommonOptions& opts) {
  const otafd::ExperimentConfig config = load_with_overrides(opts);
  const otafd::SimulateResult result = otafd::run_simulate(config, opts.out_dir);
  json out = {{"config_digest", result.digest.hash}, {"replications", json::array()}};
  for (const otafd::ReplicationOutput& rep : result.replications) {
    out["replications"].push_back({{"replication", rep.replication},
                                   {"seed", rep.seed},
                                   {"csv", rep.csv_path.string()},
                                   {"json", rep.json_path.string()},
                                   {"final_mean_accuracy", rep.final_mean_accuracy},
                                   {"mean_phi2", rep.mean_phi2}});
  }
  std::cout << out.dump(2) << '\n';
  return kExitOk;
}

int cmd_sweep_epsilon(const CommonOptions& opts) {
  const otafd::ExperimentConfig config = load_with_overrides(opts);
  const otafd::SweepResult result = otafd::run_sweep_epsilon(config, opts.out_dir);
  json points = json::array();
  for (const otafd::SweepPoint& p : result.points) {
    points.push_back({{"epsilon", p.epsilon},
                      {"mean_phi2", p.mean_phi2},
                      {"std_phi2", p.std_phi2},
                      {"mean_accuracy", p.mean_accuracy},
                      {"std_accuracy", p.std_accuracy},
                      {"uplink_time_s", p.uplink_seconds},
                      {"replications", p.replications}});
  }
  std::cout << json{{"csv", result.csv_path.string()}, {"points", points}}.dump(2)
            << '\n';
  return kExitOk;
}

int cmd_horizon(const CommonOptions& opts) {
  const otafd::ExperimentConfig config = load_with_overrides(opts);
  const otafd::DrawnEnvironment env = otafd::draw_environment(config);
  const std::uint64_t seed =
      otafd::derive_seed(config.master_seed, otafd::StreamTag::kReplication, 0);
  const otafd::TrainingSetup setup = otafd::build_setup(config, env, seed);
  const otafd::HyperParams hyper = otafd::resolve_f_max(setup, seed);

  json out;
  const double continuous =
      otafd::continuous_optimal_rounds(hyper, setup.partition, setup.stringencies);
  if (std::isinf(continuous)) {
    out = {{"unbounded", true},
           {"note", "no device demands privacy; supply rounds explicitly"}};
  } else {
    const std::optional<std::int64_t> t_star =
        otafd::optimal_rounds(hyper, setup.partition, setup.stringencies);
    const std::int64_t t_max =
        static_cast<std::int64_t>(std::ceil(2.0 * continuous)) + 2;
    const std::int64_t oracle = otafd::brute_force_rounds(
        hyper, setup.partition, setup.stringencies, std::min<std::int64_t>(t_max, 2000000));
    out = {{"unbounded", false},
           {"t_star", *t_star},
           {"t_continuous", continuous},
           {"oracle", oracle}};
  }
  std::cout << out.dump(2) << '\n';
  return kExitOk;
}

// One-shot transceiver design from a channel snapshot.
int cmd_design(const CommonOptions& opts) {
  std::ifstream in(opts.config_path);
  if (!in) throw otafd::ConfigError("<file>", "cannot open " + opts.config_path);
  json j;
  try {
    std::stringstream buffer;
    buffer << in.rdbuf();
    j = json::parse(buffer.str());
  } catch (const json::parse_error& e) {
    throw otafd::ConfigError("<root>", std::string("invalid JSON: ") + e.what());
  }

  const auto rounds = j.at("rounds").get<std::int64_t>();
  const int classes = j.at("num_classes").get<int>();
  otafd::ChannelRealization channel;
  channel.noise_var = j.at("noise_var").get<double>();
  std::vector<double> powers;
  std::vector<double> rhos;
  std::vector<std::int64_t> counts;
  for (const json& dev : j.at("devices")) {
    const auto h = dev.at("h");
    channel.coeffs.emplace_back(h.at(0).get<double>(), h.at(1).get<double>());
    powers.push_back(dev.at("power").get<double>());
    const auto dev_counts = dev.at("counts").get<std::vector<std::int64_t>>();
    if (static_cast<int>(dev_counts.size()) != classes) {
      throw otafd::ConfigError("devices.counts", "expected one count per class");
    }
    counts.insert(counts.end(), dev_counts.begin(), dev_counts.end());
    std::int64_t total = 0;
    for (std::int64_t c : dev_counts) total += c;
    if (dev.contains("rho")) {
      rhos.push_back(dev.at("rho").get<double>());
    } else {
      const otafd::PrivacyRequirement req{dev.at("epsilon").get<double>(),
                                          dev.at("delta").get<double>(),
                                          std::max<std::int64_t>(total, 1)};
      rhos.push_back(otafd::stringency(req).rho);
    }
  }
  const int devices = channel.devices();
  const otafd::ClassPartition partition =
      otafd::ClassPartition::from_counts(devices, classes, std::move(counts));

  const otafd::TransceiverDesign design = otafd::design_round(
      rounds, channel, partition, powers, rhos, classes);
  const std::vector<double> margins =
      otafd::dp_margin(design, channel, rounds, classes, rhos);
  const std::vector<double> noise_error =
      otafd::phi2(design, channel, partition, classes);

  json out;
  out["threshold_rounds"] = otafd::threshold_rounds(channel, powers, classes, rhos);
  out["lambda"] = design.lambda;
  json branches = json::array();
  for (int k = 0; k < classes; ++k) branches.push_back(branch_name(design.branch[k]));
  out["branch"] = branches;
  json p1 = json::array(), p2 = json::array(), power_used = json::array();
  for (int i = 0; i < devices; ++i) {
    json row1 = json::array(), row2 = json::array(), rowp = json::array();
    for (int k = 0; k < classes; ++k) {
      const std::complex<double> v = design.p1_at(i, k);
      row1.push_back({v.real(), v.imag()});
      row2.push_back(design.p2_at(i, k));
      rowp.push_back(design.power_used(i, k));
    }
    p1.push_back(row1);
    p2.push_back(row2);
    power_used.push_back(rowp);
  }
  out["p1"] = p1;
  out["p2_mag"] = p2;
  out["power_used"] = power_used;
  out["dp_margin"] = margins;
  out["phi2"] = noise_error;

  if (!opts.out_file.empty()) {
    std::ofstream file(opts.out_file);
    file << out.dump(2) << '\n';
  } else {
    std::cout << out.dump(2) << '\n';
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentially private over-the-air federated distillation toolkit"};
  app.require_subcommand(1);

  CommonOptions opts;

  CLI::App* simulate = app.add_subcommand("simulate", "Run full FD training replications");
  simulate->add_option("--config", opts.config_path, "Experiment config JSON")->required();
  simulate->add_option("--seed", opts.seed, "Master seed override");
  simulate->add_option("--out", opts.out_dir, "Output directory");
  simulate->add_option("--replications", opts.replications, "Replication count override");

  CLI::App* design = app.add_subcommand(
      "design", "One-shot transceiver design from a channel snapshot JSON");
  design->add_option("--config", opts.config_path, "Channel snapshot JSON")->required();
  design->add_option("--out", opts.out_file, "Output file (default: stdout)");

  CLI::App* horizon = app.add_subcommand(
      "horizon", "Print the optimal training horizon, its continuous value, and the oracle");
  horizon->add_option("--config", opts.config_path, "Experiment config JSON")->required();
  horizon->add_option("--seed", opts.seed, "Master seed override");

  CLI::App* sweep = app.add_subcommand("sweep-epsilon", "Phi2/accuracy sweep over epsilon");
  sweep->add_option("--config", opts.config_path, "Experiment config JSON")->required();
  sweep->add_option("--seed", opts.seed, "Master seed override");
  sweep->add_option("--out", opts.out_dir, "Output directory");
  sweep->add_option("--replications", opts.replications, "Replication count override");

  CLI::App* validate = app.add_subcommand("validate", "Run the invariant suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfigError;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(opts);
    if (design->parsed()) return cmd_design(opts);
    if (horizon->parsed()) return cmd_horizon(opts);
    if (sweep->parsed()) return cmd_sweep_epsilon(opts);
    if (validate->parsed()) {
      return otafd::run_validate(std::cout) == 0 ? kExitOk : kExitValidationFailure;
    }
  } catch (const otafd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidationFailure;
  }
  return kExitOk;
}

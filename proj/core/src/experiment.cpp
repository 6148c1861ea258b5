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

#include "otafd/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

namespace otafd {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& field, const std::string& message) {
  throw ConfigError(field, message);
}

void expect_keys(const json& j, const std::string& path,
                 std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : j.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) {
          return key == a;
        }) == allowed.end()) {
      fail(path + "." + key, "unknown field");
    }
  }
}

double require_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

double positive_number(const json& j, const std::string& path) {
  const double v = require_number(j, path);
  if (!(v > 0.0)) fail(path, "must be > 0");
  return v;
}

RangeOrValues parse_range_or_values(const json& j, const std::string& path,
                                    double lo_limit, double hi_limit) {
  RangeOrValues out;
  auto check = [&](double v) {
    if (!(v >= lo_limit) || !(v <= hi_limit)) {
      fail(path, "value " + std::to_string(v) + " outside [" +
                     std::to_string(lo_limit) + ", " + std::to_string(hi_limit) + "]");
    }
  };
  if (j.is_number()) {
    out.is_range = false;
    out.values = {j.get<double>()};
    check(out.values[0]);
  } else if (j.is_array()) {
    out.is_range = false;
    for (const auto& v : j) {
      out.values.push_back(require_number(v, path));
      check(out.values.back());
    }
    if (out.values.empty()) fail(path, "empty array");
  } else if (j.is_object()) {
    expect_keys(j, path, {"min", "max"});
    if (!j.contains("min") || !j.contains("max")) fail(path, "range needs min and max");
    out.is_range = true;
    out.min = require_number(j.at("min"), path + ".min");
    out.max = require_number(j.at("max"), path + ".max");
    check(out.min);
    check(out.max);
    if (out.min > out.max) fail(path, "min exceeds max");
  } else {
    fail(path, "expected number, array, or {min, max}");
  }
  return out;
}

std::vector<double> parse_per_device(const json& j, const std::string& path,
                                     int devices) {
  std::vector<double> out;
  if (j.is_number()) {
    out.assign(static_cast<std::size_t>(devices), positive_number(j, path));
  } else if (j.is_array()) {
    for (const auto& v : j) out.push_back(positive_number(v, path));
    if (static_cast<int>(out.size()) != devices) {
      fail(path, "expected " + std::to_string(devices) + " entries");
    }
  } else {
    fail(path, "expected number or per-device array");
  }
  return out;
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

int thread_cap() {
  if (const char* env = std::getenv("OTAFD_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(0..n-1) on up to thread_cap() workers; results must be written to
// pre-sized slots so scheduling cannot affect the output.
template <typename Fn>
void parallel_for(int n, Fn&& fn) {
  const int workers = std::min(n, thread_cap());
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + tmp.string());
    out << content;
  }
  std::filesystem::rename(tmp, path);
}

json range_to_json(const RangeOrValues& r) {
  if (r.is_range) return json{{"min", r.min}, {"max", r.max}};
  if (r.values.size() == 1) return json(r.values[0]);
  return json(r.values);
}

}  // namespace

std::vector<double> RangeOrValues::resolve(int devices, Rng& rng) const {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(devices));
  if (is_range) {
    for (int i = 0; i < devices; ++i) out.push_back(rng.uniform(min, max));
  } else if (values.size() == 1) {
    out.assign(static_cast<std::size_t>(devices), values[0]);
  } else {
    if (static_cast<int>(values.size()) != devices) {
      throw std::invalid_argument("per-device list has the wrong length");
    }
    out = values;
  }
  return out;
}

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail("<root>", std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) fail("<root>", "config must be a JSON object");
  expect_keys(j, "<root>",
              {"devices", "classes", "channel", "power", "privacy", "hyper",
               "rounds", "model", "data", "seeds", "slot_seconds", "sweep"});

  ExperimentConfig cfg;
  auto defaulted = [&](const std::string& field) {
    cfg.defaulted_fields.push_back(field);
  };

  if (!j.contains("devices")) fail("devices", "required");
  if (!j.at("devices").is_number_integer()) fail("devices", "expected an integer");
  cfg.devices = j.at("devices").get<int>();
  if (cfg.devices < 1) fail("devices", "must be >= 1");

  if (!j.contains("classes")) fail("classes", "required");
  if (!j.at("classes").is_number_integer()) fail("classes", "expected an integer");
  cfg.classes = j.at("classes").get<int>();
  if (cfg.classes < 1) fail("classes", "must be >= 1");

  if (j.contains("channel")) {
    const json& c = j.at("channel");
    expect_keys(c, "channel",
                {"carrier_hz", "distance_m", "pathloss_exp", "noise_var", "ideal"});
    if (c.contains("carrier_hz")) {
      cfg.carrier_hz = positive_number(c.at("carrier_hz"), "channel.carrier_hz");
    } else {
      defaulted("channel.carrier_hz");
    }
    if (c.contains("distance_m")) {
      cfg.distance_m = parse_range_or_values(c.at("distance_m"), "channel.distance_m",
                                             1e-9, 1e12);
      if (!cfg.distance_m.is_range && cfg.distance_m.values.size() != 1 &&
          static_cast<int>(cfg.distance_m.values.size()) != cfg.devices) {
        fail("channel.distance_m", "expected " + std::to_string(cfg.devices) + " entries");
      }
    } else {
      defaulted("channel.distance_m");
    }
    if (c.contains("pathloss_exp")) {
      cfg.pathloss_exp = require_number(c.at("pathloss_exp"), "channel.pathloss_exp");
      if (cfg.pathloss_exp < 0.0) fail("channel.pathloss_exp", "must be >= 0");
    } else {
      defaulted("channel.pathloss_exp");
    }
    if (c.contains("noise_var")) {
      cfg.noise_var = require_number(c.at("noise_var"), "channel.noise_var");
      if (cfg.noise_var < 0.0) fail("channel.noise_var", "must be >= 0");
    } else {
      defaulted("channel.noise_var");
    }
    if (c.contains("ideal")) {
      if (!c.at("ideal").is_boolean()) fail("channel.ideal", "expected a boolean");
      cfg.ideal_channel = c.at("ideal").get<bool>();
      if (cfg.ideal_channel) cfg.noise_var = 0.0;  // error-free reference
    }
  } else {
    defaulted("channel");
  }

  if (j.contains("power")) {
    cfg.powers = parse_per_device(j.at("power"), "power", cfg.devices);
  } else {
    cfg.powers.assign(static_cast<std::size_t>(cfg.devices), 1e-3);
    defaulted("power");
  }

  if (j.contains("privacy")) {
    const json& p = j.at("privacy");
    expect_keys(p, "privacy", {"enabled", "epsilon", "delta"});
    if (p.contains("enabled")) {
      if (!p.at("enabled").is_boolean()) fail("privacy.enabled", "expected a boolean");
      cfg.privacy_enabled = p.at("enabled").get<bool>();
    }
    if (p.contains("epsilon")) {
      cfg.epsilon = parse_range_or_values(p.at("epsilon"), "privacy.epsilon", 1e-12, 1e6);
    } else {
      defaulted("privacy.epsilon");
    }
    if (p.contains("delta")) {
      cfg.delta = parse_range_or_values(p.at("delta"), "privacy.delta", 1e-30, 1.0);
    } else {
      defaulted("privacy.delta");
    }
  } else {
    defaulted("privacy");
  }

  if (j.contains("hyper")) {
    const json& h = j.at("hyper");
    expect_keys(h, "hyper", {"gamma", "eta0", "l1", "l2", "grad_bound", "f_max"});
    if (h.contains("gamma")) {
      cfg.gamma = require_number(h.at("gamma"), "hyper.gamma");
      if (cfg.gamma < 0.0) fail("hyper.gamma", "must be >= 0");
    } else {
      defaulted("hyper.gamma");
    }
    if (h.contains("eta0")) {
      cfg.eta0 = positive_number(h.at("eta0"), "hyper.eta0");
    } else {
      defaulted("hyper.eta0");
    }
    if (h.contains("l1")) cfg.l1 = positive_number(h.at("l1"), "hyper.l1");
    if (h.contains("l2")) cfg.l2 = positive_number(h.at("l2"), "hyper.l2");
    if (h.contains("grad_bound")) {
      cfg.grad_bound = positive_number(h.at("grad_bound"), "hyper.grad_bound");
    }
    if (cfg.eta0 > 1.0 / cfg.l1 + 1e-12) {
      fail("hyper.eta0", "step-size condition eta0 <= 1/l1 violated");
    }
    if (h.contains("f_max")) {
      const json& f = h.at("f_max");
      if (f.is_string()) {
        if (f.get<std::string>() != "initial-loss") {
          fail("hyper.f_max", "expected a number, per-device array, or \"initial-loss\"");
        }
      } else {
        cfg.f_max = parse_per_device(f, "hyper.f_max", cfg.devices);
      }
    } else {
      defaulted("hyper.f_max");
    }
  } else {
    defaulted("hyper");
  }

  if (j.contains("rounds")) {
    const json& r = j.at("rounds");
    if (r.is_string()) {
      if (r.get<std::string>() != "auto") fail("rounds", "expected an integer or \"auto\"");
      cfg.rounds = 0;
    } else if (r.is_number_integer()) {
      cfg.rounds = r.get<std::int64_t>();
      if (cfg.rounds < 1) fail("rounds", "must be >= 1");
    } else {
      fail("rounds", "expected an integer or \"auto\"");
    }
  } else {
    defaulted("rounds");
  }

  if (j.contains("model")) {
    const json& m = j.at("model");
    expect_keys(m, "model", {"hidden_dim", "init_scale"});
    if (m.contains("hidden_dim")) {
      if (!m.at("hidden_dim").is_number_integer()) {
        fail("model.hidden_dim", "expected an integer");
      }
      cfg.hidden_dim = m.at("hidden_dim").get<int>();
      if (cfg.hidden_dim < 0) fail("model.hidden_dim", "must be >= 0");
    }
    if (m.contains("init_scale")) {
      cfg.init_scale = positive_number(m.at("init_scale"), "model.init_scale");
    }
  }

  if (j.contains("data")) {
    const json& d = j.at("data");
    expect_keys(d, "data", {"synthetic", "idx", "partition"});
    if (d.contains("synthetic") && d.contains("idx")) {
      fail("data", "choose either synthetic or idx, not both");
    }
    if (d.contains("idx")) {
      const json& x = d.at("idx");
      expect_keys(x, "data.idx",
                  {"train_images", "train_labels", "test_images", "test_labels"});
      for (const char* field :
           {"train_images", "train_labels", "test_images", "test_labels"}) {
        if (!x.contains(field) || !x.at(field).is_string()) {
          fail(std::string("data.idx.") + field, "required path string");
        }
      }
      cfg.use_idx = true;
      cfg.idx_train_images = x.at("train_images").get<std::string>();
      cfg.idx_train_labels = x.at("train_labels").get<std::string>();
      cfg.idx_test_images = x.at("test_images").get<std::string>();
      cfg.idx_test_labels = x.at("test_labels").get<std::string>();
    } else if (d.contains("synthetic")) {
      const json& s = d.at("synthetic");
      expect_keys(s, "data.synthetic",
                  {"dims", "per_class", "separation", "test_per_class"});
      if (s.contains("dims")) {
        if (!s.at("dims").is_number_integer()) fail("data.synthetic.dims", "expected an integer");
        cfg.synth_dims = s.at("dims").get<int>();
        if (cfg.synth_dims < cfg.classes - 1) {
          fail("data.synthetic.dims", "must be >= classes - 1");
        }
      }
      if (s.contains("per_class")) {
        cfg.synth_per_class = s.at("per_class").get<std::int64_t>();
        if (cfg.synth_per_class < 1) fail("data.synthetic.per_class", "must be >= 1");
      }
      if (s.contains("test_per_class")) {
        cfg.synth_test_per_class = s.at("test_per_class").get<std::int64_t>();
        if (cfg.synth_test_per_class < 1) fail("data.synthetic.test_per_class", "must be >= 1");
      }
      if (s.contains("separation")) {
        cfg.synth_separation = require_number(s.at("separation"), "data.synthetic.separation");
        if (cfg.synth_separation < 0.0) fail("data.synthetic.separation", "must be >= 0");
      }
    }
    if (d.contains("partition")) {
      const json& p = d.at("partition");
      expect_keys(p, "data.partition", {"mode", "alpha"});
      if (p.contains("mode")) {
        const std::string mode = p.at("mode").get<std::string>();
        if (mode == "iid") {
          cfg.partition_mode = PartitionSpec::Mode::kIid;
        } else if (mode == "dirichlet") {
          cfg.partition_mode = PartitionSpec::Mode::kDirichlet;
        } else {
          fail("data.partition.mode", "expected \"iid\" or \"dirichlet\"");
        }
      }
      if (p.contains("alpha")) {
        cfg.dirichlet_alpha = positive_number(p.at("alpha"), "data.partition.alpha");
      }
    }
  } else {
    defaulted("data");
  }

  if (j.contains("seeds")) {
    const json& s = j.at("seeds");
    expect_keys(s, "seeds", {"master", "replications"});
    if (s.contains("master")) {
      cfg.master_seed = s.at("master").get<std::uint64_t>();
    }
    if (s.contains("replications")) {
      cfg.replications = s.at("replications").get<int>();
      if (cfg.replications < 1) fail("seeds.replications", "must be >= 1");
    }
  } else {
    defaulted("seeds");
  }

  if (j.contains("slot_seconds")) {
    cfg.slot_seconds = positive_number(j.at("slot_seconds"), "slot_seconds");
  } else {
    defaulted("slot_seconds");
  }

  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    expect_keys(s, "sweep", {"epsilon_grid", "delta"});
    if (s.contains("epsilon_grid")) {
      cfg.sweep_epsilon_grid.clear();
      for (const auto& v : s.at("epsilon_grid")) {
        cfg.sweep_epsilon_grid.push_back(positive_number(v, "sweep.epsilon_grid"));
      }
      if (cfg.sweep_epsilon_grid.empty()) fail("sweep.epsilon_grid", "empty grid");
      for (std::size_t i = 1; i < cfg.sweep_epsilon_grid.size(); ++i) {
        if (cfg.sweep_epsilon_grid[i] <= cfg.sweep_epsilon_grid[i - 1]) {
          fail("sweep.epsilon_grid", "grid must be strictly increasing");
        }
      }
    }
    if (s.contains("delta")) {
      cfg.sweep_delta = positive_number(s.at("delta"), "sweep.delta");
      if (cfg.sweep_delta > 1.0) fail("sweep.delta", "must be <= 1");
    }
  }

  if (cfg.synth_dims == 0) cfg.synth_dims = std::max(2, cfg.classes - 1);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("<file>", "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

DrawnEnvironment draw_environment(const ExperimentConfig& config) {
  DrawnEnvironment env;
  Rng rng(derive_seed(config.master_seed, StreamTag::kConfigDraw));
  // Draw order is part of the contract: distances, then epsilons, then deltas.
  env.distances = config.distance_m.resolve(config.devices, rng);
  env.epsilons = config.epsilon.resolve(config.devices, rng);
  env.deltas = config.delta.resolve(config.devices, rng);
  return env;
}

ConfigDigest config_digest(const ExperimentConfig& config, const DrawnEnvironment& env) {
  json j;
  j["devices"] = config.devices;
  j["classes"] = config.classes;
  j["channel"] = {{"carrier_hz", config.carrier_hz},
                  {"pathloss_exp", config.pathloss_exp},
                  {"noise_var", config.noise_var},
                  {"ideal", config.ideal_channel},
                  {"distance_m", range_to_json(config.distance_m)},
                  {"drawn_distance_m", env.distances}};
  j["power"] = config.powers;
  j["privacy"] = {{"enabled", config.privacy_enabled},
                  {"epsilon", range_to_json(config.epsilon)},
                  {"delta", range_to_json(config.delta)},
                  {"drawn_epsilon", env.epsilons},
                  {"drawn_delta", env.deltas}};
  j["hyper"] = {{"gamma", config.gamma},       {"eta0", config.eta0},
                {"l1", config.l1},             {"l2", config.l2},
                {"grad_bound", config.grad_bound}};
  if (config.f_max.empty()) {
    j["hyper"]["f_max"] = "initial-loss";
  } else {
    j["hyper"]["f_max"] = config.f_max;
  }
  if (config.rounds == 0) {
    j["rounds"] = "auto";
  } else {
    j["rounds"] = config.rounds;
  }
  j["model"] = {{"hidden_dim", config.hidden_dim}, {"init_scale", config.init_scale}};
  if (config.use_idx) {
    j["data"] = {{"idx",
                  {{"train_images", config.idx_train_images.string()},
                   {"train_labels", config.idx_train_labels.string()},
                   {"test_images", config.idx_test_images.string()},
                   {"test_labels", config.idx_test_labels.string()}}}};
  } else {
    j["data"] = {{"synthetic",
                  {{"dims", config.synth_dims},
                   {"per_class", config.synth_per_class},
                   {"test_per_class", config.synth_test_per_class},
                   {"separation", config.synth_separation}}}};
  }
  j["data"]["partition"] = {
      {"mode", config.partition_mode == PartitionSpec::Mode::kIid ? "iid" : "dirichlet"},
      {"alpha", config.dirichlet_alpha}};
  j["seeds"] = {{"master", config.master_seed}, {"replications", config.replications}};
  j["slot_seconds"] = config.slot_seconds;
  j["defaulted"] = config.defaulted_fields;

  ConfigDigest digest;
  digest.json = j.dump();
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(digest.json)));
  digest.hash = buf;
  return digest;
}

TrainingSetup build_setup(const ExperimentConfig& config, const DrawnEnvironment& env,
                          std::uint64_t replication_seed) {
  TrainingSetup setup;
  const int devices = config.devices;
  const int classes = config.classes;

  LabeledDataset train;
  if (config.use_idx) {
    train = read_idx(config.idx_train_images, config.idx_train_labels);
    setup.test_set = read_idx(config.idx_test_images, config.idx_test_labels);
    if (train.num_classes > classes || setup.test_set.num_classes > classes) {
      fail("classes", "IDX data contains labels beyond the configured class count");
    }
    train.num_classes = classes;
    setup.test_set.num_classes = classes;
  } else {
    Rng train_rng(derive_seed(replication_seed, StreamTag::kDataGen, 1));
    Rng test_rng(derive_seed(replication_seed, StreamTag::kDataGen, 2));
    train = synth_dataset(classes, config.synth_dims, config.synth_per_class,
                          config.synth_separation, train_rng);
    setup.test_set = synth_dataset(classes, config.synth_dims,
                                   config.synth_test_per_class,
                                   config.synth_separation, test_rng);
  }

  PartitionSpec spec;
  spec.mode = config.partition_mode;
  spec.alpha = config.dirichlet_alpha;
  spec.num_devices = devices;
  spec.seed = replication_seed;
  PartitionResult split = partition(train, spec);
  setup.device_data = std::move(split.device_data);
  setup.partition = std::move(split.partition);

  setup.ideal_channel = config.ideal_channel;
  setup.noise_var = config.noise_var;
  if (!config.ideal_channel) {
    setup.geometry.reserve(static_cast<std::size_t>(devices));
    for (int i = 0; i < devices; ++i) {
      setup.geometry.push_back({env.distances[static_cast<std::size_t>(i)],
                                config.carrier_hz, config.pathloss_exp});
    }
  }

  setup.powers = config.powers;
  setup.stringencies.assign(static_cast<std::size_t>(devices), 0.0);
  if (config.privacy_enabled) {
    for (int i = 0; i < devices; ++i) {
      const PrivacyRequirement req{
          env.epsilons[static_cast<std::size_t>(i)],
          env.deltas[static_cast<std::size_t>(i)],
          setup.partition.device_totals[static_cast<std::size_t>(i)]};
      setup.stringencies[static_cast<std::size_t>(i)] = stringency(req).rho;
    }
  }

  setup.arch = {train.dims, config.hidden_dim, classes};
  setup.init_scale = config.init_scale;
  setup.hyper.gamma = config.gamma;
  setup.hyper.eta0 = config.eta0;
  setup.hyper.l1 = config.l1;
  setup.hyper.l2 = config.l2;
  setup.hyper.grad_bound = config.grad_bound;
  setup.hyper.f_max = config.f_max;
  setup.rounds = config.rounds;
  setup.num_classes = classes;
  setup.slot_seconds = config.slot_seconds;
  return setup;
}

double uplink_time(std::int64_t rounds, int num_classes, double slot_seconds) {
  if (rounds < 1 || num_classes < 1) {
    throw std::domain_error("uplink_time: rounds and num_classes must be >= 1");
  }
  if (!(slot_seconds > 0.0)) {
    throw std::domain_error("uplink_time: slot_seconds must be > 0");
  }
  return static_cast<double>(num_classes) * num_classes *
         static_cast<double>(rounds) * slot_seconds;
}

void write_training_csv(const TrainingLog& log, int num_classes,
                        double slot_seconds, const std::filesystem::path& path) {
  std::string csv =
      "round,mean_phi1,mean_phi2,mean_train_loss,test_accuracy,min_dp_margin,"
      "uplink_time_s\n";
  for (const RoundRecord& r : log.records) {
    auto mean = [](const std::vector<double>& v) {
      double acc = 0.0;
      for (double x : v) acc += x;
      return v.empty() ? 0.0 : acc / static_cast<double>(v.size());
    };
    double min_margin = std::numeric_limits<double>::infinity();
    for (double m : r.dp_margin) min_margin = std::min(min_margin, m);
    csv += std::to_string(r.round);
    csv += ',';
    csv += format_double(mean(r.phi1));
    csv += ',';
    csv += format_double(mean(r.phi2));
    csv += ',';
    csv += format_double(mean(r.train_loss));
    csv += ',';
    csv += format_double(r.test_accuracy);
    csv += ',';
    csv += format_double(min_margin);
    csv += ',';
    csv += format_double(uplink_time(r.round, num_classes, slot_seconds));
    csv += '\n';
  }
  atomic_write(path, csv);
}

namespace {

json summary_json(const TrainingLog& log, const ConfigDigest& digest,
                  const ExperimentConfig& config, int replication,
                  std::uint64_t seed, const std::filesystem::path& csv_name) {
  double mean_acc = 0.0;
  for (double a : log.final_accuracy) mean_acc += a;
  if (!log.final_accuracy.empty()) {
    mean_acc /= static_cast<double>(log.final_accuracy.size());
  }
  return json{{"config_digest", digest.hash},
              {"config", json::parse(digest.json)},
              {"replication", replication},
              {"seed", seed},
              {"rounds", log.rounds},
              {"auto_horizon", log.auto_horizon},
              {"final_accuracy", log.final_accuracy},
              {"final_mean_accuracy", mean_acc},
              {"total_uplink_seconds",
               uplink_time(log.rounds, config.classes, config.slot_seconds)},
              {"wall_seconds", log.wall_seconds},
              {"csv", csv_name.string()}};
}

double mean_column_phi2(const TrainingLog& log) {
  double acc = 0.0;
  std::int64_t n = 0;
  for (const RoundRecord& r : log.records) {
    double round_mean = 0.0;
    for (double p : r.phi2) round_mean += p;
    if (!r.phi2.empty()) round_mean /= static_cast<double>(r.phi2.size());
    acc += round_mean;
    ++n;
  }
  return n == 0 ? 0.0 : acc / static_cast<double>(n);
}

}  // namespace

SimulateResult run_simulate(const ExperimentConfig& config,
                            const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  const DrawnEnvironment env = draw_environment(config);
  const ConfigDigest digest = config_digest(config, env);

  SimulateResult result;
  result.digest = digest;
  result.replications.resize(static_cast<std::size_t>(config.replications));

  parallel_for(config.replications, [&](int r) {
    const std::uint64_t seed = derive_seed(config.master_seed, StreamTag::kReplication,
                                           static_cast<std::uint64_t>(r));
    TrainingSetup setup = build_setup(config, env, seed);
    setup.config_digest = digest.hash;
    const TrainingLog log = run_training(setup, seed);

    ReplicationOutput out;
    out.replication = r;
    out.seed = seed;
    out.csv_path = out_dir / ("sim_rep" + std::to_string(r) + ".csv");
    out.json_path = out_dir / ("sim_rep" + std::to_string(r) + ".json");
    write_training_csv(log, config.classes, config.slot_seconds, out.csv_path);
    atomic_write(out.json_path,
                 summary_json(log, digest, config, r, seed,
                              out.csv_path.filename()).dump(2) + "\n");
    double mean_acc = 0.0;
    for (double a : log.final_accuracy) mean_acc += a;
    out.final_mean_accuracy =
        log.final_accuracy.empty()
            ? 0.0
            : mean_acc / static_cast<double>(log.final_accuracy.size());
    out.mean_phi2 = mean_column_phi2(log);
    result.replications[static_cast<std::size_t>(r)] = std::move(out);
  });
  return result;
}

SweepResult run_sweep_epsilon(const ExperimentConfig& config,
                              const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  const DrawnEnvironment base_env = draw_environment(config);

  SweepResult result;
  result.points.resize(config.sweep_epsilon_grid.size());

  const int grid_size = static_cast<int>(config.sweep_epsilon_grid.size());
  const int reps = config.replications;
  std::vector<double> phi2_sample(static_cast<std::size_t>(grid_size) * reps, 0.0);
  std::vector<double> acc_sample(static_cast<std::size_t>(grid_size) * reps, 0.0);
  std::vector<std::int64_t> rounds_used(static_cast<std::size_t>(grid_size) * reps, 0);

  parallel_for(grid_size * reps, [&](int task) {
    const int g = task / reps;
    const int r = task % reps;
    const double eps = config.sweep_epsilon_grid[static_cast<std::size_t>(g)];

    ExperimentConfig point = config;
    point.privacy_enabled = true;
    point.epsilon = RangeOrValues{false, 0.0, 0.0, {eps}};
    point.delta = RangeOrValues{false, 0.0, 0.0, {config.sweep_delta}};
    DrawnEnvironment env = base_env;
    env.epsilons.assign(static_cast<std::size_t>(config.devices), eps);
    env.deltas.assign(static_cast<std::size_t>(config.devices), config.sweep_delta);
    const ConfigDigest digest = config_digest(point, env);

    // Replication seeds are shared across grid points so per-seed channel
    // and data draws cancel out of the epsilon comparison.
    const std::uint64_t seed = derive_seed(config.master_seed, StreamTag::kReplication,
                                           static_cast<std::uint64_t>(r));
    TrainingSetup setup = build_setup(point, env, seed);
    setup.config_digest = digest.hash;
    const TrainingLog log = run_training(setup, seed);

    const std::filesystem::path csv =
        out_dir / ("sweep_eps" + std::to_string(g) + "_rep" + std::to_string(r) + ".csv");
    write_training_csv(log, point.classes, point.slot_seconds, csv);
    atomic_write(out_dir / ("sweep_eps" + std::to_string(g) + "_rep" +
                            std::to_string(r) + ".json"),
                 summary_json(log, digest, point, r, seed, csv.filename()).dump(2) + "\n");

    phi2_sample[static_cast<std::size_t>(task)] = mean_column_phi2(log);
    double mean_acc = 0.0;
    for (double a : log.final_accuracy) mean_acc += a;
    acc_sample[static_cast<std::size_t>(task)] =
        log.final_accuracy.empty()
            ? 0.0
            : mean_acc / static_cast<double>(log.final_accuracy.size());
    rounds_used[static_cast<std::size_t>(task)] = log.rounds;
  });

  auto mean_std = [&](const std::vector<double>& samples, int g, double* mean,
                      double* stddev) {
    double acc = 0.0;
    for (int r = 0; r < reps; ++r) acc += samples[static_cast<std::size_t>(g) * reps + r];
    *mean = acc / reps;
    double sq = 0.0;
    for (int r = 0; r < reps; ++r) {
      const double d = samples[static_cast<std::size_t>(g) * reps + r] - *mean;
      sq += d * d;
    }
    *stddev = reps > 1 ? std::sqrt(sq / (reps - 1)) : 0.0;
  };

  std::string csv =
      "epsilon,mean_phi2,std_phi2,mean_accuracy,std_accuracy,uplink_time_s,replications\n";
  for (int g = 0; g < grid_size; ++g) {
    SweepPoint& p = result.points[static_cast<std::size_t>(g)];
    p.epsilon = config.sweep_epsilon_grid[static_cast<std::size_t>(g)];
    p.replications = reps;
    mean_std(phi2_sample, g, &p.mean_phi2, &p.std_phi2);
    mean_std(acc_sample, g, &p.mean_accuracy, &p.std_accuracy);
    p.uplink_seconds = uplink_time(rounds_used[static_cast<std::size_t>(g) * reps],
                                   config.classes, config.slot_seconds);
    csv += format_double(p.epsilon) + ',' + format_double(p.mean_phi2) + ',' +
           format_double(p.std_phi2) + ',' + format_double(p.mean_accuracy) + ',' +
           format_double(p.std_accuracy) + ',' + format_double(p.uplink_seconds) + ',' +
           std::to_string(p.replications) + '\n';
  }
  result.csv_path = out_dir / "sweep_epsilon.csv";
  atomic_write(result.csv_path, csv);
  return result;
}

}  // namespace otafd

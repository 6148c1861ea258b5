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

#include "otafd/learner.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace otafd {

namespace {

void check_arch(const Architecture& arch) {
  if (arch.input_dim < 1 || arch.num_classes < 1 || arch.hidden_dim < 0) {
    throw std::invalid_argument("Architecture: invalid dimensions");
  }
}

// Logits for one input; scratch holds the hidden activations when present.
void logits(const ModelParams& params, std::span<const double> input,
            std::vector<double>& hidden, std::vector<double>& z) {
  const Architecture& arch = params.arch;
  const int in = arch.input_dim;
  const int classes = arch.num_classes;
  z.assign(static_cast<std::size_t>(classes), 0.0);
  const double* theta = params.theta.data();
  if (arch.hidden_dim == 0) {
    const double* bias = theta + static_cast<std::size_t>(classes) * in;
    for (int k = 0; k < classes; ++k) {
      double acc = bias[k];
      const double* row = theta + static_cast<std::size_t>(k) * in;
      for (int d = 0; d < in; ++d) acc += row[d] * input[static_cast<std::size_t>(d)];
      z[static_cast<std::size_t>(k)] = acc;
    }
    return;
  }
  const int h = arch.hidden_dim;
  const double* w1 = theta;
  const double* b1 = w1 + static_cast<std::size_t>(h) * in;
  const double* w2 = b1 + h;
  const double* b2 = w2 + static_cast<std::size_t>(classes) * h;
  hidden.assign(static_cast<std::size_t>(h), 0.0);
  for (int j = 0; j < h; ++j) {
    double acc = b1[j];
    const double* row = w1 + static_cast<std::size_t>(j) * in;
    for (int d = 0; d < in; ++d) acc += row[d] * input[static_cast<std::size_t>(d)];
    hidden[static_cast<std::size_t>(j)] = std::tanh(acc);
  }
  for (int k = 0; k < classes; ++k) {
    double acc = b2[k];
    const double* row = w2 + static_cast<std::size_t>(k) * h;
    for (int j = 0; j < h; ++j) acc += row[j] * hidden[static_cast<std::size_t>(j)];
    z[static_cast<std::size_t>(k)] = acc;
  }
}

// In-place stable softmax; returns logsumexp for the cross-entropy path.
double softmax(std::vector<double>& z) {
  const double zmax = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - zmax);
    sum += v;
  }
  for (double& v : z) v /= sum;
  return zmax + std::log(sum);
}

}  // namespace

std::int64_t Architecture::param_count() const {
  if (hidden_dim == 0) {
    return static_cast<std::int64_t>(num_classes) * (input_dim + 1);
  }
  return static_cast<std::int64_t>(hidden_dim) * (input_dim + 1) +
         static_cast<std::int64_t>(num_classes) * (hidden_dim + 1);
}

ModelParams init_params(const Architecture& arch, double scale, Rng& rng) {
  check_arch(arch);
  ModelParams params;
  params.arch = arch;
  params.theta.resize(static_cast<std::size_t>(arch.param_count()));
  for (double& w : params.theta) w = scale * rng.normal();
  return params;
}

SimplexVector forward(const ModelParams& params, std::span<const double> input) {
  check_arch(params.arch);
  if (static_cast<int>(input.size()) != params.arch.input_dim) {
    throw std::invalid_argument("forward: input dimension mismatch");
  }
  std::vector<double> hidden;
  std::vector<double> z;
  logits(params, input, hidden, z);
  softmax(z);
  return {std::move(z)};
}

double loss(const ModelParams& params, const LabeledDataset& dataset,
            const ClassTargets& distilled, double gamma) {
  check_arch(params.arch);
  if (dataset.size() == 0) {
    throw std::invalid_argument("loss: empty dataset");
  }
  if (static_cast<int>(distilled.size()) != params.arch.num_classes) {
    throw std::invalid_argument("loss: need one target vector per class");
  }
  const int classes = params.arch.num_classes;
  std::vector<double> hidden;
  std::vector<double> z;
  double total = 0.0;
  for (std::int64_t b = 0; b < dataset.size(); ++b) {
    const int label = dataset.labels[static_cast<std::size_t>(b)];
    logits(params, dataset.row(b), hidden, z);
    const double zv = z[static_cast<std::size_t>(label - 1)];
    const double lse = softmax(z);
    total += lse - zv;  // cross-entropy on the true label
    if (gamma != 0.0) {
      const std::vector<double>& target = distilled[static_cast<std::size_t>(label - 1)];
      double sq = 0.0;
      for (int k = 0; k < classes; ++k) {
        const double d = z[static_cast<std::size_t>(k)] - target[static_cast<std::size_t>(k)];
        sq += d * d;
      }
      total += gamma * sq;
    }
  }
  return total / static_cast<double>(dataset.size());
}

std::vector<double> gradient(const ModelParams& params, const LabeledDataset& dataset,
                             const ClassTargets& distilled, double gamma) {
  check_arch(params.arch);
  if (dataset.size() == 0) {
    throw std::invalid_argument("gradient: empty dataset");
  }
  if (static_cast<int>(distilled.size()) != params.arch.num_classes) {
    throw std::invalid_argument("gradient: need one target vector per class");
  }
  const Architecture& arch = params.arch;
  const int in = arch.input_dim;
  const int classes = arch.num_classes;
  const int h = arch.hidden_dim;
  std::vector<double> grad(params.theta.size(), 0.0);
  std::vector<double> hidden;
  std::vector<double> probs;
  std::vector<double> dz(static_cast<std::size_t>(classes));

  for (std::int64_t b = 0; b < dataset.size(); ++b) {
    const std::span<const double> input = dataset.row(b);
    const int label = dataset.labels[static_cast<std::size_t>(b)];
    logits(params, input, hidden, probs);
    softmax(probs);

    // d(loss)/d(logit): softmax CE plus the quadratic distillation pull
    // through the softmax Jacobian diag(G) - G G^T.
    for (int k = 0; k < classes; ++k) {
      dz[static_cast<std::size_t>(k)] = probs[static_cast<std::size_t>(k)];
    }
    dz[static_cast<std::size_t>(label - 1)] -= 1.0;
    if (gamma != 0.0) {
      const std::vector<double>& target = distilled[static_cast<std::size_t>(label - 1)];
      double dot = 0.0;
      for (int k = 0; k < classes; ++k) {
        dot += probs[static_cast<std::size_t>(k)] *
               (probs[static_cast<std::size_t>(k)] - target[static_cast<std::size_t>(k)]);
      }
      for (int k = 0; k < classes; ++k) {
        const double y = probs[static_cast<std::size_t>(k)] - target[static_cast<std::size_t>(k)];
        dz[static_cast<std::size_t>(k)] +=
            2.0 * gamma * probs[static_cast<std::size_t>(k)] * (y - dot);
      }
    }

    if (h == 0) {
      double* dw = grad.data();
      double* db = dw + static_cast<std::size_t>(classes) * in;
      for (int k = 0; k < classes; ++k) {
        const double g = dz[static_cast<std::size_t>(k)];
        double* row = dw + static_cast<std::size_t>(k) * in;
        for (int d = 0; d < in; ++d) row[d] += g * input[static_cast<std::size_t>(d)];
        db[k] += g;
      }
    } else {
      const double* w2 = params.theta.data() + static_cast<std::size_t>(h) * (in + 1);
      double* dw1 = grad.data();
      double* db1 = dw1 + static_cast<std::size_t>(h) * in;
      double* dw2 = db1 + h;
      double* db2 = dw2 + static_cast<std::size_t>(classes) * h;
      for (int k = 0; k < classes; ++k) {
        const double g = dz[static_cast<std::size_t>(k)];
        double* row = dw2 + static_cast<std::size_t>(k) * h;
        for (int j = 0; j < h; ++j) row[j] += g * hidden[static_cast<std::size_t>(j)];
        db2[k] += g;
      }
      for (int j = 0; j < h; ++j) {
        double back = 0.0;
        for (int k = 0; k < classes; ++k) {
          back += w2[static_cast<std::size_t>(k) * h + j] * dz[static_cast<std::size_t>(k)];
        }
        const double a = hidden[static_cast<std::size_t>(j)];
        const double g = back * (1.0 - a * a);
        double* row = dw1 + static_cast<std::size_t>(j) * in;
        for (int d = 0; d < in; ++d) row[d] += g * input[static_cast<std::size_t>(d)];
        db1[j] += g;
      }
    }
  }

  const double inv_b = 1.0 / static_cast<double>(dataset.size());
  for (double& g : grad) g *= inv_b;
  return grad;
}

double learning_rate(std::int64_t t, double eta0) {
  if (t < 1) {
    throw std::domain_error("learning_rate: rounds are 1-indexed");
  }
  return eta0 / std::sqrt(static_cast<double>(t));
}

ModelParams sgd_step(const ModelParams& params, std::span<const double> grad,
                     std::int64_t t, double eta0) {
  if (grad.size() != params.theta.size()) {
    throw std::invalid_argument("sgd_step: gradient dimension mismatch");
  }
  const double eta = learning_rate(t, eta0);
  ModelParams next = params;
  for (std::size_t i = 0; i < grad.size(); ++i) {
    next.theta[i] -= eta * grad[i];
  }
  return next;
}

double evaluate(const ModelParams& params, const LabeledDataset& test_set) {
  check_arch(params.arch);
  if (test_set.size() == 0) {
    throw std::invalid_argument("evaluate: empty test set");
  }
  std::vector<double> hidden;
  std::vector<double> z;
  std::int64_t correct = 0;
  for (std::int64_t b = 0; b < test_set.size(); ++b) {
    logits(params, test_set.row(b), hidden, z);
    const int predicted =
        static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin()) + 1;
    if (predicted == test_set.labels[static_cast<std::size_t>(b)]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(test_set.size());
}

void save_checkpoint(const ModelParams& params, const std::filesystem::path& path,
                     std::uint64_t seed) {
  nlohmann::json header = {
      {"format", "otafd-model"},
      {"input_dim", params.arch.input_dim},
      {"hidden_dim", params.arch.hidden_dim},
      {"num_classes", params.arch.num_classes},
      {"dim", params.theta.size()},
      {"seed", seed},
  };
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_checkpoint: cannot open " + path.string());
  out << header.dump() << '\n';
  static_assert(std::endian::native == std::endian::little,
                "checkpoint format is little-endian");
  out.write(reinterpret_cast<const char*>(params.theta.data()),
            static_cast<std::streamsize>(params.theta.size() * sizeof(double)));
}

ModelParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  const nlohmann::json header = nlohmann::json::parse(line);
  ModelParams params;
  params.arch.input_dim = header.at("input_dim").get<int>();
  params.arch.hidden_dim = header.at("hidden_dim").get<int>();
  params.arch.num_classes = header.at("num_classes").get<int>();
  const auto dim = header.at("dim").get<std::size_t>();
  if (dim != static_cast<std::size_t>(params.arch.param_count())) {
    throw std::runtime_error("load_checkpoint: dimension disagrees with architecture");
  }
  params.theta.resize(dim);
  in.read(reinterpret_cast<char*>(params.theta.data()),
          static_cast<std::streamsize>(dim * sizeof(double)));
  if (!in) throw std::runtime_error("load_checkpoint: truncated parameter block");
  return params;
}

}  // namespace otafd

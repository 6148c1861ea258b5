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

#ifndef OTAFD_LEARNER_HPP_
#define OTAFD_LEARNER_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "otafd/data.hpp"
#include "otafd/rng.hpp"
#include "otafd/simplex.hpp"

namespace otafd {

// Softmax classifier: linear when hidden_dim == 0, otherwise one tanh hidden
// layer. Small on purpose; the disclosed signal does not depend on model size.
struct Architecture {
  int input_dim = 0;
  int hidden_dim = 0;  // 0 = linear
  int num_classes = 0;

  std::int64_t param_count() const;
};

struct ModelParams {
  Architecture arch;
  std::vector<double> theta;
};

// Per-class distillation targets as broadcast by the server. Entries may lie
// off the simplex (estimation noise); they are consumed raw.
using ClassTargets = std::vector<std::vector<double>>;

ModelParams init_params(const Architecture& arch, double scale, Rng& rng);

// Softmax output G_theta(u).
SimplexVector forward(const ModelParams& params, std::span<const double> input);

// Mean over samples of cross-entropy plus gamma * ||G(u) - target[label]||^2.
double loss(const ModelParams& params, const LabeledDataset& dataset,
            const ClassTargets& distilled, double gamma);

// Exact analytic gradient of `loss`, including the distillation pull
// (2 gamma / B) sum_b J_G(u_b)^T (G(u_b) - target[label_b]).
std::vector<double> gradient(const ModelParams& params, const LabeledDataset& dataset,
                             const ClassTargets& distilled, double gamma);

// eta_t = eta0 / sqrt(t); rounds are 1-indexed.
double learning_rate(std::int64_t t, double eta0);

// theta' = theta - eta_t * grad.
ModelParams sgd_step(const ModelParams& params, std::span<const double> grad,
                     std::int64_t t, double eta0);

// Fraction of argmax-correct predictions; argmax ties break to the lowest
// class index.
double evaluate(const ModelParams& params, const LabeledDataset& test_set);

// Flat little-endian parameter dump with a JSON architecture header.
void save_checkpoint(const ModelParams& params, const std::filesystem::path& path,
                     std::uint64_t seed);
ModelParams load_checkpoint(const std::filesystem::path& path);

}  // namespace otafd

#endif  // OTAFD_LEARNER_HPP_

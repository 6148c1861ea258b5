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

#ifndef OTAFD_DATA_HPP_
#define OTAFD_DATA_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "otafd/rng.hpp"
#include "otafd/transceiver.hpp"

namespace otafd {

// Dense feature matrix with 1-indexed integer labels in 1..K.
struct LabeledDataset {
  int dims = 0;
  int num_classes = 0;
  std::vector<double> features;  // sample-major, size() x dims
  std::vector<int> labels;       // 1..num_classes

  std::int64_t size() const { return static_cast<std::int64_t>(labels.size()); }
  std::span<const double> row(std::int64_t i) const {
    return {features.data() + i * dims, static_cast<std::size_t>(dims)};
  }
  void validate() const;  // throws std::invalid_argument
};

struct PartitionSpec {
  enum class Mode { kIid, kDirichlet };
  Mode mode = Mode::kIid;
  double alpha = 1.0;  // Dirichlet concentration; ignored for iid
  int num_devices = 1;
  std::uint64_t seed = 0;
};

struct PartitionResult {
  std::vector<LabeledDataset> device_data;
  ClassPartition partition;
};

// Gaussian blobs with unit isotropic covariance; class means sit on a regular
// simplex with pairwise distance `separation` (requires dims >= K-1). Exactly
// `per_class` samples per class, class-major order.
LabeledDataset synth_dataset(int num_classes, int dims, std::int64_t per_class,
                             double separation, Rng& rng);

// Splits a dataset across devices. iid: per-class round-robin deal.
// dirichlet: per-class device shares drawn from Dir(alpha,...,alpha) and
// turned into counts by largest-remainder rounding. Every device is left with
// at least one sample overall.
PartitionResult partition(const LabeledDataset& dataset, const PartitionSpec& spec);

// IDX (big-endian) ingestion: images magic 0x00000803 scaled to [0,1], labels
// magic 0x00000801 shifted to 1..K. The pair must agree on the sample count.
LabeledDataset read_idx(const std::filesystem::path& images,
                        const std::filesystem::path& labels);

// Fixture/round-trip support: write a dataset back out as an IDX pair.
// Features must be in [0,1]; they are quantized to bytes.
void write_idx(const LabeledDataset& dataset, const std::filesystem::path& images,
               const std::filesystem::path& labels, int rows, int cols);

// One row per sample, label in the last column.
void write_csv(const LabeledDataset& dataset, const std::filesystem::path& path);

}  // namespace otafd

#endif  // OTAFD_DATA_HPP_

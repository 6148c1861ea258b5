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

#include "otafd/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace otafd {

namespace {

std::uint32_t read_be32(const std::vector<unsigned char>& bytes, std::size_t offset,
                        const std::filesystem::path& path) {
  if (offset + 4 > bytes.size()) {
    throw std::runtime_error("read_idx: " + path.string() + " truncated at offset " +
                             std::to_string(offset));
  }
  return (static_cast<std::uint32_t>(bytes[offset]) << 24) |
         (static_cast<std::uint32_t>(bytes[offset + 1]) << 16) |
         (static_cast<std::uint32_t>(bytes[offset + 2]) << 8) |
         static_cast<std::uint32_t>(bytes[offset + 3]);
}

void write_be32(std::ofstream& out, std::uint32_t v) {
  const unsigned char bytes[4] = {
      static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
      static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
  out.write(reinterpret_cast<const char*>(bytes), 4);
}

std::vector<unsigned char> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("read_idx: cannot open " + path.string());
  }
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

constexpr std::uint32_t kImagesMagic = 0x00000803;
constexpr std::uint32_t kLabelsMagic = 0x00000801;

// Coordinates of the K regular-simplex vertices in R^{K-1} with pairwise
// distance sqrt(2) (Helmert basis of the centered standard basis vectors).
std::vector<double> simplex_vertices(int num_classes) {
  const int dim = num_classes - 1;
  std::vector<double> v(static_cast<std::size_t>(num_classes) * dim, 0.0);
  for (int k = 0; k < num_classes; ++k) {
    for (int j = 1; j <= dim; ++j) {
      const double denom = std::sqrt(static_cast<double>(j) * (j + 1));
      double coord = 0.0;
      if (k < j) {
        coord = 1.0 / denom;
      } else if (k == j) {
        coord = -static_cast<double>(j) / denom;
      }
      v[static_cast<std::size_t>(k) * dim + (j - 1)] = coord;
    }
  }
  return v;
}

}  // namespace

void LabeledDataset::validate() const {
  if (dims < 1 || num_classes < 1) {
    throw std::invalid_argument("LabeledDataset: dims and num_classes must be >= 1");
  }
  if (features.size() != labels.size() * static_cast<std::size_t>(dims)) {
    throw std::invalid_argument("LabeledDataset: feature row count != label count");
  }
  for (int label : labels) {
    if (label < 1 || label > num_classes) {
      throw std::invalid_argument("LabeledDataset: label out of range 1..K");
    }
  }
}

LabeledDataset synth_dataset(int num_classes, int dims, std::int64_t per_class,
                             double separation, Rng& rng) {
  if (num_classes < 1 || per_class < 1) {
    throw std::invalid_argument("synth_dataset: counts must be >= 1");
  }
  if (dims < num_classes - 1) {
    throw std::invalid_argument(
        "synth_dataset: dims must be >= K-1 for an equidistant mean arrangement");
  }
  if (separation < 0.0) {
    throw std::invalid_argument("synth_dataset: separation must be >= 0");
  }
  const std::vector<double> vertices = simplex_vertices(num_classes);
  const int vdim = num_classes - 1;
  const double scale = separation / std::numbers::sqrt2;

  LabeledDataset out;
  out.dims = dims;
  out.num_classes = num_classes;
  out.features.reserve(static_cast<std::size_t>(num_classes) * per_class * dims);
  out.labels.reserve(static_cast<std::size_t>(num_classes) * per_class);
  for (int k = 0; k < num_classes; ++k) {
    for (std::int64_t s = 0; s < per_class; ++s) {
      for (int d = 0; d < dims; ++d) {
        const double mean =
            d < vdim ? scale * vertices[static_cast<std::size_t>(k) * vdim + d] : 0.0;
        out.features.push_back(mean + rng.normal());
      }
      out.labels.push_back(k + 1);
    }
  }
  return out;
}

PartitionResult partition(const LabeledDataset& dataset, const PartitionSpec& spec) {
  dataset.validate();
  const int devices = spec.num_devices;
  if (devices < 1) {
    throw std::invalid_argument("partition: need >= 1 device");
  }
  if (dataset.size() == 0 || dataset.size() < devices) {
    throw std::domain_error("partition: more devices than samples");
  }
  if (spec.mode == PartitionSpec::Mode::kDirichlet && !(spec.alpha > 0.0)) {
    throw std::invalid_argument("partition: dirichlet alpha must be > 0");
  }

  const int classes = dataset.num_classes;
  std::vector<std::vector<std::int64_t>> by_class(static_cast<std::size_t>(classes));
  for (std::int64_t i = 0; i < dataset.size(); ++i) {
    by_class[static_cast<std::size_t>(dataset.labels[static_cast<std::size_t>(i)] - 1)]
        .push_back(i);
  }

  Rng rng(derive_seed(spec.seed, StreamTag::kPartition));
  std::vector<std::vector<std::int64_t>> assigned(static_cast<std::size_t>(devices));

  for (int k = 0; k < classes; ++k) {
    const std::vector<std::int64_t>& members = by_class[static_cast<std::size_t>(k)];
    if (members.empty()) continue;
    if (spec.mode == PartitionSpec::Mode::kIid) {
      for (std::size_t j = 0; j < members.size(); ++j) {
        const int device = static_cast<int>((j + static_cast<std::size_t>(k)) % devices);
        assigned[static_cast<std::size_t>(device)].push_back(members[j]);
      }
    } else {
      // Shares ~ Dir(alpha): normalized Gamma(alpha) draws, then
      // largest-remainder rounding so counts sum exactly.
      std::vector<double> share(static_cast<std::size_t>(devices));
      double total = 0.0;
      for (double& s : share) {
        s = rng.gamma(spec.alpha);
        total += s;
      }
      const auto count = static_cast<double>(members.size());
      std::vector<std::int64_t> quota(static_cast<std::size_t>(devices));
      std::vector<std::pair<double, int>> remainder;
      std::int64_t given = 0;
      for (int i = 0; i < devices; ++i) {
        const double exact = share[static_cast<std::size_t>(i)] / total * count;
        quota[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(std::floor(exact));
        given += quota[static_cast<std::size_t>(i)];
        remainder.emplace_back(exact - std::floor(exact), i);
      }
      std::sort(remainder.begin(), remainder.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
      });
      for (std::int64_t r = 0; r < static_cast<std::int64_t>(members.size()) - given; ++r) {
        ++quota[static_cast<std::size_t>(remainder[static_cast<std::size_t>(r)].second)];
      }
      std::size_t cursor = 0;
      for (int i = 0; i < devices; ++i) {
        for (std::int64_t c = 0; c < quota[static_cast<std::size_t>(i)]; ++c) {
          assigned[static_cast<std::size_t>(i)].push_back(members[cursor++]);
        }
      }
    }
  }

  // Every device must end up with at least one sample overall.
  for (int i = 0; i < devices; ++i) {
    while (assigned[static_cast<std::size_t>(i)].empty()) {
      int donor = 0;
      for (int j = 1; j < devices; ++j) {
        if (assigned[static_cast<std::size_t>(j)].size() >
            assigned[static_cast<std::size_t>(donor)].size()) {
          donor = j;
        }
      }
      assigned[static_cast<std::size_t>(i)].push_back(
          assigned[static_cast<std::size_t>(donor)].back());
      assigned[static_cast<std::size_t>(donor)].pop_back();
    }
  }

  PartitionResult result;
  std::vector<std::int64_t> counts(static_cast<std::size_t>(devices) * classes, 0);
  result.device_data.reserve(static_cast<std::size_t>(devices));
  for (int i = 0; i < devices; ++i) {
    LabeledDataset local;
    local.dims = dataset.dims;
    local.num_classes = classes;
    for (std::int64_t idx : assigned[static_cast<std::size_t>(i)]) {
      const std::span<const double> row = dataset.row(idx);
      local.features.insert(local.features.end(), row.begin(), row.end());
      const int label = dataset.labels[static_cast<std::size_t>(idx)];
      local.labels.push_back(label);
      ++counts[static_cast<std::size_t>(i) * classes + (label - 1)];
    }
    result.device_data.push_back(std::move(local));
  }
  result.partition = ClassPartition::from_counts(devices, classes, std::move(counts));
  return result;
}

LabeledDataset read_idx(const std::filesystem::path& images,
                        const std::filesystem::path& labels) {
  const std::vector<unsigned char> img = slurp(images);
  const std::vector<unsigned char> lbl = slurp(labels);

  const std::uint32_t img_magic = read_be32(img, 0, images);
  if (img_magic != kImagesMagic) {
    char msg[128];
    std::snprintf(msg, sizeof(msg),
                  "read_idx: bad images magic 0x%08x at offset 0 in %s", img_magic,
                  images.string().c_str());
    throw std::runtime_error(msg);
  }
  const std::uint32_t count = read_be32(img, 4, images);
  const std::uint32_t rows = read_be32(img, 8, images);
  const std::uint32_t cols = read_be32(img, 12, images);
  const std::size_t pixels = static_cast<std::size_t>(count) * rows * cols;
  if (img.size() != 16 + pixels) {
    throw std::runtime_error("read_idx: " + images.string() + " truncated at offset 16: expected " +
                             std::to_string(16 + pixels) + " bytes, got " +
                             std::to_string(img.size()));
  }

  const std::uint32_t lbl_magic = read_be32(lbl, 0, labels);
  if (lbl_magic != kLabelsMagic) {
    char msg[128];
    std::snprintf(msg, sizeof(msg),
                  "read_idx: bad labels magic 0x%08x at offset 0 in %s", lbl_magic,
                  labels.string().c_str());
    throw std::runtime_error(msg);
  }
  const std::uint32_t lbl_count = read_be32(lbl, 4, labels);
  if (lbl.size() != 8 + lbl_count) {
    throw std::runtime_error("read_idx: " + labels.string() + " truncated at offset 8");
  }
  if (lbl_count != count) {
    throw std::runtime_error("read_idx: image/label count mismatch (" +
                             std::to_string(count) + " vs " + std::to_string(lbl_count) + ")");
  }

  LabeledDataset out;
  out.dims = static_cast<int>(rows * cols);
  out.features.resize(pixels);
  out.labels.resize(count);
  int max_label = 0;
  for (std::size_t i = 0; i < pixels; ++i) {
    out.features[i] = static_cast<double>(img[16 + i]) / 255.0;
  }
  for (std::uint32_t i = 0; i < count; ++i) {
    out.labels[i] = static_cast<int>(lbl[8 + i]) + 1;  // 1-indexed classes
    max_label = std::max(max_label, out.labels[i]);
  }
  out.num_classes = std::max(max_label, 1);
  return out;
}

void write_idx(const LabeledDataset& dataset, const std::filesystem::path& images,
               const std::filesystem::path& labels, int rows, int cols) {
  dataset.validate();
  if (rows * cols != dataset.dims) {
    throw std::invalid_argument("write_idx: rows*cols must equal dims");
  }
  std::ofstream img(images, std::ios::binary);
  std::ofstream lbl(labels, std::ios::binary);
  if (!img || !lbl) {
    throw std::runtime_error("write_idx: cannot open output files");
  }
  write_be32(img, kImagesMagic);
  write_be32(img, static_cast<std::uint32_t>(dataset.size()));
  write_be32(img, static_cast<std::uint32_t>(rows));
  write_be32(img, static_cast<std::uint32_t>(cols));
  for (double f : dataset.features) {
    if (f < 0.0 || f > 1.0) {
      throw std::invalid_argument("write_idx: features must lie in [0,1]");
    }
    img.put(static_cast<char>(std::lround(f * 255.0)));
  }
  write_be32(lbl, kLabelsMagic);
  write_be32(lbl, static_cast<std::uint32_t>(dataset.size()));
  for (int label : dataset.labels) {
    lbl.put(static_cast<char>(label - 1));
  }
}

void write_csv(const LabeledDataset& dataset, const std::filesystem::path& path) {
  dataset.validate();
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("write_csv: cannot open " + path.string());
  }
  char buf[32];
  for (std::int64_t i = 0; i < dataset.size(); ++i) {
    const std::span<const double> row = dataset.row(i);
    for (double f : row) {
      std::snprintf(buf, sizeof(buf), "%.17g", f);
      out << buf << ',';
    }
    out << dataset.labels[static_cast<std::size_t>(i)] << '\n';
  }
}

}  // namespace otafd

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

#ifndef OTAFD_SIMPLEX_HPP_
#define OTAFD_SIMPLEX_HPP_

#include <span>
#include <vector>

#include "otafd/rng.hpp"

namespace otafd {

// A point on the probability simplex: entries >= 0, sum == 1 within kSumTol.
struct SimplexVector {
  std::vector<double> probs;

  int size() const { return static_cast<int>(probs.size()); }
  double operator[](int k) const { return probs[static_cast<std::size_t>(k)]; }

  static constexpr double kSumTol = 1e-9;
  bool valid() const;
};

// Uniform draw from the K-simplex (normalized i.i.d. exponentials).
SimplexVector sample_simplex(int num_classes, Rng& rng);

// Euclidean distance between two points with matching dimension.
double simplex_distance(const SimplexVector& a, const SimplexVector& b);

// The uniform vector (1/K, ..., 1/K); placeholder knowledge for classes
// nobody holds samples of.
SimplexVector uniform_simplex(int num_classes);

}  // namespace otafd

#endif  // OTAFD_SIMPLEX_HPP_

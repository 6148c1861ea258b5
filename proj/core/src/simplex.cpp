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

#include "otafd/simplex.hpp"

#include <cmath>
#include <stdexcept>

namespace otafd {

bool SimplexVector::valid() const {
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) return false;
    sum += p;
  }
  return std::abs(sum - 1.0) <= kSumTol;
}

SimplexVector sample_simplex(int num_classes, Rng& rng) {
  if (num_classes < 1) {
    throw std::domain_error("sample_simplex: num_classes must be >= 1");
  }
  SimplexVector v;
  v.probs.resize(static_cast<std::size_t>(num_classes));
  double sum = 0.0;
  for (double& p : v.probs) {
    // -log(1-u) is Exp(1); 1-u avoids log(0).
    p = -std::log(1.0 - rng.uniform());
    sum += p;
  }
  for (double& p : v.probs) p /= sum;
  return v;
}

double simplex_distance(const SimplexVector& a, const SimplexVector& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("simplex_distance: dimension mismatch");
  }
  double sq = 0.0;
  for (int k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    sq += d * d;
  }
  return std::sqrt(sq);
}

SimplexVector uniform_simplex(int num_classes) {
  SimplexVector v;
  v.probs.assign(static_cast<std::size_t>(num_classes), 1.0 / num_classes);
  return v;
}

}  // namespace otafd

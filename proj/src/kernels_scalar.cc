// Copyright 2026 The DPEM Authors
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

#include "kernels_internal.h"

namespace dpem::kernels::internal {

double DotScalar(const double* a, const double* b, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

double WeightedDotScalar(const double* w, const double* a, const double* b,
                         std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += w[i] * a[i] * b[i];
  return sum;
}

void SquaredDistancesScalar(const double* x, std::size_t ld, std::size_t n,
                            std::size_t d, const double* center, double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      const double diff = x[c * ld + i] - center[c];
      sum += diff * diff;
    }
    out[i] = sum;
  }
}

void MahalanobisScalar(const double* x, std::size_t ld, std::size_t n,
                       std::size_t d, const double* mean,
                       const double* whitening, double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    double q = 0.0;
    for (std::size_t r = 0; r < d; ++r) {
      const double* w_row = whitening + r * d;
      double y = 0.0;
      for (std::size_t c = 0; c <= r; ++c) {
        y += w_row[c] * (x[c * ld + i] - mean[c]);
      }
      q += y * y;
    }
    out[i] = q;
  }
}

}  // namespace dpem::kernels::internal

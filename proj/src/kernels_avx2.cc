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

#include <immintrin.h>

#include "kernels_internal.h"

namespace dpem::kernels::internal {
namespace {

inline double HorizontalSum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
}

}  // namespace

double DotAvx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4),
                           _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  double sum = HorizontalSum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

double WeightedDotAvx2(const double* w, const double* a, const double* b,
                       std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d wa0 = _mm256_mul_pd(_mm256_loadu_pd(w + i), _mm256_loadu_pd(a + i));
    const __m256d wa1 =
        _mm256_mul_pd(_mm256_loadu_pd(w + i + 4), _mm256_loadu_pd(a + i + 4));
    acc0 = _mm256_fmadd_pd(wa0, _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(wa1, _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    const __m256d wa = _mm256_mul_pd(_mm256_loadu_pd(w + i), _mm256_loadu_pd(a + i));
    acc0 = _mm256_fmadd_pd(wa, _mm256_loadu_pd(b + i), acc0);
  }
  double sum = HorizontalSum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) sum += w[i] * a[i] * b[i];
  return sum;
}

void SquaredDistancesAvx2(const double* x, std::size_t ld, std::size_t n,
                          std::size_t d, const double* center, double* out) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d sum = _mm256_setzero_pd();
    for (std::size_t c = 0; c < d; ++c) {
      const __m256d diff = _mm256_sub_pd(_mm256_loadu_pd(x + c * ld + i),
                                         _mm256_set1_pd(center[c]));
      sum = _mm256_fmadd_pd(diff, diff, sum);
    }
    _mm256_storeu_pd(out + i, sum);
  }
  if (i < n) SquaredDistancesScalar(x + i, ld, n - i, d, center, out + i);
}

void MahalanobisAvx2(const double* x, std::size_t ld, std::size_t n,
                     std::size_t d, const double* mean,
                     const double* whitening, double* out) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d q = _mm256_setzero_pd();
    for (std::size_t r = 0; r < d; ++r) {
      const double* w_row = whitening + r * d;
      __m256d y = _mm256_setzero_pd();
      for (std::size_t c = 0; c <= r; ++c) {
        const __m256d diff = _mm256_sub_pd(_mm256_loadu_pd(x + c * ld + i),
                                           _mm256_set1_pd(mean[c]));
        y = _mm256_fmadd_pd(_mm256_set1_pd(w_row[c]), diff, y);
      }
      q = _mm256_fmadd_pd(y, y, q);
    }
    _mm256_storeu_pd(out + i, q);
  }
  if (i < n) MahalanobisScalar(x + i, ld, n - i, d, mean, whitening, out + i);
}

}  // namespace dpem::kernels::internal

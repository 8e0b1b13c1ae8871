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

#ifndef DPEM_SRC_KERNELS_INTERNAL_H_
#define DPEM_SRC_KERNELS_INTERNAL_H_

// Plain declarations only. kernels_avx2.cc is compiled with -mavx2 and
// includes nothing else from the project.

#include <cstddef>

namespace dpem::kernels::internal {

double DotScalar(const double* a, const double* b, std::size_t n);
double WeightedDotScalar(const double* w, const double* a, const double* b,
                         std::size_t n);
void SquaredDistancesScalar(const double* x, std::size_t ld, std::size_t n,
                            std::size_t d, const double* center, double* out);
void MahalanobisScalar(const double* x, std::size_t ld, std::size_t n,
                       std::size_t d, const double* mean,
                       const double* whitening, double* out);

double DotAvx2(const double* a, const double* b, std::size_t n);
double WeightedDotAvx2(const double* w, const double* a, const double* b,
                       std::size_t n);
void SquaredDistancesAvx2(const double* x, std::size_t ld, std::size_t n,
                          std::size_t d, const double* center, double* out);
void MahalanobisAvx2(const double* x, std::size_t ld, std::size_t n,
                     std::size_t d, const double* mean,
                     const double* whitening, double* out);

}  // namespace dpem::kernels::internal

#endif  // DPEM_SRC_KERNELS_INTERNAL_H_

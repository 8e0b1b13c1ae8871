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

#ifndef DPEM_KERNELS_H_
#define DPEM_KERNELS_H_

// Data-parallel inner loops shared by the estimators. Each kernel has a
// portable scalar reference and, on x86-64, an AVX2/FMA variant; the variant
// is chosen once at startup from CPU features and may be overridden with the
// DPEM_KERNELS environment variable ("scalar" or "avx2").

#include <cstddef>
#include <span>
#include <string_view>

#include "Eigen/Core"

namespace dpem::kernels {

enum class Isa { kScalar, kAvx2 };

// Column-major view of an n x d block: column c starts at data + c * ld.
struct ColumnBlock {
  const double* data = nullptr;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t ld = 0;

  static ColumnBlock Of(const Eigen::MatrixXd& m) {
    return {m.data(), static_cast<std::size_t>(m.rows()),
            static_cast<std::size_t>(m.cols()),
            static_cast<std::size_t>(m.outerStride())};
  }
};

struct KernelTable {
  Isa isa;
  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // sum_i w[i] * a[i] * b[i]
  double (*weighted_dot)(const double* w, const double* a, const double* b,
                         std::size_t n);
  // out[i] = || x_i - center ||^2 for the n rows of a column-major block.
  void (*squared_distances)(const double* x, std::size_t ld, std::size_t n,
                            std::size_t d, const double* center, double* out);
  // out[i] = || W (x_i - mean) ||^2 with W a row-major lower-triangular d x d
  // whitening matrix (the inverse Cholesky factor of a covariance).
  void (*mahalanobis)(const double* x, std::size_t ld, std::size_t n,
                      std::size_t d, const double* mean,
                      const double* whitening, double* out);
};

std::string_view IsaName(Isa isa);

// True when the variant was compiled in and the running CPU supports it.
bool Available(Isa isa);

// Precondition: Available(isa).
const KernelTable& Table(Isa isa);

Isa ActiveIsa();

// Returns false (and leaves the selection unchanged) if `isa` is unavailable.
bool SetActiveIsa(Isa isa);

inline std::span<const double> AsSpan(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

double Dot(std::span<const double> a, std::span<const double> b);
double WeightedDot(std::span<const double> w, std::span<const double> a,
                   std::span<const double> b);
void SquaredDistances(ColumnBlock x, std::span<const double> center,
                      std::span<double> out);
void Mahalanobis(ColumnBlock x, std::span<const double> mean,
                 std::span<const double> whitening, std::span<double> out);

}  // namespace dpem::kernels

#endif  // DPEM_KERNELS_H_

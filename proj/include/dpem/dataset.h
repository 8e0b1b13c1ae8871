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

#ifndef DPEM_DATASET_H_
#define DPEM_DATASET_H_

#include <span>

#include "Eigen/Core"
#include "absl/status/statusor.h"
#include "dpem/noise.h"

namespace dpem {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Rows may exceed the unit ball by at most this much and still be accepted.
inline constexpr double kNormTolerance = 1e-12;

// An N x d data matrix whose rows all lie in the closed unit L2 ball. Rows are
// stored column-major, so every feature column is contiguous across points;
// the batch kernels in kernels.h rely on that layout.
class BoundedDataset {
 public:
  // Validates `rows` (finite, non-empty, all row norms <= 1 + kNormTolerance).
  static absl::StatusOr<BoundedDataset> Create(Matrix rows, double scale = 1.0);

  const Matrix& rows() const { return rows_; }
  int n() const { return static_cast<int>(rows_.rows()); }
  int d() const { return static_cast<int>(rows_.cols()); }

  // Divisor applied to the raw rows by Preprocess; multiply to map back.
  double scale() const { return scale_; }

  BoundedDataset Subset(std::span<const int> row_indices) const;

 private:
  BoundedDataset(Matrix rows, double scale)
      : rows_(std::move(rows)), scale_(scale) {}

  Matrix rows_;
  double scale_ = 1.0;
};

// Divides every row by the largest row norm when that norm exceeds one.
// Rejects non-finite entries, naming the offending row.
absl::StatusOr<BoundedDataset> Preprocess(const Matrix& raw);

// Uniform draw from the closed unit L2 ball in R^d.
Vector RandomPointInUnitBall(int d, Rng& rng);

}  // namespace dpem

#endif  // DPEM_DATASET_H_

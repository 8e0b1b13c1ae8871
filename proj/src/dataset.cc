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

#include "dpem/dataset.h"

#include <cmath>
#include <random>
#include <string>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace dpem {
namespace {

absl::Status CheckFinite(const Matrix& rows) {
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    for (Eigen::Index j = 0; j < rows.cols(); ++j) {
      if (!std::isfinite(rows(i, j))) {
        return absl::InvalidArgumentError(
            absl::StrCat("non-finite value in row ", i, ", column ", j));
      }
    }
  }
  return absl::OkStatus();
}

}  // namespace

absl::StatusOr<BoundedDataset> BoundedDataset::Create(Matrix rows,
                                                      double scale) {
  if (rows.rows() < 1 || rows.cols() < 1) {
    return absl::InvalidArgumentError("dataset must have n >= 1 and d >= 1");
  }
  if (absl::Status s = CheckFinite(rows); !s.ok()) return s;
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    const double norm = rows.row(i).norm();
    if (norm > 1.0 + kNormTolerance) {
      return absl::InvalidArgumentError(absl::StrCat(
          "row ", i, " has L2 norm ", norm, " outside the unit ball"));
    }
  }
  return BoundedDataset(std::move(rows), scale);
}

BoundedDataset BoundedDataset::Subset(std::span<const int> row_indices) const {
  Matrix out(static_cast<Eigen::Index>(row_indices.size()), rows_.cols());
  for (std::size_t i = 0; i < row_indices.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = rows_.row(row_indices[i]);
  }
  return BoundedDataset(std::move(out), scale_);
}

absl::StatusOr<BoundedDataset> Preprocess(const Matrix& raw) {
  if (raw.rows() < 1 || raw.cols() < 1) {
    return absl::InvalidArgumentError("dataset must have n >= 1 and d >= 1");
  }
  if (absl::Status s = CheckFinite(raw); !s.ok()) return s;
  const double max_norm = raw.rowwise().norm().maxCoeff();
  if (max_norm <= 1.0 + kNormTolerance) {
    return BoundedDataset::Create(raw, 1.0);
  }
  return BoundedDataset::Create(raw / max_norm, max_norm);
}

Vector RandomPointInUnitBall(int d, Rng& rng) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform;
  Vector direction(d);
  double norm = 0.0;
  while (norm == 0.0) {
    for (int j = 0; j < d; ++j) direction(j) = normal(rng);
    norm = direction.norm();
  }
  const double radius = std::pow(uniform(rng), 1.0 / d);
  return direction * (radius / norm);
}

}  // namespace dpem

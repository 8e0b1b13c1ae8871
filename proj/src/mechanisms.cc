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

#include "dpem/mechanisms.h"

#include <algorithm>
#include <cmath>

#include "Eigen/Eigenvalues"
#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace dpem {
namespace {

constexpr double kSymmetryTolerance = 1e-12;

bool AllFinite(const Matrix& m) { return m.allFinite(); }

FlooredSensitivity FlooredCount(double numerator, double noised_count,
                                double denominator_shift) {
  FlooredSensitivity out;
  double count = noised_count;
  if (!(count > kNoisedCountFloor)) {
    count = kNoisedCountFloor;
    out.floored = true;
  }
  out.sensitivity = numerator / (count + denominator_shift);
  return out;
}

}  // namespace

int AccountingTrace::FlooredCount() const {
  return static_cast<int>(std::count_if(
      records.begin(), records.end(),
      [](const TraceRecord& r) { return r.count_floored; }));
}

absl::Status ValidateSpec(const MechanismSpec& spec) {
  if (!(spec.noise_scale > 0.0) || !std::isfinite(spec.noise_scale)) {
    return absl::InvalidArgumentError(
        absl::StrCat("noise scale must be positive, got ", spec.noise_scale));
  }
  if (!(spec.sensitivity >= 0.0) || !std::isfinite(spec.sensitivity)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "sensitivity must be non-negative, got ", spec.sensitivity));
  }
  return absl::OkStatus();
}

absl::StatusOr<double> GaussianSigma(double sensitivity, double eps_i,
                                     double delta_i) {
  if (!(eps_i > 0.0) || !(eps_i < 1.0)) {
    return absl::OutOfRangeError(absl::StrCat(
        "Gaussian mechanism needs 0 < eps_i < 1, got ", eps_i));
  }
  if (!(delta_i > 0.0) || !(delta_i < 1.0)) {
    return absl::OutOfRangeError(
        absl::StrCat("Gaussian mechanism needs 0 < delta_i < 1, got ", delta_i));
  }
  if (!(sensitivity >= 0.0)) {
    return absl::InvalidArgumentError("sensitivity must be non-negative");
  }
  return sensitivity * std::sqrt(2.0 * std::log(1.25 / delta_i)) / eps_i;
}

double WeightsSensitivity(int n) { return 2.0 / static_cast<double>(n); }

FlooredSensitivity MeanSensitivity(MechanismKind kind, int d,
                                   double noised_count,
                                   double denominator_shift) {
  const double numerator =
      kind == MechanismKind::kLaplace ? 2.0 * std::sqrt(static_cast<double>(d))
                                      : 2.0;
  return FlooredCount(numerator, noised_count, denominator_shift);
}

FlooredSensitivity CovarianceSensitivity(double noised_count,
                                         double denominator_shift) {
  return FlooredCount(2.0, noised_count, denominator_shift);
}

Vector ProjectToSimplex(const Vector& noisy) {
  Vector clipped = noisy.cwiseMax(0.0).cwiseMin(1.0);
  const double total = clipped.sum();
  if (!(total > 0.0)) {
    return Vector::Constant(noisy.size(), 1.0 / static_cast<double>(noisy.size()));
  }
  return clipped / total;
}

absl::StatusOr<Vector> PerturbSimplex(const Vector& weights,
                                      const MechanismSpec& spec,
                                      NoiseSource& noise) {
  if (absl::Status s = ValidateSpec(spec); !s.ok()) return s;
  Vector noisy = weights;
  for (Eigen::Index k = 0; k < noisy.size(); ++k) {
    noisy[k] += spec.kind == MechanismKind::kLaplace
                    ? noise.Laplace(spec.noise_scale)
                    : noise.Gaussian(spec.noise_scale);
  }
  return ProjectToSimplex(noisy);
}

absl::StatusOr<Vector> PerturbMean(const Vector& mean,
                                   const MechanismSpec& spec,
                                   NoiseSource& noise) {
  if (absl::Status s = ValidateSpec(spec); !s.ok()) return s;
  Vector noisy = mean;
  for (Eigen::Index c = 0; c < noisy.size(); ++c) {
    noisy[c] += spec.kind == MechanismKind::kLaplace
                    ? noise.Laplace(spec.noise_scale)
                    : noise.Gaussian(spec.noise_scale);
  }
  return noisy;
}

absl::StatusOr<Matrix> PsdProject(const Matrix& mat, double floor) {
  if (mat.rows() != mat.cols()) {
    return absl::InvalidArgumentError("PSD projection needs a square matrix");
  }
  if (!AllFinite(mat)) {
    return absl::InvalidArgumentError("PSD projection input is not finite");
  }
  if (!(floor >= 0.0)) {
    return absl::InvalidArgumentError("PSD floor must be non-negative");
  }
  const Matrix sym = 0.5 * (mat + mat.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  if (eig.info() != Eigen::Success) {
    return absl::InternalError("eigendecomposition failed");
  }
  if (eig.eigenvalues().minCoeff() >= floor) return sym;
  const Vector clamped = eig.eigenvalues().cwiseMax(floor);
  const Matrix rebuilt = eig.eigenvectors() * clamped.asDiagonal() *
                         eig.eigenvectors().transpose();
  return Matrix(0.5 * (rebuilt + rebuilt.transpose()));
}

absl::StatusOr<Matrix> AnalyzeGaussPerturb(const Matrix& cov,
                                           const MechanismSpec& spec,
                                           NoiseSource& noise,
                                           double psd_floor) {
  if (spec.kind != MechanismKind::kGaussian) {
    return absl::InvalidArgumentError("Analyze Gauss needs a Gaussian spec");
  }
  if (absl::Status s = ValidateSpec(spec); !s.ok()) return s;
  if (cov.rows() != cov.cols()) {
    return absl::InvalidArgumentError("covariance must be square");
  }
  if (!AllFinite(cov)) {
    return absl::InvalidArgumentError("covariance is not finite");
  }
  const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() >
      kSymmetryTolerance * scale) {
    return absl::InvalidArgumentError("covariance is not symmetric");
  }
  Matrix noisy = 0.5 * (cov + cov.transpose());
  const Eigen::Index d = cov.rows();
  for (Eigen::Index r = 0; r < d; ++r) {
    for (Eigen::Index c = r; c < d; ++c) {
      const double z = noise.Gaussian(spec.noise_scale);
      noisy(r, c) += z;
      if (c != r) noisy(c, r) += z;
    }
  }
  return PsdProject(noisy, psd_floor);
}

}  // namespace dpem

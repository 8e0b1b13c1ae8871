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

#ifndef DPEM_MECHANISMS_H_
#define DPEM_MECHANISMS_H_

#include <cstddef>
#include <vector>

#include "absl/status/statusor.h"
#include "dpem/dataset.h"
#include "dpem/noise.h"

namespace dpem {

inline constexpr double kDefaultPsdFloor = 1e-6;

// Noised counts below this many effective points are raised to it before they
// enter a sensitivity denominator.
inline constexpr double kNoisedCountFloor = 1.0;

enum class MechanismKind { kLaplace, kGaussian };

// `sensitivity` is L1 for Laplace and L2 (Frobenius for matrices) for
// Gaussian. `noise_scale` is the Laplace scale b or the Gaussian stddev.
struct MechanismSpec {
  MechanismKind kind = MechanismKind::kGaussian;
  double sensitivity = 0.0;
  double noise_scale = 1.0;

  // Per-entry variance of a Gaussian release (the Analyze Gauss beta).
  double variance() const { return noise_scale * noise_scale; }
};

absl::Status ValidateSpec(const MechanismSpec& spec);

// Which statistic a mechanism invocation released.
enum class ReleasedQuantity {
  kWeights,
  kMean,
  kCovariance,
  kSecondMoment,
  kLloydUpdate,
};

struct TraceRecord {
  ReleasedQuantity quantity = ReleasedQuantity::kWeights;
  int iteration = 0;
  int component = -1;  // -1 when the release covers all components
  MechanismSpec spec;
  double delta = 0.0;  // zero for pure (Laplace) releases
  bool count_floored = false;
};

// Ordered log of every mechanism invocation of a run. Any composition method
// can recompute the run's total spend from it (see ComposeTrace).
struct AccountingTrace {
  std::vector<TraceRecord> records;

  std::size_t size() const { return records.size(); }
  int FlooredCount() const;
};

// Smallest Gaussian stddev meeting (eps_i, delta_i)-DP for an L2 sensitivity:
// sensitivity * sqrt(2 log(1.25 / delta_i)) / eps_i. Requires 0 < eps_i < 1
// and 0 < delta_i < 1. A zero sensitivity yields 0 (nothing to noise).
absl::StatusOr<double> GaussianSigma(double sensitivity, double eps_i,
                                     double delta_i);

// L1 sensitivity of the mixing weights under one-row replacement.
double WeightsSensitivity(int n);

struct FlooredSensitivity {
  double sensitivity = 0.0;
  bool floored = false;
};

// Mean sensitivity given a noised count: 2 sqrt(d) / count for Laplace (L1)
// and 2 / count for Gaussian (L2). `denominator_shift` is kappa0 for MAP.
FlooredSensitivity MeanSensitivity(MechanismKind kind, int d,
                                   double noised_count,
                                   double denominator_shift = 0.0);

// Frobenius sensitivity 2 / count of a covariance built from a noised count.
// `denominator_shift` is nu0 + d + 2 for MAP.
FlooredSensitivity CovarianceSensitivity(double noised_count,
                                         double denominator_shift = 0.0);

// Clips every coordinate to [0, 1] and renormalizes; all-zero falls back to
// uniform weights.
Vector ProjectToSimplex(const Vector& noisy);

// Adds i.i.d. noise to each weight, then ProjectToSimplex.
absl::StatusOr<Vector> PerturbSimplex(const Vector& weights,
                                      const MechanismSpec& spec,
                                      NoiseSource& noise);

// Adds i.i.d. noise to each coordinate; no projection.
absl::StatusOr<Vector> PerturbMean(const Vector& mean,
                                   const MechanismSpec& spec,
                                   NoiseSource& noise);

// Eigenvalues below `floor` are raised to `floor`. Input already at or above
// the floor is returned unchanged. The input's symmetric part is used.
absl::StatusOr<Matrix> PsdProject(const Matrix& mat, double floor);

// Analyze Gauss: d(d+1)/2 i.i.d. N(0, spec.variance()) draws fill the upper
// triangle (row by row, diagonal included) and are mirrored; the sum is then
// projected with PsdProject. Rejects non-symmetric input and non-Gaussian
// specs. The result is exactly symmetric.
absl::StatusOr<Matrix> AnalyzeGaussPerturb(const Matrix& cov,
                                           const MechanismSpec& spec,
                                           NoiseSource& noise,
                                           double psd_floor = kDefaultPsdFloor);

}  // namespace dpem

#endif  // DPEM_MECHANISMS_H_

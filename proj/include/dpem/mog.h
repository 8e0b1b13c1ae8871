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

#ifndef DPEM_MOG_H_
#define DPEM_MOG_H_

// Non-private mixture-of-Gaussians EM: E-step, MLE and MAP M-steps, the data
// log-likelihood, initialization, and a fixed-iteration driver. The DP-EM
// driver in dpem_mog.h wraps these pieces.

#include <cstdint>
#include <vector>

#include "absl/status/statusor.h"
#include "dpem/dataset.h"
#include "dpem/mechanisms.h"
#include "dpem/noise.h"

namespace dpem {

struct MoGParams {
  Vector weights;
  std::vector<Vector> means;
  std::vector<Matrix> covariances;

  int components() const { return static_cast<int>(weights.size()); }
  int dim() const { return means.empty() ? 0 : static_cast<int>(means[0].size()); }
};

// Simplex weights (sum within 1e-9), consistent shapes, symmetric covariances
// (within 1e-9) whose smallest eigenvalue is at least psd_floor up to
// rounding of the eigensolver.
absl::Status ValidateMoGParams(const MoGParams& params,
                               double psd_floor = kDefaultPsdFloor);

struct Responsibilities {
  Matrix gamma;   // N x K
  Vector counts;  // N_k = sum_i gamma(i, k)
};

struct MapPrior {
  Vector alpha;  // Dirichlet concentration per component
  double kappa0 = 1.0;
  double nu0 = 1.0;
  Matrix s0;

  // alpha = 2, kappa0 = 1, nu0 = d + 2, S0 = 0.1 I.
  static MapPrior Default(int k, int d);
};

absl::Status ValidatePrior(const MapPrior& prior, int k, int d);

enum class Estimator { kMle, kMap };

// A component whose N_k is at or below this fraction of N is degenerate.
inline constexpr double kDegenerateCountFraction = 1e-8;

// Responsibility-weighted sufficient statistics of each component.
struct ComponentMoments {
  Vector counts;              // sum_i gamma_ik
  std::vector<Vector> first;  // sum_i gamma_ik x_i
  std::vector<Matrix> second;  // sum_i gamma_ik x_i x_i^T
};

ComponentMoments AccumulateMoments(const BoundedDataset& data,
                                   const Responsibilities& resp);

// N x K matrix of log pi_k + log N(x_i | mu_k, Sigma_k).
absl::StatusOr<Matrix> WeightedLogDensities(const BoundedDataset& data,
                                            const MoGParams& params);

absl::StatusOr<Responsibilities> EStep(const BoundedDataset& data,
                                       const MoGParams& params);

// Total log-likelihood sum_i log sum_k pi_k N(x_i | mu_k, Sigma_k).
absl::StatusOr<double> LogLikelihood(const BoundedDataset& data,
                                     const MoGParams& params);

// LogLikelihood / N.
absl::StatusOr<double> LogLikelihoodPerPoint(const BoundedDataset& data,
                                             const MoGParams& params);

// second / count - mean mean^T.
Matrix CovarianceFromMoments(const Matrix& second, const Vector& mean,
                             double count);

// (N pi_k + alpha_k - 1) / (N + sum alpha - K), from MLE weights.
Vector MapWeights(const Vector& mle_weights, int n, const MapPrior& prior);

// (S0 + second - count m m^T + kappa0 count / (kappa0 + count) m m^T)
//   / (nu0 + count + d + 2), where m is the MLE mean. A zero count gives
// S0 / (nu0 + d + 2).
Matrix MapCovariance(const Matrix& second, const Vector& mle_mean,
                     double count, const MapPrior& prior);

// pi_k = N_k / N, mu_k = S1 / N_k, Sigma_k = S2 / N_k - mu mu^T projected at
// psd_floor. Fails with FailedPrecondition naming the first degenerate
// component.
absl::StatusOr<MoGParams> MStepMle(const BoundedDataset& data,
                                   const Responsibilities& resp,
                                   double psd_floor = kDefaultPsdFloor);

// MAP update under `prior`. Empty components keep their prior mass.
absl::StatusOr<MoGParams> MStepMap(const BoundedDataset& data,
                                   const Responsibilities& resp,
                                   const MapPrior& prior,
                                   double psd_floor = kDefaultPsdFloor);

// k-means++ seeding of the means, the global covariance for every component,
// uniform weights. Reads the data, so it is only for non-private fits.
absl::StatusOr<MoGParams> InitializeKMeansPlusPlus(
    const BoundedDataset& data, int k, Rng& rng,
    double psd_floor = kDefaultPsdFloor);

// Means uniform in the unit ball, covariances variance * I, uniform weights.
MoGParams InitializeDataIndependent(int k, int d, double variance, Rng& rng);

struct EmOptions {
  int iterations = 20;
  Estimator estimator = Estimator::kMle;
  MapPrior prior;  // used when estimator == kMap; empty means Default(k, d)
  double psd_floor = kDefaultPsdFloor;
  std::uint64_t seed = 0;  // drives degenerate-component reinitialization
};

struct EmResult {
  MoGParams params;
  // log_likelihoods[j] is the total log-likelihood after j iterations.
  std::vector<double> log_likelihoods;
  int reinitialized = 0;
};

// Exactly options.iterations E/M alternations. A degenerate component has its
// mean moved to a random data point and its covariance reset to the global
// covariance instead of aborting the run.
absl::StatusOr<EmResult> RunEm(const BoundedDataset& data, MoGParams init,
                               const EmOptions& options);

// RunEm from `restarts` independent k-means++ seedings (drawn from `rng`);
// keeps the run with the highest final log-likelihood.
absl::StatusOr<EmResult> RunEmWithRestarts(const BoundedDataset& data, int k,
                                           int restarts,
                                           const EmOptions& options, Rng& rng);

}  // namespace dpem

#endif  // DPEM_MOG_H_

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

#ifndef DPEM_DPKMEANS_H_
#define DPEM_DPKMEANS_H_

// Lloyd's k-means, two DPLloyd variants (noised counts and coordinate sums)
// and centroid perturbation with noised-count sensitivities, plus NICV.

#include <cstdint>
#include <vector>

#include "absl/status/statusor.h"
#include "dpem/accountant.h"
#include "dpem/dataset.h"
#include "dpem/mechanisms.h"
#include "dpem/noise.h"

namespace dpem {

struct Clustering {
  std::vector<Vector> centers;
  std::vector<int> assignments;  // nearest center of each row
};

// k centers drawn uniformly from the unit ball.
std::vector<Vector> RandomCentersInBall(int k, int d, Rng& rng);

// Index of the nearest center for every row (ties go to the lower index).
std::vector<int> AssignNearest(const BoundedDataset& data,
                               const std::vector<Vector>& centers);

// (1 / N) sum_i min_k || x_i - c_k ||^2.
double Nicv(const BoundedDataset& data, const std::vector<Vector>& centers);

// Plain Lloyd iterations; an empty cluster keeps its previous center.
Clustering Lloyd(const BoundedDataset& data, std::vector<Vector> centers,
                 int iterations);

struct KMeansResult {
  Clustering clustering;
  AccountingTrace trace;
  double eps_i = 0.0;  // pure-DP budget of each released update
};

enum class DpLloydComposition { kLinear, kZcdp };

struct DpLloydConfig {
  int k = 5;
  int iterations = 10;
  PrivacyBudget total;
  DpLloydComposition composition = DpLloydComposition::kLinear;
  std::uint64_t seed = 0;
};

// Per-iteration eps_i of DPLloyd: eps / J for linear composition, otherwise
// the largest eps_i whose J-fold zCDP composition (rho = J eps_i^2 / 2) fits.
absl::StatusOr<double> DpLloydEpsI(const DpLloydConfig& config);

// Each iteration releases noised counts and coordinate sums, all with
// Lap((d + 1) / eps_i); centers are sums over floored counts.
absl::StatusOr<KMeansResult> DpLloyd(const BoundedDataset& data,
                                     const DpLloydConfig& config);
absl::StatusOr<KMeansResult> DpLloyd(const BoundedDataset& data,
                                     const DpLloydConfig& config,
                                     std::vector<Vector> init, double eps_i,
                                     NoiseSource& noise);

struct DpEmKMeansConfig {
  int k = 5;
  int iterations = 10;
  PrivacyBudget total;
  int lambda_max = kDefaultLambdaMax;
  std::uint64_t seed = 0;
};

// Largest eps_i whose zCDP composition over J(k+1) eps_i-DP Laplace releases
// fits config.total.
absl::StatusOr<double> DpEmKMeansEpsI(const DpEmKMeansConfig& config);

// Hard-assignment EM: per iteration, the cluster proportions are released
// with Laplace noise (sensitivity 2 / N, then simplex projection), then each
// centroid sum / N_k with Laplace noise of sensitivity 2 sqrt(d) / N_k, where
// N_k is the noised count floored at one.
absl::StatusOr<KMeansResult> DpEmKMeans(const BoundedDataset& data,
                                        const DpEmKMeansConfig& config);
absl::StatusOr<KMeansResult> DpEmKMeans(const BoundedDataset& data,
                                        const DpEmKMeansConfig& config,
                                        std::vector<Vector> init, double eps_i,
                                        NoiseSource& noise);

}  // namespace dpem

#endif  // DPEM_DPKMEANS_H_

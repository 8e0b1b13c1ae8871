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

#include "dpem/dpkmeans.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "dpem/kernels.h"
#include "dpem/status_macros.h"

namespace dpem {
namespace {

absl::Status CheckShape(const BoundedDataset& data, int k, int iterations,
                        const std::vector<Vector>& centers) {
  if (k < 1 || iterations < 0) {
    return absl::InvalidArgumentError("need k >= 1 and iterations >= 0");
  }
  if (static_cast<int>(centers.size()) != k) {
    return absl::InvalidArgumentError(
        absl::StrCat("expected ", k, " initial centers, got ", centers.size()));
  }
  for (const Vector& c : centers) {
    if (c.size() != data.d()) {
      return absl::InvalidArgumentError("center dimension differs from data");
    }
  }
  return absl::OkStatus();
}

// Per-cluster sizes and coordinate sums under hard assignment.
void ClusterSums(const BoundedDataset& data, const std::vector<int>& labels,
                 int k, Vector& counts, std::vector<Vector>& sums) {
  counts = Vector::Zero(k);
  sums.assign(k, Vector::Zero(data.d()));
  for (int i = 0; i < data.n(); ++i) {
    counts(labels[i]) += 1.0;
    sums[labels[i]] += data.rows().row(i).transpose();
  }
}

}  // namespace

std::vector<Vector> RandomCentersInBall(int k, int d, Rng& rng) {
  std::vector<Vector> centers;
  centers.reserve(k);
  for (int c = 0; c < k; ++c) centers.push_back(RandomPointInUnitBall(d, rng));
  return centers;
}

std::vector<int> AssignNearest(const BoundedDataset& data,
                               const std::vector<Vector>& centers) {
  const std::size_t n = static_cast<std::size_t>(data.n());
  const kernels::ColumnBlock block = kernels::ColumnBlock::Of(data.rows());
  std::vector<int> labels(n, 0);
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  std::vector<double> dist(n);
  for (std::size_t c = 0; c < centers.size(); ++c) {
    kernels::SquaredDistances(block, kernels::AsSpan(centers[c]), dist);
    for (std::size_t i = 0; i < n; ++i) {
      if (dist[i] < best[i]) {
        best[i] = dist[i];
        labels[i] = static_cast<int>(c);
      }
    }
  }
  return labels;
}

double Nicv(const BoundedDataset& data, const std::vector<Vector>& centers) {
  const std::size_t n = static_cast<std::size_t>(data.n());
  const kernels::ColumnBlock block = kernels::ColumnBlock::Of(data.rows());
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  std::vector<double> dist(n);
  for (const Vector& c : centers) {
    kernels::SquaredDistances(block, kernels::AsSpan(c), dist);
    for (std::size_t i = 0; i < n; ++i) best[i] = std::min(best[i], dist[i]);
  }
  double total = 0.0;
  for (double b : best) total += b;
  return total / static_cast<double>(n);
}

Clustering Lloyd(const BoundedDataset& data, std::vector<Vector> centers,
                 int iterations) {
  const int k = static_cast<int>(centers.size());
  Vector counts;
  std::vector<Vector> sums;
  for (int it = 0; it < iterations; ++it) {
    ClusterSums(data, AssignNearest(data, centers), k, counts, sums);
    for (int c = 0; c < k; ++c) {
      if (counts(c) > 0.0) centers[c] = sums[c] / counts(c);
    }
  }
  Clustering out;
  out.assignments = AssignNearest(data, centers);
  out.centers = std::move(centers);
  return out;
}

absl::StatusOr<double> DpLloydEpsI(const DpLloydConfig& config) {
  DPEM_RETURN_IF_ERROR(ValidateBudget(config.total));
  if (config.iterations < 1) {
    return absl::InvalidArgumentError("DPLloyd needs at least one iteration");
  }
  if (config.composition == DpLloydComposition::kLinear) {
    return config.total.epsilon / config.iterations;
  }
  return PureZcdpEpsI(config.iterations, config.total);
}

absl::StatusOr<KMeansResult> DpLloyd(const BoundedDataset& data,
                                     const DpLloydConfig& config) {
  DPEM_ASSIGN_OR_RETURN(const double eps_i, DpLloydEpsI(config));
  Rng init_rng = MakeRng(config.seed, 0);
  std::vector<Vector> init = RandomCentersInBall(config.k, data.d(), init_rng);
  RandomNoise noise(config.seed, 1);
  return DpLloyd(data, config, std::move(init), eps_i, noise);
}

absl::StatusOr<KMeansResult> DpLloyd(const BoundedDataset& data,
                                     const DpLloydConfig& config,
                                     std::vector<Vector> init, double eps_i,
                                     NoiseSource& noise) {
  DPEM_RETURN_IF_ERROR(CheckShape(data, config.k, config.iterations, init));
  if (!(eps_i > 0.0)) return absl::InvalidArgumentError("eps_i must be > 0");
  const int d = data.d();
  const MechanismSpec spec{MechanismKind::kLaplace, d + 1.0, (d + 1.0) / eps_i};
  KMeansResult result;
  result.eps_i = eps_i;
  std::vector<Vector> centers = std::move(init);
  Vector counts;
  std::vector<Vector> sums;
  for (int it = 0; it < config.iterations; ++it) {
    ClusterSums(data, AssignNearest(data, centers), config.k, counts, sums);
    bool floored = false;
    for (int c = 0; c < config.k; ++c) {
      double count = counts(c) + noise.Laplace(spec.noise_scale);
      for (int j = 0; j < d; ++j) sums[c](j) += noise.Laplace(spec.noise_scale);
      if (!(count > kNoisedCountFloor)) {
        count = kNoisedCountFloor;
        floored = true;
      }
      centers[c] = sums[c] / count;
    }
    result.trace.records.push_back(
        {ReleasedQuantity::kLloydUpdate, it, -1, spec, 0.0, floored});
  }
  result.clustering.assignments = AssignNearest(data, centers);
  result.clustering.centers = std::move(centers);
  return result;
}

absl::StatusOr<double> DpEmKMeansEpsI(const DpEmKMeansConfig& config) {
  if (config.k < 1 || config.iterations < 1) {
    return absl::InvalidArgumentError("need k >= 1 and iterations >= 1");
  }
  return PureZcdpEpsI(
      static_cast<std::int64_t>(config.iterations) * (config.k + 1),
      config.total);
}

absl::StatusOr<KMeansResult> DpEmKMeans(const BoundedDataset& data,
                                        const DpEmKMeansConfig& config) {
  DPEM_ASSIGN_OR_RETURN(const double eps_i, DpEmKMeansEpsI(config));
  Rng init_rng = MakeRng(config.seed, 0);
  std::vector<Vector> init = RandomCentersInBall(config.k, data.d(), init_rng);
  RandomNoise noise(config.seed, 1);
  return DpEmKMeans(data, config, std::move(init), eps_i, noise);
}

absl::StatusOr<KMeansResult> DpEmKMeans(const BoundedDataset& data,
                                        const DpEmKMeansConfig& config,
                                        std::vector<Vector> init, double eps_i,
                                        NoiseSource& noise) {
  DPEM_RETURN_IF_ERROR(CheckShape(data, config.k, config.iterations, init));
  if (!(eps_i > 0.0)) return absl::InvalidArgumentError("eps_i must be > 0");
  const int d = data.d();
  const double n = data.n();
  const double weights_sensitivity = WeightsSensitivity(data.n());
  const MechanismSpec weights_spec{MechanismKind::kLaplace, weights_sensitivity,
                                   weights_sensitivity / eps_i};
  KMeansResult result;
  result.eps_i = eps_i;
  std::vector<Vector> centers = std::move(init);
  Vector counts;
  std::vector<Vector> sums;
  for (int it = 0; it < config.iterations; ++it) {
    ClusterSums(data, AssignNearest(data, centers), config.k, counts, sums);
    DPEM_ASSIGN_OR_RETURN(const Vector weights,
                          PerturbSimplex(counts / n, weights_spec, noise));
    result.trace.records.push_back(
        {ReleasedQuantity::kWeights, it, -1, weights_spec, 0.0, false});
    for (int c = 0; c < config.k; ++c) {
      const double count = std::max(n * weights(c), kNoisedCountFloor);
      const FlooredSensitivity sens =
          MeanSensitivity(MechanismKind::kLaplace, d, count);
      const MechanismSpec spec{MechanismKind::kLaplace, sens.sensitivity,
                               sens.sensitivity / eps_i};
      DPEM_ASSIGN_OR_RETURN(centers[c],
                            PerturbMean(sums[c] / count, spec, noise));
      result.trace.records.push_back(
          {ReleasedQuantity::kMean, it, c, spec, 0.0, sens.floored});
    }
  }
  result.clustering.assignments = AssignNearest(data, centers);
  result.clustering.centers = std::move(centers);
  return result;
}

}  // namespace dpem

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

#include "dpem/dpem_mog.h"

#include <algorithm>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "dpem/status_macros.h"

namespace dpem {
namespace {

struct Release {
  MechanismSpec spec;
  double delta = 0.0;
};

// Noise spec for one release at per-mechanism budget eps_i.
absl::StatusOr<Release> Calibrated(MechanismKind kind, double sensitivity,
                                   double eps_i, double delta_i) {
  if (kind == MechanismKind::kLaplace) {
    return Release{{kind, sensitivity, sensitivity / eps_i}, 0.0};
  }
  DPEM_ASSIGN_OR_RETURN(const double sigma,
                        GaussianSigma(sensitivity, eps_i, delta_i));
  return Release{{kind, sensitivity, sigma}, delta_i};
}

}  // namespace

CompositionPlan PlanFor(const DpEmConfig& config) {
  CompositionPlan plan;
  plan.scenario = config.scenario;
  plan.iterations = config.iterations;
  plan.components = config.components;
  plan.delta_i = config.delta_i;
  plan.method = config.method;
  plan.advanced_slack = config.advanced_slack;
  plan.lambda_max = config.lambda_max;
  return plan;
}

absl::StatusOr<DpEmResult> RunDpEmMoG(const BoundedDataset& data,
                                      const DpEmConfig& config) {
  if (config.components < 1 || config.components > data.n()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "need 1 <= K <= N, got K = ", config.components, ", N = ", data.n()));
  }
  DPEM_ASSIGN_OR_RETURN(const double eps_i,
                        Calibrate(PlanFor(config), config.total));
  Rng init_rng = MakeRng(config.seed, 0);
  MoGParams init = InitializeDataIndependent(config.components, data.d(),
                                             config.init_variance, init_rng);
  RandomNoise noise(config.seed, 1);
  return RunDpEmMoG(data, config, std::move(init), eps_i, noise);
}

absl::StatusOr<DpEmResult> RunDpEmMoG(const BoundedDataset& data,
                                      const DpEmConfig& config, MoGParams init,
                                      double eps_i, NoiseSource& noise) {
  const int k = config.components;
  const int d = data.d();
  const double n = data.n();
  if (k < 1 || k > data.n()) {
    return absl::InvalidArgumentError(
        absl::StrCat("need 1 <= K <= N, got K = ", k, ", N = ", data.n()));
  }
  if (config.iterations < 0) {
    return absl::InvalidArgumentError("iterations must be non-negative");
  }
  if (init.components() != k || init.dim() != d) {
    return absl::InvalidArgumentError("initial parameters do not match K, d");
  }
  const MapPrior prior = config.prior.alpha.size() == 0
                             ? MapPrior::Default(k, d)
                             : config.prior;
  const bool map = config.estimator == Estimator::kMap;
  if (map) DPEM_RETURN_IF_ERROR(ValidatePrior(prior, k, d));
  const MechanismKind pi_mu_kind = config.scenario == Scenario::kLLG
                                       ? MechanismKind::kLaplace
                                       : MechanismKind::kGaussian;
  const double mean_shift = map ? prior.kappa0 : 0.0;
  const double cov_shift = map ? prior.nu0 + d + 2.0 : 0.0;

  DpEmResult result;
  result.eps_i = eps_i;
  result.params = std::move(init);
  auto record = [&](ReleasedQuantity q, int it, int c, const Release& r,
                    bool floored) {
    result.trace.records.push_back({q, it, c, r.spec, r.delta, floored});
  };

  for (int it = 0; it < config.iterations; ++it) {
    DPEM_ASSIGN_OR_RETURN(const Responsibilities resp,
                          EStep(data, result.params));
    const ComponentMoments m = AccumulateMoments(data, resp);
    MoGParams next;

    DPEM_ASSIGN_OR_RETURN(
        const Release weights_release,
        Calibrated(pi_mu_kind, WeightsSensitivity(data.n()), eps_i,
                   config.delta_i));
    DPEM_ASSIGN_OR_RETURN(
        const Vector mle_weights,
        PerturbSimplex(m.counts / n, weights_release.spec, noise));
    record(ReleasedQuantity::kWeights, it, -1, weights_release, false);
    next.weights = map ? MapWeights(mle_weights, data.n(), prior) : mle_weights;

    std::vector<double> counts(k);
    for (int c = 0; c < k; ++c) {
      counts[c] = std::max(n * mle_weights(c), kNoisedCountFloor);
    }

    std::vector<Vector> mle_means(k);
    for (int c = 0; c < k; ++c) {
      const FlooredSensitivity sens =
          MeanSensitivity(pi_mu_kind, d, counts[c], mean_shift);
      DPEM_ASSIGN_OR_RETURN(
          const Release release,
          Calibrated(pi_mu_kind, sens.sensitivity, eps_i, config.delta_i));
      DPEM_ASSIGN_OR_RETURN(
          Vector mean,
          PerturbMean(m.first[c] / (counts[c] + mean_shift), release.spec,
                      noise));
      record(ReleasedQuantity::kMean, it, c, release, sens.floored);
      mle_means[c] = mean * ((counts[c] + mean_shift) / counts[c]);
      next.means.push_back(std::move(mean));
    }

    for (int c = 0; c < k; ++c) {
      const FlooredSensitivity sens =
          CovarianceSensitivity(counts[c], cov_shift);
      DPEM_ASSIGN_OR_RETURN(
          const Release release,
          Calibrated(MechanismKind::kGaussian, sens.sensitivity, eps_i,
                     config.delta_i));
      const Matrix cov =
          map ? MapCovariance(m.second[c], mle_means[c], counts[c], prior)
              : CovarianceFromMoments(m.second[c], mle_means[c], counts[c]);
      DPEM_ASSIGN_OR_RETURN(
          Matrix noised,
          AnalyzeGaussPerturb(cov, release.spec, noise, config.psd_floor));
      record(ReleasedQuantity::kCovariance, it, c, release, sens.floored);
      next.covariances.push_back(std::move(noised));
    }
    result.params = std::move(next);
  }
  return result;
}

absl::StatusOr<PrivacyBudget> AuditSpend(const AccountingTrace& trace,
                                         const DpEmConfig& config) {
  AccountantOptions options;
  options.lambda_max = config.lambda_max;
  options.advanced_slack = config.advanced_slack;
  return ComposeTrace(trace, config.method, config.total.delta, options);
}

}  // namespace dpem

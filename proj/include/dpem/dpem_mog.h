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

#ifndef DPEM_DPEM_MOG_H_
#define DPEM_DPEM_MOG_H_

// Differentially private EM for Gaussian mixtures by moment perturbation.
// Every iteration runs an E-step against the previous released parameters,
// forms the M-step statistics, and releases noised weights, means and
// covariances (in that order) with a single calibrated per-mechanism eps_i.

#include <cstdint>

#include "absl/status/statusor.h"
#include "dpem/accountant.h"
#include "dpem/dataset.h"
#include "dpem/mechanisms.h"
#include "dpem/mog.h"
#include "dpem/noise.h"

namespace dpem {

// Isotropic variance of the data-independent starting covariances.
inline constexpr double kDefaultInitVariance = 0.1;

struct DpEmConfig {
  int components = 3;
  int iterations = 10;
  PrivacyBudget total;
  double delta_i = 1e-6;
  Scenario scenario = Scenario::kGGG;
  Composition method = Composition::kZcdp;
  Estimator estimator = Estimator::kMap;
  MapPrior prior;  // empty means MapPrior::Default(K, d)
  double psd_floor = kDefaultPsdFloor;
  double init_variance = kDefaultInitVariance;
  std::uint64_t seed = 0;
  int lambda_max = kDefaultLambdaMax;
  double advanced_slack = 0.0;
};

CompositionPlan PlanFor(const DpEmConfig& config);

struct DpEmResult {
  MoGParams params;
  AccountingTrace trace;
  double eps_i = 0.0;
};

// Calibrates eps_i from config.total, starts from InitializeDataIndependent
// and draws noise from RandomNoise(config.seed).
absl::StatusOr<DpEmResult> RunDpEmMoG(const BoundedDataset& data,
                                      const DpEmConfig& config);

// Same iterations with an explicit start, per-mechanism budget and noise
// source. With ZeroNoise the result equals non-private EM up to rounding.
absl::StatusOr<DpEmResult> RunDpEmMoG(const BoundedDataset& data,
                                      const DpEmConfig& config, MoGParams init,
                                      double eps_i, NoiseSource& noise);

// Total (epsilon, delta) of a finished run's trace under config.method.
absl::StatusOr<PrivacyBudget> AuditSpend(const AccountingTrace& trace,
                                         const DpEmConfig& config);

}  // namespace dpem

#endif  // DPEM_DPEM_MOG_H_

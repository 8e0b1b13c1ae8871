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

#ifndef DPEM_DPEM_FA_H_
#define DPEM_DPEM_FA_H_

// Differentially private factor analysis. The only data access is the second
// moment matrix Lambda = X^T X / N, released once through Analyze Gauss; EM
// then runs on the released matrix and costs nothing further.

#include "absl/status/statusor.h"
#include "dpem/accountant.h"
#include "dpem/dataset.h"
#include "dpem/mechanisms.h"
#include "dpem/noise.h"

namespace dpem {

inline constexpr double kPsiFloor = 1e-6;

struct SecondMoment {
  Matrix lambda;  // d x d, symmetric
  int n = 0;
};

struct FaParams {
  Matrix loading;       // W, d x q
  Vector psi;           // diagonal noise variances
  Matrix posterior_cov;  // G = (I + W^T Psi^-1 W)^-1
};

// X^T X / N, exactly symmetric.
SecondMoment ComputeSecondMoment(const BoundedDataset& data);

// Frobenius sensitivity of Lambda under one-row replacement: 2 / N.
double SecondMomentSensitivity(int n);

struct PerturbedMoment {
  SecondMoment moment;
  AccountingTrace trace;  // exactly one record
};

// Analyze Gauss at (total.epsilon, total.delta) with sensitivity 2 / N, then
// PSD projection. Requires 0 < epsilon < 1.
absl::StatusOr<PerturbedMoment> PerturbSecondMoment(
    const SecondMoment& moment, const PrivacyBudget& total, NoiseSource& noise,
    double psd_floor = kDefaultPsdFloor);

// W W^T + diag(psi).
Matrix ModelCovariance(const FaParams& params);

// Per-point Gaussian log-likelihood of N(0, W W^T + Psi) against a second
// moment: -(d log 2 pi + log|C| + tr(C^-1 Lambda)) / 2.
absl::StatusOr<double> FaLogLikelihood(const Matrix& lambda,
                                       const FaParams& params);

struct FaOptions {
  int max_iterations = 1000;
  double tolerance = 1e-8;  // max-abs change of W and Psi
  double psi_floor = kPsiFloor;
};

struct FaResult {
  FaParams params;
  int iterations = 0;
  std::vector<double> log_likelihoods;  // entry j is after j updates
};

// Principal-component start: W from the top-q eigenpairs of Lambda with the
// mean residual eigenvalue removed, Psi = diag(Lambda - W W^T) floored.
absl::StatusOr<FaParams> InitializeFa(const Matrix& lambda, int q,
                                      double psi_floor = kPsiFloor);

// EM on a second moment matrix. Rejects q outside [0, d) and matrices that
// are not symmetric positive semidefinite. q = 0 yields Psi = diag(Lambda).
absl::StatusOr<FaResult> RunFaEm(const Matrix& lambda, int q,
                                 const FaOptions& options = {});

}  // namespace dpem

#endif  // DPEM_DPEM_FA_H_

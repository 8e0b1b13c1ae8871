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

#include "dpem/dpem_fa.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "Eigen/Cholesky"
#include "Eigen/Eigenvalues"
#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "dpem/kernels.h"
#include "dpem/status_macros.h"

namespace dpem {
namespace {

absl::Status CheckMoment(const Matrix& lambda) {
  if (lambda.rows() < 1 || lambda.rows() != lambda.cols()) {
    return absl::InvalidArgumentError("second moment must be square, d >= 1");
  }
  if (!lambda.allFinite()) {
    return absl::InvalidArgumentError("second moment has non-finite entries");
  }
  const double scale = std::max(1.0, lambda.cwiseAbs().maxCoeff());
  if ((lambda - lambda.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
    return absl::InvalidArgumentError("second moment is not symmetric");
  }
  const double min_eig =
      Eigen::SelfAdjointEigenSolver<Matrix>(lambda, Eigen::EigenvaluesOnly)
          .eigenvalues()
          .minCoeff();
  if (min_eig < -1e-10 * scale) {
    return absl::InvalidArgumentError(absl::StrCat(
        "second moment is not positive semidefinite (eigenvalue ", min_eig,
        ")"));
  }
  return absl::OkStatus();
}

absl::StatusOr<Matrix> PosteriorCov(const Matrix& w, const Vector& psi) {
  const Eigen::Index q = w.cols();
  const Matrix scaled = psi.cwiseInverse().asDiagonal() * w;
  const Matrix m = Matrix::Identity(q, q) + w.transpose() * scaled;
  const Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) {
    return absl::InternalError("I + W^T Psi^-1 W is not positive definite");
  }
  const Matrix g = llt.solve(Matrix::Identity(q, q));
  return Matrix(0.5 * (g + g.transpose()));
}

}  // namespace

SecondMoment ComputeSecondMoment(const BoundedDataset& data) {
  const Matrix& x = data.rows();
  const Eigen::Index d = x.cols();
  const std::size_t n = static_cast<std::size_t>(x.rows());
  SecondMoment out;
  out.n = data.n();
  out.lambda.resize(d, d);
  for (Eigen::Index a = 0; a < d; ++a) {
    for (Eigen::Index b = a; b < d; ++b) {
      out.lambda(a, b) =
          kernels::Dot({x.col(a).data(), n}, {x.col(b).data(), n}) / data.n();
      out.lambda(b, a) = out.lambda(a, b);
    }
  }
  return out;
}

double SecondMomentSensitivity(int n) { return 2.0 / static_cast<double>(n); }

absl::StatusOr<PerturbedMoment> PerturbSecondMoment(const SecondMoment& moment,
                                                    const PrivacyBudget& total,
                                                    NoiseSource& noise,
                                                    double psd_floor) {
  DPEM_RETURN_IF_ERROR(ValidateBudget(total));
  if (moment.n < 1) {
    return absl::InvalidArgumentError("second moment has no source rows");
  }
  if (!(total.epsilon < 1.0)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "Analyze Gauss needs epsilon < 1, got ", total.epsilon));
  }
  const double sensitivity = SecondMomentSensitivity(moment.n);
  DPEM_ASSIGN_OR_RETURN(const double sigma,
                        GaussianSigma(sensitivity, total.epsilon, total.delta));
  const MechanismSpec spec{MechanismKind::kGaussian, sensitivity, sigma};
  PerturbedMoment out;
  out.moment.n = moment.n;
  DPEM_ASSIGN_OR_RETURN(out.moment.lambda,
                        AnalyzeGaussPerturb(moment.lambda, spec, noise,
                                            psd_floor));
  out.trace.records.push_back(
      {ReleasedQuantity::kSecondMoment, 0, -1, spec, total.delta, false});
  return out;
}

Matrix ModelCovariance(const FaParams& params) {
  Matrix c = params.loading * params.loading.transpose();
  c.diagonal() += params.psi;
  return 0.5 * (c + c.transpose());
}

absl::StatusOr<double> FaLogLikelihood(const Matrix& lambda,
                                       const FaParams& params) {
  const Matrix c = ModelCovariance(params);
  const Eigen::LLT<Matrix> llt(c);
  if (llt.info() != Eigen::Success) {
    return absl::FailedPreconditionError("model covariance is singular");
  }
  const Matrix l = llt.matrixL();
  const double log_det = 2.0 * l.diagonal().array().log().sum();
  const double trace = llt.solve(lambda).trace();
  const double d = static_cast<double>(lambda.rows());
  return -0.5 * (d * std::log(2.0 * std::numbers::pi) + log_det + trace);
}

absl::StatusOr<FaParams> InitializeFa(const Matrix& lambda, int q,
                                      double psi_floor) {
  DPEM_RETURN_IF_ERROR(CheckMoment(lambda));
  const int d = static_cast<int>(lambda.rows());
  if (q < 0 || q >= d) {
    return absl::InvalidArgumentError(
        absl::StrCat("latent dimension must satisfy 0 <= q < d, got q = ", q,
                     ", d = ", d));
  }
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 *
                                                  (lambda + lambda.transpose()));
  // Eigenvalues ascend; the top q sit at the end.
  const Vector values = eig.eigenvalues();
  const double residual = values.head(d - q).mean();
  FaParams p;
  p.loading.resize(d, q);
  for (int j = 0; j < q; ++j) {
    const int idx = d - 1 - j;
    p.loading.col(j) =
        eig.eigenvectors().col(idx) * std::sqrt(std::max(values(idx) - residual, 0.0));
  }
  p.psi = (lambda.diagonal() -
           (p.loading * p.loading.transpose()).diagonal())
              .cwiseMax(psi_floor);
  DPEM_ASSIGN_OR_RETURN(p.posterior_cov, PosteriorCov(p.loading, p.psi));
  return p;
}

absl::StatusOr<FaResult> RunFaEm(const Matrix& lambda, int q,
                                 const FaOptions& options) {
  DPEM_ASSIGN_OR_RETURN(FaParams p, InitializeFa(lambda, q, options.psi_floor));
  FaResult result;
  DPEM_ASSIGN_OR_RETURN(double ll, FaLogLikelihood(lambda, p));
  result.log_likelihoods.push_back(ll);
  if (q == 0) {
    result.params = std::move(p);
    return result;
  }
  for (int it = 0; it < options.max_iterations; ++it) {
    // beta = G W^T Psi^-1 maps an observation to its latent posterior mean.
    const Matrix beta =
        p.posterior_cov * p.loading.transpose() * p.psi.cwiseInverse().asDiagonal();
    const Matrix lambda_beta = lambda * beta.transpose();
    Matrix latent = p.posterior_cov + beta * lambda_beta;
    latent = 0.5 * (latent + latent.transpose());
    const Eigen::LLT<Matrix> llt(latent);
    if (llt.info() != Eigen::Success) {
      return absl::InternalError("latent second moment is not positive definite");
    }
    const Matrix w_next = llt.solve(lambda_beta.transpose()).transpose();
    const Vector psi_next =
        (lambda.diagonal() - (w_next * lambda_beta.transpose()).diagonal())
            .cwiseMax(options.psi_floor);
    const double change =
        std::max((w_next - p.loading).cwiseAbs().maxCoeff(),
                 (psi_next - p.psi).cwiseAbs().maxCoeff());
    p.loading = w_next;
    p.psi = psi_next;
    DPEM_ASSIGN_OR_RETURN(p.posterior_cov, PosteriorCov(p.loading, p.psi));
    DPEM_ASSIGN_OR_RETURN(ll, FaLogLikelihood(lambda, p));
    result.log_likelihoods.push_back(ll);
    result.iterations = it + 1;
    if (change < options.tolerance) break;
  }
  result.params = std::move(p);
  return result;
}

}  // namespace dpem

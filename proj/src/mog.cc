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

#include "dpem/mog.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <random>

#include "Eigen/Cholesky"
#include "Eigen/Eigenvalues"
#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "dpem/kernels.h"
#include "dpem/status_macros.h"

namespace dpem {
namespace {

using RowMajorMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::span<const double> Column(const Matrix& m, Eigen::Index c) {
  return {m.col(c).data(), static_cast<std::size_t>(m.rows())};
}

// sum_i w_i x_i and sum_i w_i x_i x_i^T; the second is exactly symmetric.
void WeightedMoments(const Matrix& x, std::span<const double> w, Vector& first,
                     Matrix& second) {
  const Eigen::Index d = x.cols();
  first.resize(d);
  second.resize(d, d);
  for (Eigen::Index a = 0; a < d; ++a) {
    first(a) = kernels::Dot(w, Column(x, a));
    for (Eigen::Index b = a; b < d; ++b) {
      second(a, b) = kernels::WeightedDot(w, Column(x, a), Column(x, b));
      second(b, a) = second(a, b);
    }
  }
}

Matrix Symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

absl::StatusOr<Matrix> GlobalCovariance(const BoundedDataset& data,
                                        double psd_floor) {
  const Vector ones = Vector::Ones(data.n());
  Vector first;
  Matrix second;
  WeightedMoments(data.rows(), kernels::AsSpan(ones), first, second);
  const Vector mean = first / data.n();
  return PsdProject(CovarianceFromMoments(second, mean, data.n()), psd_floor);
}

}  // namespace

absl::Status ValidateMoGParams(const MoGParams& params, double psd_floor) {
  const int k = params.components();
  if (k < 1) return absl::InvalidArgumentError("mixture has no components");
  if (static_cast<int>(params.means.size()) != k ||
      static_cast<int>(params.covariances.size()) != k) {
    return absl::InvalidArgumentError(
        "weights, means and covariances disagree on K");
  }
  const int d = params.dim();
  if (d < 1) return absl::InvalidArgumentError("mixture has dimension 0");
  if ((params.weights.array() < 0.0).any() || !params.weights.allFinite()) {
    return absl::InvalidArgumentError("weights must be finite and nonnegative");
  }
  if (std::abs(params.weights.sum() - 1.0) > 1e-9) {
    return absl::InvalidArgumentError(
        absl::StrCat("weights sum to ", params.weights.sum(), ", not 1"));
  }
  for (int c = 0; c < k; ++c) {
    const Matrix& cov = params.covariances[c];
    if (params.means[c].size() != d || cov.rows() != d || cov.cols() != d) {
      return absl::InvalidArgumentError(
          absl::StrCat("component ", c, " has inconsistent dimensions"));
    }
    if (!params.means[c].allFinite() || !cov.allFinite()) {
      return absl::InvalidArgumentError(
          absl::StrCat("component ", c, " has non-finite parameters"));
    }
    if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
      return absl::InvalidArgumentError(
          absl::StrCat("covariance ", c, " is not symmetric"));
    }
    const Vector eig =
        Eigen::SelfAdjointEigenSolver<Matrix>(cov, Eigen::EigenvaluesOnly)
            .eigenvalues();
    const double slack = 1e-10 * std::max(1.0, eig.cwiseAbs().maxCoeff());
    if (eig.minCoeff() < psd_floor - slack) {
      return absl::InvalidArgumentError(
          absl::StrCat("covariance ", c, " has eigenvalue ", eig.minCoeff(),
                       " below the floor ", psd_floor));
    }
  }
  return absl::OkStatus();
}

MapPrior MapPrior::Default(int k, int d) {
  MapPrior prior;
  prior.alpha = Vector::Constant(k, 2.0);
  prior.kappa0 = 1.0;
  prior.nu0 = d + 2.0;
  prior.s0 = 0.1 * Matrix::Identity(d, d);
  return prior;
}

absl::Status ValidatePrior(const MapPrior& prior, int k, int d) {
  if (prior.alpha.size() != k || (prior.alpha.array() < 1.0).any()) {
    return absl::InvalidArgumentError(
        "prior needs K Dirichlet concentrations, each >= 1");
  }
  if (!(prior.kappa0 > 0.0) || !(prior.nu0 > 0.0)) {
    return absl::InvalidArgumentError("kappa0 and nu0 must be positive");
  }
  if (prior.s0.rows() != d || prior.s0.cols() != d) {
    return absl::InvalidArgumentError("S0 must be d x d");
  }
  Eigen::LLT<Matrix> llt(prior.s0);
  if (llt.info() != Eigen::Success ||
      (prior.s0 - prior.s0.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    return absl::InvalidArgumentError("S0 must be symmetric positive definite");
  }
  return absl::OkStatus();
}

ComponentMoments AccumulateMoments(const BoundedDataset& data,
                                   const Responsibilities& resp) {
  const Eigen::Index k = resp.gamma.cols();
  ComponentMoments m;
  m.counts.resize(k);
  m.first.resize(k);
  m.second.resize(k);
  for (Eigen::Index c = 0; c < k; ++c) {
    m.counts(c) = resp.gamma.col(c).sum();
    WeightedMoments(data.rows(), Column(resp.gamma, c), m.first[c],
                    m.second[c]);
  }
  return m;
}

absl::StatusOr<Matrix> WeightedLogDensities(const BoundedDataset& data,
                                            const MoGParams& params) {
  const int k = params.components();
  const int d = data.d();
  if (params.dim() != d) {
    return absl::InvalidArgumentError(
        absl::StrCat("model dimension ", params.dim(), " != data dimension ", d));
  }
  const double log_2pi = std::log(2.0 * std::numbers::pi);
  Matrix out(data.n(), k);
  const kernels::ColumnBlock block = kernels::ColumnBlock::Of(data.rows());
  for (int c = 0; c < k; ++c) {
    const Eigen::LLT<Matrix> llt(params.covariances[c]);
    const Matrix l = llt.matrixL();
    if (llt.info() != Eigen::Success || !(l.diagonal().array() > 0.0).all()) {
      return absl::FailedPreconditionError(
          absl::StrCat("covariance of component ", c, " is singular"));
    }
    const RowMajorMatrix whitening =
        l.triangularView<Eigen::Lower>().solve(Matrix::Identity(d, d));
    if (!whitening.allFinite()) {
      return absl::FailedPreconditionError(
          absl::StrCat("covariance of component ", c, " is singular"));
    }
    const double log_det = 2.0 * l.diagonal().array().log().sum();
    const double log_weight = std::log(params.weights(c));
    double* col = out.col(c).data();
    kernels::Mahalanobis(
        block, kernels::AsSpan(params.means[c]),
        {whitening.data(), static_cast<std::size_t>(d * d)},
        {col, static_cast<std::size_t>(data.n())});
    const double offset = log_weight - 0.5 * (d * log_2pi + log_det);
    for (int i = 0; i < data.n(); ++i) col[i] = offset - 0.5 * col[i];
  }
  return out;
}

absl::StatusOr<Responsibilities> EStep(const BoundedDataset& data,
                                       const MoGParams& params) {
  DPEM_ASSIGN_OR_RETURN(Matrix log_dens, WeightedLogDensities(data, params));
  for (Eigen::Index i = 0; i < log_dens.rows(); ++i) {
    const double top = log_dens.row(i).maxCoeff();
    if (!std::isfinite(top)) {
      return absl::FailedPreconditionError(
          absl::StrCat("point ", i, " has zero density under every component"));
    }
    log_dens.row(i) = (log_dens.row(i).array() - top).exp();
    log_dens.row(i) /= log_dens.row(i).sum();
  }
  Responsibilities resp;
  resp.counts = log_dens.colwise().sum().transpose();
  resp.gamma = std::move(log_dens);
  return resp;
}

absl::StatusOr<double> LogLikelihood(const BoundedDataset& data,
                                     const MoGParams& params) {
  DPEM_ASSIGN_OR_RETURN(const Matrix log_dens,
                        WeightedLogDensities(data, params));
  double total = 0.0;
  for (Eigen::Index i = 0; i < log_dens.rows(); ++i) {
    const double top = log_dens.row(i).maxCoeff();
    if (!std::isfinite(top)) return -std::numeric_limits<double>::infinity();
    total += top + std::log((log_dens.row(i).array() - top).exp().sum());
  }
  return total;
}

absl::StatusOr<double> LogLikelihoodPerPoint(const BoundedDataset& data,
                                             const MoGParams& params) {
  DPEM_ASSIGN_OR_RETURN(const double total, LogLikelihood(data, params));
  return total / data.n();
}

Matrix CovarianceFromMoments(const Matrix& second, const Vector& mean,
                             double count) {
  return Symmetrized(second / count - mean * mean.transpose());
}

Vector MapWeights(const Vector& mle_weights, int n, const MapPrior& prior) {
  const double k = static_cast<double>(mle_weights.size());
  return (n * mle_weights.array() + prior.alpha.array() - 1.0) /
         (n + prior.alpha.sum() - k);
}

Matrix MapCovariance(const Matrix& second, const Vector& mle_mean,
                     double count, const MapPrior& prior) {
  const double d = static_cast<double>(second.rows());
  Matrix scatter = prior.s0 + second;
  if (count > 0.0) {
    const Matrix outer = mle_mean * mle_mean.transpose();
    scatter += (prior.kappa0 * count / (prior.kappa0 + count) - count) * outer;
  }
  return Symmetrized(scatter / (prior.nu0 + count + d + 2.0));
}

absl::StatusOr<MoGParams> MStepMle(const BoundedDataset& data,
                                   const Responsibilities& resp,
                                   double psd_floor) {
  const ComponentMoments m = AccumulateMoments(data, resp);
  const int k = static_cast<int>(m.counts.size());
  const double n = data.n();
  MoGParams out;
  out.weights = m.counts / n;
  for (int c = 0; c < k; ++c) {
    if (m.counts(c) <= kDegenerateCountFraction * n) {
      return absl::FailedPreconditionError(absl::StrCat(
          "component ", c, " is degenerate (N_k = ", m.counts(c), ")"));
    }
    Vector mean = m.first[c] / m.counts(c);
    DPEM_ASSIGN_OR_RETURN(
        Matrix cov,
        PsdProject(CovarianceFromMoments(m.second[c], mean, m.counts(c)),
                   psd_floor));
    out.means.push_back(std::move(mean));
    out.covariances.push_back(std::move(cov));
  }
  return out;
}

absl::StatusOr<MoGParams> MStepMap(const BoundedDataset& data,
                                   const Responsibilities& resp,
                                   const MapPrior& prior, double psd_floor) {
  const int k = static_cast<int>(resp.gamma.cols());
  DPEM_RETURN_IF_ERROR(ValidatePrior(prior, k, data.d()));
  const ComponentMoments m = AccumulateMoments(data, resp);
  MoGParams out;
  out.weights = MapWeights(m.counts / data.n(), data.n(), prior);
  for (int c = 0; c < k; ++c) {
    const double count = m.counts(c);
    const Vector mle_mean =
        count > 0.0 ? Vector(m.first[c] / count) : Vector::Zero(data.d());
    out.means.push_back(m.first[c] / (count + prior.kappa0));
    DPEM_ASSIGN_OR_RETURN(
        Matrix cov,
        PsdProject(MapCovariance(m.second[c], mle_mean, count, prior),
                   psd_floor));
    out.covariances.push_back(std::move(cov));
  }
  return out;
}

absl::StatusOr<MoGParams> InitializeKMeansPlusPlus(const BoundedDataset& data,
                                                   int k, Rng& rng,
                                                   double psd_floor) {
  if (k < 1 || k > data.n()) {
    return absl::InvalidArgumentError(
        absl::StrCat("need 1 <= K <= N, got K = ", k, ", N = ", data.n()));
  }
  const Matrix& x = data.rows();
  const kernels::ColumnBlock block = kernels::ColumnBlock::Of(x);
  const std::size_t n = static_cast<std::size_t>(data.n());
  std::uniform_int_distribution<int> pick(0, data.n() - 1);
  std::uniform_real_distribution<double> unit;

  MoGParams out;
  out.weights = Vector::Constant(k, 1.0 / k);
  out.means.push_back(x.row(pick(rng)).transpose());
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  std::vector<double> dist(n);
  while (static_cast<int>(out.means.size()) < k) {
    const Vector& last = out.means.back();
    kernels::SquaredDistances(block, kernels::AsSpan(last), dist);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], dist[i]);
      total += nearest[i];
    }
    int chosen = pick(rng);
    if (total > 0.0) {
      double target = unit(rng) * total;
      for (std::size_t i = 0; i < n; ++i) {
        target -= nearest[i];
        if (target <= 0.0 || i + 1 == n) {
          chosen = static_cast<int>(i);
          break;
        }
      }
    }
    out.means.push_back(x.row(chosen).transpose());
  }
  DPEM_ASSIGN_OR_RETURN(const Matrix global, GlobalCovariance(data, psd_floor));
  out.covariances.assign(k, global);
  return out;
}

MoGParams InitializeDataIndependent(int k, int d, double variance, Rng& rng) {
  MoGParams out;
  out.weights = Vector::Constant(k, 1.0 / k);
  for (int c = 0; c < k; ++c) {
    out.means.push_back(RandomPointInUnitBall(d, rng));
    out.covariances.push_back(variance * Matrix::Identity(d, d));
  }
  return out;
}

absl::StatusOr<EmResult> RunEm(const BoundedDataset& data, MoGParams init,
                               const EmOptions& options) {
  DPEM_RETURN_IF_ERROR(ValidateMoGParams(init, 0.0));
  if (options.iterations < 0) {
    return absl::InvalidArgumentError("iterations must be non-negative");
  }
  const int k = init.components();
  const MapPrior prior = options.prior.alpha.size() == 0
                             ? MapPrior::Default(k, data.d())
                             : options.prior;
  Rng rng = MakeRng(options.seed, 1);
  std::uniform_int_distribution<int> pick(0, data.n() - 1);

  EmResult result;
  result.params = std::move(init);
  DPEM_ASSIGN_OR_RETURN(double ll, LogLikelihood(data, result.params));
  result.log_likelihoods.push_back(ll);
  for (int it = 0; it < options.iterations; ++it) {
    DPEM_ASSIGN_OR_RETURN(const Responsibilities resp,
                          EStep(data, result.params));
    if (options.estimator == Estimator::kMap) {
      DPEM_ASSIGN_OR_RETURN(
          result.params, MStepMap(data, resp, prior, options.psd_floor));
    } else {
      const ComponentMoments m = AccumulateMoments(data, resp);
      MoGParams next;
      next.weights = m.counts / data.n();
      bool any_degenerate = false;
      for (int c = 0; c < k; ++c) {
        if (m.counts(c) <= kDegenerateCountFraction * data.n()) {
          any_degenerate = true;
          ++result.reinitialized;
          next.weights(c) = 1.0 / k;
          next.means.push_back(data.rows().row(pick(rng)).transpose());
          DPEM_ASSIGN_OR_RETURN(Matrix global,
                                GlobalCovariance(data, options.psd_floor));
          next.covariances.push_back(std::move(global));
          continue;
        }
        Vector mean = m.first[c] / m.counts(c);
        DPEM_ASSIGN_OR_RETURN(
            Matrix cov,
            PsdProject(CovarianceFromMoments(m.second[c], mean, m.counts(c)),
                       options.psd_floor));
        next.means.push_back(std::move(mean));
        next.covariances.push_back(std::move(cov));
      }
      if (any_degenerate) next.weights /= next.weights.sum();
      result.params = std::move(next);
    }
    DPEM_ASSIGN_OR_RETURN(ll, LogLikelihood(data, result.params));
    result.log_likelihoods.push_back(ll);
  }
  return result;
}

absl::StatusOr<EmResult> RunEmWithRestarts(const BoundedDataset& data, int k,
                                           int restarts,
                                           const EmOptions& options, Rng& rng) {
  if (restarts < 1) return absl::InvalidArgumentError("restarts must be >= 1");
  std::optional<EmResult> best;
  for (int r = 0; r < restarts; ++r) {
    DPEM_ASSIGN_OR_RETURN(MoGParams init,
                          InitializeKMeansPlusPlus(data, k, rng,
                                                   options.psd_floor));
    DPEM_ASSIGN_OR_RETURN(EmResult run, RunEm(data, std::move(init), options));
    if (!best || run.log_likelihoods.back() > best->log_likelihoods.back()) {
      best = std::move(run);
    }
  }
  return *std::move(best);
}

}  // namespace dpem

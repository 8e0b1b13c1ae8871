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

#include "oracles.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "Eigen/LU"
#include "boost/math/quadrature/gauss_kronrod.hpp"

namespace dpem::oracle {
namespace {

using boost::math::quadrature::gauss_kronrod;

double Integrate(const std::function<double(double)>& f, double a, double b) {
  return gauss_kronrod<double, 61>::integrate(f, a, b, 20, 1e-14);
}

}  // namespace

double NormalPdf(double x, double mean, double variance) {
  const double z = x - mean;
  return std::exp(-z * z / (2.0 * variance)) /
         std::sqrt(2.0 * std::numbers::pi * variance);
}

double MvnPdf(const Vector& x, const Vector& mean, const Matrix& cov) {
  const Eigen::FullPivLU<Matrix> lu(cov);
  const Vector z = x - mean;
  const double quad = z.dot(lu.inverse() * z);
  const double d = static_cast<double>(x.size());
  return std::exp(-0.5 * quad) /
         std::sqrt(std::pow(2.0 * std::numbers::pi, d) * lu.determinant());
}

double MixtureLogLik(const Matrix& x, const MoGParams& params) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double p = 0.0;
    for (int k = 0; k < params.components(); ++k) {
      p += params.weights(k) *
           MvnPdf(x.row(i).transpose(), params.means[k], params.covariances[k]);
    }
    total += std::log(p);
  }
  return total;
}

double LaplaceMomentQuadrature(int lambda, double eps) {
  // Outputs o ~ Lap(0, b) against the neighbour Lap(1, b); the loss is
  // (|o - 1| - |o|) / b: +eps left of 0, -eps right of 1, linear between.
  const double b = 1.0 / eps;
  const double l = lambda;
  auto density = [b](double o) { return std::exp(-std::abs(o) / b) / (2.0 * b); };
  auto loss = [b](double o) { return (std::abs(o - 1.0) - std::abs(o)) / b; };
  const double tail = 80.0 * b;
  // Factor e^{l eps} out of every branch to keep large orders finite.
  const double left = Integrate(
      [&](double o) { return density(o) * std::exp(l * loss(o) - l * eps); },
      -tail, 0.0);
  const double mid = Integrate(
      [&](double o) { return density(o) * std::exp(l * loss(o) - l * eps); },
      0.0, 1.0);
  const double right = Integrate(
      [&](double o) { return density(o) * std::exp(l * loss(o) - l * eps); },
      1.0, 1.0 + tail);
  return l * eps + std::log(left + mid + right);
}

double GaussianMomentQuadrature(int lambda, double sensitivity, double sigma) {
  const double l = lambda;
  auto log_integrand = [&](double x) {
    const double loss = (sensitivity / sigma) * (x / sigma) +
                        sensitivity * sensitivity / (2.0 * sigma * sigma);
    return -x * x / (2.0 * sigma * sigma) -
           0.5 * std::log(2.0 * std::numbers::pi * sigma * sigma) + l * loss;
  };
  // Locate the peak on a grid, then integrate the rescaled integrand over a
  // window wide enough for its Gaussian tails.
  const double lo = -20.0 * sigma;
  const double hi = (l * sensitivity / sigma + 20.0) * sigma;
  double peak = -std::numeric_limits<double>::infinity();
  double peak_x = 0.0;
  const int grid = 20001;
  for (int i = 0; i < grid; ++i) {
    const double x = lo + (hi - lo) * i / (grid - 1);
    const double v = log_integrand(x);
    if (v > peak) {
      peak = v;
      peak_x = x;
    }
  }
  const double a = peak_x - 40.0 * sigma;
  const double b = peak_x + 40.0 * sigma;
  const double mass = Integrate(
      [&](double x) { return std::exp(log_integrand(x) - peak); }, a, b);
  return peak + std::log(mass);
}

PrivacyBudget PlanSpend(const CompositionPlan& plan, double eps_i,
                        double target_delta) {
  const double j = plan.iterations;
  const double k = plan.components;
  const bool llg = plan.scenario == Scenario::kLLG;
  const double n_laplace = llg ? j * (k + 1.0) : 0.0;
  const double n_gauss = llg ? j * k : j * (2.0 * k + 1.0);
  const double n = n_laplace + n_gauss;
  // Delta^2 / sigma^2 of every Gaussian release at (eps_i, delta_i).
  const double c = eps_i * eps_i / (2.0 * std::log(1.25 / plan.delta_i));
  const double inf = std::numeric_limits<double>::infinity();
  switch (plan.method) {
    case Composition::kLinear:
      return {n * eps_i, n_gauss * plan.delta_i};
    case Composition::kAdvanced: {
      const double slack = target_delta - n_gauss * plan.delta_i;
      if (slack <= 0.0) return {inf, inf};
      return {n * eps_i * (std::exp(eps_i) - 1.0) +
                  std::sqrt(2.0 * n * std::log(1.0 / slack)) * eps_i,
              target_delta};
    }
    case Composition::kZcdp: {
      const double rho = n_laplace * eps_i * eps_i / 2.0 + n_gauss * c / 2.0;
      return {rho + 2.0 * std::sqrt(rho * std::log(1.0 / target_delta)),
              target_delta};
    }
    case Composition::kMomentsAccountant: {
      const double tail = target_delta - n_gauss * plan.delta_i;
      if (tail <= 0.0) return {inf, inf};
      double best = inf;
      for (int lam = 1; lam <= plan.lambda_max; ++lam) {
        const double l = lam;
        const double alpha_l =
            std::log((l + 1.0) / (2.0 * l + 1.0) * std::exp(l * eps_i) +
                     l / (2.0 * l + 1.0) * std::exp(-eps_i * (l + 1.0)));
        const double alpha = n_laplace * alpha_l + n_gauss * (l * l + l) * c / 2.0;
        best = std::min(best, (alpha + std::log(1.0 / tail)) / l);
      }
      return {best, target_delta};
    }
  }
  return {inf, inf};
}

double GridSearchLargest(const std::function<bool(double)>& fits, double lo,
                         double hi, int fine_steps) {
  const double ratio = 1.01;
  double last = 0.0;
  for (double x = lo; x < hi; x *= ratio) {
    if (fits(x)) last = x;
  }
  if (last == 0.0) return 0.0;
  const double top = std::min(last * ratio, hi);
  double best = last;
  for (int i = 1; i <= fine_steps; ++i) {
    const double x = last + (top - last) * i / fine_steps;
    if (x >= hi) break;
    if (fits(x)) best = x;
  }
  return best;
}

void WeightedMoments(const Matrix& x, const Vector& w, Vector& first,
                     Matrix& second) {
  const Eigen::Index d = x.cols();
  first = Vector::Zero(d);
  second = Matrix::Zero(d, d);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index a = 0; a < d; ++a) {
      first(a) += w(i) * x(i, a);
      for (Eigen::Index b = 0; b < d; ++b) second(a, b) += w(i) * x(i, a) * x(i, b);
    }
  }
}

double BruteForceNicv(const Matrix& x, const std::vector<Vector>& centers) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (const Vector& c : centers) {
      double d2 = 0.0;
      for (Eigen::Index a = 0; a < x.cols(); ++a) {
        d2 += (x(i, a) - c(a)) * (x(i, a) - c(a));
      }
      best = std::min(best, d2);
    }
    total += best;
  }
  return total / static_cast<double>(x.rows());
}

double MatchedMeanError(const std::vector<Vector>& estimated,
                        const std::vector<Vector>& truth) {
  std::vector<int> perm(truth.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double worst = 0.0;
    for (std::size_t k = 0; k < truth.size(); ++k) {
      worst = std::max(worst, (estimated[perm[k]] - truth[k]).norm());
    }
    best = std::min(best, worst);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace dpem::oracle

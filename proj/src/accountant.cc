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

#include "dpem/accountant.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <string>

#include "absl/status/status.h"
#include "absl/strings/ascii.h"
#include "absl/strings/str_cat.h"
#include "dpem/status_macros.h"

namespace dpem {
namespace {

// Relative width at which the eps_i bisection stops.
constexpr double kCalibrationRelTol = 1e-10;

absl::Status Unattainable(std::string_view why) {
  return absl::ResourceExhaustedError(
      absl::StrCat("privacy budget unattainable: ", std::string(why)));
}

// Delta left for the slack / tail bound once the Gaussian delta_i terms are
// paid for.
absl::StatusOr<double> RemainingDelta(double target_delta,
                                      double gaussian_delta) {
  const double remaining = target_delta - gaussian_delta;
  if (!(remaining > 0.0)) {
    return Unattainable(absl::StrCat("Gaussian delta_i terms sum to ",
                                     gaussian_delta, " >= total delta ",
                                     target_delta));
  }
  return remaining;
}

absl::StatusOr<double> BisectEpsI(
    const std::function<absl::StatusOr<PrivacyBudget>(double)>& compose,
    const PrivacyBudget& total) {
  DPEM_RETURN_IF_ERROR(ValidateBudget(total));
  PrivacyBudget spent;
  auto fits = [&](double eps_i) -> absl::StatusOr<bool> {
    DPEM_ASSIGN_OR_RETURN(spent, compose(eps_i));
    return spent.epsilon <= total.epsilon && spent.delta <= total.delta;
  };
  DPEM_ASSIGN_OR_RETURN(const bool lo_fits, fits(kMinEpsI));
  if (!lo_fits) {
    return Unattainable(absl::StrCat(
        "eps_i = ", kMinEpsI, " already spends (", spent.epsilon, ", ",
        spent.delta, ") against (", total.epsilon, ", ", total.delta, ")"));
  }
  DPEM_ASSIGN_OR_RETURN(const bool hi_fits, fits(kMaxEpsI));
  if (hi_fits) return kMaxEpsI;
  double lo = kMinEpsI;
  double hi = kMaxEpsI;
  while (hi - lo > kCalibrationRelTol * lo) {
    const double mid = 0.5 * (lo + hi);
    DPEM_ASSIGN_OR_RETURN(const bool mid_fits, fits(mid));
    (mid_fits ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace

std::string_view ScenarioName(Scenario s) {
  return s == Scenario::kLLG ? "LLG" : "GGG";
}

std::string_view CompositionName(Composition c) {
  switch (c) {
    case Composition::kLinear:
      return "linear";
    case Composition::kAdvanced:
      return "advanced";
    case Composition::kZcdp:
      return "zcdp";
    case Composition::kMomentsAccountant:
      return "ma";
  }
  return "unknown";
}

absl::StatusOr<Scenario> ParseScenario(std::string_view text) {
  const std::string lower = absl::AsciiStrToLower(std::string(text));
  if (lower == "llg") return Scenario::kLLG;
  if (lower == "ggg") return Scenario::kGGG;
  return absl::InvalidArgumentError(
      absl::StrCat("unknown scenario '", std::string(text), "' (expected llg or ggg)"));
}

absl::StatusOr<Composition> ParseComposition(std::string_view text) {
  const std::string lower = absl::AsciiStrToLower(std::string(text));
  if (lower == "linear" || lower == "lin") return Composition::kLinear;
  if (lower == "advanced" || lower == "adv") return Composition::kAdvanced;
  if (lower == "zcdp") return Composition::kZcdp;
  if (lower == "ma" || lower == "moments") {
    return Composition::kMomentsAccountant;
  }
  return absl::InvalidArgumentError(absl::StrCat(
      "unknown composition '", std::string(text), "' (expected linear, advanced, zcdp, ma)"));
}

absl::Status ValidateBudget(const PrivacyBudget& budget) {
  if (!(budget.epsilon > 0.0) || !std::isfinite(budget.epsilon)) {
    return absl::InvalidArgumentError(
        absl::StrCat("epsilon must be positive, got ", budget.epsilon));
  }
  if (!(budget.delta > 0.0 && budget.delta < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("delta must lie in (0, 1), got ", budget.delta));
  }
  return absl::OkStatus();
}

absl::Status ValidatePlan(const CompositionPlan& plan) {
  if (plan.iterations < 0 || plan.components < 0) {
    return absl::InvalidArgumentError(
        "iterations and components must be non-negative");
  }
  if (!(plan.delta_i > 0.0 && plan.delta_i < 1.0)) {
    return absl::InvalidArgumentError("delta_i must lie in (0, 1)");
  }
  if (plan.lambda_max < 1) {
    return absl::InvalidArgumentError("lambda_max must be at least 1");
  }
  if (plan.advanced_slack < 0.0 || plan.advanced_slack >= 1.0) {
    return absl::InvalidArgumentError("advanced slack must lie in [0, 1)");
  }
  return absl::OkStatus();
}

MechanismCounts CountMechanisms(const CompositionPlan& plan) {
  const std::int64_t j = plan.iterations;
  const std::int64_t k = plan.components;
  if (plan.scenario == Scenario::kLLG) return {j * (k + 1), j * k};
  return {0, j * (2 * k + 1)};
}

absl::StatusOr<ParameterNoise> CalibratedParameterNoise(
    const CompositionPlan& plan, double eps_i) {
  DPEM_ASSIGN_OR_RETURN(const double sigma,
                        GaussianSigma(1.0, eps_i, plan.delta_i));
  const GaussianNoise unit{1.0, sigma};
  return ParameterNoise{unit, unit, unit};
}

double LaplaceMoment(int lambda, double eps_i) {
  const double l = lambda;
  // Factor out e^{l eps} so large orders stay finite.
  const double inner = (l + 1.0) / (2.0 * l + 1.0) +
                       l / (2.0 * l + 1.0) * std::exp(-eps_i * (2.0 * l + 1.0));
  return l * eps_i + std::log(inner);
}

double GaussianMoment(int lambda, double sensitivity, double sigma) {
  const double l = lambda;
  return (l * l + l) * sensitivity * sensitivity / (2.0 * sigma * sigma);
}

MomentCurve MomentCurve::Scaled(double factor) const {
  MomentCurve out(lambda_max());
  for (int l = 1; l <= lambda_max(); ++l) out.Add(l, factor * at(l));
  return out;
}

MomentCurve MaTotalMoment(const CompositionPlan& plan, double eps_i,
                          const ParameterNoise& noise) {
  const double j = plan.iterations;
  const double k = plan.components;
  MomentCurve curve(plan.lambda_max);
  for (int l = 1; l <= plan.lambda_max; ++l) {
    double total = 0.0;
    if (plan.scenario == Scenario::kLLG) {
      total += j * (k + 1.0) * LaplaceMoment(l, eps_i);
      total += j * k *
               GaussianMoment(l, noise.covariances.sensitivity,
                              noise.covariances.sigma);
    } else {
      total += j * GaussianMoment(l, noise.weights.sensitivity,
                                  noise.weights.sigma);
      total += j * k *
               GaussianMoment(l, noise.means.sensitivity, noise.means.sigma);
      total += j * k *
               GaussianMoment(l, noise.covariances.sensitivity,
                              noise.covariances.sigma);
    }
    curve.Add(l, total);
  }
  return curve;
}

absl::StatusOr<double> MaTailEpsilon(const MomentCurve& curve, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) {
    return absl::InvalidArgumentError("delta must lie in (0, 1)");
  }
  const double log_inv_delta = -std::log(delta);
  double best = std::numeric_limits<double>::infinity();
  for (int l = 1; l <= curve.lambda_max(); ++l) {
    best = std::min(best, (curve.at(l) + log_inv_delta) / l);
  }
  if (!std::isfinite(best)) {
    return Unattainable("moment bound is infinite for every lambda");
  }
  return std::max(best, 0.0);
}

double ZcdpRho(const CompositionPlan& plan, double eps_i,
               const ParameterNoise& noise) {
  const double j = plan.iterations;
  const double k = plan.components;
  auto gaussian_rho = [](const GaussianNoise& g) {
    return g.sensitivity * g.sensitivity / (2.0 * g.sigma * g.sigma);
  };
  if (plan.scenario == Scenario::kLLG) {
    return j * (k + 1.0) * eps_i * eps_i / 2.0 +
           j * k * gaussian_rho(noise.covariances);
  }
  return j * gaussian_rho(noise.weights) + j * k * gaussian_rho(noise.means) +
         j * k * gaussian_rho(noise.covariances);
}

double ZcdpToDp(double rho, double delta) {
  if (rho <= 0.0) return 0.0;
  return rho + 2.0 * std::sqrt(rho * std::log(1.0 / delta));
}

PrivacyBudget LinearCompose(const CompositionPlan& plan, double eps_i) {
  const MechanismCounts counts = CountMechanisms(plan);
  return {static_cast<double>(counts.total()) * eps_i,
          static_cast<double>(counts.gaussian) * plan.delta_i};
}

PrivacyBudget AdvancedCompose(const CompositionPlan& plan, double eps_i,
                              double slack) {
  const MechanismCounts counts = CountMechanisms(plan);
  const double m = static_cast<double>(counts.total());
  const double epsilon = m * eps_i * std::expm1(eps_i) +
                         std::sqrt(2.0 * m * std::log(1.0 / slack)) * eps_i;
  return {epsilon, slack + static_cast<double>(counts.gaussian) * plan.delta_i};
}

absl::StatusOr<PrivacyBudget> ComposePlan(const CompositionPlan& plan,
                                          double eps_i, double target_delta) {
  DPEM_RETURN_IF_ERROR(ValidatePlan(plan));
  const double gaussian_delta =
      static_cast<double>(CountMechanisms(plan).gaussian) * plan.delta_i;
  switch (plan.method) {
    case Composition::kLinear:
      return LinearCompose(plan, eps_i);
    case Composition::kAdvanced: {
      double slack = plan.advanced_slack;
      if (slack == 0.0) {
        DPEM_ASSIGN_OR_RETURN(slack,
                              RemainingDelta(target_delta, gaussian_delta));
      }
      return AdvancedCompose(plan, eps_i, slack);
    }
    case Composition::kZcdp: {
      DPEM_ASSIGN_OR_RETURN(const ParameterNoise noise,
                            CalibratedParameterNoise(plan, eps_i));
      return PrivacyBudget{ZcdpToDp(ZcdpRho(plan, eps_i, noise), target_delta),
                           target_delta};
    }
    case Composition::kMomentsAccountant: {
      DPEM_ASSIGN_OR_RETURN(const ParameterNoise noise,
                            CalibratedParameterNoise(plan, eps_i));
      DPEM_ASSIGN_OR_RETURN(const double tail_delta,
                            RemainingDelta(target_delta, gaussian_delta));
      DPEM_ASSIGN_OR_RETURN(
          const double epsilon,
          MaTailEpsilon(MaTotalMoment(plan, eps_i, noise), tail_delta));
      return PrivacyBudget{epsilon, target_delta};
    }
  }
  return absl::InvalidArgumentError("unknown composition method");
}

absl::StatusOr<double> Calibrate(const CompositionPlan& plan,
                                 const PrivacyBudget& total) {
  DPEM_RETURN_IF_ERROR(ValidatePlan(plan));
  if (CountMechanisms(plan).total() == 0) return kMaxEpsI;
  return BisectEpsI(
      [&](double eps_i) { return ComposePlan(plan, eps_i, total.delta); },
      total);
}

absl::StatusOr<double> MaCalibrate(CompositionPlan plan,
                                   const PrivacyBudget& total) {
  plan.method = Composition::kMomentsAccountant;
  return Calibrate(plan, total);
}

absl::StatusOr<double> ZcdpCalibrate(CompositionPlan plan,
                                     const PrivacyBudget& total) {
  plan.method = Composition::kZcdp;
  return Calibrate(plan, total);
}

absl::StatusOr<double> PureZcdpEpsI(std::int64_t mechanisms,
                                    const PrivacyBudget& total) {
  DPEM_RETURN_IF_ERROR(ValidateBudget(total));
  if (mechanisms < 1) {
    return absl::InvalidArgumentError("need at least one mechanism");
  }
  // Largest rho with rho + 2 sqrt(rho L) <= eps: sqrt(rho) = sqrt(L + eps) - sqrt(L).
  const double log_inv_delta = std::log(1.0 / total.delta);
  const double root =
      std::sqrt(log_inv_delta + total.epsilon) - std::sqrt(log_inv_delta);
  return std::sqrt(2.0 * root * root / static_cast<double>(mechanisms));
}

double MechanismEpsilon(const MechanismSpec& spec, double delta) {
  if (spec.kind == MechanismKind::kLaplace) {
    return spec.sensitivity / spec.noise_scale;
  }
  return spec.sensitivity * std::sqrt(2.0 * std::log(1.25 / delta)) /
         spec.noise_scale;
}

double MechanismRho(const MechanismSpec& spec) {
  if (spec.kind == MechanismKind::kLaplace) {
    const double eps = spec.sensitivity / spec.noise_scale;
    return eps * eps / 2.0;
  }
  return spec.sensitivity * spec.sensitivity /
         (2.0 * spec.noise_scale * spec.noise_scale);
}

double MechanismMoment(int lambda, const MechanismSpec& spec) {
  if (spec.kind == MechanismKind::kLaplace) {
    return LaplaceMoment(lambda, spec.sensitivity / spec.noise_scale);
  }
  return GaussianMoment(lambda, spec.sensitivity, spec.noise_scale);
}

absl::StatusOr<PrivacyBudget> Compose(std::span<const MechanismClass> classes,
                                      Composition method, double target_delta,
                                      const AccountantOptions& options) {
  if (!(target_delta > 0.0 && target_delta < 1.0)) {
    return absl::InvalidArgumentError("target delta must lie in (0, 1)");
  }
  double delta_sum = 0.0;
  double gaussian_delta = 0.0;
  for (const MechanismClass& c : classes) {
    DPEM_RETURN_IF_ERROR(ValidateSpec(c.spec));
    if (c.count < 0) return absl::InvalidArgumentError("negative count");
    delta_sum += static_cast<double>(c.count) * c.delta;
    if (c.spec.kind == MechanismKind::kGaussian) {
      if (!(c.delta > 0.0 && c.delta < 1.0)) {
        return absl::InvalidArgumentError(
            "Gaussian mechanisms need a delta in (0, 1)");
      }
      gaussian_delta += static_cast<double>(c.count) * c.delta;
    }
  }

  switch (method) {
    case Composition::kLinear: {
      double epsilon = 0.0;
      for (const MechanismClass& c : classes) {
        epsilon += static_cast<double>(c.count) * MechanismEpsilon(c.spec, c.delta);
      }
      return PrivacyBudget{epsilon, delta_sum};
    }
    case Composition::kAdvanced: {
      double m = 0.0;
      double eps_max = 0.0;
      for (const MechanismClass& c : classes) {
        if (c.count == 0) continue;
        m += static_cast<double>(c.count);
        eps_max = std::max(eps_max, MechanismEpsilon(c.spec, c.delta));
      }
      double slack = options.advanced_slack;
      if (slack == 0.0) {
        DPEM_ASSIGN_OR_RETURN(slack, RemainingDelta(target_delta, delta_sum));
      }
      const double epsilon = m * eps_max * std::expm1(eps_max) +
                             std::sqrt(2.0 * m * std::log(1.0 / slack)) * eps_max;
      return PrivacyBudget{epsilon, slack + delta_sum};
    }
    case Composition::kZcdp: {
      double rho = 0.0;
      for (const MechanismClass& c : classes) {
        rho += static_cast<double>(c.count) * MechanismRho(c.spec);
      }
      return PrivacyBudget{ZcdpToDp(rho, target_delta), target_delta};
    }
    case Composition::kMomentsAccountant: {
      MomentCurve curve(options.lambda_max);
      for (int l = 1; l <= options.lambda_max; ++l) {
        double total = 0.0;
        for (const MechanismClass& c : classes) {
          total += static_cast<double>(c.count) * MechanismMoment(l, c.spec);
        }
        curve.Add(l, total);
      }
      DPEM_ASSIGN_OR_RETURN(const double tail_delta,
                            RemainingDelta(target_delta, gaussian_delta));
      DPEM_ASSIGN_OR_RETURN(const double epsilon,
                            MaTailEpsilon(curve, tail_delta));
      return PrivacyBudget{epsilon, target_delta};
    }
  }
  return absl::InvalidArgumentError("unknown composition method");
}

absl::StatusOr<PrivacyBudget> ComposeTrace(const AccountingTrace& trace,
                                           Composition method,
                                           double target_delta,
                                           const AccountantOptions& options) {
  std::vector<MechanismClass> classes;
  classes.reserve(trace.size());
  for (const TraceRecord& r : trace.records) {
    classes.push_back({r.spec, r.delta, 1});
  }
  return Compose(classes, method, target_delta, options);
}

absl::StatusOr<double> CalibrateMechanisms(const MechanismBuilder& build,
                                           Composition method,
                                           const PrivacyBudget& total,
                                           const AccountantOptions& options) {
  return BisectEpsI(
      [&](double eps_i) {
        const std::vector<MechanismClass> classes = build(eps_i);
        return Compose(classes, method, total.delta, options);
      },
      total);
}

}  // namespace dpem

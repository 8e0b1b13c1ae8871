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

#ifndef DPEM_ACCOUNTANT_H_
#define DPEM_ACCOUNTANT_H_

// Privacy-loss accounting for iterated mechanisms: closed-form log moments of
// the Laplace and Gaussian privacy-loss variables, four composition rules
// (linear, advanced, zCDP, moments accountant), and calibration of the
// per-mechanism budget eps_i from a total (epsilon, delta).
//
// Budget exhaustion (no eps_i in the search bracket fits the total, or the
// delta_i terms alone exceed the total delta) is reported as
// absl::StatusCode::kResourceExhausted.

#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "dpem/mechanisms.h"

namespace dpem {

enum class Scenario { kLLG, kGGG };
enum class Composition { kLinear, kAdvanced, kZcdp, kMomentsAccountant };

std::string_view ScenarioName(Scenario s);
std::string_view CompositionName(Composition c);
absl::StatusOr<Scenario> ParseScenario(std::string_view text);
// Accepts linear, advanced, zcdp, ma (case-insensitive).
absl::StatusOr<Composition> ParseComposition(std::string_view text);

struct PrivacyBudget {
  double epsilon = 1.0;
  double delta = 1e-4;
};

absl::Status ValidateBudget(const PrivacyBudget& budget);

inline constexpr int kDefaultLambdaMax = 64;

// eps_i search bracket; the upper end keeps Gaussian calibration valid.
inline constexpr double kMinEpsI = 1e-8;
inline constexpr double kMaxEpsI = 1.0 - 1e-8;

struct CompositionPlan {
  Scenario scenario = Scenario::kGGG;
  int iterations = 1;
  int components = 1;
  double delta_i = 1e-6;
  Composition method = Composition::kZcdp;
  // Advanced composition slack delta'. Zero means "whatever remains of the
  // total delta after the delta_i terms".
  double advanced_slack = 0.0;
  int lambda_max = kDefaultLambdaMax;
};

absl::Status ValidatePlan(const CompositionPlan& plan);

struct MechanismCounts {
  std::int64_t laplace = 0;
  std::int64_t gaussian = 0;
  std::int64_t total() const { return laplace + gaussian; }
};

// LLG: J(K+1) Laplace + JK Gaussian. GGG: J(2K+1) Gaussian.
MechanismCounts CountMechanisms(const CompositionPlan& plan);

// Sensitivity and stddev of one Gaussian-noised parameter class.
struct GaussianNoise {
  double sensitivity = 1.0;
  double sigma = 1.0;
};

// Per-class Gaussian noise of a MoG iteration. LLG only uses `covariances`.
struct ParameterNoise {
  GaussianNoise weights;
  GaussianNoise means;
  GaussianNoise covariances;
};

// Unit sensitivities with sigma = GaussianSigma(1, eps_i, plan.delta_i).
absl::StatusOr<ParameterNoise> CalibratedParameterNoise(
    const CompositionPlan& plan, double eps_i);

// Log moment of the Laplace privacy loss at order lambda:
// log[(l+1)/(2l+1) e^{l eps} + l/(2l+1) e^{-eps (l+1)}]. lambda = 0 gives 0.
double LaplaceMoment(int lambda, double eps_i);

// (lambda^2 + lambda) sensitivity^2 / (2 sigma^2).
double GaussianMoment(int lambda, double sensitivity, double sigma);

// alpha(lambda) for integer lambda in [1, lambda_max].
class MomentCurve {
 public:
  explicit MomentCurve(int lambda_max = kDefaultLambdaMax)
      : values_(static_cast<std::size_t>(lambda_max), 0.0) {}

  int lambda_max() const { return static_cast<int>(values_.size()); }
  double at(int lambda) const { return values_[lambda - 1]; }
  void Add(int lambda, double value) { values_[lambda - 1] += value; }

  MomentCurve Scaled(double factor) const;

 private:
  std::vector<double> values_;
};

// Sums per-mechanism moment bounds of a plan: LLG gives
// J(K+1) alpha_L + JK alpha_G; GGG sums J alpha_G(weights) +
// JK alpha_G(means) + JK alpha_G(covariances).
MomentCurve MaTotalMoment(const CompositionPlan& plan, double eps_i,
                          const ParameterNoise& noise);

// Smallest eps with min_lambda exp(alpha(lambda) - lambda eps) <= delta,
// searched over integer lambda in [1, lambda_max].
absl::StatusOr<double> MaTailEpsilon(const MomentCurve& curve, double delta);

// rho of the plan: pure eps_i releases contribute eps_i^2 / 2, Gaussian ones
// sensitivity^2 / (2 sigma^2).
double ZcdpRho(const CompositionPlan& plan, double eps_i,
               const ParameterNoise& noise);

// rho + 2 sqrt(rho log(1/delta)).
double ZcdpToDp(double rho, double delta);

// (J(2K+1) eps_i, n_gauss delta_i).
PrivacyBudget LinearCompose(const CompositionPlan& plan, double eps_i);

// m eps_i (e^{eps_i} - 1) + sqrt(2 m log(1/slack)) eps_i with m = J(2K+1);
// delta = slack + n_gauss delta_i.
PrivacyBudget AdvancedCompose(const CompositionPlan& plan, double eps_i,
                              double slack);

// Total (epsilon, delta) of the plan under plan.method. `target_delta` is the
// delta at which zCDP and the moments accountant are converted and the pool
// the advanced slack is drawn from.
absl::StatusOr<PrivacyBudget> ComposePlan(const CompositionPlan& plan,
                                          double eps_i, double target_delta);

// Largest eps_i in [kMinEpsI, kMaxEpsI] whose composed spend fits `total`.
absl::StatusOr<double> Calibrate(const CompositionPlan& plan,
                                 const PrivacyBudget& total);
absl::StatusOr<double> MaCalibrate(CompositionPlan plan,
                                   const PrivacyBudget& total);
absl::StatusOr<double> ZcdpCalibrate(CompositionPlan plan,
                                     const PrivacyBudget& total);

// Largest eps_i such that `mechanisms` eps_i-DP releases, composed in zCDP
// (rho = m eps_i^2 / 2) and converted at total.delta, fit total.epsilon.
// Closed form; not limited to eps_i < 1.
absl::StatusOr<double> PureZcdpEpsI(std::int64_t mechanisms,
                                    const PrivacyBudget& total);

// --- Mechanism-level accounting -------------------------------------------

// A homogeneous group of `count` invocations of one mechanism.
struct MechanismClass {
  MechanismSpec spec;
  double delta = 0.0;
  std::int64_t count = 1;
};

struct AccountantOptions {
  int lambda_max = kDefaultLambdaMax;
  double advanced_slack = 0.0;
};

// Standalone (eps, delta)-DP level of one invocation: sensitivity / b for
// Laplace, sensitivity sqrt(2 log(1.25/delta)) / sigma for Gaussian.
double MechanismEpsilon(const MechanismSpec& spec, double delta);
double MechanismRho(const MechanismSpec& spec);
double MechanismMoment(int lambda, const MechanismSpec& spec);

// Composes arbitrary mechanism classes. Advanced composition uses the largest
// per-invocation epsilon for every invocation. The moments accountant converts
// at target_delta minus the Gaussian delta terms.
absl::StatusOr<PrivacyBudget> Compose(std::span<const MechanismClass> classes,
                                      Composition method, double target_delta,
                                      const AccountantOptions& options = {});

absl::StatusOr<PrivacyBudget> ComposeTrace(
    const AccountingTrace& trace, Composition method, double target_delta,
    const AccountantOptions& options = {});

using MechanismBuilder =
    std::function<std::vector<MechanismClass>(double eps_i)>;

// Largest eps_i in [kMinEpsI, kMaxEpsI] such that
// Compose(build(eps_i), method, total.delta) fits `total`.
absl::StatusOr<double> CalibrateMechanisms(const MechanismBuilder& build,
                                           Composition method,
                                           const PrivacyBudget& total,
                                           const AccountantOptions& options = {});

}  // namespace dpem

#endif  // DPEM_ACCOUNTANT_H_

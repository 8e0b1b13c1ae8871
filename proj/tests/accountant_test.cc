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

#include <cmath>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "oracles.h"

namespace dpem {
namespace {

using ::testing::DoubleNear;

CompositionPlan Plan(Scenario s, int j, int k, Composition m,
                     double delta_i = 1e-6) {
  CompositionPlan p;
  p.scenario = s;
  p.iterations = j;
  p.components = k;
  p.method = m;
  p.delta_i = delta_i;
  return p;
}

TEST(LaplaceMomentTest, ZerothOrderVanishes) {
  EXPECT_DOUBLE_EQ(LaplaceMoment(0, 0.3), 0.0);
}

TEST(LaplaceMomentTest, FirstOrderClosedForm) {
  EXPECT_NEAR(LaplaceMoment(1, 0.1),
              std::log(2.0 / 3.0 * std::exp(0.1) + 1.0 / 3.0 * std::exp(-0.2)),
              1e-15);
}

TEST(LaplaceMomentTest, IncreasesWithOrder) {
  EXPECT_GT(LaplaceMoment(2, 0.5), LaplaceMoment(1, 0.5));
}

TEST(LaplaceMomentTest, MatchesQuadrature) {
  for (double eps : {0.01, 0.1, 0.5, 1.0}) {
    for (int lambda : {1, 2, 5, 16, 32}) {
      EXPECT_NEAR(LaplaceMoment(lambda, eps),
                  oracle::LaplaceMomentQuadrature(lambda, eps), 1e-8)
          << "eps=" << eps << " lambda=" << lambda;
    }
  }
}

TEST(GaussianMomentTest, Examples) {
  EXPECT_DOUBLE_EQ(GaussianMoment(1, 1.0, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(GaussianMoment(7, 0.0, 3.0), 0.0);
  EXPECT_DOUBLE_EQ(GaussianMoment(3, 2.0, 4.0), 1.5);
}

TEST(GaussianMomentTest, MatchesQuadrature) {
  for (double ratio : {1.0, 2.0, 10.0}) {
    for (int lambda : {1, 3, 8, 32}) {
      EXPECT_NEAR(GaussianMoment(lambda, 1.0, ratio),
                  oracle::GaussianMomentQuadrature(lambda, 1.0, ratio), 1e-8)
          << "sigma=" << ratio << " lambda=" << lambda;
    }
  }
}

TEST(MaTotalMomentTest, SingleLaplaceEqualsLaplaceMoment) {
  const CompositionPlan plan =
      Plan(Scenario::kLLG, 1, 0, Composition::kMomentsAccountant);
  const MomentCurve curve =
      MaTotalMoment(plan, 0.3, *CalibratedParameterNoise(plan, 0.3));
  for (int l = 1; l <= curve.lambda_max(); ++l) {
    EXPECT_DOUBLE_EQ(curve.at(l), LaplaceMoment(l, 0.3));
  }
}

TEST(MaTotalMomentTest, GggCountsFourHundredTwentyTerms) {
  const CompositionPlan plan =
      Plan(Scenario::kGGG, 20, 10, Composition::kMomentsAccountant);
  EXPECT_EQ(CountMechanisms(plan).gaussian, 420);
  EXPECT_EQ(CountMechanisms(plan).laplace, 0);
  const ParameterNoise noise = *CalibratedParameterNoise(plan, 0.2);
  const MomentCurve curve = MaTotalMoment(plan, 0.2, noise);
  EXPECT_NEAR(curve.at(4),
              420 * GaussianMoment(4, 1.0, noise.means.sigma), 1e-9);
}

TEST(MaTotalMomentTest, AdditiveInIterations) {
  for (Scenario s : {Scenario::kLLG, Scenario::kGGG}) {
    const CompositionPlan one = Plan(s, 1, 3, Composition::kMomentsAccountant);
    CompositionPlan two = one;
    two.iterations = 2;
    const ParameterNoise noise = *CalibratedParameterNoise(one, 0.4);
    const MomentCurve a = MaTotalMoment(one, 0.4, noise);
    const MomentCurve b = MaTotalMoment(two, 0.4, noise);
    for (int l = 1; l <= a.lambda_max(); ++l) {
      EXPECT_NEAR(b.at(l), 2.0 * a.at(l), 1e-12 * b.at(l));
    }
  }
}

TEST(MaTailEpsilonTest, ZeroCurveBound) {
  for (int lambda_max : {8, 64, 256}) {
    const MomentCurve zero(lambda_max);
    const double eps = *MaTailEpsilon(zero, 1e-5);
    EXPECT_LE(eps, std::log(1e5) / lambda_max + 1e-15);
  }
}

TEST(MaTailEpsilonTest, DoublingNeverDecreases) {
  MomentCurve curve;
  for (int l = 1; l <= curve.lambda_max(); ++l) {
    curve.Add(l, GaussianMoment(l, 1.0, 5.0) + LaplaceMoment(l, 0.05));
  }
  EXPECT_GE(*MaTailEpsilon(curve.Scaled(2.0), 1e-5), *MaTailEpsilon(curve, 1e-5));
}

TEST(MaTailEpsilonTest, SingleGaussianBelowClassicalForLargeNoise) {
  // The tail bound only undercuts the classical guarantee once sigma is above
  // roughly 11 and the order range reaches sigma sqrt(2 log(1/delta)).
  for (double sigma : {20.0, 50.0, 100.0}) {
    MomentCurve curve(1024);
    for (int l = 1; l <= curve.lambda_max(); ++l) {
      curve.Add(l, GaussianMoment(l, 1.0, sigma));
    }
    const double delta = 1e-5;
    EXPECT_LE(*MaTailEpsilon(curve, delta),
              std::sqrt(2.0 * std::log(1.25 / delta)) / sigma)
        << sigma;
  }
}

TEST(MaTailEpsilonTest, SingleGaussianAboveClassicalForModerateNoise) {
  for (double sigma : {1.0, 2.0, 4.0, 8.0}) {
    MomentCurve curve(1024);
    for (int l = 1; l <= curve.lambda_max(); ++l) {
      curve.Add(l, GaussianMoment(l, 1.0, sigma));
    }
    EXPECT_GT(*MaTailEpsilon(curve, 1e-5),
              std::sqrt(2.0 * std::log(1.25 / 1e-5)) / sigma)
        << sigma;
  }
}

TEST(MaTailEpsilonTest, RejectsBadDelta) {
  EXPECT_FALSE(MaTailEpsilon(MomentCurve(), 0.0).ok());
  EXPECT_FALSE(MaTailEpsilon(MomentCurve(), 1.0).ok());
}

TEST(ZcdpTest, SinglePureMechanism) {
  CompositionPlan plan = Plan(Scenario::kLLG, 1, 0, Composition::kZcdp);
  EXPECT_DOUBLE_EQ(ZcdpRho(plan, 1.0, ParameterNoise{}), 0.5);
}

TEST(ZcdpTest, SingleGaussianAndSum) {
  const GaussianNoise g{1.0, 2.0};
  // One Gaussian of each class: J = 1, K = 0 leaves only the weights.
  CompositionPlan plan = Plan(Scenario::kGGG, 1, 0, Composition::kZcdp);
  EXPECT_DOUBLE_EQ(ZcdpRho(plan, 0.5, {g, g, g}), 0.125);
  plan.components = 1;
  EXPECT_DOUBLE_EQ(ZcdpRho(plan, 0.5, {g, g, g}), 3 * 0.125);
  // LLG with one component: two pure releases plus one Gaussian.
  plan.scenario = Scenario::kLLG;
  EXPECT_DOUBLE_EQ(ZcdpRho(plan, 0.5, {g, g, g}), 2 * 0.125 + 0.125);
}

TEST(ZcdpTest, ToDp) {
  EXPECT_DOUBLE_EQ(ZcdpToDp(0.0, 1e-5), 0.0);
  EXPECT_LT(ZcdpToDp(1e-14, 1e-5), 1e-6);
  EXPECT_NEAR(ZcdpToDp(1.0, std::exp(-1.0)), 3.0, 1e-15);
  EXPECT_NEAR(ZcdpToDp(0.25, 1e-4),
              0.25 + 2.0 * std::sqrt(0.25 * std::log(1e4)), 1e-15);
}

TEST(LinearComposeTest, Examples) {
  const PrivacyBudget a =
      LinearCompose(Plan(Scenario::kGGG, 20, 10, Composition::kLinear), 0.01);
  EXPECT_NEAR(a.epsilon, 4.2, 1e-12);
  EXPECT_NEAR(a.delta, 420e-6, 1e-18);
  EXPECT_DOUBLE_EQ(
      LinearCompose(Plan(Scenario::kLLG, 1, 1, Composition::kLinear), 0.1).delta,
      1e-6);
  const PrivacyBudget zero =
      LinearCompose(Plan(Scenario::kGGG, 0, 4, Composition::kLinear), 0.3);
  EXPECT_EQ(zero.epsilon, 0.0);
  EXPECT_EQ(zero.delta, 0.0);
}

TEST(AdvancedComposeTest, Examples) {
  const CompositionPlan one = Plan(Scenario::kGGG, 1, 0, Composition::kAdvanced);
  const double e = 0.2;
  EXPECT_NEAR(AdvancedCompose(one, e, std::exp(-1.0)).epsilon,
              e * std::expm1(e) + std::sqrt(2.0) * e, 1e-15);
  EXPECT_LT(AdvancedCompose(one, 1e-12, 1e-5).epsilon, 1e-10);
  const CompositionPlan big = Plan(Scenario::kGGG, 20, 10, Composition::kAdvanced);
  EXPECT_NEAR(AdvancedCompose(big, e, 1e-5).delta, 1e-5 + 420e-6, 1e-18);
}

TEST(AdvancedComposeTest, BeatsLinearForManySmallSteps) {
  const CompositionPlan plan =
      Plan(Scenario::kGGG, 20, 10, Composition::kAdvanced);
  for (double e : {1e-4, 1e-3, 1e-2}) {
    EXPECT_LT(AdvancedCompose(plan, e, 1e-5).epsilon,
              LinearCompose(plan, e).epsilon);
  }
}

TEST(ComposePlanTest, AgreesWithIndependentFormulas) {
  for (Composition m : {Composition::kLinear, Composition::kAdvanced,
                        Composition::kZcdp, Composition::kMomentsAccountant}) {
    for (Scenario s : {Scenario::kLLG, Scenario::kGGG}) {
      for (double e : {0.001, 0.05, 0.6}) {
        const CompositionPlan plan = Plan(s, 10, 3, m);
        const PrivacyBudget got = *ComposePlan(plan, e, 1e-4);
        const PrivacyBudget want = oracle::PlanSpend(plan, e, 1e-4);
        EXPECT_NEAR(got.epsilon, want.epsilon, 1e-12 * (1.0 + want.epsilon));
        EXPECT_NEAR(got.delta, want.delta, 1e-18);
      }
    }
  }
}

TEST(ComposePlanTest, MonotoneInIterationsComponentsAndBudget) {
  for (Composition m : {Composition::kLinear, Composition::kAdvanced,
                        Composition::kZcdp, Composition::kMomentsAccountant}) {
    for (Scenario s : {Scenario::kLLG, Scenario::kGGG}) {
      double prev = 0.0;
      for (int j = 1; j <= 12; ++j) {
        const double e = ComposePlan(Plan(s, j, 2, m), 0.05, 1e-3)->epsilon;
        EXPECT_GE(e, prev);
        prev = e;
      }
      prev = 0.0;
      for (int k = 1; k <= 12; ++k) {
        const double e = ComposePlan(Plan(s, 3, k, m), 0.05, 1e-3)->epsilon;
        EXPECT_GE(e, prev);
        prev = e;
      }
      prev = 0.0;
      for (double ei = 0.01; ei < 1.0; ei += 0.01) {
        const double e = ComposePlan(Plan(s, 3, 2, m), ei, 1e-3)->epsilon;
        EXPECT_GE(e, prev);
        prev = e;
      }
    }
  }
}

TEST(CalibrateTest, RoundTripStaysWithinBudget) {
  const PrivacyBudget total{1.0, 1e-4};
  for (Composition m : {Composition::kLinear, Composition::kAdvanced,
                        Composition::kZcdp, Composition::kMomentsAccountant}) {
    for (Scenario s : {Scenario::kLLG, Scenario::kGGG}) {
      const CompositionPlan plan = Plan(s, 5, 2, m);
      const double eps_i = *Calibrate(plan, total);
      const PrivacyBudget spent = *ComposePlan(plan, eps_i, total.delta);
      EXPECT_LE(spent.epsilon, total.epsilon + 1e-9);
      EXPECT_LE(spent.delta, total.delta + 1e-9);
      // Tight: a slightly larger eps_i overspends.
      if (eps_i < kMaxEpsI) {
        EXPECT_GT(ComposePlan(plan, eps_i * (1 + 1e-6), total.delta)->epsilon,
                  total.epsilon);
      }
    }
  }
}

TEST(CalibrateTest, MaMatchesGridSearch) {
  const CompositionPlan plan =
      Plan(Scenario::kGGG, 1, 1, Composition::kMomentsAccountant);
  const PrivacyBudget total{1.0, 1e-4};
  const double got = *MaCalibrate(plan, total);
  const double want = oracle::GridSearchLargest(
      [&](double e) {
        const PrivacyBudget s = oracle::PlanSpend(plan, e, total.delta);
        return s.epsilon <= total.epsilon && s.delta <= total.delta;
      },
      1e-6, kMaxEpsI);
  EXPECT_NEAR(got, want, 1e-4 * want);
}

TEST(CalibrateTest, ZcdpMatchesGridSearch) {
  for (Scenario s : {Scenario::kLLG, Scenario::kGGG}) {
    const CompositionPlan plan = Plan(s, 10, 3, Composition::kZcdp);
    const PrivacyBudget total{0.5, 1e-4};
    const double got = *ZcdpCalibrate(plan, total);
    const double want = oracle::GridSearchLargest(
        [&](double e) {
          return oracle::PlanSpend(plan, e, total.delta).epsilon <= total.epsilon;
        },
        1e-6, kMaxEpsI);
    EXPECT_NEAR(got, want, 1e-4 * want);
  }
}

TEST(CalibrateTest, NonincreasingInIterations) {
  for (Composition m : {Composition::kLinear, Composition::kAdvanced,
                        Composition::kZcdp, Composition::kMomentsAccountant}) {
    double prev = 1.0;
    for (int j = 1; j <= 15; ++j) {
      const double eps_i =
          *Calibrate(Plan(Scenario::kGGG, j, 2, m), PrivacyBudget{1.0, 1e-3});
      EXPECT_LE(eps_i, prev * (1 + 1e-9));
      prev = eps_i;
    }
  }
}

TEST(CalibrateTest, ZcdpAtLeastLinearForGgg) {
  for (int j = 1; j <= 20; j += 3) {
    for (int k = 1; k <= 10; k += 3) {
      for (double eps : {0.1, 1.0, 4.0}) {
        const PrivacyBudget total{eps, 1e-4};
        const double z =
            *Calibrate(Plan(Scenario::kGGG, j, k, Composition::kZcdp), total);
        const auto l =
            Calibrate(Plan(Scenario::kGGG, j, k, Composition::kLinear), total);
        // Linear composition alone runs out of delta once J(2K+1) > 100.
        if (!l.ok()) {
          EXPECT_EQ(l.status().code(), absl::StatusCode::kResourceExhausted);
          continue;
        }
        EXPECT_GE(z, *l) << j << " " << k << " " << eps;
      }
    }
  }
}

TEST(CalibrateTest, DominanceOrderingForLongGggRuns) {
  for (int j : {10, 20}) {
    for (int k : {3, 5}) {
      for (double eps : {0.1, 0.5, 1.0}) {
        // delta leaves room for the J(2K+1) delta_i terms of both baselines.
        const PrivacyBudget total{eps, 1e-3};
        const double z =
            *Calibrate(Plan(Scenario::kGGG, j, k, Composition::kZcdp), total);
        const double a =
            *Calibrate(Plan(Scenario::kGGG, j, k, Composition::kAdvanced), total);
        const double l =
            *Calibrate(Plan(Scenario::kGGG, j, k, Composition::kLinear), total);
        EXPECT_GT(z, a);
        EXPECT_GT(a, l);
      }
    }
  }
}

TEST(CalibrateTest, UnattainableIsResourceExhausted) {
  // JK delta_i = 2e-4 exceeds the total delta.
  const auto r = Calibrate(Plan(Scenario::kLLG, 20, 10, Composition::kLinear),
                           PrivacyBudget{1.0, 1e-4});
  EXPECT_EQ(r.status().code(), absl::StatusCode::kResourceExhausted);
  const auto tiny = Calibrate(Plan(Scenario::kGGG, 10, 3, Composition::kLinear),
                              PrivacyBudget{1e-9, 1e-4});
  EXPECT_EQ(tiny.status().code(), absl::StatusCode::kResourceExhausted);
}

TEST(PureZcdpEpsITest, InvertsComposition) {
  for (int m : {1, 10, 60}) {
    const PrivacyBudget total{0.01, 1e-4};
    const double e = *PureZcdpEpsI(m, total);
    EXPECT_NEAR(ZcdpToDp(m * e * e / 2.0, total.delta), total.epsilon, 1e-12);
  }
}

TEST(ComposeTest, MatchesPlanForEquivalentClasses) {
  const CompositionPlan plan = Plan(Scenario::kLLG, 4, 3, Composition::kZcdp);
  const double eps_i = 0.2;
  const double sigma = *GaussianSigma(0.01, eps_i, plan.delta_i);
  const std::vector<MechanismClass> classes = {
      {{MechanismKind::kLaplace, 0.02, 0.02 / eps_i}, 0.0, 16},
      {{MechanismKind::kGaussian, 0.01, sigma}, plan.delta_i, 12},
  };
  for (Composition m : {Composition::kLinear, Composition::kAdvanced,
                        Composition::kZcdp, Composition::kMomentsAccountant}) {
    CompositionPlan p = plan;
    p.method = m;
    const PrivacyBudget a = *ComposePlan(p, eps_i, 1e-3);
    const PrivacyBudget b = *Compose(classes, m, 1e-3);
    EXPECT_NEAR(a.epsilon, b.epsilon, 1e-10);
    EXPECT_NEAR(a.delta, b.delta, 1e-15);
  }
}

TEST(ParseTest, NamesRoundTrip) {
  for (Composition m : {Composition::kLinear, Composition::kAdvanced,
                        Composition::kZcdp, Composition::kMomentsAccountant}) {
    EXPECT_EQ(*ParseComposition(CompositionName(m)), m);
  }
  EXPECT_EQ(*ParseScenario("LLG"), Scenario::kLLG);
  EXPECT_EQ(*ParseScenario("ggg"), Scenario::kGGG);
  EXPECT_FALSE(ParseComposition("renyi").ok());
}

}  // namespace
}  // namespace dpem

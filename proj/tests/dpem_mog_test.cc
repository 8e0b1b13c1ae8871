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
#include <cmath>
#include <vector>

#include "dpem/data_io.h"
#include "gtest/gtest.h"
#include "oracles.h"

namespace dpem {
namespace {

double MaxDiff(const MoGParams& a, const MoGParams& b) {
  double worst = (a.weights - b.weights).cwiseAbs().maxCoeff();
  for (int c = 0; c < a.components(); ++c) {
    worst = std::max(worst, (a.means[c] - b.means[c]).cwiseAbs().maxCoeff());
    worst = std::max(
        worst, (a.covariances[c] - b.covariances[c]).cwiseAbs().maxCoeff());
  }
  return worst;
}

double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

class DpEmMoGTest : public ::testing::Test {
 protected:
  DpEmMoGTest()
      : data_(*BoundedDataset::Create(SynthMoG(3000, 3, 3, 4.0, 21)->data)) {}

  DpEmConfig Config() const {
    DpEmConfig cfg;
    cfg.components = 3;
    cfg.iterations = 10;
    cfg.total = {1.0, 1e-4};
    return cfg;
  }

  MoGParams Init(std::uint64_t seed) const {
    Rng rng = MakeRng(seed);
    return InitializeDataIndependent(3, 3, 0.1, rng);
  }

  BoundedDataset data_;
};

TEST_F(DpEmMoGTest, NoiseFreeMleEqualsEm) {
  DpEmConfig cfg = Config();
  cfg.estimator = Estimator::kMle;
  ZeroNoise zero;
  const DpEmResult dp = *RunDpEmMoG(data_, cfg, Init(1), 0.5, zero);
  EmOptions opts;
  opts.iterations = cfg.iterations;
  opts.estimator = Estimator::kMle;
  const EmResult em = *RunEm(data_, Init(1), opts);
  ASSERT_EQ(em.reinitialized, 0);
  EXPECT_LT(MaxDiff(dp.params, em.params), 1e-10);
}

TEST_F(DpEmMoGTest, NoiseFreeMapEqualsEm) {
  DpEmConfig cfg = Config();
  cfg.estimator = Estimator::kMap;
  ZeroNoise zero;
  const DpEmResult dp = *RunDpEmMoG(data_, cfg, Init(2), 0.5, zero);
  EmOptions opts;
  opts.iterations = cfg.iterations;
  opts.estimator = Estimator::kMap;
  const EmResult em = *RunEm(data_, Init(2), opts);
  EXPECT_LT(MaxDiff(dp.params, em.params), 1e-10);
}

TEST_F(DpEmMoGTest, GggTraceHasSeventyGaussianRecordsInDrawOrder) {
  const DpEmResult r = *RunDpEmMoG(data_, Config());
  ASSERT_EQ(r.trace.size(), 70u);
  for (int it = 0; it < 10; ++it) {
    const auto* rec = &r.trace.records[it * 7];
    EXPECT_EQ(rec[0].quantity, ReleasedQuantity::kWeights);
    for (int c = 0; c < 3; ++c) {
      EXPECT_EQ(rec[1 + c].quantity, ReleasedQuantity::kMean);
      EXPECT_EQ(rec[1 + c].component, c);
      EXPECT_EQ(rec[4 + c].quantity, ReleasedQuantity::kCovariance);
      EXPECT_EQ(rec[4 + c].component, c);
    }
    for (int j = 0; j < 7; ++j) {
      EXPECT_EQ(rec[j].iteration, it);
      EXPECT_EQ(rec[j].spec.kind, MechanismKind::kGaussian);
      EXPECT_DOUBLE_EQ(rec[j].delta, 1e-6);
    }
  }
}

TEST_F(DpEmMoGTest, LlgTraceMixesLaplaceAndGaussian) {
  DpEmConfig cfg = Config();
  cfg.scenario = Scenario::kLLG;
  const DpEmResult r = *RunDpEmMoG(data_, cfg);
  int laplace = 0, gaussian = 0;
  for (const TraceRecord& rec : r.trace.records) {
    if (rec.spec.kind == MechanismKind::kLaplace) {
      ++laplace;
      EXPECT_NE(rec.quantity, ReleasedQuantity::kCovariance);
      EXPECT_EQ(rec.delta, 0.0);
    } else {
      ++gaussian;
      EXPECT_EQ(rec.quantity, ReleasedQuantity::kCovariance);
    }
  }
  EXPECT_EQ(laplace, 10 * 4);
  EXPECT_EQ(gaussian, 10 * 3);
}

TEST_F(DpEmMoGTest, SensitivitiesFollowNoisedCounts) {
  DpEmConfig cfg = Config();
  cfg.estimator = Estimator::kMle;
  cfg.iterations = 1;
  ZeroNoise zero;
  const DpEmResult r = *RunDpEmMoG(data_, cfg, Init(3), 0.5, zero);
  const Responsibilities resp = *EStep(data_, Init(3));
  EXPECT_DOUBLE_EQ(r.trace.records[0].spec.sensitivity, 2.0 / 3000);
  for (int c = 0; c < 3; ++c) {
    const double nk = resp.counts(c);
    EXPECT_NEAR(r.trace.records[1 + c].spec.sensitivity, 2.0 / nk,
                1e-12 / nk);
    EXPECT_NEAR(r.trace.records[4 + c].spec.sensitivity, 2.0 / nk,
                1e-12 / nk);
    EXPECT_NEAR(r.trace.records[4 + c].spec.noise_scale,
                *GaussianSigma(2.0 / nk, 0.5, 1e-6), 1e-9);
  }
}

TEST_F(DpEmMoGTest, MapShiftsSensitivityDenominators) {
  DpEmConfig cfg = Config();
  cfg.iterations = 1;
  ZeroNoise zero;
  const DpEmResult r = *RunDpEmMoG(data_, cfg, Init(3), 0.5, zero);
  const Responsibilities resp = *EStep(data_, Init(3));
  for (int c = 0; c < 3; ++c) {
    const double nk = resp.counts(c);
    EXPECT_NEAR(r.trace.records[1 + c].spec.sensitivity, 2.0 / (nk + 1.0),
                1e-12);
    EXPECT_NEAR(r.trace.records[4 + c].spec.sensitivity,
                2.0 / (nk + 5.0 + 3.0 + 2.0), 1e-12);
  }
}

TEST_F(DpEmMoGTest, CollapsedWeightFloorsCountAndFlagsTrace) {
  DpEmConfig cfg = Config();
  cfg.iterations = 1;
  // Weight noise drives component 0 to zero; every later draw is zero.
  oracle::ScriptedNoise noise({-5.0, 0.0, 0.0});
  const DpEmResult r = *RunDpEmMoG(data_, cfg, Init(4), 0.5, noise);
  EXPECT_TRUE(r.trace.records[1].count_floored);
  EXPECT_TRUE(r.trace.records[4].count_floored);
  EXPECT_FALSE(r.trace.records[2].count_floored);
  EXPECT_EQ(r.trace.FlooredCount(), 2);
  EXPECT_TRUE(ValidateMoGParams(r.params, cfg.psd_floor).ok());
}

TEST_F(DpEmMoGTest, OutputAlwaysValid) {
  for (int s = 0; s < 40; ++s) {
    DpEmConfig cfg = Config();
    cfg.seed = s;
    cfg.total.epsilon = s % 2 ? 0.05 : 2.0;
    cfg.estimator = s % 3 ? Estimator::kMap : Estimator::kMle;
    cfg.scenario = s % 4 < 2 ? Scenario::kGGG : Scenario::kLLG;
    const DpEmResult r = *RunDpEmMoG(data_, cfg);
    EXPECT_TRUE(ValidateMoGParams(r.params, cfg.psd_floor).ok()) << s;
  }
}

TEST_F(DpEmMoGTest, SpendAuditWithinBudget) {
  for (Composition method : {Composition::kLinear, Composition::kAdvanced,
                             Composition::kZcdp, Composition::kMomentsAccountant}) {
    for (Scenario scenario : {Scenario::kGGG, Scenario::kLLG}) {
      DpEmConfig cfg = Config();
      cfg.method = method;
      cfg.scenario = scenario;
      cfg.total = {1.0, 1e-3};
      const auto r = RunDpEmMoG(data_, cfg);
      ASSERT_TRUE(r.ok()) << r.status();
      const PrivacyBudget spent = *AuditSpend(r->trace, cfg);
      EXPECT_LE(spent.epsilon, cfg.total.epsilon + 1e-9)
          << CompositionName(method) << " " << ScenarioName(scenario);
      EXPECT_LE(spent.delta, cfg.total.delta + 1e-9);
    }
  }
}

TEST_F(DpEmMoGTest, SameSeedReproduces) {
  const DpEmResult a = *RunDpEmMoG(data_, Config());
  const DpEmResult b = *RunDpEmMoG(data_, Config());
  EXPECT_EQ(MaxDiff(a.params, b.params), 0.0);
}

TEST_F(DpEmMoGTest, UnattainableBudgetIsResourceExhausted) {
  DpEmConfig cfg = Config();
  cfg.method = Composition::kLinear;
  cfg.total = {1.0, 1e-5};  // 70 delta_i terms exceed delta
  EXPECT_EQ(RunDpEmMoG(data_, cfg).status().code(),
            absl::StatusCode::kResourceExhausted);
}

TEST_F(DpEmMoGTest, TooManyComponentsRejected) {
  const BoundedDataset tiny =
      *BoundedDataset::Create((Matrix(2, 1) << 0.1, 0.2).finished());
  EXPECT_FALSE(RunDpEmMoG(tiny, Config()).ok());
}

TEST(DpEmMoGConsistencyTest, LargeBudgetNearNonPrivate) {
  const SyntheticMoG synth = *SynthMoG(10000, 2, 2, 4.0, 31);
  const BoundedDataset all = *BoundedDataset::Create(synth.data);
  const std::vector<Fold> folds = *CvSplit(all.n(), 10, 31);
  std::vector<double> gaps;
  for (int s = 0; s < 10; ++s) {
    const BoundedDataset train = all.Subset(folds[s].train);
    const BoundedDataset test = all.Subset(folds[s].test);
    DpEmConfig cfg;
    cfg.components = 2;
    cfg.iterations = 10;
    cfg.total = {4.0, 1e-4};
    cfg.seed = 100 + s;
    const DpEmResult dp = *RunDpEmMoG(train, cfg);
    EmOptions opts;
    opts.iterations = 100;
    Rng rng = MakeRng(200 + s);
    const EmResult em = *RunEmWithRestarts(train, 2, 5, opts, rng);
    gaps.push_back(*LogLikelihoodPerPoint(test, em.params) -
                   *LogLikelihoodPerPoint(test, dp.params));
  }
  EXPECT_LT(std::abs(Median(gaps)), 0.1) << "median gap " << Median(gaps);
}

}  // namespace
}  // namespace dpem

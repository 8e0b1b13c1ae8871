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

#include "cli.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/ascii.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "dpem/accountant.h"
#include "dpem/data_io.h"
#include "dpem/dataset.h"
#include "dpem/dpem_fa.h"
#include "dpem/dpem_mog.h"
#include "dpem/dpkmeans.h"
#include "dpem/mog.h"
#include "dpem/status_macros.h"

namespace dpem::cli {
namespace {

struct CalibrateFlags {
  double epsilon = 1.0;
  double delta = 1e-4;
  double delta_i = 1e-6;
  int iterations = 10;
  int components = 3;
  std::string scenario = "ggg";
  std::string methods = "all";
  int lambda_max = kDefaultLambdaMax;
};

struct FitFlags {
  std::string model = "mog";
  std::string data;
  bool header = false;
  std::string synthetic;
  int k = 3;
  int q = 2;
  int iterations = 10;
  std::string eps_list = "0.1,0.5,1,2,4";
  double delta = 1e-4;
  double delta_i = 1e-6;
  std::string methods;  // empty: zcdp for mog, every variant for kmeans
  std::string scenario = "ggg";
  std::string estimator = "map";
  int folds = 10;
  int seeds = 1;
  std::uint64_t seed = 0;
  std::string out = "dpem_out";
  int jobs = 1;
  int baseline_iterations = 100;
  int baseline_restarts = 5;
  double init_variance = kDefaultInitVariance;
  int lambda_max = kDefaultLambdaMax;
  bool baseline = true;
};

// A failure that already knows its exit code.
struct Failure {
  int code;
  std::string message;
};

int CodeFor(const absl::Status& s) {
  switch (s.code()) {
    case absl::StatusCode::kResourceExhausted:
      return kExitUnattainable;
    case absl::StatusCode::kInvalidArgument:
    case absl::StatusCode::kOutOfRange:
      return kExitBadFlags;
    default:
      return kExitDataError;
  }
}

std::string Lower(const std::string& s) { return absl::AsciiStrToLower(s); }

std::vector<std::string> SplitList(const std::string& text) {
  std::vector<std::string> out;
  for (absl::string_view part : absl::StrSplit(text, ',', absl::SkipEmpty())) {
    out.emplace_back(absl::StripAsciiWhitespace(part));
  }
  return out;
}

std::optional<Failure> ParseDoubles(const std::string& text,
                                    const std::string& flag,
                                    std::vector<double>& out) {
  for (const std::string& part : SplitList(text)) {
    double v = 0.0;
    if (!absl::SimpleAtod(part, &v) || !(v > 0.0)) {
      return Failure{kExitBadFlags,
                     absl::StrCat(flag, ": '", part, "' is not a positive number")};
    }
    out.push_back(v);
  }
  if (out.empty()) return Failure{kExitBadFlags, flag + " is empty"};
  return std::nullopt;
}

std::string Fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

bool WithinBudget(const PrivacyBudget& spent, const PrivacyBudget& total) {
  return spent.epsilon <= total.epsilon * (1.0 + 1e-9) &&
         spent.delta <= total.delta * (1.0 + 1e-9);
}

// ---------------------------------------------------------------- calibrate

int RunCalibrate(const CalibrateFlags& f, std::ostream& out,
                 std::ostream& err) {
  const auto scenario = ParseScenario(f.scenario);
  if (!scenario.ok()) {
    err << "error: " << scenario.status().message() << "\n";
    return kExitBadFlags;
  }
  std::vector<Composition> methods;
  if (Lower(f.methods) == "all") {
    methods = {Composition::kLinear, Composition::kAdvanced, Composition::kZcdp,
               Composition::kMomentsAccountant};
  } else {
    for (const std::string& name : SplitList(f.methods)) {
      const auto m = ParseComposition(name);
      if (!m.ok()) {
        err << "error: " << m.status().message() << "\n";
        return kExitBadFlags;
      }
      methods.push_back(*m);
    }
  }
  const PrivacyBudget total{f.epsilon, f.delta};
  if (absl::Status s = ValidateBudget(total); !s.ok()) {
    err << "error: " << s.message() << "\n";
    return kExitBadFlags;
  }

  const bool llg = *scenario == Scenario::kLLG;
  out << "# " << ScenarioName(*scenario) << " J=" << f.iterations
      << " K=" << f.components << " epsilon=" << Fmt(f.epsilon)
      << " delta=" << Fmt(f.delta) << " delta_i=" << Fmt(f.delta_i) << "\n";
  out << "# noise per unit sensitivity: "
      << (llg ? "Laplace b for weights and means, Gaussian sigma for "
                "covariances"
              : "Gaussian sigma for every parameter")
      << "\n";
  out << "method,eps_i,weights_noise,means_noise,covariances_noise,"
         "spent_epsilon,spent_delta\n";
  int code = kExitOk;
  for (Composition method : methods) {
    CompositionPlan plan;
    plan.scenario = *scenario;
    plan.iterations = f.iterations;
    plan.components = f.components;
    plan.delta_i = f.delta_i;
    plan.method = method;
    plan.lambda_max = f.lambda_max;
    if (absl::Status s = ValidatePlan(plan); !s.ok()) {
      err << "error: " << s.message() << "\n";
      return kExitBadFlags;
    }
    const auto eps_i = Calibrate(plan, total);
    if (!eps_i.ok()) {
      err << "error: " << CompositionName(method) << ": "
          << eps_i.status().message() << "\n";
      code = std::max(code, CodeFor(eps_i.status()));
      continue;
    }
    const double sigma = *GaussianSigma(1.0, *eps_i, f.delta_i);
    const double pi_mu = llg ? 1.0 / *eps_i : sigma;
    const PrivacyBudget spent = *ComposePlan(plan, *eps_i, total.delta);
    out << CompositionName(method) << "," << Fmt(*eps_i) << "," << Fmt(pi_mu)
        << "," << Fmt(pi_mu) << "," << Fmt(sigma) << ","
        << Fmt(spent.epsilon) << "," << Fmt(spent.delta) << "\n";
  }
  return code;
}

// ---------------------------------------------------------------------- fit

enum class Model { kMoG, kFa, kKMeans };

struct Cell {
  double epsilon = 0.0;  // 0 marks the non-private baseline
  std::string method;
  int fold = 0;
  int seed = 0;
};

struct FitContext {
  const FitFlags* flags;
  Model model;
  const BoundedDataset* data;
  std::vector<Fold> folds;
  Scenario scenario;
  Estimator estimator;
};

std::uint64_t CellSeed(std::uint64_t master, int fold, int seed) {
  Rng rng = MakeRng(master, (static_cast<std::uint64_t>(fold) << 32) |
                                static_cast<std::uint32_t>(seed));
  return rng();
}

absl::StatusOr<ExperimentResult> RunMoGCell(const FitContext& ctx,
                                            const Cell& cell,
                                            std::uint64_t seed,
                                            const BoundedDataset& train,
                                            const BoundedDataset& test,
                                            ExperimentResult r) {
  const FitFlags& f = *ctx.flags;
  r.metric = "test_loglik_per_point";
  if (cell.epsilon == 0.0) {
    Rng rng = MakeRng(seed, 7);
    EmOptions options;
    options.iterations = f.baseline_iterations;
    options.seed = seed;
    DPEM_ASSIGN_OR_RETURN(
        const EmResult em,
        RunEmWithRestarts(train, f.k, f.baseline_restarts, options, rng));
    DPEM_ASSIGN_OR_RETURN(r.value, LogLikelihoodPerPoint(test, em.params));
    return r;
  }
  DpEmConfig cfg;
  cfg.components = f.k;
  cfg.iterations = f.iterations;
  cfg.total = {cell.epsilon, f.delta};
  cfg.delta_i = f.delta_i;
  cfg.scenario = ctx.scenario;
  DPEM_ASSIGN_OR_RETURN(cfg.method, ParseComposition(cell.method));
  cfg.estimator = ctx.estimator;
  cfg.init_variance = f.init_variance;
  cfg.seed = seed;
  cfg.lambda_max = f.lambda_max;
  DPEM_ASSIGN_OR_RETURN(const DpEmResult run, RunDpEmMoG(train, cfg));
  DPEM_ASSIGN_OR_RETURN(r.value, LogLikelihoodPerPoint(test, run.params));
  DPEM_ASSIGN_OR_RETURN(const PrivacyBudget spent, AuditSpend(run.trace, cfg));
  r.eps_i = run.eps_i;
  r.mechanisms = static_cast<int>(run.trace.size());
  r.floored = run.trace.FlooredCount();
  r.spent_epsilon = spent.epsilon;
  r.spent_delta = spent.delta;
  r.audit_ok = WithinBudget(spent, cfg.total);
  return r;
}

absl::StatusOr<ExperimentResult> RunFaCell(const FitContext& ctx,
                                           const Cell& cell,
                                           std::uint64_t seed,
                                           const BoundedDataset& train,
                                           const BoundedDataset& test,
                                           ExperimentResult r) {
  const FitFlags& f = *ctx.flags;
  r.metric = "test_loglik_per_point";
  const SecondMoment train_moment = ComputeSecondMoment(train);
  const SecondMoment test_moment = ComputeSecondMoment(test);
  FaOptions options;
  options.max_iterations = f.iterations;
  Matrix lambda = train_moment.lambda;
  if (cell.epsilon > 0.0) {
    RandomNoise noise(seed, 1);
    const PrivacyBudget total{cell.epsilon, f.delta};
    DPEM_ASSIGN_OR_RETURN(const PerturbedMoment released,
                          PerturbSecondMoment(train_moment, total, noise));
    DPEM_ASSIGN_OR_RETURN(
        const PrivacyBudget spent,
        ComposeTrace(released.trace, Composition::kLinear, f.delta));
    lambda = released.moment.lambda;
    r.eps_i = cell.epsilon;
    r.mechanisms = static_cast<int>(released.trace.size());
    r.spent_epsilon = spent.epsilon;
    r.spent_delta = spent.delta;
    r.audit_ok = WithinBudget(spent, total);
  }
  DPEM_ASSIGN_OR_RETURN(const FaResult fa, RunFaEm(lambda, f.q, options));
  DPEM_ASSIGN_OR_RETURN(r.value, FaLogLikelihood(test_moment.lambda, fa.params));
  return r;
}

absl::StatusOr<ExperimentResult> RunKMeansCell(const FitContext& ctx,
                                               const Cell& cell,
                                               std::uint64_t seed,
                                               const BoundedDataset& train,
                                               const BoundedDataset& test,
                                               ExperimentResult r) {
  const FitFlags& f = *ctx.flags;
  r.metric = "nicv";
  if (cell.epsilon == 0.0) {
    Rng rng = MakeRng(seed, 7);
    DPEM_ASSIGN_OR_RETURN(const MoGParams init,
                          InitializeKMeansPlusPlus(train, f.k, rng));
    const Clustering c = Lloyd(train, init.means, f.baseline_iterations);
    r.value = Nicv(test, c.centers);
    return r;
  }
  const PrivacyBudget total{cell.epsilon, f.delta};
  KMeansResult run;
  Composition audit_method = Composition::kZcdp;
  if (cell.method == "dpem") {
    DpEmKMeansConfig cfg;
    cfg.k = f.k;
    cfg.iterations = f.iterations;
    cfg.total = total;
    cfg.seed = seed;
    DPEM_ASSIGN_OR_RETURN(run, DpEmKMeans(train, cfg));
  } else {
    DpLloydConfig cfg;
    cfg.k = f.k;
    cfg.iterations = f.iterations;
    cfg.total = total;
    cfg.seed = seed;
    if (cell.method == "dplloyd-linear") {
      cfg.composition = DpLloydComposition::kLinear;
      audit_method = Composition::kLinear;
    } else {
      cfg.composition = DpLloydComposition::kZcdp;
    }
    DPEM_ASSIGN_OR_RETURN(run, DpLloyd(train, cfg));
  }
  DPEM_ASSIGN_OR_RETURN(const PrivacyBudget spent,
                        ComposeTrace(run.trace, audit_method, f.delta));
  r.value = Nicv(test, run.clustering.centers);
  r.eps_i = run.eps_i;
  r.mechanisms = static_cast<int>(run.trace.size());
  r.floored = run.trace.FlooredCount();
  r.spent_epsilon = spent.epsilon;
  r.spent_delta = spent.delta;
  r.audit_ok = WithinBudget(spent, total);
  return r;
}

absl::StatusOr<ExperimentResult> RunCell(const FitContext& ctx,
                                         const Cell& cell) {
  const FitFlags& f = *ctx.flags;
  const auto start = std::chrono::steady_clock::now();
  const Fold& fold = ctx.folds[cell.fold];
  const BoundedDataset train = ctx.data->Subset(fold.train);
  const BoundedDataset test = ctx.data->Subset(fold.test);
  const std::uint64_t seed = CellSeed(f.seed, cell.fold, cell.seed);

  ExperimentResult r;
  r.model = f.model;
  r.method = cell.epsilon == 0.0 ? "nonprivate" : cell.method;
  r.scenario = ctx.model == Model::kMoG ? std::string(ScenarioName(ctx.scenario)) : "-";
  r.estimator = ctx.model != Model::kMoG        ? "-"
                : cell.epsilon == 0.0           ? "mle"
                : ctx.estimator == Estimator::kMap ? "map"
                                                   : "mle";
  r.epsilon = cell.epsilon;
  r.delta = cell.epsilon == 0.0 ? 0.0 : f.delta;
  r.delta_i = ctx.model == Model::kMoG && cell.epsilon > 0.0 ? f.delta_i : 0.0;
  r.fold = cell.fold;
  r.seed = cell.seed;

  absl::StatusOr<ExperimentResult> out;
  switch (ctx.model) {
    case Model::kMoG:
      out = RunMoGCell(ctx, cell, seed, train, test, std::move(r));
      break;
    case Model::kFa:
      out = RunFaCell(ctx, cell, seed, train, test, std::move(r));
      break;
    case Model::kKMeans:
      out = RunKMeansCell(ctx, cell, seed, train, test, std::move(r));
      break;
  }
  if (out.ok()) {
    out->wall_seconds = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - start)
                            .count();
  }
  return out;
}

absl::StatusOr<BoundedDataset> LoadData(const FitFlags& f) {
  if (!f.synthetic.empty()) {
    const std::vector<std::string> parts = SplitList(f.synthetic);
    int n = 0, d = 0, k = 0;
    double sep = 0.0;
    if (parts.size() != 4 || !absl::SimpleAtoi(parts[0], &n) ||
        !absl::SimpleAtoi(parts[1], &d) || !absl::SimpleAtoi(parts[2], &k) ||
        !absl::SimpleAtod(parts[3], &sep)) {
      return absl::InvalidArgumentError(
          "--synthetic expects n,d,k,separation");
    }
    DPEM_ASSIGN_OR_RETURN(const SyntheticMoG synth,
                          SynthMoG(n, d, k, sep, f.seed));
    return BoundedDataset::Create(synth.data, synth.scale);
  }
  DPEM_ASSIGN_OR_RETURN(const Matrix raw, LoadCsv(f.data, f.header));
  return Preprocess(raw);
}

std::optional<Failure> ValidateFit(const FitFlags& f, Model model) {
  auto bad = [](std::string msg) { return Failure{kExitBadFlags, std::move(msg)}; };
  if (f.data.empty() == f.synthetic.empty()) {
    return bad("exactly one of --data and --synthetic is required");
  }
  if (f.iterations < 1) return bad("--iters must be >= 1");
  if (f.folds < 2) return bad("--folds must be >= 2");
  if (f.seeds < 1) return bad("--seeds must be >= 1");
  if (f.jobs < 1) return bad("--jobs must be >= 1");
  if (model == Model::kFa ? f.q < 0 : f.k < 1) return bad("--k/--q out of range");
  if (!(f.delta > 0.0 && f.delta < 1.0)) return bad("--delta must lie in (0, 1)");
  if (!(f.delta_i > 0.0 && f.delta_i < 1.0)) {
    return bad("--delta-i must lie in (0, 1)");
  }
  return std::nullopt;
}

absl::StatusOr<std::vector<std::string>> MethodsFor(Model model,
                                                    const std::string& flag) {
  const bool all = Lower(flag) == "all";
  switch (model) {
    case Model::kMoG: {
      if (flag.empty()) return std::vector<std::string>{"zcdp"};
      if (all) return std::vector<std::string>{"linear", "advanced", "zcdp", "ma"};
      std::vector<std::string> out;
      for (const std::string& m : SplitList(flag)) {
        DPEM_ASSIGN_OR_RETURN(const Composition c, ParseComposition(m));
        out.emplace_back(CompositionName(c));
      }
      return out;
    }
    case Model::kFa:
      return std::vector<std::string>{"analyze-gauss"};
    case Model::kKMeans: {
      const std::vector<std::string> known = {"dpem", "dplloyd-linear",
                                              "dplloyd-zcdp"};
      if (all || flag.empty()) return known;
      std::vector<std::string> out;
      for (const std::string& m : SplitList(flag)) {
        const std::string lower = Lower(m);
        if (std::find(known.begin(), known.end(), lower) == known.end()) {
          return absl::InvalidArgumentError(absl::StrCat(
              "unknown k-means method '", m,
              "' (expected dpem, dplloyd-linear, dplloyd-zcdp)"));
        }
        out.push_back(lower);
      }
      return out;
    }
  }
  return absl::InvalidArgumentError("unknown model");
}

// Fails fast on budgets that cannot be met before any cell runs.
absl::Status PreCalibrate(const FitContext& ctx, double epsilon,
                          const std::string& method) {
  const FitFlags& f = *ctx.flags;
  const PrivacyBudget total{epsilon, f.delta};
  DPEM_RETURN_IF_ERROR(ValidateBudget(total));
  switch (ctx.model) {
    case Model::kMoG: {
      CompositionPlan plan;
      plan.scenario = ctx.scenario;
      plan.iterations = f.iterations;
      plan.components = f.k;
      plan.delta_i = f.delta_i;
      plan.lambda_max = f.lambda_max;
      DPEM_ASSIGN_OR_RETURN(plan.method, ParseComposition(method));
      return Calibrate(plan, total).status();
    }
    case Model::kFa:
      if (!(epsilon < 1.0)) {
        return absl::InvalidArgumentError(absl::StrCat(
            "factor analysis releases one Gaussian mechanism and needs "
            "epsilon < 1, got ",
            epsilon));
      }
      return absl::OkStatus();
    case Model::kKMeans:
      return absl::OkStatus();
  }
  return absl::OkStatus();
}

int RunFit(FitFlags f, std::ostream& out, std::ostream& err) {
  if (const char* env = std::getenv("DPEM_SEED"); env != nullptr) {
    std::uint64_t seed = 0;
    if (!absl::SimpleAtoi(env, &seed)) {
      err << "error: DPEM_SEED='" << env << "' is not an unsigned integer\n";
      return kExitBadFlags;
    }
    f.seed = seed;
  }
  const std::string model_name = Lower(f.model);
  Model model;
  if (model_name == "mog") {
    model = Model::kMoG;
  } else if (model_name == "fa") {
    model = Model::kFa;
  } else if (model_name == "kmeans") {
    model = Model::kKMeans;
  } else {
    err << "error: --model must be mog, fa or kmeans\n";
    return kExitBadFlags;
  }
  f.model = model_name;
  if (auto failure = ValidateFit(f, model)) {
    err << "error: " << failure->message << "\n";
    return failure->code;
  }
  std::vector<double> eps_list;
  if (auto failure = ParseDoubles(f.eps_list, "--eps-list", eps_list)) {
    err << "error: " << failure->message << "\n";
    return failure->code;
  }
  FitContext ctx;
  ctx.flags = &f;
  ctx.model = model;
  {
    const auto scenario = ParseScenario(f.scenario);
    if (!scenario.ok()) {
      err << "error: " << scenario.status().message() << "\n";
      return kExitBadFlags;
    }
    ctx.scenario = *scenario;
    const std::string est = Lower(f.estimator);
    if (est != "map" && est != "mle") {
      err << "error: --estimator must be map or mle\n";
      return kExitBadFlags;
    }
    ctx.estimator = est == "map" ? Estimator::kMap : Estimator::kMle;
  }
  const auto methods = MethodsFor(model, f.methods);
  if (!methods.ok()) {
    err << "error: " << methods.status().message() << "\n";
    return kExitBadFlags;
  }
  for (double eps : eps_list) {
    for (const std::string& m : *methods) {
      if (absl::Status s = PreCalibrate(ctx, eps, m); !s.ok()) {
        err << "error: " << m << " at epsilon " << eps << ": " << s.message()
            << "\n";
        return CodeFor(s);
      }
    }
  }

  const auto data = LoadData(f);
  if (!data.ok()) {
    err << "error: " << data.status().message() << "\n";
    return !f.synthetic.empty() &&
                   data.status().code() == absl::StatusCode::kInvalidArgument
               ? kExitBadFlags
               : kExitDataError;
  }
  ctx.data = &*data;
  if (model == Model::kFa && f.q >= data->d()) {
    err << "error: --q must be below the data dimension " << data->d() << "\n";
    return kExitBadFlags;
  }
  const auto folds = CvSplit(data->n(), f.folds, f.seed);
  if (!folds.ok()) {
    err << "error: " << folds.status().message() << "\n";
    return kExitDataError;
  }
  ctx.folds = *folds;

  std::vector<Cell> cells;
  for (int fold = 0; fold < f.folds; ++fold) {
    for (int s = 0; s < f.seeds; ++s) {
      if (f.baseline) cells.push_back({0.0, "nonprivate", fold, s});
      for (double eps : eps_list) {
        for (const std::string& m : *methods) cells.push_back({eps, m, fold, s});
      }
    }
  }

  std::vector<absl::StatusOr<ExperimentResult>> results(
      cells.size(), absl::UnknownError("not run"));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      results[i] = RunCell(ctx, cells[i]);
    }
  };
  const int jobs = std::min<int>(f.jobs, static_cast<int>(cells.size()));
  std::vector<std::thread> pool;
  for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();

  std::vector<ExperimentResult> rows;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (!results[i].ok()) {
      err << "error: cell " << i << " (" << cells[i].method << ", epsilon "
          << cells[i].epsilon << ", fold " << cells[i].fold << "): "
          << results[i].status().message() << "\n";
      return CodeFor(results[i].status());
    }
    rows.push_back(*results[i]);
  }

  std::error_code ec;
  std::filesystem::create_directories(f.out, ec);
  if (ec) {
    err << "error: cannot create " << f.out << ": " << ec.message() << "\n";
    return kExitDataError;
  }
  const std::filesystem::path dir(f.out);
  std::ofstream jsonl(dir / "results.jsonl", std::ios::trunc);
  for (const ExperimentResult& r : rows) jsonl << ToJsonLine(r) << "\n";
  const std::string summary = FormatSummaryCsv(Summarize(rows));
  std::ofstream csv(dir / "summary.csv", std::ios::trunc | std::ios::binary);
  csv << summary;
  if (!jsonl || !csv) {
    err << "error: failed writing results under " << f.out << "\n";
    return kExitDataError;
  }
  int failed_audits = 0;
  for (const ExperimentResult& r : rows) failed_audits += r.audit_ok ? 0 : 1;
  out << summary;
  if (failed_audits > 0) {
    err << "warning: " << failed_audits << " rows exceed their budget\n";
  }
  return kExitOk;
}

}  // namespace

int Run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Differentially private EM, k-means and budget calibration"};
  app.require_subcommand(1);

  CalibrateFlags cal;
  CLI::App* calibrate =
      app.add_subcommand("calibrate", "Per-mechanism budget for each method");
  calibrate->add_option("--eps", cal.epsilon, "Total epsilon")->required();
  calibrate->add_option("--delta", cal.delta, "Total delta");
  calibrate->add_option("--delta-i", cal.delta_i, "Per-mechanism Gaussian delta");
  calibrate->add_option("--iters", cal.iterations, "EM iterations J");
  calibrate->add_option("--components", cal.components, "Mixture components K");
  calibrate->add_option("--scenario", cal.scenario, "llg or ggg");
  calibrate->add_option("--method", cal.methods,
                        "all, or a comma list of linear,advanced,zcdp,ma");
  calibrate->add_option("--lambda-max", cal.lambda_max,
                        "Largest moment order for the moments accountant");

  FitFlags fit;
  CLI::App* fit_cmd =
      app.add_subcommand("fit", "Cross-validated sweep over epsilon");
  fit_cmd->add_option("--model", fit.model, "mog, fa or kmeans");
  fit_cmd->add_option("--data", fit.data, "Numeric CSV input");
  fit_cmd->add_flag("--header", fit.header, "Skip the first CSV line");
  fit_cmd->add_option("--synthetic", fit.synthetic,
                      "Planted mixture n,d,k,separation instead of --data");
  fit_cmd->add_option("--k", fit.k, "Components or clusters");
  fit_cmd->add_option("--q", fit.q, "Latent dimension for factor analysis");
  fit_cmd->add_option("--iters", fit.iterations, "Iterations J");
  fit_cmd->add_option("--eps-list", fit.eps_list, "Comma list of total epsilons");
  fit_cmd->add_option("--delta", fit.delta, "Total delta");
  fit_cmd->add_option("--delta-i", fit.delta_i, "Per-mechanism Gaussian delta");
  fit_cmd->add_option("--method", fit.methods,
                      "Comma list or all (mog: linear,advanced,zcdp,ma; "
                      "kmeans: dpem,dplloyd-linear,dplloyd-zcdp)");
  fit_cmd->add_option("--scenario", fit.scenario, "llg or ggg");
  fit_cmd->add_option("--estimator", fit.estimator, "map or mle");
  fit_cmd->add_option("--folds", fit.folds, "Cross-validation folds");
  fit_cmd->add_option("--seeds", fit.seeds, "Noise seeds per fold");
  fit_cmd->add_option("--seed", fit.seed, "Master seed (DPEM_SEED overrides)");
  fit_cmd->add_option("--out", fit.out, "Output directory");
  fit_cmd->add_option("--jobs", fit.jobs, "Worker threads");
  fit_cmd->add_option("--baseline-iters", fit.baseline_iterations,
                      "Iterations of the non-private baseline");
  fit_cmd->add_option("--init-variance", fit.init_variance,
                      "Starting covariance scale for DP-EM");
  fit_cmd->add_option("--lambda-max", fit.lambda_max,
                      "Largest moment order for the moments accountant");
  fit_cmd->add_option("--baseline-restarts", fit.baseline_restarts,
                      "k-means++ restarts of the non-private mixture baseline")
      ->check(CLI::PositiveNumber);
  fit_cmd->add_flag("!--no-baseline", fit.baseline,
                    "Skip the non-private baseline rows");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitBadFlags;
  }
  if (*calibrate) return RunCalibrate(cal, out, err);
  return RunFit(fit, out, err);
}

}  // namespace dpem::cli

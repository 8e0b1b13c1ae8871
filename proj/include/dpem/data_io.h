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

#ifndef DPEM_DATA_IO_H_
#define DPEM_DATA_IO_H_

// CSV ingestion and export, planted-mixture synthetic data, cross-validation
// splits, and the experiment result records written by the CLI.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dpem/dataset.h"
#include "dpem/mog.h"

namespace dpem {

// Numeric CSV: comma-separated, optional header line, blank lines skipped.
// Errors name the 1-based line number.
absl::StatusOr<Matrix> ParseCsv(std::string_view text, bool has_header);
absl::StatusOr<Matrix> LoadCsv(const std::string& path, bool has_header);

// Shortest-round-trip formatting ("%.17g"), one row per line, no header.
std::string FormatCsv(const Matrix& m);
absl::Status WriteCsv(const std::string& path, const Matrix& m);

struct SyntheticMoG {
  Matrix data;      // rows scaled into the unit ball
  MoGParams truth;  // planted parameters in the same scaled coordinates
  double scale = 1.0;
};

// n points from k unit-covariance Gaussians with equal weights. For k <= d the
// means sit on a scaled simplex with every pair `separation` apart; for k > d
// they sit on a circle in the first two coordinates with neighbours
// `separation` apart. Everything is then divided by the largest row norm.
absl::StatusOr<SyntheticMoG> SynthMoG(int n, int d, int k, double separation,
                                      std::uint64_t seed);

struct Fold {
  std::vector<int> train;
  std::vector<int> test;
};

// Shuffles 0..n-1 and cuts it into `folds` contiguous test blocks.
absl::StatusOr<std::vector<Fold>> CvSplit(int n, int folds,
                                          std::uint64_t seed);

// One (model, method, scenario, epsilon, fold, seed) cell.
struct ExperimentResult {
  std::string model;
  std::string method;
  std::string scenario;
  std::string estimator;
  double epsilon = 0.0;  // 0 for the non-private baseline
  double delta = 0.0;
  double delta_i = 0.0;
  int fold = 0;
  int seed = 0;
  std::string metric;
  double value = 0.0;
  double eps_i = 0.0;
  int mechanisms = 0;
  int floored = 0;
  double spent_epsilon = 0.0;
  double spent_delta = 0.0;
  bool audit_ok = true;
  double wall_seconds = 0.0;
};

std::string ToJsonLine(const ExperimentResult& r);

struct SummaryRow {
  std::string model;
  std::string method;
  std::string scenario;
  std::string estimator;
  double epsilon = 0.0;
  std::string metric;
  int cells = 0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
};

// Groups by (model, method, scenario, estimator, epsilon, metric) and reports
// the median and quartiles (linear interpolation) of each group, sorted.
std::vector<SummaryRow> Summarize(const std::vector<ExperimentResult>& results);

// Header plus one line per row; deterministic for identical inputs.
std::string FormatSummaryCsv(const std::vector<SummaryRow>& rows);

}  // namespace dpem

#endif  // DPEM_DATA_IO_H_

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

#include "dpem/data_io.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <tuple>

#include "absl/strings/str_cat.h"
#include "nlohmann/json.hpp"
#include "dpem/status_macros.h"

namespace dpem {
namespace {

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> SplitFields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(Trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string FormatDouble(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double Quantile(const std::vector<double>& sorted, double p) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

std::vector<Vector> PlantedMeans(int d, int k, double separation) {
  std::vector<Vector> means(k, Vector::Zero(d));
  if (k == 1) return means;
  if (k <= d) {
    Vector centroid = Vector::Zero(d);
    for (int c = 0; c < k; ++c) {
      means[c](c) = separation / std::numbers::sqrt2;
      centroid += means[c];
    }
    centroid /= k;
    for (Vector& m : means) m -= centroid;
  } else if (d == 1) {
    for (int c = 0; c < k; ++c) means[c](0) = separation * (c - (k - 1) / 2.0);
  } else {
    const double radius = separation / (2.0 * std::sin(std::numbers::pi / k));
    for (int c = 0; c < k; ++c) {
      const double angle = 2.0 * std::numbers::pi * c / k;
      means[c](0) = radius * std::cos(angle);
      means[c](1) = radius * std::sin(angle);
    }
  }
  return means;
}

}  // namespace

absl::StatusOr<Matrix> ParseCsv(std::string_view text, bool has_header) {
  std::vector<std::vector<double>> rows;
  std::size_t width = 0;
  int line_no = 0;
  bool header_pending = has_header;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    const std::string_view raw = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    if (header_pending) {
      header_pending = false;
      continue;
    }
    if (Trim(raw).empty()) continue;
    const std::vector<std::string_view> fields = SplitFields(raw);
    if (width == 0) width = fields.size();
    if (fields.size() != width) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", line_no, ": expected ", width,
                       " fields, found ", fields.size()));
    }
    std::vector<double> row(width);
    for (std::size_t j = 0; j < width; ++j) {
      const std::string_view f = fields[j];
      const auto [end, ec] = std::from_chars(f.data(), f.data() + f.size(), row[j]);
      if (f.empty() || ec != std::errc() || end != f.data() + f.size()) {
        return absl::InvalidArgumentError(
            absl::StrCat("line ", line_no, ", column ", j + 1,
                         ": not a number: '", std::string(f), "'"));
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) return absl::InvalidArgumentError("CSV has no data rows");
  Matrix out(static_cast<Eigen::Index>(rows.size()),
             static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < width; ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return out;
}

absl::StatusOr<Matrix> LoadCsv(const std::string& path, bool has_header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::ostringstream buf;
  buf << in.rdbuf();
  auto parsed = ParseCsv(buf.str(), has_header);
  if (!parsed.ok()) {
    return absl::Status(parsed.status().code(),
                        absl::StrCat(path, ": ", parsed.status().message()));
  }
  return parsed;
}

std::string FormatCsv(const Matrix& m) {
  std::string out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out += ',';
      out += FormatDouble(m(i, j));
    }
    out += '\n';
  }
  return out;
}

absl::Status WriteCsv(const std::string& path, const Matrix& m) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) return absl::UnavailableError(absl::StrCat("cannot write ", path));
  out << FormatCsv(m);
  if (!out) return absl::UnavailableError(absl::StrCat("write failed: ", path));
  return absl::OkStatus();
}

absl::StatusOr<SyntheticMoG> SynthMoG(int n, int d, int k, double separation,
                                      std::uint64_t seed) {
  if (d < 1 || k < 1 || n < k) {
    return absl::InvalidArgumentError(
        absl::StrCat("need d >= 1 and n >= k >= 1, got n = ", n, ", d = ", d,
                     ", k = ", k));
  }
  if (!(separation >= 0.0)) {
    return absl::InvalidArgumentError("separation must be nonnegative");
  }
  const std::vector<Vector> means = PlantedMeans(d, k, separation);
  Rng rng = MakeRng(seed, 0);
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<int> pick(0, k - 1);
  Matrix raw(n, d);
  for (int i = 0; i < n; ++i) {
    const Vector& mu = means[pick(rng)];
    for (int j = 0; j < d; ++j) raw(i, j) = mu(j) + normal(rng);
  }
  DPEM_ASSIGN_OR_RETURN(const BoundedDataset scaled, Preprocess(raw));
  SyntheticMoG out;
  out.data = scaled.rows();
  out.scale = scaled.scale();
  out.truth.weights = Vector::Constant(k, 1.0 / k);
  for (const Vector& mu : means) {
    out.truth.means.push_back(mu / out.scale);
    out.truth.covariances.push_back(Matrix::Identity(d, d) /
                                    (out.scale * out.scale));
  }
  return out;
}

absl::StatusOr<std::vector<Fold>> CvSplit(int n, int folds,
                                          std::uint64_t seed) {
  if (folds < 2) return absl::InvalidArgumentError("need at least 2 folds");
  if (n < folds) {
    return absl::InvalidArgumentError(
        absl::StrCat("cannot split ", n, " rows into ", folds, " folds"));
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng = MakeRng(seed, 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<Fold> out(folds);
  for (int f = 0; f < folds; ++f) {
    const int lo = static_cast<int>(static_cast<std::int64_t>(n) * f / folds);
    const int hi = static_cast<int>(static_cast<std::int64_t>(n) * (f + 1) / folds);
    out[f].test.assign(order.begin() + lo, order.begin() + hi);
    out[f].train.assign(order.begin(), order.begin() + lo);
    out[f].train.insert(out[f].train.end(), order.begin() + hi, order.end());
    std::sort(out[f].test.begin(), out[f].test.end());
    std::sort(out[f].train.begin(), out[f].train.end());
  }
  return out;
}

std::string ToJsonLine(const ExperimentResult& r) {
  const nlohmann::ordered_json j = {
      {"model", r.model},
      {"method", r.method},
      {"scenario", r.scenario},
      {"estimator", r.estimator},
      {"epsilon", r.epsilon},
      {"delta", r.delta},
      {"delta_i", r.delta_i},
      {"fold", r.fold},
      {"seed", r.seed},
      {"metric", r.metric},
      {"value", r.value},
      {"eps_i", r.eps_i},
      {"mechanisms", r.mechanisms},
      {"floored", r.floored},
      {"spent_epsilon", r.spent_epsilon},
      {"spent_delta", r.spent_delta},
      {"audit_ok", r.audit_ok},
      {"wall_seconds", r.wall_seconds},
  };
  return j.dump();
}

std::vector<SummaryRow> Summarize(const std::vector<ExperimentResult>& results) {
  using Key = std::tuple<std::string, std::string, std::string, std::string,
                         double, std::string>;
  std::map<Key, std::vector<double>> groups;
  for (const ExperimentResult& r : results) {
    groups[{r.model, r.method, r.scenario, r.estimator, r.epsilon, r.metric}]
        .push_back(r.value);
  }
  std::vector<SummaryRow> out;
  for (auto& [key, values] : groups) {
    std::sort(values.begin(), values.end());
    SummaryRow row;
    std::tie(row.model, row.method, row.scenario, row.estimator, row.epsilon,
             row.metric) = key;
    row.cells = static_cast<int>(values.size());
    row.median = Quantile(values, 0.5);
    row.q1 = Quantile(values, 0.25);
    row.q3 = Quantile(values, 0.75);
    out.push_back(std::move(row));
  }
  return out;
}

std::string FormatSummaryCsv(const std::vector<SummaryRow>& rows) {
  std::string out =
      "model,method,scenario,estimator,epsilon,metric,cells,median,q1,q3\n";
  for (const SummaryRow& r : rows) {
    absl::StrAppend(&out, r.model, ",", r.method, ",", r.scenario, ",",
                    r.estimator, ",", FormatDouble(r.epsilon), ",", r.metric,
                    ",", r.cells, ",", FormatDouble(r.median), ",",
                    FormatDouble(r.q1), ",", FormatDouble(r.q3), "\n");
  }
  return out;
}

}  // namespace dpem

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

#ifndef DPEM_TESTS_SENSITIVITY_AUDIT_H_
#define DPEM_TESTS_SENSITIVITY_AUDIT_H_

// Empirical sensitivity check over random neighbouring datasets: each pair
// differs in one row of the data and the same row of the responsibilities.
// Every measured change is divided by its claimed bound, so a ratio above one
// is a violation.

#include <cstdint>

namespace dpem::oracle {

struct SensitivityRatios {
  int pairs = 0;
  double weights_l1 = 0.0;    // |pi - pi'|_1 / (2 / N)
  double mean_l1 = 0.0;       // |mu_k - mu_k'|_1 / (2 sqrt(d) / N_k)
  double mean_l2 = 0.0;       // |mu_k - mu_k'|_2 / (2 / N_k)
  double covariance_f = 0.0;  // |Sigma_k - Sigma_k'|_F / (2 / N_k)
  double second_moment_f = 0.0;  // |Lambda - Lambda'|_F / (2 / N)

  double Worst() const;
};

// `pairs` neighbouring pairs with N in [2, max_n] and d in [1, max_d]. A
// quarter of the pairs swap a unit row for its antipode with one-hot
// responsibilities (half keep the component, half move it), which attains
// the weight and mean bounds.
SensitivityRatios AuditSensitivities(int pairs, int max_n, int max_d,
                                     std::uint64_t seed);

}  // namespace dpem::oracle

#endif  // DPEM_TESTS_SENSITIVITY_AUDIT_H_

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

#ifndef DPEM_STATUS_MACROS_H_
#define DPEM_STATUS_MACROS_H_

#include <utility>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

#define DPEM_STATUS_CONCAT_INNER(a, b) a##b
#define DPEM_STATUS_CONCAT(a, b) DPEM_STATUS_CONCAT_INNER(a, b)

#define DPEM_RETURN_IF_ERROR(expr)            \
  do {                                        \
    ::absl::Status dpem_status_ = (expr);     \
    if (!dpem_status_.ok()) return dpem_status_; \
  } while (false)

#define DPEM_ASSIGN_OR_RETURN_IMPL(tmp, lhs, rexpr) \
  auto tmp = (rexpr);                               \
  if (!tmp.ok()) return std::move(tmp).status();    \
  lhs = std::move(tmp).value()

#define DPEM_ASSIGN_OR_RETURN(lhs, rexpr) \
  DPEM_ASSIGN_OR_RETURN_IMPL(DPEM_STATUS_CONCAT(dpem_statusor_, __LINE__), lhs, rexpr)

#endif  // DPEM_STATUS_MACROS_H_

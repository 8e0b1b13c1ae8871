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

#include "dpem/kernels.h"

#include <atomic>
#include <cassert>
#include <cstdlib>
#include <string_view>

#include "kernels_internal.h"

namespace dpem::kernels {
namespace {

constexpr KernelTable kScalarTable = {
    Isa::kScalar,
    &internal::DotScalar,
    &internal::WeightedDotScalar,
    &internal::SquaredDistancesScalar,
    &internal::MahalanobisScalar,
};

#ifdef DPEM_HAVE_AVX2_KERNELS
constexpr KernelTable kAvx2Table = {
    Isa::kAvx2,
    &internal::DotAvx2,
    &internal::WeightedDotAvx2,
    &internal::SquaredDistancesAvx2,
    &internal::MahalanobisAvx2,
};
#endif

bool CpuHasAvx2() {
#if defined(DPEM_HAVE_AVX2_KERNELS) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* InitialTable() {
  const char* env = std::getenv("DPEM_KERNELS");
  if (env != nullptr && std::string_view(env) == "scalar") return &kScalarTable;
  if (Available(Isa::kAvx2)) return &Table(Isa::kAvx2);
  return &kScalarTable;
}

std::atomic<const KernelTable*>& ActiveTable() {
  static std::atomic<const KernelTable*> table{InitialTable()};
  return table;
}

}  // namespace

std::string_view IsaName(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return "scalar";
    case Isa::kAvx2:
      return "avx2";
  }
  return "unknown";
}

bool Available(Isa isa) {
  if (isa == Isa::kScalar) return true;
  static const bool avx2 = CpuHasAvx2();
  return avx2;
}

const KernelTable& Table(Isa isa) {
#ifdef DPEM_HAVE_AVX2_KERNELS
  if (isa == Isa::kAvx2) return kAvx2Table;
#endif
  assert(isa == Isa::kScalar);
  return kScalarTable;
}

Isa ActiveIsa() { return ActiveTable().load()->isa; }

bool SetActiveIsa(Isa isa) {
  if (!Available(isa)) return false;
  ActiveTable().store(&Table(isa));
  return true;
}

double Dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  return ActiveTable().load()->dot(a.data(), b.data(), a.size());
}

double WeightedDot(std::span<const double> w, std::span<const double> a,
                   std::span<const double> b) {
  assert(w.size() == a.size() && a.size() == b.size());
  return ActiveTable().load()->weighted_dot(w.data(), a.data(), b.data(),
                                            a.size());
}

void SquaredDistances(ColumnBlock x, std::span<const double> center,
                      std::span<double> out) {
  assert(center.size() == x.cols && out.size() == x.rows);
  ActiveTable().load()->squared_distances(x.data, x.ld, x.rows, x.cols,
                                          center.data(), out.data());
}

void Mahalanobis(ColumnBlock x, std::span<const double> mean,
                 std::span<const double> whitening, std::span<double> out) {
  assert(mean.size() == x.cols && whitening.size() == x.cols * x.cols &&
         out.size() == x.rows);
  ActiveTable().load()->mahalanobis(x.data, x.ld, x.rows, x.cols, mean.data(),
                                    whitening.data(), out.data());
}

}  // namespace dpem::kernels

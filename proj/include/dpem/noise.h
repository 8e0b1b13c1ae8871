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

#ifndef DPEM_NOISE_H_
#define DPEM_NOISE_H_

#include <cstdint>
#include <random>

namespace dpem {

using Rng = std::mt19937_64;

// Derives an independent generator for one (seed, stream) cell.
Rng MakeRng(std::uint64_t seed, std::uint64_t stream = 0);

// Source of the additive noise drawn by every mechanism. A single instance is
// threaded through one estimation run; draws happen in a fixed documented
// order so runs are reproducible from the seed. Not thread-safe.
class NoiseSource {
 public:
  virtual ~NoiseSource() = default;

  // One draw from Lap(0, scale).
  virtual double Laplace(double scale) = 0;
  // One draw from N(0, stddev^2).
  virtual double Gaussian(double stddev) = 0;
};

class RandomNoise final : public NoiseSource {
 public:
  explicit RandomNoise(std::uint64_t seed, std::uint64_t stream = 0)
      : rng_(MakeRng(seed, stream)) {}

  double Laplace(double scale) override;
  double Gaussian(double stddev) override;

 private:
  Rng rng_;
  std::exponential_distribution<double> exponential_{1.0};
  std::normal_distribution<double> normal_{0.0, 1.0};
};

// Every draw is exactly zero: each mechanism collapses to its deterministic
// post-processing, which lets DP runs be compared against non-private code.
class ZeroNoise final : public NoiseSource {
 public:
  double Laplace(double) override { return 0.0; }
  double Gaussian(double) override { return 0.0; }
};

}  // namespace dpem

#endif  // DPEM_NOISE_H_

// Copyright 2026 The qmetric Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <limits>
#include <random>

#include "qmetric/algebra.hpp"

namespace qmetric {

/**
 * Counter-based generator: draw k of stream s under seed is a fixed hash of
 * (seed, s, k), so independent streams can be handed to parallel workers
 * and replayed exactly. Satisfies UniformRandomBitGenerator.
 */
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(mix(seed ^ mix(stream + 0x632be59bd9b4e019ULL))) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return mix(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  double normal() { return normal_(*this); }

 private:
  // splitmix64 finalizer
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

inline Matrix random_gaussian(Eigen::Index rows, Eigen::Index cols, CounterRng& rng,
                              bool complex_entries = true) {
  Matrix m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) {
      const double re = rng.normal();
      const double im = complex_entries ? rng.normal() : 0.0;
      m(r, c) = Complex(re, im);
    }
  return m;
}

/// Gaussian element with entries on the block support only.
template <int Order>
Element<Order> random_element(const AlgebraShape& shape, CounterRng& rng,
                              bool complex_entries = true) {
  const int n = shape.power(Order);
  return Element<Order>::masked(shape, random_gaussian(n, n, rng, complex_entries));
}

template <int Order>
Element<Order> random_hermitian(const AlgebraShape& shape, CounterRng& rng) {
  return hermitian_part(random_element<Order>(shape, rng));
}

/// Random positive semidefinite element g g* with g supported on the blocks.
template <int Order>
Element<Order> random_psd(const AlgebraShape& shape, CounterRng& rng) {
  const auto g = random_element<Order>(shape, rng);
  return hermitian_part(g * g.adjoint());
}

}  // namespace qmetric

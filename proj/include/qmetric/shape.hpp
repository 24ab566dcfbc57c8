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

#include <algorithm>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "qmetric/error.hpp"

namespace qmetric {

/**
 * @brief Block dimensions (n_1, ..., n_K) of the multi-matrix algebra
 * A = M_{n_1} + ... + M_{n_K}, represented on C^D with D = sum n_k.
 *
 * Block k occupies the contiguous index range [offset(k), offset(k) + n_k)
 * of C^D. The all-ones shape is the commutative algebra of functions on
 * a finite set.
 */
class AlgebraShape {
 public:
  explicit AlgebraShape(std::vector<int> blocks) : blocks_(std::move(blocks)) {
    if (blocks_.empty()) throw PreconditionError("algebra shape needs at least one block");
    for (int n : blocks_) {
      if (n < 1) throw PreconditionError("block dimensions must be positive");
    }
    offsets_.reserve(blocks_.size());
    int offset = 0;
    for (std::size_t k = 0; k < blocks_.size(); ++k) {
      offsets_.push_back(offset);
      for (int i = 0; i < blocks_[k]; ++i) owner_.push_back(static_cast<int>(k));
      offset += blocks_[k];
    }
  }

  /// Shape (1, ..., 1) of the algebra of functions on n points.
  static AlgebraShape classical(int n) {
    if (n < 1) throw PreconditionError("classical shape needs at least one point");
    return AlgebraShape(std::vector<int>(static_cast<std::size_t>(n), 1));
  }

  const std::vector<int>& blocks() const noexcept { return blocks_; }
  int num_blocks() const noexcept { return static_cast<int>(blocks_.size()); }
  int block_size(int k) const { return blocks_.at(static_cast<std::size_t>(k)); }
  int offset(int k) const { return offsets_.at(static_cast<std::size_t>(k)); }

  /// Representation dimension D.
  int dim() const noexcept { return static_cast<int>(owner_.size()); }

  /// D^order, the Hilbert space dimension of the order-fold tensor power.
  int power(int order) const noexcept {
    int p = 1;
    for (int i = 0; i < order; ++i) p *= dim();
    return p;
  }

  /// Block containing basis index i of C^D.
  int block_of(int i) const { return owner_.at(static_cast<std::size_t>(i)); }

  bool is_classical() const noexcept {
    return std::all_of(blocks_.begin(), blocks_.end(), [](int n) { return n == 1; });
  }

  friend bool operator==(const AlgebraShape& a, const AlgebraShape& b) {
    return a.blocks_ == b.blocks_;
  }

  std::string to_string() const {
    std::ostringstream os;
    os << '(';
    for (std::size_t k = 0; k < blocks_.size(); ++k) os << (k ? "," : "") << blocks_[k];
    os << ')';
    return os.str();
  }

 private:
  std::vector<int> blocks_;
  std::vector<int> offsets_;
  std::vector<int> owner_;
};

/// Block concatenation: the shape of A_1 + A_2.
inline AlgebraShape concat(const AlgebraShape& a, const AlgebraShape& b) {
  std::vector<int> blocks = a.blocks();
  blocks.insert(blocks.end(), b.blocks().begin(), b.blocks().end());
  return AlgebraShape(std::move(blocks));
}

/// Shape of A_1 (x) A_2: blocks n_i * m_j in lexicographic (i, j) order.
inline AlgebraShape tensor_shape(const AlgebraShape& a, const AlgebraShape& b) {
  std::vector<int> blocks;
  for (int n : a.blocks())
    for (int m : b.blocks()) blocks.push_back(n * m);
  return AlgebraShape(std::move(blocks));
}

}  // namespace qmetric

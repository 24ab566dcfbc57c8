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

#include <complex>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qmetric/error.hpp"
#include "qmetric/shape.hpp"

namespace qmetric {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

namespace detail {

/// Leg `leg` (0-based, most significant first) of a multi-index in [0, D^order).
inline int leg_index(int index, int leg, int order, int dim) {
  for (int l = order - 1; l > leg; --l) index /= dim;
  return index % dim;
}

inline bool in_support(const AlgebraShape& shape, int order, int row, int col) {
  const int d = shape.dim();
  for (int l = order - 1; l >= 0; --l) {
    if (shape.block_of(row % d) != shape.block_of(col % d)) return false;
    row /= d;
    col /= d;
  }
  return true;
}

}  // namespace detail

/**
 * Index sets of the cells of the order-fold tensor power: one cell per
 * tuple of blocks (b_1, ..., b_order), listed in lexicographic order.
 * Every element is block diagonal with respect to this decomposition.
 */
inline std::vector<std::vector<int>> cells(const AlgebraShape& shape, int order) {
  std::vector<std::vector<int>> out{{0}};
  for (int leg = 0; leg < order; ++leg) {
    std::vector<std::vector<int>> next;
    for (const auto& prefix : out) {
      for (int k = 0; k < shape.num_blocks(); ++k) {
        std::vector<int> cell;
        cell.reserve(prefix.size() * static_cast<std::size_t>(shape.block_size(k)));
        for (int p : prefix)
          for (int i = 0; i < shape.block_size(k); ++i)
            cell.push_back(p * shape.dim() + shape.offset(k) + i);
        next.push_back(std::move(cell));
      }
    }
    out = std::move(next);
  }
  return out;
}

/// Zero every entry outside the block support of the order-fold tensor power.
inline Matrix mask_to_support(const AlgebraShape& shape, int order, Matrix m) {
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      if (!detail::in_support(shape, order, static_cast<int>(r), static_cast<int>(c)))
        m(r, c) = 0.0;
  return m;
}

/**
 * @brief Element of the order-fold tensor power of A = M_{n_1} + ... + M_{n_K},
 * stored as a dense D^order x D^order complex matrix in lexicographic
 * Kronecker ordering.
 *
 * Entries outside the block support are exactly zero; the constructor
 * rejects anything else.
 */
template <int Order>
  requires(Order >= 1 && Order <= 3)
class Element {
 public:
  static constexpr int order = Order;

  Element(AlgebraShape shape, Matrix data) : shape_(std::move(shape)), data_(std::move(data)) {
    const int n = shape_.power(Order);
    if (data_.rows() != n || data_.cols() != n) {
      throw ShapeMismatch("matrix is " + std::to_string(data_.rows()) + "x" +
                          std::to_string(data_.cols()) + ", shape " + shape_.to_string() +
                          " at order " + std::to_string(Order) + " needs " + std::to_string(n) +
                          "x" + std::to_string(n));
    }
    for (Eigen::Index c = 0; c < data_.cols(); ++c)
      for (Eigen::Index r = 0; r < data_.rows(); ++r)
        if (data_(r, c) != Complex(0.0) &&
            !detail::in_support(shape_, Order, static_cast<int>(r), static_cast<int>(c)))
          throw SupportViolation("entry (" + std::to_string(r) + "," + std::to_string(c) +
                                 ") lies outside the block support of " + shape_.to_string());
  }

  static Element zero(const AlgebraShape& shape) {
    const int n = shape.power(Order);
    return Element(shape, Matrix::Zero(n, n));
  }

  /// Builds an element from an arbitrary matrix by discarding off-support entries.
  static Element masked(const AlgebraShape& shape, Matrix data) {
    return Element(shape, mask_to_support(shape, Order, std::move(data)));
  }

  const AlgebraShape& shape() const noexcept { return shape_; }
  const Matrix& data() const noexcept { return data_; }
  int size() const noexcept { return static_cast<int>(data_.rows()); }

  Element adjoint() const { return Element(shape_, data_.adjoint()); }

  Element& operator+=(const Element& o) {
    require_same_shape(o);
    data_ += o.data_;
    return *this;
  }
  Element& operator-=(const Element& o) {
    require_same_shape(o);
    data_ -= o.data_;
    return *this;
  }
  Element& operator*=(Complex s) {
    data_ *= s;
    return *this;
  }

  friend Element operator+(Element a, const Element& b) { return a += b; }
  friend Element operator-(Element a, const Element& b) { return a -= b; }
  friend Element operator-(Element a) {
    a.data_ = -a.data_;
    return a;
  }
  friend Element operator*(Complex s, Element a) { return a *= s; }
  friend Element operator*(Element a, Complex s) { return a *= s; }
  friend Element operator*(const Element& a, const Element& b) {
    a.require_same_shape(b);
    return Element(a.shape_, a.data_ * b.data_);
  }

  /// Exact equality of shape and entries.
  friend bool operator==(const Element& a, const Element& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  void require_same_shape(const Element& o) const {
    if (!(shape_ == o.shape_))
      throw ShapeMismatch("shape " + shape_.to_string() + " vs " + o.shape_.to_string());
  }

  AlgebraShape shape_;
  Matrix data_;
};

using AlgebraElement = Element<1>;
using BiElement = Element<2>;
using TriElement = Element<3>;

}  // namespace qmetric

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
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "qmetric/element.hpp"

namespace qmetric {

/// Elements accepted as self-adjoint satisfy ||x - x*|| <= this * max(1, ||x||).
inline constexpr double kSelfAdjointTolerance = 1e-10;

/// Kronecker product in lexicographic order: (a (x) b)[(i,k),(j,l)] = a[i,j] b[k,l].
inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline Matrix submatrix(const Matrix& m, const std::vector<int>& idx) {
  const auto n = static_cast<Eigen::Index>(idx.size());
  Matrix out(n, n);
  for (Eigen::Index c = 0; c < n; ++c)
    for (Eigen::Index r = 0; r < n; ++r) out(r, c) = m(idx[r], idx[c]);
  return out;
}

/// Largest singular value of a dense matrix.
inline double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  if (m.rows() == 1 && m.cols() == 1) return std::abs(m(0, 0));
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

/// Applies `f` to each cell block of `x` and reassembles the result.
template <int Order, class F>
Element<Order> map_cells(const Element<Order>& x, F&& f) {
  Matrix out = Matrix::Zero(x.size(), x.size());
  for (const auto& idx : cells(x.shape(), Order)) {
    const Matrix block = f(submatrix(x.data(), idx));
    for (std::size_t c = 0; c < idx.size(); ++c)
      for (std::size_t r = 0; r < idx.size(); ++r)
        out(idx[r], idx[c]) = block(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  }
  return Element<Order>(x.shape(), std::move(out));
}

/// Unit 1_A, the block-diagonal identity.
inline AlgebraElement identity(const AlgebraShape& shape) {
  return AlgebraElement(shape, Matrix::Identity(shape.dim(), shape.dim()));
}

/// Unit of the order-fold tensor power.
template <int Order>
Element<Order> unit(const AlgebraShape& shape) {
  const int n = shape.power(Order);
  return Element<Order>(shape, Matrix::Identity(n, n));
}

/// x (x) y, with e_i (x) e_j at index i * D + j.
inline BiElement tensor2(const AlgebraElement& x, const AlgebraElement& y) {
  if (!(x.shape() == y.shape()))
    throw ShapeMismatch("tensor2 operands have shapes " + x.shape().to_string() + " and " +
                        y.shape().to_string());
  return BiElement(x.shape(), kron(x.data(), y.data()));
}

/// Flip a (x) b -> b (x) a, i.e. conjugation by the swap of the two legs.
inline BiElement flip(const BiElement& r) {
  const int d = r.shape().dim();
  Matrix out(r.size(), r.size());
  for (int p = 0; p < d; ++p)
    for (int q = 0; q < d; ++q)
      for (int pp = 0; pp < d; ++pp)
        for (int qq = 0; qq < d; ++qq) out(p * d + q, pp * d + qq) = r.data()(q * d + p, qq * d + pp);
  return BiElement(r.shape(), std::move(out));
}

/// r (x) 1.
inline TriElement pad_right(const BiElement& r) {
  const int d = r.shape().dim();
  return TriElement(r.shape(), kron(r.data(), Matrix::Identity(d, d)));
}

/// 1 (x) r.
inline TriElement pad_left(const BiElement& r) {
  const int d = r.shape().dim();
  return TriElement(r.shape(), kron(Matrix::Identity(d, d), r.data()));
}

/// Mid-embedding a (x) b -> a (x) 1 (x) b.
inline TriElement mid_embed(const BiElement& r) {
  const int d = r.shape().dim();
  const int n = d * d * d;
  Matrix out = Matrix::Zero(n, n);
  for (int p1 = 0; p1 < d; ++p1)
    for (int p3 = 0; p3 < d; ++p3)
      for (int q1 = 0; q1 < d; ++q1)
        for (int q3 = 0; q3 < d; ++q3) {
          const Complex v = r.data()(p1 * d + p3, q1 * d + q3);
          if (v == Complex(0.0)) continue;
          for (int m = 0; m < d; ++m) out((p1 * d + m) * d + p3, (q1 * d + m) * d + q3) = v;
        }
  return TriElement(r.shape(), std::move(out));
}

/// Multiplication map a (x) b -> ab, extended linearly.
inline AlgebraElement mult_map(const BiElement& r) {
  const int d = r.shape().dim();
  Matrix out = Matrix::Zero(d, d);
  for (int i = 0; i < d; ++i)
    for (int l = 0; l < d; ++l)
      for (int j = 0; j < d; ++j) out(i, l) += r.data()(i * d + j, j * d + l);
  return AlgebraElement(r.shape(), std::move(out));
}

/// Symmetric-subspace projector (I + S)/2 on the diagonal cell of `block`, zero elsewhere.
inline BiElement diag_projector_block(const AlgebraShape& shape, int block) {
  const int d = shape.dim();
  const int lo = shape.offset(block);
  const int hi = lo + shape.block_size(block);
  Matrix out = Matrix::Zero(d * d, d * d);
  for (int p = lo; p < hi; ++p)
    for (int q = lo; q < hi; ++q) {
      out(p * d + q, p * d + q) += 0.5;
      out(p * d + q, q * d + p) += 0.5;
    }
  return BiElement(shape, std::move(out));
}

/**
 * @brief Diagonal projector P_delta: the join of p (x) p over minimal
 * projections p of A.
 *
 * Minimal projections are rank one inside a single block, and the span of
 * v (x) v over v in C^n is the symmetric subspace, so P_delta is the sum of
 * the per-block symmetric projectors. Cross cells (i, j), i != j, are zero.
 */
inline BiElement diag_projector(const AlgebraShape& shape) {
  BiElement out = BiElement::zero(shape);
  for (int k = 0; k < shape.num_blocks(); ++k) out += diag_projector_block(shape, k);
  return out;
}

/// Operator norm (largest singular value), computed cell by cell.
template <int Order>
double op_norm(const Element<Order>& x) {
  double best = 0.0;
  for (const auto& idx : cells(x.shape(), Order))
    best = std::max(best, spectral_norm(submatrix(x.data(), idx)));
  return best;
}

/// Smallest singular value, computed cell by cell.
template <int Order>
double sigma_min(const Element<Order>& x) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& idx : cells(x.shape(), Order)) {
    const Matrix block = submatrix(x.data(), idx);
    if (block.rows() == 1) {
      best = std::min(best, std::abs(block(0, 0)));
      continue;
    }
    Eigen::JacobiSVD<Matrix> svd(block);
    best = std::min(best, svd.singularValues()(svd.singularValues().size() - 1));
  }
  return best;
}

template <int Order>
Element<Order> hermitian_part(const Element<Order>& x) {
  return Element<Order>(x.shape(), (x.data() + x.data().adjoint()) * 0.5);
}

template <int Order>
bool is_self_adjoint(const Element<Order>& x, double rel_tol = kSelfAdjointTolerance) {
  return op_norm(Element<Order>(x.shape(), x.data() - x.data().adjoint())) <=
         rel_tol * std::max(1.0, op_norm(x));
}

struct EigenPair {
  double value = 0.0;
  Vector vector;  ///< unit eigenvector in C^{D^order}
};

/// Smallest eigenvalue of a self-adjoint element with a witnessing unit eigenvector.
template <int Order>
EigenPair min_eig(const Element<Order>& x) {
  if (!is_self_adjoint(x)) throw NotSelfAdjoint("min_eig needs a self-adjoint element");
  EigenPair best{std::numeric_limits<double>::infinity(), Vector::Zero(x.size())};
  for (const auto& idx : cells(x.shape(), Order)) {
    const Matrix block = submatrix(x.data(), idx);
    Eigen::SelfAdjointEigenSolver<Matrix> es(block);
    const double v = es.eigenvalues()(0);
    if (v < best.value) {
      best.value = v;
      best.vector.setZero();
      for (std::size_t i = 0; i < idx.size(); ++i)
        best.vector(idx[i]) = es.eigenvectors()(static_cast<Eigen::Index>(i), 0);
    }
  }
  return best;
}

/// Full spectrum of a self-adjoint element, ascending.
template <int Order>
std::vector<double> spectrum(const Element<Order>& x) {
  if (!is_self_adjoint(x)) throw NotSelfAdjoint("spectrum needs a self-adjoint element");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(x.size()));
  for (const auto& idx : cells(x.shape(), Order)) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(submatrix(x.data(), idx), Eigen::EigenvaluesOnly);
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) out.push_back(es.eigenvalues()(i));
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace qmetric

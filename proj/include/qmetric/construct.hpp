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
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qmetric/axioms.hpp"

namespace qmetric {

/// Classical finite metric space: n points and their distance matrix.
struct FiniteMetricSpace {
  Eigen::MatrixXd d;

  int size() const noexcept { return static_cast<int>(d.rows()); }
};

/**
 * First violated classical axiom of `d`, or nullopt if `d` is a metric.
 * Triangle checks allow a relative slack of `tol` times the largest entry.
 */
inline std::optional<std::string> metric_violation(const Eigen::MatrixXd& d, double tol = 1e-12) {
  const Eigen::Index n = d.rows();
  if (n < 1 || d.cols() != n) return "distance matrix must be square and nonempty";
  if (!d.allFinite()) return "distances must be finite";
  const double slack = tol * std::max(1.0, d.cwiseAbs().maxCoeff());
  for (Eigen::Index x = 0; x < n; ++x) {
    if (d(x, x) != 0.0) return "d(" + std::to_string(x) + "," + std::to_string(x) + ") is not zero";
    for (Eigen::Index y = 0; y < n; ++y) {
      if (d(x, y) < 0.0) return "negative distance at (" + std::to_string(x) + "," + std::to_string(y) + ")";
      if (d(x, y) != d(y, x)) return "asymmetric distance at (" + std::to_string(x) + "," + std::to_string(y) + ")";
      if (x != y && d(x, y) == 0.0)
        return "distinct points " + std::to_string(x) + " and " + std::to_string(y) + " at distance zero";
    }
  }
  for (Eigen::Index x = 0; x < n; ++x)
    for (Eigen::Index y = 0; y < n; ++y)
      for (Eigen::Index z = 0; z < n; ++z)
        if (d(x, y) > d(x, z) + d(z, y) + slack)
          return "triangle inequality fails for (" + std::to_string(x) + "," + std::to_string(y) + ") via " +
                 std::to_string(z);
  return std::nullopt;
}

/// Diagonal element of C(X) (x) C(X) carrying d(x, y) at index x * n + y. No validation.
inline BiElement classical_embedding(const Eigen::MatrixXd& d) {
  const auto n = static_cast<int>(d.rows());
  if (d.cols() != n) throw ShapeMismatch("distance matrix must be square");
  Matrix m = Matrix::Zero(n * n, n * n);
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y) m(x * n + y, x * n + y) = d(x, y);
  return BiElement(AlgebraShape::classical(n), std::move(m));
}

inline MetricCandidate from_finite_metric(const FiniteMetricSpace& space) {
  if (auto why = metric_violation(space.d)) throw PreconditionError("not a metric: " + *why);
  return MetricCandidate(classical_embedding(space.d));
}

/// rho_1 + r rho_2 for r > 0.
inline MetricCandidate conic_combine(const MetricCandidate& m1, const MetricCandidate& m2, double r) {
  if (!(m1.shape() == m2.shape()))
    throw ShapeMismatch("conic_combine needs equal shapes, got " + m1.shape().to_string() + " and " +
                        m2.shape().to_string());
  if (!(r > 0.0)) throw PreconditionError("conic_combine needs r > 0");
  return MetricCandidate(m1.rho + Complex(r) * m2.rho);
}

/// Smallest admissible cross distance for direct_sum: max(||rho_1||, ||rho_2||) / 2.
inline double direct_sum_bound(const MetricCandidate& m1, const MetricCandidate& m2) {
  return 0.5 * std::max(m1.diameter, m2.diameter);
}

/**
 * Metric on A_1 + A_2 (blocks concatenated): rho_1 on the (A_1, A_1) cells,
 * rho_2 on the (A_2, A_2) cells and r times the identity on both cross
 * cells. `r` defaults to the bound and may never be below it. It must also
 * be positive: two zero metrics have bound 0, and r = 0 would be degenerate.
 */
inline MetricCandidate direct_sum(const MetricCandidate& m1, const MetricCandidate& m2,
                                  std::optional<double> r = std::nullopt) {
  const double bound = direct_sum_bound(m1, m2);
  const double cross = r.value_or(bound);
  if (!(cross >= bound))
    throw PreconditionError("direct_sum cross distance " + std::to_string(cross) + " is below the bound " +
                            std::to_string(bound));
  if (!(cross > 0.0)) throw PreconditionError("direct_sum cross distance must be positive");
  const AlgebraShape shape = concat(m1.shape(), m2.shape());
  const int d1 = m1.shape().dim();
  const int d2 = m2.shape().dim();
  const int d = d1 + d2;
  Matrix out = Matrix::Zero(d * d, d * d);
  const Matrix& r1 = m1.rho.data();
  const Matrix& r2 = m2.rho.data();
  for (int p = 0; p < d1; ++p)
    for (int q = 0; q < d1; ++q)
      for (int pp = 0; pp < d1; ++pp)
        for (int qq = 0; qq < d1; ++qq) out(p * d + q, pp * d + qq) = r1(p * d1 + q, pp * d1 + qq);
  for (int p = 0; p < d2; ++p)
    for (int q = 0; q < d2; ++q)
      for (int pp = 0; pp < d2; ++pp)
        for (int qq = 0; qq < d2; ++qq)
          out((d1 + p) * d + d1 + q, (d1 + pp) * d + d1 + qq) = r2(p * d2 + q, pp * d2 + qq);
  for (int p = 0; p < d; ++p)
    for (int q = 0; q < d; ++q)
      if ((p < d1) != (q < d1)) out(p * d + q, p * d + q) = cross;
  return MetricCandidate(BiElement(shape, std::move(out)));
}

namespace detail {

/// Position of e_p (x) e_q in the block-contiguous ordering of H_1 (x) H_2.
inline std::vector<int> block_contiguous_order(const AlgebraShape& a, const AlgebraShape& b) {
  std::vector<int> pos(static_cast<std::size_t>(a.dim() * b.dim()));
  int next = 0;
  for (int i = 0; i < a.num_blocks(); ++i)
    for (int j = 0; j < b.num_blocks(); ++j)
      for (int p = a.offset(i); p < a.offset(i) + a.block_size(i); ++p)
        for (int q = b.offset(j); q < b.offset(j) + b.block_size(j); ++q)
          pos[static_cast<std::size_t>(p * b.dim() + q)] = next++;
  return pos;
}

}  // namespace detail

/**
 * Metric on A_1 (x) A_2: rho_1 (x) 1 + 1 (x) rho_2 on (A_1 A_1)(A_2 A_2),
 * reshuffled to (A_1 A_2)(A_1 A_2) and reordered so each block n_i m_j is
 * contiguous. The algebraic variant is only licensed for commutative A_1.
 */
inline MetricCandidate tensor_product(const MetricCandidate& m1, const MetricCandidate& m2,
                                      Mode mode = Mode::representation) {
  if (mode == Mode::algebraic && !m1.shape().is_classical())
    throw PreconditionError("algebraic tensor_product needs a commutative first factor");
  const AlgebraShape& s1 = m1.shape();
  const AlgebraShape& s2 = m2.shape();
  const int d1 = s1.dim();
  const int d2 = s2.dim();
  const int d = d1 * d2;
  const Matrix src = kron(m1.rho.data(), Matrix::Identity(d2 * d2, d2 * d2)) +
                     kron(Matrix::Identity(d1 * d1, d1 * d1), m2.rho.data());

  const std::vector<int> pos = detail::block_contiguous_order(s1, s2);
  // source index ((p, p'), (q, q')) -> target index (pos(p, q), pos(p', q'))
  std::vector<int> perm(static_cast<std::size_t>(d * d));
  for (int p = 0; p < d1; ++p)
    for (int pp = 0; pp < d1; ++pp)
      for (int q = 0; q < d2; ++q)
        for (int qq = 0; qq < d2; ++qq)
          perm[static_cast<std::size_t>((p * d1 + pp) * d2 * d2 + q * d2 + qq)] =
              pos[static_cast<std::size_t>(p * d2 + q)] * d + pos[static_cast<std::size_t>(pp * d2 + qq)];

  Matrix out = Matrix::Zero(d * d, d * d);
  for (int c = 0; c < d * d; ++c)
    for (int r = 0; r < d * d; ++r) {
      const Complex v = src(r, c);
      if (v != Complex(0.0)) out(perm[static_cast<std::size_t>(r)], perm[static_cast<std::size_t>(c)]) = v;
    }
  return MetricCandidate(BiElement(tensor_shape(s1, s2), std::move(out)));
}

}  // namespace qmetric

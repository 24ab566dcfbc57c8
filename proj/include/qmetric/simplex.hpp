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

#include <limits>

#include <Eigen/Dense>

#include "qmetric/error.hpp"

namespace qmetric {

enum class LpStatus { optimal, unbounded, iteration_limit };

struct LpResult {
  LpStatus status = LpStatus::optimal;
  double value = 0.0;
  Eigen::VectorXd x;
};

/**
 * Dense tableau simplex for  max c.x  s.t.  A x <= b, x >= 0  with b >= 0,
 * so the slack basis is feasible and no phase one is needed. Bland's rule
 * keeps it from cycling. Meant for the tiny programs of classical transport.
 */
inline LpResult simplex_max(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& c,
                            double tol = 1e-12, int max_pivots = 100000) {
  const Eigen::Index m = a.rows();
  const Eigen::Index n = a.cols();
  if (b.size() != m || c.size() != n) throw ShapeMismatch("simplex: inconsistent dimensions");
  if ((b.array() < 0.0).any()) throw PreconditionError("simplex: right-hand side must be nonnegative");

  // columns: n structural, m slack, then rhs
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m + 1, n + m + 1);
  t.topLeftCorner(m, n) = a;
  t.block(0, n, m, m).setIdentity();
  t.col(n + m).head(m) = b;
  t.row(m).head(n) = -c.transpose();
  Eigen::VectorXi basis(m);
  for (Eigen::Index i = 0; i < m; ++i) basis(i) = static_cast<int>(n + i);

  LpResult res;
  for (int pivots = 0;; ++pivots) {
    if (pivots >= max_pivots) {
      res.status = LpStatus::iteration_limit;
      break;
    }
    Eigen::Index enter = -1;
    for (Eigen::Index j = 0; j < n + m; ++j)
      if (t(m, j) < -tol) {
        enter = j;
        break;
      }
    if (enter < 0) break;

    Eigen::Index leave = -1;
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < m; ++i) {
      if (t(i, enter) <= tol) continue;
      const double ratio = t(i, n + m) / t(i, enter);
      if (ratio < best - tol || (ratio <= best + tol && leave >= 0 && basis(i) < basis(leave))) {
        best = ratio;
        leave = i;
      }
    }
    if (leave < 0) {
      res.status = LpStatus::unbounded;
      break;
    }

    t.row(leave) /= t(leave, enter);
    for (Eigen::Index i = 0; i <= m; ++i)
      if (i != leave && t(i, enter) != 0.0) t.row(i) -= t(i, enter) * t.row(leave);
    basis(leave) = static_cast<int>(enter);
  }

  res.x = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < m; ++i)
    if (basis(i) < n) res.x(basis(i)) = t(i, n + m);
  res.value = c.dot(res.x);
  return res;
}

}  // namespace qmetric

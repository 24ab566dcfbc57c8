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
#include <limits>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qmetric/axioms.hpp"
#include "qmetric/simplex.hpp"

namespace qmetric {

/// Vector state a -> <a v, v> for a unit vector v in block `block`.
struct PureState {
  int block = 0;
  Vector v;
};

/**
 * State a -> sum_k tr(d_k a_k) given by per-block density matrices d_k,
 * each positive semidefinite, with total trace 1.
 */
class State {
 public:
  State(AlgebraShape shape, std::vector<Matrix> densities, double tol = 1e-9)
      : shape_(std::move(shape)), densities_(std::move(densities)) {
    if (static_cast<int>(densities_.size()) != shape_.num_blocks())
      throw ShapeMismatch("state needs one density per block of " + shape_.to_string());
    double trace = 0.0;
    for (int k = 0; k < shape_.num_blocks(); ++k) {
      const Matrix& d = densities_[static_cast<std::size_t>(k)];
      const int n = shape_.block_size(k);
      if (d.rows() != n || d.cols() != n) throw ShapeMismatch("density block has the wrong size");
      if ((d - d.adjoint()).norm() > tol) throw PreconditionError("density block is not self-adjoint");
      Eigen::SelfAdjointEigenSolver<Matrix> es(d, Eigen::EigenvaluesOnly);
      if (es.eigenvalues()(0) < -tol) throw PreconditionError("density block is not positive");
      trace += d.trace().real();
    }
    if (std::abs(trace - 1.0) > tol) throw PreconditionError("state densities must have total trace 1");
  }

  /// Splits a block-diagonal density matrix into its blocks.
  static State from_density(const AlgebraElement& density, double tol = 1e-9) {
    const AlgebraShape& s = density.shape();
    std::vector<Matrix> blocks;
    for (int k = 0; k < s.num_blocks(); ++k)
      blocks.push_back(density.data().block(s.offset(k), s.offset(k), s.block_size(k), s.block_size(k)));
    return State(s, std::move(blocks), tol);
  }

  static State pure(const AlgebraShape& shape, const PureState& ps) {
    if (ps.block < 0 || ps.block >= shape.num_blocks()) throw PreconditionError("pure state block out of range");
    if (ps.v.size() != shape.block_size(ps.block)) throw ShapeMismatch("pure state vector has the wrong length");
    std::vector<Matrix> blocks;
    for (int k = 0; k < shape.num_blocks(); ++k)
      blocks.push_back(Matrix::Zero(shape.block_size(k), shape.block_size(k)));
    const Vector v = ps.v.normalized();
    blocks[static_cast<std::size_t>(ps.block)] = v * v.adjoint();
    return State(shape, std::move(blocks));
  }

  /// Point evaluation at block x (the Dirac state on a classical shape).
  static State point(const AlgebraShape& shape, int x) {
    if (x < 0 || x >= shape.num_blocks()) throw PreconditionError("point index out of range");
    if (shape.block_size(x) != 1) throw PreconditionError("point states need a one-dimensional block");
    return pure(shape, PureState{x, Vector::Ones(1)});
  }

  const AlgebraShape& shape() const noexcept { return shape_; }
  const std::vector<Matrix>& densities() const noexcept { return densities_; }

  AlgebraElement density() const {
    Matrix m = Matrix::Zero(shape_.dim(), shape_.dim());
    for (int k = 0; k < shape_.num_blocks(); ++k)
      m.block(shape_.offset(k), shape_.offset(k), shape_.block_size(k), shape_.block_size(k)) =
          densities_[static_cast<std::size_t>(k)];
    return AlgebraElement(shape_, std::move(m));
  }

  /// Re <state, a>; exact pairing for self-adjoint a.
  double pairing(const AlgebraElement& a) const { return (density().data() * a.data()).trace().real(); }

  /// Weight of each block; the probability vector on a classical shape.
  Eigen::VectorXd block_weights() const {
    Eigen::VectorXd w(shape_.num_blocks());
    for (int k = 0; k < shape_.num_blocks(); ++k) w(k) = densities_[static_cast<std::size_t>(k)].trace().real();
    return w;
  }

  /// Convex decomposition into pure states from the block eigendecompositions.
  std::vector<std::pair<double, PureState>> pure_decomposition(double cutoff = 1e-14) const {
    std::vector<std::pair<double, PureState>> out;
    for (int k = 0; k < shape_.num_blocks(); ++k) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(densities_[static_cast<std::size_t>(k)]);
      for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        if (es.eigenvalues()(i) > cutoff) out.push_back({es.eigenvalues()(i), PureState{k, es.eigenvectors().col(i)}});
    }
    return out;
  }

 private:
  AlgebraShape shape_;
  std::vector<Matrix> densities_;
};

namespace detail {

inline void require_lipschitz_preconditions(const BiElement& rho, const ToleranceConfig& cfg) {
  for (const AxiomRecord& rec : {check_positive(rho, cfg), check_diag_vanish(rho, cfg), check_nondegenerate(rho, cfg)})
    if (!rec.passed)
      throw PreconditionError("metric fails axiom (" + std::string(axiom_tag(rec.axiom)) +
                              "); its inverse on the off-diagonal subspace is undefined");
}

/// a (x) 1 - 1 (x) a
inline BiElement commutator_lift(const AlgebraElement& a) {
  const AlgebraElement one = identity(a.shape());
  return tensor2(a, one) - tensor2(one, a);
}

/// Orthonormal real basis of the self-adjoint part of A under Re tr(x* y).
inline std::vector<AlgebraElement> self_adjoint_basis(const AlgebraShape& shape) {
  std::vector<AlgebraElement> out;
  const int d = shape.dim();
  const double h = 1.0 / std::sqrt(2.0);
  for (int k = 0; k < shape.num_blocks(); ++k) {
    const int lo = shape.offset(k);
    const int hi = lo + shape.block_size(k);
    for (int p = lo; p < hi; ++p)
      for (int q = p; q < hi; ++q) {
        Matrix m = Matrix::Zero(d, d);
        if (p == q) {
          m(p, p) = 1.0;
          out.emplace_back(shape, m);
          continue;
        }
        m(p, q) = m(q, p) = h;
        out.emplace_back(shape, m);
        m(p, q) = Complex(0.0, h);
        m(q, p) = Complex(0.0, -h);
        out.emplace_back(shape, m);
      }
  }
  return out;
}

}  // namespace detail

/**
 * Pseudo-inverse of rho. When rho is positive, kills P_delta and is
 * invertible off it, this is exactly the inverse of rho restricted to the
 * complement of P_delta, extended by zero.
 */
inline BiElement metric_pseudo_inverse(const MetricCandidate& m, const ToleranceConfig& cfg = {}) {
  detail::require_lipschitz_preconditions(m.rho, cfg);
  const double cutoff = 0.5 * cfg.floor_for(m.diameter);
  return map_cells(hermitian_part(m.rho), [cutoff](const Matrix& block) -> Matrix {
    Eigen::SelfAdjointEigenSolver<Matrix> es(block);
    Eigen::VectorXd inv = es.eigenvalues();
    for (Eigen::Index i = 0; i < inv.size(); ++i) inv(i) = inv(i) > cutoff ? 1.0 / inv(i) : 0.0;
    return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().adjoint();
  });
}

/// a -> ||(a (x) 1 - 1 (x) a) rho^+||, with the pseudo-inverse computed once.
class LipschitzSeminorm {
 public:
  explicit LipschitzSeminorm(const MetricCandidate& m, const ToleranceConfig& cfg = {})
      : pinv_(metric_pseudo_inverse(m, cfg)) {}

  double operator()(const AlgebraElement& a) const {
    if (!(a.shape() == pinv_.shape())) throw ShapeMismatch("element and metric live on different shapes");
    return op_norm(detail::commutator_lift(a) * pinv_);
  }

  const BiElement& pseudo_inverse() const noexcept { return pinv_; }

 private:
  BiElement pinv_;
};

inline double lip_seminorm(const AlgebraElement& a, const MetricCandidate& m, const ToleranceConfig& cfg = {}) {
  return LipschitzSeminorm(m, cfg)(a);
}

struct LeibnizResult {
  double lhs = 0.0;    ///< ||ab||_Lip
  double rhs = 0.0;    ///< ||a|| ||b||_Lip + ||a||_Lip ||b||
  double slack = 0.0;  ///< rhs - lhs
  bool holds = false;
};

/// Leibniz estimate for commuting a, b; non-commuting input is rejected.
inline LeibnizResult check_leibniz(const AlgebraElement& a, const AlgebraElement& b, const MetricCandidate& m,
                                   const ToleranceConfig& cfg = {}) {
  const double na = op_norm(a);
  const double nb = op_norm(b);
  if (op_norm(a * b - b * a) > cfg.eq_tol * std::max(1.0, na * nb))
    throw PreconditionError("Leibniz estimate is only established for commuting elements");
  const LipschitzSeminorm lip(m, cfg);
  LeibnizResult r;
  r.lhs = lip(a * b);
  r.rhs = na * lip(b) + lip(a) * nb;
  r.slack = r.rhs - r.lhs;
  r.holds = r.lhs <= r.rhs + 1e-9 * std::max(1.0, r.rhs);
  return r;
}

/// ||rho (v (x) w)|| for unit vectors in distinct blocks; bounds the distance of the two vector states.
inline double pure_state_bound(const PureState& v, const PureState& w, const MetricCandidate& m) {
  const AlgebraShape& s = m.shape();
  if (v.block == w.block) throw PreconditionError("pure_state_bound needs states in distinct blocks");
  for (const PureState* p : {&v, &w}) {
    if (p->block < 0 || p->block >= s.num_blocks()) throw PreconditionError("pure state block out of range");
    if (p->v.size() != s.block_size(p->block)) throw ShapeMismatch("pure state vector has the wrong length");
    if (std::abs(p->v.norm() - 1.0) > 1e-9) throw PreconditionError("pure state vector must be a unit vector");
  }
  Vector ev = Vector::Zero(s.dim());
  Vector ew = Vector::Zero(s.dim());
  ev.segment(s.offset(v.block), v.v.size()) = v.v;
  ew.segment(s.offset(w.block), w.v.size()) = w.v;
  Vector x(s.dim() * s.dim());
  for (int p = 0; p < s.dim(); ++p) x.segment(p * s.dim(), s.dim()) = ev(p) * ew;
  return (m.rho.data() * x).norm();
}

struct MkOptions {
  int max_iter = 500;
  int patience = 50;           ///< converged when the lower bound gains < improve_tol over this many steps
  double improve_tol = 1e-8;
  int random_starts = 2;
  int cut_iter = 100;          ///< cutting-plane refinements after the ascent
  bool force_ascent = false;   ///< use the ascent even on classical shapes
};

/// Bracket lower <= d(phi, psi) <= upper; upper is +inf when nothing certifies it.
struct MkBracket {
  double lower = 0.0;
  double upper = std::numeric_limits<double>::infinity();
  bool unbounded = false;  ///< a flat direction separates the states: d = +inf
  bool exact = false;      ///< computed by the transport linear program
  bool converged = false;
  int iterations = 0;
  std::vector<double> lower_history;  ///< lower bound after each ascent step of the first start, then each cut
};

/**
 * Exact Monge-Kantorovich distance between probability vectors p, q on a
 * finite metric space: max sum (p - q)_x a_x over |a_x - a_y| <= d(x, y),
 * solved as a linear program in a = u - w with u, w >= 0.
 */
inline double classical_mk_distance(const Eigen::MatrixXd& d, const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  const Eigen::Index n = d.rows();
  if (p.size() != n || q.size() != n) throw ShapeMismatch("distribution length does not match the space");
  if (n == 1) return 0.0;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n * (n - 1), 2 * n);
  Eigen::VectorXd b(n * (n - 1));
  Eigen::Index row = 0;
  for (Eigen::Index x = 0; x < n; ++x)
    for (Eigen::Index y = 0; y < n; ++y) {
      if (x == y) continue;
      a(row, x) = 1.0;
      a(row, n + x) = -1.0;
      a(row, y) = -1.0;
      a(row, n + y) = 1.0;
      b(row) = d(x, y);
      ++row;
    }
  Eigen::VectorXd c(2 * n);
  c << p - q, q - p;
  const LpResult res = simplex_max(a, b, c);
  if (res.status != LpStatus::optimal) throw Error("transport linear program did not reach optimality");
  return std::max(0.0, res.value);
}

namespace detail {

/// Upper bound from pure-state decompositions living on disjoint blocks, else +inf.
inline double decomposition_upper_bound(const State& phi, const State& psi, const MetricCandidate& m) {
  const auto dp = phi.pure_decomposition();
  const auto dq = psi.pure_decomposition();
  double bound = 0.0;
  for (const auto& [wp, vp] : dp)
    for (const auto& [wq, vq] : dq) {
      if (vp.block == vq.block) return std::numeric_limits<double>::infinity();
      bound += wp * wq * pure_state_bound(vp, vq, m);
    }
  return bound;
}

}  // namespace detail

/**
 * @brief Monge-Kantorovich semimetric d(phi, psi) = sup |<phi - psi, a>| over
 * self-adjoint a with ||a||_Lip <= 1.
 *
 * Classical shapes are solved exactly by the transport linear program.
 * Otherwise the ratio <phi - psi, a> / ||a||_Lip is maximized by normalized
 * supergradient ascent over the self-adjoint part of A (trace-free gauge);
 * every iterate is feasible, so the lower end is a valid bound. Cutting
 * planes from the supergradients then refine both ends; the upper end is the
 * smaller of the cutting-plane value and the pure-state decomposition bound.
 */
inline MkBracket mk_distance(const State& phi, const State& psi, const MetricCandidate& m,
                             const ToleranceConfig& cfg = {}, const MkOptions& opt = {}) {
  const AlgebraShape& s = m.shape();
  if (!(phi.shape() == s) || !(psi.shape() == s)) throw ShapeMismatch("states and metric live on different shapes");
  detail::require_lipschitz_preconditions(m.rho, cfg);

  MkBracket out;
  if (s.is_classical() && !opt.force_ascent) {
    const int n = s.dim();
    Eigen::MatrixXd d(n, n);
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y) d(x, y) = m.rho.data()(x * n + y, x * n + y).real();
    out.lower = out.upper = classical_mk_distance(d, phi.block_weights(), psi.block_weights());
    out.exact = out.converged = true;
    return out;
  }

  const BiElement pinv = metric_pseudo_inverse(m, cfg);
  const AlgebraElement delta(s, phi.density().data() - psi.density().data());
  const auto basis = detail::self_adjoint_basis(s);
  const auto nb = static_cast<Eigen::Index>(basis.size());

  Eigen::VectorXd g(nb), unit_dir(nb);
  std::vector<BiElement> lifted;
  lifted.reserve(basis.size());
  for (Eigen::Index k = 0; k < nb; ++k) {
    const AlgebraElement& h = basis[static_cast<std::size_t>(k)];
    g(k) = (delta.data() * h.data()).trace().real();
    unit_dir(k) = h.data().trace().real();
    lifted.push_back(detail::commutator_lift(h) * pinv);
  }
  unit_dir.normalize();
  out.upper = detail::decomposition_upper_bound(phi, psi, m);
  if (g.norm() == 0.0) {
    out.upper = 0.0;
    out.converged = true;
    return out;
  }

  // Flat directions: ||a||_Lip = 0 but <phi - psi, a> != 0 means d = +inf.
  const int len = s.dim() * s.dim();
  Eigen::MatrixXd flat(2 * len * len, nb);
  for (Eigen::Index k = 0; k < nb; ++k) {
    const Matrix& bk = lifted[static_cast<std::size_t>(k)].data();
    for (Eigen::Index e = 0; e < bk.size(); ++e) {
      flat(e, k) = bk(e).real();
      flat(bk.size() + e, k) = bk(e).imag();
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> flat_svd(flat, Eigen::ComputeFullV);
  const double smax = flat_svd.singularValues()(0);
  for (Eigen::Index k = 0; k < nb; ++k) {
    if (flat_svd.singularValues()(k) > 1e-10 * smax) continue;
    if (std::abs(g.dot(flat_svd.matrixV().col(k))) > 1e-10 * g.norm()) {
      out.unbounded = true;
      out.lower = out.upper = std::numeric_limits<double>::infinity();
      out.converged = true;
      return out;
    }
  }

  auto assemble = [&](const Eigen::VectorXd& x) {
    BiElement a = BiElement::zero(s);
    for (Eigen::Index k = 0; k < nb; ++k)
      if (x(k) != 0.0) a += Complex(x(k)) * lifted[static_cast<std::size_t>(k)];
    return a;
  };
  // Value of L at x plus its supergradient from the top singular pair.
  auto lip_with_gradient = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
    const BiElement a = assemble(x);
    double best = -1.0;
    Vector u, w;
    std::vector<int> best_idx;
    for (const auto& idx : cells(s, 2)) {
      const Matrix block = submatrix(a.data(), idx);
      Eigen::JacobiSVD<Matrix> svd(block, Eigen::ComputeThinU | Eigen::ComputeThinV);
      if (svd.singularValues()(0) > best) {
        best = svd.singularValues()(0);
        u = svd.matrixU().col(0);
        w = svd.matrixV().col(0);
        best_idx = idx;
      }
    }
    grad.resize(nb);
    for (Eigen::Index k = 0; k < nb; ++k)
      grad(k) = (u.adjoint() * submatrix(lifted[static_cast<std::size_t>(k)].data(), best_idx) * w)(0).real();
    return best;
  };
  auto normalize = [&](Eigen::VectorXd x) {
    x -= x.dot(unit_dir) * unit_dir;
    Eigen::VectorXd grad;
    const double l = lip_with_gradient(x, grad);
    if (l > 0.0) x /= l;
    if (g.dot(x) < 0.0) x = -x;
    return x;
  };

  std::vector<Eigen::VectorXd> cuts;
  auto cut_at = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd grad;
    if (lip_with_gradient(x, grad) > 0.0) {
      cuts.push_back(-grad);
      cuts.push_back(std::move(grad));
    }
  };

  CounterRng rng(cfg.seed, 0x6d6b);
  std::vector<Eigen::VectorXd> starts{g};
  for (int r = 0; r < opt.random_starts; ++r) {
    Eigen::VectorXd x(nb);
    for (Eigen::Index k = 0; k < nb; ++k) x(k) = rng.normal();
    starts.push_back(x);
  }

  const double step0 = 1.0 / (std::max(op_norm(pinv), 1e-300) * g.norm());
  out.lower = 0.0;
  bool first = true;
  for (const Eigen::VectorXd& start : starts) {
    Eigen::VectorXd x = normalize(start);
    double value = g.dot(x);
    double step = step0;
    std::vector<double> history{value};
    bool converged = false;
    int it = 0;
    for (; it < opt.max_iter; ++it) {
      Eigen::VectorXd grad_l;
      const double l = lip_with_gradient(x, grad_l);
      const Eigen::VectorXd ascent = (g * l - value * grad_l) / (l * l);
      Eigen::VectorXd trial = normalize(x + step * ascent);
      const double trial_value = g.dot(trial);
      if (trial_value > value) {
        x = std::move(trial);
        value = trial_value;
        step *= 1.5;
      } else {
        step *= 0.5;
      }
      history.push_back(value);
      const auto h = history.size();
      if (h > static_cast<std::size_t>(opt.patience) &&
          history[h - 1] - history[h - 1 - static_cast<std::size_t>(opt.patience)] <
              opt.improve_tol * std::max(1.0, std::abs(value))) {
        converged = true;
        ++it;
        break;
      }
    }
    if (first) out.lower_history = history;
    if (first || value > out.lower) {
      out.converged = converged;
      out.iterations = it;
    }
    out.lower = std::max(out.lower, value);
    first = false;
    cut_at(start);
    cut_at(x);
  }

  // Cutting planes: every supergradient c gives |c.x| <= L(x), so
  // max g.x s.t. |c_k.x| <= 1 over a box holding the optimum is an upper
  // bound, and its maximizer rescaled by L is a new lower bound.
  double sigma_min = smax;
  for (Eigen::Index k = 0; k < flat_svd.singularValues().size(); ++k)
    if (flat_svd.singularValues()(k) > 1e-10 * smax) sigma_min = flat_svd.singularValues()(k);
  const double box = 1.01 * std::sqrt(static_cast<double>(len)) / sigma_min;
  for (Eigen::Index k = 0; k < nb; ++k) cut_at(Eigen::VectorXd::Unit(nb, k));
  Eigen::VectorXd obj(2 * nb);
  obj << g, -g;
  double lp_upper = std::numeric_limits<double>::infinity();
  for (int step = 0; step < opt.cut_iter; ++step) {
    const auto nc = static_cast<Eigen::Index>(cuts.size());
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(nc + 2 * nb, 2 * nb);
    Eigen::VectorXd b = Eigen::VectorXd::Constant(nc + 2 * nb, box);
    for (Eigen::Index k = 0; k < nc; ++k) {
      const Eigen::VectorXd& c = cuts[static_cast<std::size_t>(k)];
      a.row(k) << c.transpose(), -c.transpose();
      b(k) = 1.0;
    }
    a.bottomRows(2 * nb).setIdentity();
    const LpResult lp = simplex_max(a, b, obj);
    if (lp.status != LpStatus::optimal) break;
    lp_upper = std::min(lp_upper, lp.value);
    const Eigen::VectorXd x = lp.x.head(nb) - lp.x.tail(nb);
    Eigen::VectorXd grad;
    const double l = lip_with_gradient(x, grad);
    if (l > 0.0) out.lower = std::max(out.lower, g.dot(x) / l);
    out.lower_history.push_back(out.lower);
    ++out.iterations;
    if (lp_upper - out.lower <= opt.improve_tol * std::max(1.0, lp_upper)) {
      out.converged = true;
      break;
    }
    cuts.push_back(-grad);
    cuts.push_back(grad);
  }
  out.upper = std::min(out.upper, std::max(lp_upper, out.lower));
  return out;
}

}  // namespace qmetric

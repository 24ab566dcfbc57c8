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
#include <cstdint>
#include <future>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "qmetric/axioms.hpp"
#include "qmetric/random.hpp"

namespace qmetric {

/// Nearest positive semidefinite matrix in Frobenius norm: clip negative eigenvalues.
inline Matrix project_psd(const Matrix& x) {
  if ((x - x.adjoint()).norm() > kSelfAdjointTolerance * std::max(1.0, x.norm()))
    throw NotSelfAdjoint("project_psd needs a self-adjoint matrix");
  if (x.rows() == 1) return Matrix::Constant(1, 1, std::max(0.0, x(0, 0).real()));
  Eigen::SelfAdjointEigenSolver<Matrix> es(x);
  const Eigen::VectorXd clipped = es.eigenvalues().cwiseMax(0.0);
  Matrix out = es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().adjoint();
  return (out + out.adjoint()) * 0.5;
}

template <int Order>
Element<Order> project_psd(const Element<Order>& x) {
  return map_cells(x, [](const Matrix& block) { return project_psd(block); });
}

/// Frobenius distance from a self-adjoint element to the PSD cone.
template <int Order>
double psd_distance(const Element<Order>& x) {
  double sq = 0.0;
  for (double v : spectrum(x))
    if (v < 0.0) sq += v * v;
  return std::sqrt(sq);
}

/**
 * Projection onto self-adjoint, flip-symmetric elements of A (x) A that
 * vanish against P_delta: hermitize, average with the flip, compress by
 * Q = 1 - P_delta on both sides, then mask to the block support. The four
 * maps are commuting orthogonal projections, so the composite is the
 * projection onto their intersection.
 */
inline BiElement project_structure(const BiElement& rho) {
  const BiElement h = hermitian_part(rho);
  const BiElement sym = Complex(0.5) * (h + flip(h));
  const BiElement q = unit<2>(rho.shape()) - diag_projector(rho.shape());
  return BiElement::masked(rho.shape(), (q * sym * q).data());
}

/**
 * @brief Orthonormal real basis (under Re tr(x* y)) of the linear part of the
 * structural constraints.
 *
 * Representation mode: self-adjoint, flip-symmetric, rho P_delta = 0.
 * Algebraic mode: self-adjoint, flip-symmetric, m(rho) = 0.
 */
class StructuralSubspace {
 public:
  StructuralSubspace(const AlgebraShape& shape, Mode mode) : shape_(shape) {
    const int n = shape.power(2);
    const double h = 1.0 / std::sqrt(2.0);
    // Orthonormal basis of the masked self-adjoint elements, pushed through the projection.
    std::vector<BiElement> images;
    for (int c = 0; c < n; ++c)
      for (int r = 0; r <= c; ++r) {
        if (!detail::in_support(shape, 2, r, c)) continue;
        Matrix m = Matrix::Zero(n, n);
        if (r == c) {
          m(r, r) = 1.0;
          images.push_back(linear_part(BiElement(shape, m), mode));
          continue;
        }
        m(r, c) = m(c, r) = h;
        images.push_back(linear_part(BiElement(shape, m), mode));
        m(r, c) = Complex(0.0, h);
        m(c, r) = Complex(0.0, -h);
        images.push_back(linear_part(BiElement(shape, m), mode));
      }
    std::vector<BiElement> span = orthonormalize(images);
    if (mode == Mode::algebraic) span = kernel_of_mult(span);
    basis_ = std::move(span);
  }

  const AlgebraShape& shape() const noexcept { return shape_; }
  int dim() const noexcept { return static_cast<int>(basis_.size()); }
  const std::vector<BiElement>& basis() const noexcept { return basis_; }

  Eigen::VectorXd coordinates(const BiElement& x) const {
    Eigen::VectorXd c(dim());
    for (int i = 0; i < dim(); ++i) c(i) = inner(basis_[static_cast<std::size_t>(i)].data(), x.data());
    return c;
  }

  BiElement element(const Eigen::VectorXd& c) const {
    Matrix m = Matrix::Zero(shape_.power(2), shape_.power(2));
    for (int i = 0; i < dim(); ++i) m += c(i) * basis_[static_cast<std::size_t>(i)].data();
    return BiElement::masked(shape_, std::move(m));
  }

  static double inner(const Matrix& a, const Matrix& b) { return (a.conjugate().cwiseProduct(b)).sum().real(); }

 private:
  static BiElement linear_part(const BiElement& x, Mode mode) {
    if (mode == Mode::representation) return project_structure(x);
    return Complex(0.5) * (x + flip(x));
  }

  // Column space via the eigendecomposition of the Gram matrix.
  static std::vector<BiElement> orthonormalize(const std::vector<BiElement>& v) {
    const auto k = static_cast<Eigen::Index>(v.size());
    if (k == 0) return {};
    Eigen::MatrixXd gram(k, k);
    for (Eigen::Index i = 0; i < k; ++i)
      for (Eigen::Index j = 0; j <= i; ++j)
        gram(i, j) = gram(j, i) = inner(v[static_cast<std::size_t>(i)].data(), v[static_cast<std::size_t>(j)].data());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    const double top = std::max(es.eigenvalues().maxCoeff(), 0.0);
    std::vector<BiElement> out;
    for (Eigen::Index e = k - 1; e >= 0; --e) {
      const double lam = es.eigenvalues()(e);
      if (lam <= 1e-10 * std::max(1.0, top)) break;
      Matrix m = Matrix::Zero(v[0].size(), v[0].size());
      for (Eigen::Index i = 0; i < k; ++i) m += es.eigenvectors()(i, e) * v[static_cast<std::size_t>(i)].data();
      out.push_back(BiElement::masked(v[0].shape(), m / std::sqrt(lam)));
    }
    return out;
  }

  // Restricts an orthonormal family to the kernel of the multiplication map.
  static std::vector<BiElement> kernel_of_mult(const std::vector<BiElement>& w) {
    if (w.empty()) return {};
    const int d = w[0].shape().dim();
    const auto k = static_cast<Eigen::Index>(w.size());
    Eigen::MatrixXd c(2 * d * d, k);
    for (Eigen::Index j = 0; j < k; ++j) {
      const Matrix m = mult_map(w[static_cast<std::size_t>(j)]).data();
      for (Eigen::Index e = 0; e < m.size(); ++e) {
        c(e, j) = m(e).real();
        c(m.size() + e, j) = m(e).imag();
      }
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(c, Eigen::ComputeFullV);
    const double top = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
      if (svd.singularValues()(i) > 1e-10 * std::max(1.0, top)) ++rank;
    std::vector<BiElement> out;
    for (Eigen::Index col = rank; col < k; ++col) {
      Matrix m = Matrix::Zero(w[0].size(), w[0].size());
      for (Eigen::Index j = 0; j < k; ++j) m += svd.matrixV()(j, col) * w[static_cast<std::size_t>(j)].data();
      out.push_back(BiElement::masked(w[0].shape(), m));
    }
    return out;
  }

  AlgebraShape shape_;
  std::vector<BiElement> basis_;
};

/// How the scale of rho is pinned: trace(rho) = target, or additionally rescaled to ||rho|| = 1 on output.
enum class Gauge { trace, unit_norm };

struct SearchConfig {
  AlgebraShape shape{std::vector<int>{1}};
  double floor = 1e-6;                  ///< eigenvalue floor of rho off the diagonal projector
  std::optional<double> trace_target;   ///< defaults to D^2
  int max_iter = 5000;
  int restarts = 8;
  std::uint64_t seed = 42;
  double residual_tol = 1e-8;
  bool drop_triangle = false;           ///< diagnostic: omit the triangle constraint
  Gauge gauge = Gauge::trace;
  int sample_count = 32;                ///< nu samples when certifying in algebraic mode
  bool parallel = true;

  double target() const { return trace_target.value_or(static_cast<double>(shape.power(2))); }

  void validate() const {
    if (!(floor > 0.0)) throw PreconditionError("search floor must be positive");
    if (!(residual_tol > 0.0)) throw PreconditionError("residual_tol must be positive");
    if (max_iter < 1) throw PreconditionError("max_iter must be at least 1");
    if (restarts < 1) throw PreconditionError("restarts must be at least 1");
    if (!(target() > 0.0)) throw PreconditionError("trace target must be positive");
    if (sample_count < 1) throw PreconditionError("sample_count must be at least 1");
  }
};

enum class SearchStatus { candidate_found, no_convergence };

inline std::string_view status_name(SearchStatus s) {
  return s == SearchStatus::candidate_found ? "candidate_found" : "no_convergence";
}

/// Distances of one iterate: to the structural affine set, and of its structural projection to the two cones.
struct ResidualSample {
  int iteration = 0;
  double structural = 0.0;
  double rho_cone = 0.0;
  double triangle_cone = 0.0;
};

struct SearchOutcome {
  SearchStatus status = SearchStatus::no_convergence;
  std::optional<MetricCandidate> candidate;  ///< certified whenever status is candidate_found
  std::vector<ResidualSample> residual_history;
  double best_residual = std::numeric_limits<double>::infinity();
  std::uint64_t seed_used = 0;
  int restart_index = 0;
  int iterations = 0;
  double scale_factor = 1.0;  ///< factor applied to the trace-gauge solution (unit-norm gauge)
  SearchConfig config;
  Mode mode = Mode::representation;
};

/**
 * Verification with search-grade tolerances: the PSD tolerance is relaxed to
 * 10 residual_tol relative to ||rho|| and the nondegeneracy floor is half the
 * search floor times `scale` (the factor applied to rho after the search,
 * 1 under the trace gauge).
 */
inline AxiomReport certify(const BiElement& rho, const AlgebraShape& shape, const SearchConfig& cfg, Mode mode,
                           double scale_factor = 1.0) {
  const double norm = op_norm(rho);
  const double scale = norm > 0.0 ? norm : 1.0;
  ToleranceConfig tol;
  tol.eq_tol = 1e-9;
  tol.psd_tol = std::max(1e-9, 10.0 * cfg.residual_tol / scale);
  tol.strict_floor = 0.5 * cfg.floor * scale_factor;
  tol.sample_count = cfg.sample_count;
  tol.seed = cfg.seed;
  return verify(rho, shape, tol, mode, cfg.drop_triangle ? TriangleCheck::diagnostic : TriangleCheck::required);
}

namespace detail {

struct RestartResult {
  std::optional<MetricCandidate> candidate;
  double scale_factor = 1.0;
  std::vector<ResidualSample> history;
  double best_residual = std::numeric_limits<double>::infinity();
  int iterations = 0;
};

/**
 * Affine structural set {(rho, S): rho in span(basis), tr rho = target,
 * S = rho (x) 1 + 1 (x) rho - mid_embed(rho)} and its closed-form projection.
 */
class StructuralProjector {
 public:
  StructuralProjector(const StructuralSubspace& sub, double target, bool with_triangle)
      : sub_(sub), target_(target), with_triangle_(with_triangle) {
    const int k = sub.dim();
    trace_.resize(k);
    for (int i = 0; i < k; ++i) {
      const BiElement& b = sub.basis()[static_cast<std::size_t>(i)];
      trace_(i) = b.data().trace().real();
      if (with_triangle_) defects_.push_back(triangle_defect(b).data());
    }
    Eigen::MatrixXd h = Eigen::MatrixXd::Identity(k, k);
    if (with_triangle_)
      for (int i = 0; i < k; ++i)
        for (int j = 0; j <= i; ++j)
          h(i, j) = h(j, i) = h(i, j) + StructuralSubspace::inner(defects_[static_cast<std::size_t>(i)],
                                                                  defects_[static_cast<std::size_t>(j)]);
    solver_.compute(h);
    h_inv_trace_ = solver_.solve(trace_);
    const double denom = trace_.dot(h_inv_trace_);
    if (!(denom > 0.0)) throw PreconditionError("trace gauge cannot be pinned on this structural subspace");
    denom_ = denom;
  }

  Eigen::VectorXd project(const BiElement& rho, const TriElement* s) const {
    Eigen::VectorXd rhs = sub_.coordinates(rho);
    if (with_triangle_ && s != nullptr)
      for (int i = 0; i < sub_.dim(); ++i)
        rhs(i) += StructuralSubspace::inner(defects_[static_cast<std::size_t>(i)], s->data());
    const Eigen::VectorXd x0 = solver_.solve(rhs);
    const double mu = (target_ - trace_.dot(x0)) / denom_;
    return x0 + mu * h_inv_trace_;
  }

  TriElement defect(const Eigen::VectorXd& x) const {
    const int n = sub_.shape().power(3);
    Matrix m = Matrix::Zero(n, n);
    for (int i = 0; i < sub_.dim(); ++i) m += x(i) * defects_[static_cast<std::size_t>(i)];
    return TriElement::masked(sub_.shape(), std::move(m));
  }

 private:
  const StructuralSubspace& sub_;
  double target_;
  bool with_triangle_;
  Eigen::VectorXd trace_;
  std::vector<Matrix> defects_;
  Eigen::LDLT<Eigen::MatrixXd> solver_;
  Eigen::VectorXd h_inv_trace_;
  double denom_ = 1.0;
};

inline double gauge_factor(const BiElement& rho, const SearchConfig& cfg) {
  if (cfg.gauge != Gauge::unit_norm) return 1.0;
  const double n = op_norm(rho);
  return n > 0.0 ? 1.0 / n : 1.0;
}

inline RestartResult run_restart(const SearchConfig& cfg, Mode mode, const StructuralSubspace& sub,
                                 const StructuralProjector& proj, std::uint64_t seed) {
  const AlgebraShape& shape = cfg.shape;
  const bool with_triangle = !cfg.drop_triangle;
  const BiElement lift = Complex(cfg.floor) * (unit<2>(shape) - diag_projector(shape));

  CounterRng rng(seed, 0x7365);
  BiElement start = random_psd<2>(shape, rng);
  start *= Complex(1.0 / start.data().trace().real());
  BiElement rho = sub.element(sub.coordinates(start));
  TriElement s = with_triangle ? triangle_defect(rho) : TriElement::zero(shape);
  BiElement inc_rho = BiElement::zero(shape);
  TriElement inc_s = TriElement::zero(shape);

  RestartResult out;
  int last_certified_attempt = -1000000;
  for (int it = 0; it < cfg.max_iter; ++it) {
    const Eigen::VectorXd x = proj.project(rho, with_triangle ? &s : nullptr);
    const BiElement rho_a = sub.element(x);
    const TriElement s_a = with_triangle ? proj.defect(x) : TriElement::zero(shape);

    ResidualSample sample;
    sample.iteration = it;
    sample.structural = std::sqrt((rho.data() - rho_a.data()).squaredNorm() +
                                  (with_triangle ? (s.data() - s_a.data()).squaredNorm() : 0.0));
    sample.rho_cone = psd_distance(hermitian_part(rho_a - lift));
    sample.triangle_cone = with_triangle ? psd_distance(hermitian_part(s_a)) : 0.0;
    out.history.push_back(sample);
    out.iterations = it + 1;

    const double residual = std::max(sample.rho_cone, sample.triangle_cone);
    out.best_residual = std::min(out.best_residual, residual);
    if (residual < cfg.residual_tol && it - last_certified_attempt >= 100) {
      last_certified_attempt = it;
      const double factor = gauge_factor(rho_a, cfg);
      MetricCandidate cand(factor == 1.0 ? rho_a : Complex(factor) * rho_a);
      AxiomReport report = certify(cand.rho, shape, cfg, mode, factor);
      if (report.passed()) {
        cand.report = std::move(report);
        out.candidate = std::move(cand);
        out.scale_factor = factor;
        return out;
      }
    }

    // Dykstra corrections for the two cones; the affine set needs none.
    const BiElement shifted = rho_a + inc_rho;
    rho = lift + project_psd(hermitian_part(shifted - lift));
    inc_rho = shifted - rho;
    if (with_triangle) {
      const TriElement shifted_s = s_a + inc_s;
      s = project_psd(hermitian_part(shifted_s));
      inc_s = shifted_s - s;
    }
  }
  return out;
}

}  // namespace detail

/**
 * @brief Feasibility search for a metric on cfg.shape by Dykstra alternating
 * projections in the lifted variable (rho, S).
 *
 * Sets: the affine structural set (linear axioms, trace gauge and the
 * coupling S = rho (x) 1 + 1 (x) rho - mid_embed(rho)); the shifted cone
 * rho >= floor (1 - P_delta); and the PSD cone for S. Restarts run from
 * seeded random structurally feasible points. A candidate is reported only
 * after it passes certify; no_convergence is evidence, never a proof of
 * infeasibility.
 */
inline SearchOutcome feasibility_search(const SearchConfig& cfg, Mode mode) {
  cfg.validate();
  SearchOutcome outcome;
  outcome.config = cfg;
  outcome.mode = mode;
  outcome.seed_used = cfg.seed;

  const StructuralSubspace sub(cfg.shape, mode);
  if (sub.dim() == 0) {
    // Nothing to search: rho = 0 is the only structurally admissible element.
    MetricCandidate zero(BiElement::zero(cfg.shape));
    AxiomReport report = certify(zero.rho, cfg.shape, cfg, mode);
    outcome.best_residual = 0.0;
    if (report.passed()) {
      zero.report = std::move(report);
      outcome.candidate = std::move(zero);
      outcome.status = SearchStatus::candidate_found;
    }
    return outcome;
  }
  const detail::StructuralProjector proj(sub, cfg.target(), !cfg.drop_triangle);

  std::vector<detail::RestartResult> results(static_cast<std::size_t>(cfg.restarts));
  if (cfg.parallel && cfg.restarts > 1) {
    std::vector<std::future<detail::RestartResult>> futures;
    for (int k = 0; k < cfg.restarts; ++k)
      futures.push_back(std::async(std::launch::async, [&, k] {
        return detail::run_restart(cfg, mode, sub, proj, cfg.seed + static_cast<std::uint64_t>(k));
      }));
    for (int k = 0; k < cfg.restarts; ++k) results[static_cast<std::size_t>(k)] = futures[static_cast<std::size_t>(k)].get();
  } else {
    for (int k = 0; k < cfg.restarts; ++k)
      results[static_cast<std::size_t>(k)] =
          detail::run_restart(cfg, mode, sub, proj, cfg.seed + static_cast<std::uint64_t>(k));
  }

  // Certified runs first, then lowest best residual, then lowest restart index.
  int chosen = 0;
  for (int k = 1; k < cfg.restarts; ++k) {
    const auto& a = results[static_cast<std::size_t>(k)];
    const auto& b = results[static_cast<std::size_t>(chosen)];
    if (a.candidate.has_value() != b.candidate.has_value()) {
      if (a.candidate) chosen = k;
      continue;
    }
    if (a.best_residual < b.best_residual) chosen = k;
  }
  auto& best = results[static_cast<std::size_t>(chosen)];
  outcome.restart_index = chosen;
  outcome.seed_used = cfg.seed + static_cast<std::uint64_t>(chosen);
  outcome.best_residual = best.best_residual;
  outcome.iterations = best.iterations;
  outcome.scale_factor = best.scale_factor;
  outcome.residual_history = std::move(best.history);
  if (best.candidate) {
    outcome.candidate = std::move(best.candidate);
    outcome.status = SearchStatus::candidate_found;
  }
  return outcome;
}

}  // namespace qmetric

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
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qmetric/algebra.hpp"
#include "qmetric/random.hpp"

namespace qmetric {

/**
 * Quantum-metric axioms on rho in A (x) A:
 *   positive          rho >= 0
 *   diag_vanish       rho P_delta = P_delta rho = 0
 *   nondegenerate     rho restricted to the complement of P_delta has no kernel
 *   flip_symmetric    flip(rho) = rho
 *   triangle          mid_embed(rho) <= rho (x) 1 + 1 (x) rho
 *   alg_diag          m(rho) = 0
 *   alg_nondegenerate rho + nu invertible for every positive flip-symmetric nu with m(nu) = 1
 */
enum class Axiom { positive, diag_vanish, nondegenerate, flip_symmetric, triangle, alg_diag, alg_nondegenerate };

inline std::string_view axiom_tag(Axiom a) {
  switch (a) {
    case Axiom::positive: return "i";
    case Axiom::diag_vanish: return "ii";
    case Axiom::nondegenerate: return "iii";
    case Axiom::flip_symmetric: return "iv";
    case Axiom::triangle: return "v";
    case Axiom::alg_diag: return "ii_alg";
    case Axiom::alg_nondegenerate: return "iii_alg";
  }
  return "?";
}

inline std::optional<Axiom> axiom_from_tag(std::string_view tag) {
  for (Axiom a : {Axiom::positive, Axiom::diag_vanish, Axiom::nondegenerate, Axiom::flip_symmetric,
                  Axiom::triangle, Axiom::alg_diag, Axiom::alg_nondegenerate})
    if (axiom_tag(a) == tag) return a;
  return std::nullopt;
}

/// Which axiom set: P_delta-based (representation) or multiplication-map based (algebraic).
enum class Mode { representation, algebraic };

inline std::string_view mode_name(Mode m) {
  return m == Mode::representation ? "representation" : "algebraic";
}

inline std::optional<Mode> parse_mode(std::string_view s) {
  if (s == "representation") return Mode::representation;
  if (s == "algebraic") return Mode::algebraic;
  return std::nullopt;
}

/**
 * Tolerances. eq_tol and psd_tol are relative: they apply to rho / ||rho||
 * (to rho itself when rho = 0). strict_floor is absolute, in the scale of
 * rho; when unset it is 1e-8 ||rho|| (1e-8 for rho = 0).
 */
struct ToleranceConfig {
  double eq_tol = 1e-9;
  double psd_tol = 1e-9;
  std::optional<double> strict_floor;
  int sample_count = 32;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(eq_tol >= 0.0) || !(psd_tol >= 0.0)) throw PreconditionError("tolerances must be nonnegative");
    if (strict_floor && !(*strict_floor > 0.0)) throw PreconditionError("strict floor must be positive");
    if (sample_count < 1) throw PreconditionError("sample_count must be at least 1");
  }

  double floor_for(double rho_norm) const {
    if (strict_floor) return *strict_floor;
    return rho_norm > 0.0 ? 1e-8 * rho_norm : 1e-8;
  }
};

struct AxiomRecord {
  Axiom axiom = Axiom::positive;
  bool passed = false;
  double margin = 0.0;          ///< positive means satisfied with slack
  bool indeterminate = false;   ///< precondition failed; passed is false
  bool required = true;         ///< false for diagnostic records excluded from the verdict
  std::optional<Vector> witness;
};

struct AxiomReport {
  Mode mode = Mode::representation;
  AlgebraShape shape{std::vector<int>{1}};
  ToleranceConfig tolerances;
  std::vector<AxiomRecord> records;

  bool passed() const {
    return std::all_of(records.begin(), records.end(),
                       [](const AxiomRecord& r) { return !r.required || r.passed; });
  }

  const AxiomRecord* find(Axiom a) const {
    for (const auto& r : records)
      if (r.axiom == a) return &r;
    return nullptr;
  }

  std::vector<Axiom> failures() const {
    std::vector<Axiom> out;
    for (const auto& r : records)
      if (r.required && !r.passed) out.push_back(r.axiom);
    return out;
  }
};

/// A metric element with its cached diameter ||rho|| and, once verified, its report.
struct MetricCandidate {
  BiElement rho;
  std::optional<AxiomReport> report;
  double diameter = 0.0;

  explicit MetricCandidate(BiElement r) : rho(std::move(r)), diameter(op_norm(rho)) {}

  const AlgebraShape& shape() const noexcept { return rho.shape(); }
};

namespace detail {
inline double tolerance_scale(const BiElement& rho) {
  const double n = op_norm(rho);
  return n > 0.0 ? n : 1.0;
}
}  // namespace detail

inline double diameter(const BiElement& rho) { return op_norm(rho); }

inline AxiomRecord check_positive(const BiElement& rho, const ToleranceConfig& cfg) {
  const double s = detail::tolerance_scale(rho);
  const double asym = op_norm(BiElement(rho.shape(), rho.data() - rho.data().adjoint()));
  const EigenPair low = min_eig(hermitian_part(rho));
  AxiomRecord rec;
  rec.axiom = Axiom::positive;
  const bool self_adjoint = asym <= cfg.eq_tol * s;
  rec.passed = self_adjoint && low.value >= -cfg.psd_tol * s;
  rec.margin = self_adjoint ? low.value : std::min(low.value, -asym);
  if (!rec.passed) rec.witness = low.vector;
  return rec;
}

inline AxiomRecord check_flip_symmetric(const BiElement& rho, const ToleranceConfig& cfg) {
  const double gap = op_norm(flip(rho) - rho);
  AxiomRecord rec;
  rec.axiom = Axiom::flip_symmetric;
  rec.margin = -gap;
  rec.passed = gap <= cfg.eq_tol * detail::tolerance_scale(rho);
  return rec;
}

inline AxiomRecord check_diag_vanish(const BiElement& rho, const ToleranceConfig& cfg) {
  const BiElement p = diag_projector(rho.shape());
  const double gap = std::max(op_norm(rho * p), op_norm(p * rho));
  AxiomRecord rec;
  rec.axiom = Axiom::diag_vanish;
  rec.margin = -gap;
  rec.passed = gap <= cfg.eq_tol * detail::tolerance_scale(rho);
  return rec;
}

/**
 * Nondegeneracy on the complement of P_delta. With rho >= 0 and
 * rho P_delta = 0, rho preserves that complement, and its smallest eigenvalue
 * there equals lambda_min(rho + mu P_delta) for any mu >= ||rho||; we take
 * mu = max(1, ||rho||). When the complement is {0} this returns mu.
 * Margin is that eigenvalue minus the strict floor.
 */
inline AxiomRecord check_nondegenerate(const BiElement& rho, const ToleranceConfig& cfg) {
  const double norm = op_norm(rho);
  const double mu = std::max(1.0, norm);
  const EigenPair low =
      min_eig(hermitian_part(rho) + Complex(mu) * diag_projector(rho.shape()));
  AxiomRecord rec;
  rec.axiom = Axiom::nondegenerate;
  rec.margin = low.value - cfg.floor_for(norm);
  rec.indeterminate = !check_positive(rho, cfg).passed || !check_diag_vanish(rho, cfg).passed;
  rec.passed = !rec.indeterminate && rec.margin >= 0.0;
  if (!rec.passed) rec.witness = low.vector;
  return rec;
}

/// rho (x) 1 + 1 (x) rho - mid_embed(rho); the triangle inequality is its positivity.
inline TriElement triangle_defect(const BiElement& rho) {
  return pad_right(rho) + pad_left(rho) - mid_embed(rho);
}

inline AxiomRecord check_triangle(const BiElement& rho, const ToleranceConfig& cfg) {
  const EigenPair low = min_eig(triangle_defect(hermitian_part(rho)));
  AxiomRecord rec;
  rec.axiom = Axiom::triangle;
  rec.margin = low.value;
  rec.passed = low.value >= -cfg.psd_tol * detail::tolerance_scale(rho);
  if (!rec.passed) rec.witness = low.vector;
  return rec;
}

inline AxiomRecord check_alg_diag(const BiElement& rho, const ToleranceConfig& cfg) {
  const double gap = op_norm(mult_map(rho));
  AxiomRecord rec;
  rec.axiom = Axiom::alg_diag;
  rec.margin = -gap;
  rec.passed = gap <= cfg.eq_tol * detail::tolerance_scale(rho);
  return rec;
}

/**
 * @brief Draws positive, flip-symmetric nu in A (x) A with m(nu) = 1.
 *
 * The first two samples are deterministic: the anchor
 * sum_k 2/(1+n_k) P_delta^(k), which is singular off the diagonal cells,
 * and 1 (x) 1. Later samples mix the two, add a positive flip-symmetric
 * perturbation projected onto ker(m), and shrink it until positivity holds.
 */
class UnitSliceSampler {
 public:
  UnitSliceSampler(const AlgebraShape& shape, std::uint64_t seed)
      : shape_(shape), rng_(seed, 0x6e75), anchor_(BiElement::zero(shape)) {
    for (int k = 0; k < shape.num_blocks(); ++k)
      anchor_ += Complex(2.0 / (1.0 + shape.block_size(k))) * diag_projector_block(shape, k);
  }

  const BiElement& anchor() const noexcept { return anchor_; }

  /// (x (x) 1 + 1 (x) x) / 2, a flip-symmetric right inverse of m.
  static BiElement lift(const AlgebraElement& x) {
    const AlgebraElement one = identity(x.shape());
    return Complex(0.5) * (tensor2(x, one) + tensor2(one, x));
  }

  BiElement next() {
    const BiElement one = unit<2>(shape_);
    const double u = rng_.uniform();
    const double alpha = u * u;
    const BiElement base = Complex(alpha) * one + Complex(1.0 - alpha) * anchor_;

    const BiElement y = random_element<2>(shape_, rng_);
    BiElement r = y * y.adjoint();
    r = Complex(0.5) * (r + flip(r));
    const BiElement delta = hermitian_part(r - lift(mult_map(r)));
    const double dn = op_norm(delta);
    if (dn == 0.0) return base;

    double t = 2.0 * rng_.uniform() / dn;
    for (int attempt = 0; attempt < kMaxShrink; ++attempt, t *= 0.5) {
      BiElement nu = base + Complex(t) * delta;
      if (min_eig(nu).value >= 0.0) return nu;
    }
    if (min_eig(base).value < -1e-12) throw PreconditionError("unit-slice sampler failed to find a positive sample");
    return base;
  }

  std::vector<BiElement> samples(int count) {
    std::vector<BiElement> out;
    out.reserve(static_cast<std::size_t>(count));
    if (count >= 1) out.push_back(anchor_);
    if (count >= 2) out.push_back(unit<2>(shape_));
    while (static_cast<int>(out.size()) < count) out.push_back(next());
    return out;
  }

 private:
  static constexpr int kMaxShrink = 48;

  AlgebraShape shape_;
  CounterRng rng_;
  BiElement anchor_;
};

/**
 * Sampled falsification of algebraic nondegeneracy. A pass means no sample
 * made rho + nu singular; it is evidence, not a proof.
 */
inline AxiomRecord check_alg_nondegenerate_sampled(const BiElement& rho, const ToleranceConfig& cfg) {
  UnitSliceSampler sampler(rho.shape(), cfg.seed);
  const BiElement h = hermitian_part(rho);
  double worst = std::numeric_limits<double>::infinity();
  for (const BiElement& nu : sampler.samples(cfg.sample_count)) worst = std::min(worst, sigma_min(h + nu));
  const double threshold = cfg.eq_tol * detail::tolerance_scale(rho);
  AxiomRecord rec;
  rec.axiom = Axiom::alg_nondegenerate;
  rec.margin = worst - threshold;
  rec.passed = worst > threshold;
  return rec;
}

/// Whether the triangle axiom counts toward the verdict or is only reported.
enum class TriangleCheck { required, diagnostic };

/**
 * Runs every axiom of the selected mode (no short-circuit) and collects the
 * margins. Representation: i, ii, iii, iv, v. Algebraic: i, ii_alg, iii_alg, iv, v.
 */
inline AxiomReport verify(const BiElement& rho, const AlgebraShape& shape, const ToleranceConfig& cfg,
                          Mode mode, TriangleCheck triangle = TriangleCheck::required) {
  if (!(rho.shape() == shape))
    throw ShapeMismatch("rho has shape " + rho.shape().to_string() + ", expected " + shape.to_string());
  cfg.validate();
  AxiomReport report{mode, shape, cfg, {}};
  report.records.push_back(check_positive(rho, cfg));
  if (mode == Mode::representation) {
    report.records.push_back(check_diag_vanish(rho, cfg));
    report.records.push_back(check_nondegenerate(rho, cfg));
  } else {
    report.records.push_back(check_alg_diag(rho, cfg));
    report.records.push_back(check_alg_nondegenerate_sampled(rho, cfg));
  }
  report.records.push_back(check_flip_symmetric(rho, cfg));
  report.records.push_back(check_triangle(rho, cfg));
  report.records.back().required = triangle == TriangleCheck::required;
  return report;
}

/**
 * The one-parameter family on M_2 satisfying positivity, diagonal
 * vanishing, nondegeneracy and flip symmetry: lambda times the projector
 * direction (f_2 - f_3)(f_2 - f_3)^T.
 */
inline BiElement m2_admissible(double lambda) {
  if (!(lambda > 0.0)) throw PreconditionError("m2_admissible needs lambda > 0");
  Matrix m = Matrix::Zero(4, 4);
  m(1, 1) = m(2, 2) = lambda;
  m(1, 2) = m(2, 1) = -lambda;
  return BiElement(AlgebraShape({2}), std::move(m));
}

}  // namespace qmetric

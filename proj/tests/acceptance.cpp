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

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "qmetric/qmetric.hpp"

namespace {

using namespace qmetric;

struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

struct Criterion {
  int id;
  std::string title;
  double budget_seconds;
  std::function<Outcome()> body;
};

template <class F>
double seconds(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* format, double v) {
  char buf[128];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

Eigen::VectorXd random_distribution(int n, std::mt19937& gen) {
  std::exponential_distribution<double> e(1.0);
  Eigen::VectorXd p(n);
  for (int i = 0; i < n; ++i) p(i) = e(gen);
  return p / p.sum();
}

State distribution(const Eigen::VectorXd& p) {
  std::vector<Matrix> blocks;
  for (Eigen::Index i = 0; i < p.size(); ++i) blocks.push_back(Matrix::Constant(1, 1, p(i)));
  return State(AlgebraShape::classical(static_cast<int>(p.size())), blocks);
}

MetricCandidate random_classical(int n, std::mt19937& gen) {
  return from_finite_metric(FiniteMetricSpace{testing::random_metric(n, gen)});
}

// 1. P_delta on M_2.
Outcome pdelta_reproduction() {
  Outcome o;
  BiElement p = BiElement::zero(AlgebraShape({2}));
  const double t = seconds([&] { p = diag_projector(AlgebraShape({2})); });
  o.require(p.data() == testing::m2_pdelta().cast<Complex>(), "P_delta differs from the displayed matrix");
  for (Eigen::Index i = 0; i < p.data().size(); ++i) {
    const Complex v = p.data()(i);
    o.require(v == Complex(0.0) || v == Complex(0.5) || v == Complex(1.0), "entry outside {0, 1/2, 1}");
  }
  o.require(t < 1e-3, "took " + fmt("%.3g s", t));
#ifdef QMETRIC_CLI
  const auto out = std::filesystem::temp_directory_path() / ("qmetric_acceptance_pdelta_" + std::to_string(::getpid()) + ".json");
  const std::string cmd = std::string(QMETRIC_CLI) + " -q pdelta --shape 2 -o " + out.string();
  o.require(std::system(cmd.c_str()) == 0, "pdelta command failed");
  try {
    o.require(element_from_json<2>(read_json_file(out.string())).data() == testing::m2_pdelta().cast<Complex>(),
              "pdelta command output differs from the displayed matrix");
  } catch (const Error& e) {
    o.require(false, e.what());
  }
  std::filesystem::remove(out);
#endif
  return o;
}

// 2. The M_2 no-go.
Outcome m2_nogo() {
  Outcome o;
  std::mt19937 gen(2024);
  std::normal_distribution<double> nd;
  Eigen::VectorXd witness = Eigen::VectorXd::Zero(8);
  witness(1) = 2.0;
  witness(2) = 1.0;
  for (double lam : {0.1, 1.0, 10.0}) {
    const BiElement rho = m2_admissible(lam);
    const Eigen::MatrixXd m = triangle_defect(rho).data().real();
    o.require((m - lam * testing::m2_defect_unit()).cwiseAbs().maxCoeff() <= 1e-12,
              "defect differs from lambda times the displayed matrix at lambda " + fmt("%g", lam));
    for (int trial = 0; trial < 10000; ++trial) {
      Eigen::VectorXd x(8);
      for (int i = 0; i < 8; ++i) x(i) = nd(gen);
      const double gap = std::abs(x.dot(m * x) / lam - testing::m2_quadratic_identity(x));
      o.require(gap <= 1e-10 * x.squaredNorm(), "quadratic identity off by " + fmt("%g", gap));
    }
    const double w = witness.dot(m * witness);
    o.require(std::abs(w + 2.0 * lam) <= 1e-12 * lam, "witness gives " + fmt("%.17g", w));
    const auto failures = verify(rho, AlgebraShape({2}), {}, Mode::representation).failures();
    o.require(failures == std::vector<Axiom>{Axiom::triangle}, "verify does not fail exactly at the triangle axiom");
  }
  return o;
}

// 3. Classical soundness and completeness.
Outcome classical_agreement() {
  Outcome o;
  std::mt19937 gen(3);
  std::uniform_int_distribution<int> size(3, 6);
  int agree = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = size(gen);
    Eigen::MatrixXd d = testing::random_metric(n, gen);
    if (trial % 2 == 1) {
      std::uniform_int_distribution<int> pt(0, n - 1);
      const int x = pt(gen);
      const int y = (x + 1 + pt(gen) % (n - 1)) % n;
      if (trial % 4 == 1) {
        // planted triangle violation: longer than any two-step path
        d(x, y) = d(y, x) = d.maxCoeff() * 2.0 + 0.5;
      } else {
        // planted positivity (separation) violation
        d(x, y) = d(y, x) = 0.0;
      }
    }
    const bool expect = testing::brute_force_classical(d).all();
    o.require(expect == (trial % 2 == 0), "planted case misclassified by the oracle");
    const BiElement rho = classical_embedding(d);
    bool both = true;
    for (Mode mode : {Mode::representation, Mode::algebraic})
      both &= verify(rho, AlgebraShape::classical(n), {}, mode).passed() == expect;
    agree += both ? 1 : 0;
  }
  o.require(agree == 200, std::to_string(agree) + "/200 agree");
  if (o.ok) o.detail = "200/200 agree in both modes";
  return o;
}

// 4. Constructions.
Outcome constructions() {
  Outcome o;
  std::mt19937 gen(4);
  std::uniform_int_distribution<int> size(2, 3);
  std::uniform_real_distribution<double> radius(0.05, 5.0);
  for (int trial = 0; trial < 50; ++trial) {
    const MetricCandidate a = random_classical(size(gen), gen);
    const MetricCandidate b = random_classical(size(gen), gen);
    const MetricCandidate a2 = random_classical(a.shape().dim(), gen);
    const double bound = direct_sum_bound(a, b);
    for (Mode mode : {Mode::representation, Mode::algebraic}) {
      const std::string tag = std::string(" (") + std::string(mode_name(mode)) + ", pair " + std::to_string(trial) + ")";
      auto passes = [&](const MetricCandidate& m) { return verify(m.rho, m.shape(), {}, mode).passed(); };
      o.require(passes(conic_combine(a, a2, radius(gen))), "conic_combine fails" + tag);
      o.require(passes(direct_sum(a, b, bound)), "direct_sum at the bound fails" + tag);
      o.require(passes(direct_sum(a, b, 2.0 * bound)), "direct_sum at twice the bound fails" + tag);
      o.require(passes(tensor_product(a, b, mode)), "tensor_product fails" + tag);
    }
  }
  return o;
}

// 5. Lipschitz seminorm on classical spaces.
Outcome lipschitz_agreement() {
  Outcome o;
  std::mt19937 gen(5);
  std::uniform_int_distribution<int> size(2, 6);
  std::normal_distribution<double> nd;
  double worst = 0.0;
  auto diag = [](const Eigen::VectorXd& v) {
    return AlgebraElement(AlgebraShape::classical(static_cast<int>(v.size())), v.cast<Complex>().asDiagonal());
  };
  for (int trial = 0; trial < 100; ++trial) {
    const int n = size(gen);
    const Eigen::MatrixXd d = testing::random_metric(n, gen);
    Eigen::VectorXd a(n);
    for (int i = 0; i < n; ++i) a(i) = nd(gen);
    const double gap =
        std::abs(lip_seminorm(diag(a), from_finite_metric(FiniteMetricSpace{d})) - testing::combinatorial_lipschitz(d, a));
    worst = std::max(worst, gap);
  }
  o.require(worst <= 1e-9, "seminorm differs from the combinatorial constant by " + fmt("%g", worst));
  int holds = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = size(gen);
    const MetricCandidate m = random_classical(n, gen);
    Eigen::VectorXd a(n), b(n);
    for (int i = 0; i < n; ++i) {
      a(i) = nd(gen);
      b(i) = nd(gen);
    }
    holds += check_leibniz(diag(a), diag(b), m).holds ? 1 : 0;
  }
  o.require(holds == 100, "Leibniz holds on " + std::to_string(holds) + "/100");
  if (o.ok) o.detail = "max gap " + fmt("%.2e", worst) + ", Leibniz 100/100";
  return o;
}

// 6. Monge-Kantorovich distance.
Outcome transport_agreement() {
  Outcome o;
  std::mt19937 gen(6);
  std::uniform_int_distribution<int> size(2, 6);
  double worst = 0.0;
  int bound_cases = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = size(gen);
    const Eigen::MatrixXd d = testing::random_metric(n, gen);
    const MetricCandidate m = from_finite_metric(FiniteMetricSpace{d});
    const Eigen::VectorXd p = random_distribution(n, gen);
    const Eigen::VectorXd q = random_distribution(n, gen);
    const MkBracket b = mk_distance(distribution(p), distribution(q), m);
    worst = std::max(worst, std::abs(b.lower - testing::transport_cost(d, p, q)));
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y) {
        if (x == y) continue;
        const PureState px{x, Vector::Ones(1)}, py{y, Vector::Ones(1)};
        const double dist = mk_distance(State::pure(m.shape(), px), State::pure(m.shape(), py), m).lower;
        o.require(dist <= pure_state_bound(px, py, m) + 1e-8, "pure-state bound violated");
        ++bound_cases;
      }
  }
  o.require(worst <= 1e-6, "LP differs from the transport oracle by " + fmt("%g", worst));
  // distinct-block pure states on a non-classical direct sum, distance by ascent
  CounterRng rng(6);
  const MetricCandidate ns = direct_sum(MetricCandidate(m2_admissible(1.0)),
                                        from_finite_metric(FiniteMetricSpace{Eigen::MatrixXd::Zero(1, 1)}), 1.25);
  for (int trial = 0; trial < 5; ++trial) {
    const PureState a{0, random_gaussian(2, 1, rng).col(0).normalized()};
    const PureState b{1, Vector::Ones(1)};
    const MkBracket br = mk_distance(State::pure(ns.shape(), a), State::pure(ns.shape(), b), ns);
    o.require(br.lower <= pure_state_bound(a, b, ns) + 1e-8, "pure-state bound violated on shape (2,1)");
    ++bound_cases;
  }
  if (o.ok) o.detail = "max LP gap " + fmt("%.2e", worst) + ", bound checked in " + std::to_string(bound_cases) + " cases";
  return o;
}

// 7. Search sanity.
Outcome search_sanity() {
  Outcome o;
  SearchConfig c;
  c.shape = AlgebraShape({1, 1, 1});
  c.residual_tol = 1e-8;
  c.max_iter = 5000;
  SearchOutcome found;
  const double t = seconds([&] { found = feasibility_search(c, Mode::representation); });
  o.require(found.status == SearchStatus::candidate_found, "shape (1,1,1) not certified");
  o.require(found.iterations <= 5000, "shape (1,1,1) took more than 5000 iterations");
  o.require(found.candidate && found.candidate->report && found.candidate->report->passed(),
            "shape (1,1,1) candidate lacks a passing report");
  o.require(t < 5.0, "shape (1,1,1) took " + fmt("%.3g s", t));

  SearchConfig m2;
  m2.shape = AlgebraShape({2});
  m2.restarts = 8;
  m2.max_iter = 20000;
  const SearchOutcome none = feasibility_search(m2, Mode::representation);
  o.require(none.status == SearchStatus::no_convergence && !none.candidate, "shape (2) reported a candidate");

  m2.drop_triangle = true;
  m2.max_iter = 5000;
  const SearchOutcome relaxed = feasibility_search(m2, Mode::representation);
  o.require(relaxed.status == SearchStatus::candidate_found, "shape (2) without the triangle axiom not certified");
  if (relaxed.candidate) {
    const Matrix unit = m2_admissible(1.0).data();
    const Matrix& r = relaxed.candidate->rho.data();
    const double gap = (r / r.trace().real() * unit.trace().real() - unit).norm();
    o.require(gap < 1e-6, "distance to the admissible family " + fmt("%g", gap));
  }
  if (o.ok)
    o.detail = "(1,1,1) certified in " + std::to_string(found.iterations) + " iterations, " + fmt("%.3g s", t) +
               "; (2) best residual " + fmt("%.3g", none.best_residual);
  return o;
}

// 8. Exploration on M_3 (no verdict asserted).
Outcome m3_exploration() {
  Outcome o;
  std::ostringstream summary;
  for (Mode mode : {Mode::representation, Mode::algebraic}) {
    SearchConfig c;
    c.shape = AlgebraShape({3});
    c.restarts = 2;
    c.max_iter = 1000;
    const SearchOutcome out = feasibility_search(c, mode);
    const std::string text = to_json(out).dump();
    const json j = json::parse(text);
    o.require(j["status"] == status_name(out.status), "serialized status differs");
    const SearchConfig back = search_config_from_json(j["config"]);
    o.require(back.shape == c.shape && back.max_iter == c.max_iter, "serialized config differs");
    summary << mode_name(mode) << ": " << status_name(out.status);
    if (out.status == SearchStatus::candidate_found) {
      const BiElement rho = element_from_json<2>(j["candidate"]);
      const double factor = j["scale_factor"].get<double>();
      const AxiomReport first = certify(rho, back.shape, back, mode, factor);
      const AxiomReport second = certify(rho, back.shape, back, mode, factor);
      o.require(first.passed(), "re-certification of the serialized candidate failed");
      o.require(to_json(first).dump() == to_json(second).dump(), "certification is not reproducible");
      const SearchOutcome again = feasibility_search(c, mode);
      o.require(again.candidate && again.candidate->rho == out.candidate->rho, "search is not reproducible");
      summary << " (re-certified)";
    }
    summary << "; ";
  }
  if (o.ok) o.detail = summary.str();
  return o;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "P_delta reproduction", 1.0, pdelta_reproduction},
      {2, "M_2 no-go reproduction", 1.0, m2_nogo},
      {3, "classical soundness and completeness", 10.0, classical_agreement},
      {4, "constructions verify", 30.0, constructions},
      {5, "Lipschitz classical agreement", 0.0, lipschitz_agreement},
      {6, "Monge-Kantorovich classical agreement", 0.0, transport_agreement},
      {7, "search sanity", 0.0, search_sanity},
      {8, "shape (3) exploration", 0.0, m3_exploration},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    Outcome o;
    const double t = seconds([&] {
      try {
        o = c.body();
      } catch (const std::exception& e) {
        o.ok = false;
        o.detail = std::string("exception: ") + e.what();
      }
    });
    if (c.budget_seconds > 0.0 && t >= c.budget_seconds)
      o.require(false, "runtime " + fmt("%.3g s", t) + " over budget " + fmt("%g s", c.budget_seconds));
    std::printf("%s criterion %d: %s [%.2f s]%s%s\n", o.ok ? "PASS" : "FAIL", c.id, c.title.c_str(), t,
                o.detail.empty() ? "" : " - ", o.detail.c_str());
    std::fflush(stdout);
    failed += o.ok ? 0 : 1;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}

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

// qmetric: command-line front end.
//
// Exit codes: 0 success / pass, 1 negative result (axiom failure,
// no_convergence, Leibniz violation), 2 usage, parse or precondition error.

#include <cstdio>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qmetric/qmetric.hpp"

namespace {

using namespace qmetric;

enum Exit { kOk = 0, kNegative = 1, kUsage = 2 };

struct Globals {
  bool quiet = false;
  bool json_out = false;
};

bool tables(const Globals& g) { return !g.quiet && !g.json_out; }

void print_json(const json& j) { std::cout << j.dump(2) << '\n'; }

std::string format_complex(Complex z) {
  char buf[64];
  if (z.imag() == 0.0)
    std::snprintf(buf, sizeof buf, "%g", z.real());
  else
    std::snprintf(buf, sizeof buf, "%g%+gi", z.real(), z.imag());
  return buf;
}

template <int Order>
void print_matrix(const Element<Order>& x) {
  for (Eigen::Index r = 0; r < x.data().rows(); ++r) {
    for (Eigen::Index c = 0; c < x.data().cols(); ++c)
      std::printf("%s%10s", c ? " " : "", format_complex(x.data()(r, c)).c_str());
    std::printf("\n");
  }
}

void print_report(const AxiomReport& r) {
  std::printf("mode %s, shape %s\n", std::string(mode_name(r.mode)).c_str(), r.shape.to_string().c_str());
  std::printf("%-8s %-6s %14s  %s\n", "axiom", "passed", "margin", "note");
  for (const AxiomRecord& rec : r.records) {
    std::string note;
    if (rec.indeterminate) note = "indeterminate";
    if (!rec.required) note += note.empty() ? "diagnostic" : ", diagnostic";
    std::printf("%-8s %-6s %14.6e  %s\n", std::string(axiom_tag(rec.axiom)).c_str(), rec.passed ? "yes" : "no",
                rec.margin, note.c_str());
  }
  std::printf("verdict: %s\n", r.passed() ? "PASS" : "FAIL");
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

MetricCandidate classical(const FiniteMetricSpace& s, bool validate) {
  return validate ? from_finite_metric(s) : MetricCandidate(classical_embedding(s.d));
}

/**
 * A metric from an exchange-format element, a {n, d} document or a
 * lower-triangle text table. Distance tables are checked to be metrics
 * unless `validate` is false (verify wants to see the failing axiom).
 */
MetricCandidate load_candidate(const std::string& path, bool validate = true) {
  if (!ends_with(path, ".json")) return classical(read_metric_space(path), validate);
  const json j = read_json_file(path);
  if (j.is_object() && j.contains("n") && j.contains("d")) return classical(metric_space_from_json(j), validate);
  return MetricCandidate(element_from_json<2>(j));
}

void write_or_print(const json& j, const std::string& output, const Globals& g) {
  if (!output.empty())
    write_json_file(output, j);
  else if (g.json_out)
    print_json(j);
}

ToleranceConfig tolerance_from(double eq_tol, double psd_tol, std::optional<double> floor, int samples,
                               std::uint64_t seed) {
  ToleranceConfig c;
  c.eq_tol = eq_tol;
  c.psd_tol = psd_tol;
  c.strict_floor = floor;
  c.sample_count = samples;
  c.seed = seed;
  c.validate();
  return c;
}

Mode mode_from(const std::string& s) {
  const auto m = parse_mode(s);
  if (!m) throw ParseError("unknown mode '" + s + "'");
  return *m;
}

// ---- verify ---------------------------------------------------------------

struct VerifyArgs {
  std::string input;
  std::string mode = "representation";
  std::string report;
  double eq_tol = 1e-9;
  double psd_tol = 1e-9;
  std::optional<double> floor;
  int samples = 32;
  std::uint64_t seed = 0;
  bool triangle_diagnostic = false;
};

int run_verify(const VerifyArgs& a, const Globals& g) {
  const MetricCandidate m = load_candidate(a.input, false);
  const ToleranceConfig cfg = tolerance_from(a.eq_tol, a.psd_tol, a.floor, a.samples, a.seed);
  const AxiomReport r = verify(m.rho, m.shape(), cfg, mode_from(a.mode),
                               a.triangle_diagnostic ? TriangleCheck::diagnostic : TriangleCheck::required);
  const json j = to_json(r);
  if (!a.report.empty()) write_json_file(a.report, j);
  if (g.json_out) print_json(j);
  if (tables(g)) print_report(r);
  return r.passed() ? kOk : kNegative;
}

// ---- construct ------------------------------------------------------------

struct ConstructArgs {
  std::string first;
  std::string second;
  std::optional<double> r;
  double lambda = 1.0;
  std::string mode = "representation";
  std::string output;
};

int finish_construct(const MetricCandidate& m, Mode mode, const ConstructArgs& a, const Globals& g) {
  const AxiomReport r = verify(m.rho, m.shape(), {}, mode);
  if (!a.output.empty()) write_json_file(a.output, to_json(m.rho));
  if (g.json_out) print_json(json{{"element", to_json(m.rho)}, {"report", to_json(r)}});
  if (tables(g)) {
    std::printf("shape %s, diameter %.6g\n", m.shape().to_string().c_str(), m.diameter);
    print_report(r);
  }
  return r.passed() ? kOk : kNegative;
}

// ---- search ---------------------------------------------------------------

struct SearchArgs {
  std::vector<int> shape;
  std::string mode = "representation";
  SearchConfig cfg;
  std::optional<double> trace_target;
  std::string gauge = "trace";
  bool serial = false;
  std::string output;
};

int run_search(SearchArgs a, const Globals& g) {
  a.cfg.shape = AlgebraShape(a.shape);
  a.cfg.trace_target = a.trace_target;
  a.cfg.parallel = !a.serial;
  if (a.gauge == "trace")
    a.cfg.gauge = Gauge::trace;
  else if (a.gauge == "unit_norm")
    a.cfg.gauge = Gauge::unit_norm;
  else
    throw ParseError("unknown gauge '" + a.gauge + "'");
  const SearchOutcome o = feasibility_search(a.cfg, mode_from(a.mode));
  const json j = to_json(o);
  write_or_print(j, a.output, g);
  if (!a.output.empty() && g.json_out) print_json(j);
  if (tables(g)) {
    std::printf("shape %s, mode %s\n", a.cfg.shape.to_string().c_str(), std::string(mode_name(o.mode)).c_str());
    std::printf("status         %s\n", std::string(status_name(o.status)).c_str());
    std::printf("restart        %d (seed %llu)\n", o.restart_index, static_cast<unsigned long long>(o.seed_used));
    std::printf("iterations     %d\n", o.iterations);
    std::printf("best residual  %.6e\n", o.best_residual);
    if (o.candidate) {
      std::printf("diameter       %.6g\n", o.candidate->diameter);
      print_report(*o.candidate->report);
    }
  }
  return o.status == SearchStatus::candidate_found ? kOk : kNegative;
}

// ---- lipschitz ------------------------------------------------------------

struct LipschitzArgs {
  std::string metric;
  std::string element;
  std::vector<double> values;
  std::string leibniz;
};

AlgebraElement element_argument(const std::string& path, const std::vector<double>& values, const AlgebraShape& s) {
  if (!path.empty()) return element_from_json<1>(read_json_file(path));
  if (static_cast<int>(values.size()) != s.dim())
    throw ParseError("--values needs " + std::to_string(s.dim()) + " entries for shape " + s.to_string());
  Matrix m = Matrix::Zero(s.dim(), s.dim());
  for (int i = 0; i < s.dim(); ++i) m(i, i) = values[static_cast<std::size_t>(i)];
  return AlgebraElement(s, m);
}

int run_lipschitz(const LipschitzArgs& a, const Globals& g) {
  const MetricCandidate m = load_candidate(a.metric);
  const AlgebraElement x = element_argument(a.element, a.values, m.shape());
  const LipschitzSeminorm lip(m);
  const double value = lip(x);
  json j{{"lipschitz", value}};
  int code = kOk;
  if (!a.leibniz.empty()) {
    const AlgebraElement y = element_from_json<1>(read_json_file(a.leibniz));
    const LeibnizResult r = check_leibniz(x, y, m);
    j["leibniz"] = json{{"lhs", r.lhs}, {"rhs", r.rhs}, {"slack", r.slack}, {"holds", r.holds}};
    if (!r.holds) code = kNegative;
    if (tables(g)) std::printf("leibniz  lhs %.10g  rhs %.10g  %s\n", r.lhs, r.rhs, r.holds ? "holds" : "FAILS");
  }
  if (g.json_out) print_json(j);
  if (tables(g)) std::printf("lipschitz seminorm %.12g\n", value);
  return code;
}

// ---- distance -------------------------------------------------------------

struct DistanceArgs {
  std::string classical;
  std::string metric;
  std::string phi;
  std::string psi;
  MkOptions opt;
  std::uint64_t seed = 0;
};

State state_argument(const std::string& arg, const AlgebraShape& s) {
  std::size_t used = 0;
  int index = -1;
  try {
    index = std::stoi(arg, &used);
  } catch (const std::logic_error&) {
    used = 0;
  }
  if (used == arg.size() && !arg.empty()) return State::point(s, index);
  const State st = state_from_json(read_json_file(arg));
  if (!(st.shape() == s)) throw ParseError("state " + arg + " does not live on shape " + s.to_string());
  return st;
}

int run_distance(const DistanceArgs& a, const Globals& g) {
  if (a.classical.empty() == a.metric.empty()) throw ParseError("give exactly one of --classical and --metric");
  const MetricCandidate m = load_candidate(a.classical.empty() ? a.metric : a.classical);
  if (!a.classical.empty() && !m.shape().is_classical()) throw ParseError("--classical needs a classical space");
  const State phi = state_argument(a.phi, m.shape());
  const State psi = state_argument(a.psi, m.shape());
  ToleranceConfig cfg;
  cfg.seed = a.seed;
  const MkBracket b = mk_distance(phi, psi, m, cfg, a.opt);
  if (g.json_out) print_json(to_json(b));
  if (tables(g)) {
    if (b.exact)
      std::printf("distance %.12g (exact)\n", b.lower);
    else if (b.unbounded)
      std::printf("distance +inf (a flat direction separates the states)\n");
    else
      std::printf("distance in [%.10g, %.10g]  converged %s, %d iterations\n", b.lower, b.upper,
                  b.converged ? "yes" : "no", b.iterations);
  }
  return kOk;
}

// ---- nogo-m2 --------------------------------------------------------------

// Displayed matrices for M_2, transcribed once.
const double kPaperPdelta[4][4] = {{1, 0, 0, 0}, {0, 0.5, 0.5, 0}, {0, 0.5, 0.5, 0}, {0, 0, 0, 1}};
const double kPaperDefect[8][8] = {
    {0, 0, 0, 0, 0, 0, 0, 0},  {0, 0, -1, 0, 1, 0, 0, 0},  {0, -1, 2, 0, -1, 0, 0, 0}, {0, 0, 0, 0, 0, -1, 1, 0},
    {0, 1, -1, 0, 0, 0, 0, 0}, {0, 0, 0, -1, 0, 2, -1, 0}, {0, 0, 0, 1, 0, -1, 0, 0},  {0, 0, 0, 0, 0, 0, 0, 0}};

double paper_identity(const Eigen::VectorXd& x) {
  auto X = [&](int i) { return x(i - 1); };
  const double a = X(3) - X(2) - X(5);
  const double b = X(6) - X(4) - X(7);
  return a * a + (X(3) * X(3) - X(2) * X(2) - X(5) * X(5)) + b * b + (X(6) * X(6) - X(4) * X(4) - X(7) * X(7));
}

struct NogoRow {
  double lambda = 0.0;
  bool pdelta_exact = false;
  bool layout_identical = false;
  double defect_error = 0.0;
  double identity_error = 0.0;  ///< max |lambda^-1 <MX, X> - q(X)| / ||X||^2
  int identity_points = 0;
  double witness_value = 0.0;
  std::vector<std::string> failures;
  bool reproduced = false;
};

NogoRow nogo_row(double lambda) {
  NogoRow row;
  row.lambda = lambda;
  const AlgebraShape s({2});

  const BiElement p = diag_projector(s);
  row.pdelta_exact = true;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) row.pdelta_exact &= p.data()(r, c) == Complex(kPaperPdelta[r][c]);

  const BiElement rho = m2_admissible(lambda);
  const Eigen::MatrixXd m = triangle_defect(rho).data().real();
  row.layout_identical = true;
  for (int r = 0; r < 8; ++r)
    for (int c = 0; c < 8; ++c) {
      row.defect_error = std::max(row.defect_error, std::abs(m(r, c) - lambda * kPaperDefect[r][c]));
      row.layout_identical &= (m(r, c) == 0.0) == (kPaperDefect[r][c] == 0.0);
    }

  auto check = [&](const Eigen::VectorXd& x) {
    const double n2 = x.squaredNorm();
    if (n2 == 0.0) return;
    row.identity_error = std::max(row.identity_error, std::abs(x.dot(m * x) / lambda - paper_identity(x)) / n2);
    ++row.identity_points;
  };
  Eigen::VectorXd x(8);
  for (int code = 0; code < 6561; ++code) {
    int k = code;
    for (int i = 0; i < 8; ++i, k /= 3) x(i) = static_cast<double>(k % 3 - 1);
    check(x);
  }
  std::mt19937_64 gen(0x6e6f676fULL);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 1000; ++trial) {
    for (int i = 0; i < 8; ++i) x(i) = nd(gen);
    check(x);
  }
  Eigen::VectorXd w = Eigen::VectorXd::Zero(8);
  w(1) = 2.0;
  w(2) = 1.0;
  row.witness_value = w.dot(m * w);

  for (Axiom a : verify(rho, s, {}, Mode::representation).failures()) row.failures.emplace_back(axiom_tag(a));
  row.reproduced = row.pdelta_exact && row.layout_identical && row.defect_error <= 1e-12 * std::max(1.0, lambda) &&
                   row.identity_error <= 1e-10 && std::abs(row.witness_value + 2.0 * lambda) <= 1e-12 * lambda &&
                   row.failures == std::vector<std::string>{"v"};
  return row;
}

int run_nogo(std::vector<double> lambdas, const Globals& g) {
  if (lambdas.empty()) lambdas = {0.1, 1.0, 10.0};
  for (double l : lambdas)
    if (!(l > 0.0)) throw PreconditionError("lambda must be positive");
  json rows = json::array();
  bool all = true;
  if (tables(g))
    std::printf("%8s %7s %7s %11s %11s %12s %8s %s\n", "lambda", "pdelta", "layout", "defect_err", "ident_err",
                "witness", "fails", "reproduced");
  for (double l : lambdas) {
    const NogoRow r = nogo_row(l);
    all &= r.reproduced;
    rows.push_back(json{{"lambda", r.lambda},
                        {"pdelta_exact", r.pdelta_exact},
                        {"layout_identical", r.layout_identical},
                        {"defect_error", r.defect_error},
                        {"identity_error", r.identity_error},
                        {"identity_points", r.identity_points},
                        {"witness", json::array({0, 2, 1, 0, 0, 0, 0, 0})},
                        {"witness_value", r.witness_value},
                        {"failing_axioms", r.failures},
                        {"reproduced", r.reproduced}});
    if (tables(g)) {
      std::string fails;
      for (const auto& f : r.failures) fails += (fails.empty() ? "" : ",") + f;
      std::printf("%8g %7s %7s %11.3e %11.3e %12.6g %8s %s\n", r.lambda, r.pdelta_exact ? "exact" : "DIFF",
                  r.layout_identical ? "same" : "DIFF", r.defect_error, r.identity_error, r.witness_value,
                  fails.c_str(), r.reproduced ? "yes" : "NO");
    }
  }
  if (g.json_out) print_json(json{{"rows", rows}, {"reproduced", all}});
  return all ? kOk : kNegative;
}

// ---- pdelta ---------------------------------------------------------------

int run_pdelta(const std::vector<int>& shape, const std::string& output, const Globals& g) {
  const BiElement p = diag_projector(AlgebraShape(shape));
  write_or_print(to_json(p), output, g);
  if (!output.empty() && g.json_out) print_json(to_json(p));
  if (tables(g)) print_matrix(p);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum metrics on multi-matrix algebras"};
  app.require_subcommand(1);
  Globals g;
  app.add_flag("--quiet,-q", g.quiet, "Suppress tables");
  app.add_flag("--json", g.json_out, "Machine-readable output only");

  VerifyArgs va;
  auto* verify_cmd = app.add_subcommand("verify", "Check the quantum-metric axioms of an element");
  verify_cmd->add_option("input", va.input, "Element (.json) or classical metric file")->required();
  verify_cmd->add_option("--mode", va.mode, "representation or algebraic");
  verify_cmd->add_option("--report", va.report, "Write the report JSON here");
  verify_cmd->add_option("--eq-tol", va.eq_tol, "Relative equality tolerance");
  verify_cmd->add_option("--psd-tol", va.psd_tol, "Relative positivity tolerance");
  verify_cmd->add_option("--floor", va.floor, "Absolute nondegeneracy floor");
  verify_cmd->add_option("--samples", va.samples, "Samples for the algebraic nondegeneracy check");
  verify_cmd->add_option("--seed", va.seed, "Sampler seed");
  verify_cmd->add_flag("--triangle-diagnostic", va.triangle_diagnostic, "Report the triangle axiom without requiring it");

  ConstructArgs ca;
  auto* construct_cmd = app.add_subcommand("construct", "Build a metric");
  construct_cmd->require_subcommand(1);
  auto* c_classical = construct_cmd->add_subcommand("classical", "Diagonal embedding of a finite metric space");
  c_classical->add_option("space", ca.first, "Metric space (.json {n, d} or lower-triangle text)")->required();
  auto* c_conic = construct_cmd->add_subcommand("conic", "rho_1 + r rho_2");
  c_conic->add_option("first", ca.first)->required();
  c_conic->add_option("second", ca.second)->required();
  c_conic->add_option("--r", ca.r, "Positive coefficient")->required();
  auto* c_sum = construct_cmd->add_subcommand("direct-sum", "Metric on the direct sum");
  c_sum->add_option("first", ca.first)->required();
  c_sum->add_option("second", ca.second)->required();
  c_sum->add_option("--r", ca.r, "Cross distance (default: the smallest admissible)");
  auto* c_tensor = construct_cmd->add_subcommand("tensor", "Metric on the tensor product");
  c_tensor->add_option("first", ca.first)->required();
  c_tensor->add_option("second", ca.second)->required();
  auto* c_m2 = construct_cmd->add_subcommand("m2", "The admissible M_2 element (fails the triangle axiom)");
  c_m2->add_option("--lambda", ca.lambda, "Positive scale");
  for (auto* sub : {c_classical, c_conic, c_sum, c_tensor, c_m2}) {
    sub->add_option("--mode", ca.mode, "Axiom set for the output check");
    sub->add_option("-o,--output", ca.output, "Write the element here");
  }

  SearchArgs sa;
  auto* search_cmd = app.add_subcommand("search", "Feasibility search for a metric on a shape");
  search_cmd->add_option("--shape", sa.shape, "Block sizes, e.g. 1,1,1")->required()->delimiter(',');
  search_cmd->add_option("--mode", sa.mode, "representation or algebraic");
  search_cmd->add_option("--floor", sa.cfg.floor, "Eigenvalue floor off the diagonal projector");
  search_cmd->add_option("--trace-target", sa.trace_target, "Trace gauge (default D^2)");
  search_cmd->add_option("--max-iter", sa.cfg.max_iter, "Iterations per restart");
  search_cmd->add_option("--restarts", sa.cfg.restarts, "Number of restarts");
  search_cmd->add_option("--seed", sa.cfg.seed, "Seed of restart 0");
  search_cmd->add_option("--residual-tol", sa.cfg.residual_tol, "Residual that triggers certification");
  search_cmd->add_option("--gauge", sa.gauge, "trace or unit_norm");
  search_cmd->add_option("--samples", sa.cfg.sample_count, "Samples for algebraic certification");
  search_cmd->add_flag("--drop-triangle", sa.cfg.drop_triangle, "Diagnostic: omit the triangle constraint");
  search_cmd->add_flag("--serial", sa.serial, "Run restarts sequentially");
  search_cmd->add_option("-o,--output", sa.output, "Write the outcome JSON here");

  LipschitzArgs la;
  auto* lip_cmd = app.add_subcommand("lipschitz", "Lipschitz seminorm of an element");
  lip_cmd->add_option("metric", la.metric, "Metric element or classical space")->required();
  auto* lip_elem = lip_cmd->add_option("--element", la.element, "Order-1 element JSON");
  auto* lip_vals = lip_cmd->add_option("--values", la.values, "Diagonal entries")->delimiter(',');
  lip_elem->excludes(lip_vals);
  lip_cmd->add_option("--leibniz", la.leibniz, "Second (commuting) element for the Leibniz check");

  DistanceArgs da;
  auto* dist_cmd = app.add_subcommand("distance", "Monge-Kantorovich distance between two states");
  dist_cmd->add_option("--classical", da.classical, "Classical metric space file");
  dist_cmd->add_option("--metric", da.metric, "Metric element or space file");
  dist_cmd->add_option("--phi", da.phi, "Point index or state JSON")->required();
  dist_cmd->add_option("--psi", da.psi, "Point index or state JSON")->required();
  dist_cmd->add_option("--max-iter", da.opt.max_iter, "Ascent iterations per start");
  dist_cmd->add_option("--starts", da.opt.random_starts, "Random ascent starts");
  dist_cmd->add_option("--seed", da.seed, "Seed for random starts");
  dist_cmd->add_flag("--force-ascent", da.opt.force_ascent, "Use the ascent even on classical spaces");

  std::vector<double> lambdas;
  auto* nogo_cmd = app.add_subcommand("nogo-m2", "Reproduce the M_2 no-go computation");
  nogo_cmd->add_option("--lambda", lambdas, "Values of lambda (default 0.1,1,10)")->delimiter(',');

  std::vector<int> pshape;
  std::string poutput;
  auto* pdelta_cmd = app.add_subcommand("pdelta", "Print the diagonal projector");
  pdelta_cmd->add_option("--shape", pshape, "Block sizes, e.g. 2")->required()->delimiter(',');
  pdelta_cmd->add_option("-o,--output", poutput, "Write the element here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (verify_cmd->parsed()) return run_verify(va, g);
    if (construct_cmd->parsed()) {
      const Mode mode = mode_from(ca.mode);
      if (c_classical->parsed()) return finish_construct(load_candidate(ca.first), mode, ca, g);
      if (c_conic->parsed())
        return finish_construct(conic_combine(load_candidate(ca.first), load_candidate(ca.second), *ca.r), mode, ca, g);
      if (c_sum->parsed())
        return finish_construct(direct_sum(load_candidate(ca.first), load_candidate(ca.second), ca.r), mode, ca, g);
      if (c_tensor->parsed())
        return finish_construct(tensor_product(load_candidate(ca.first), load_candidate(ca.second), mode), mode, ca,
                                g);
      if (c_m2->parsed()) return finish_construct(MetricCandidate(m2_admissible(ca.lambda)), mode, ca, g);
    }
    if (search_cmd->parsed()) return run_search(sa, g);
    if (lip_cmd->parsed()) return run_lipschitz(la, g);
    if (dist_cmd->parsed()) return run_distance(da, g);
    if (nogo_cmd->parsed()) return run_nogo(lambdas, g);
    if (pdelta_cmd->parsed()) return run_pdelta(pshape, poutput, g);
  } catch (const std::exception& e) {
    std::cerr << "qmetric: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

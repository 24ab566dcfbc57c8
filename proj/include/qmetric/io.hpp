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

// Shared JSON exchange format:
//   {"shape": [n_1, ...], "order": 1|2|3, "rows": D^order, "cols": D^order,
//    "data": [[re, im], ...]}            (row-major)
// States add "trace". Entries with magnitude below 1e-14 are written as 0.

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qmetric/construct.hpp"
#include "qmetric/lipschitz.hpp"
#include "qmetric/search.hpp"

namespace qmetric {

using json = nlohmann::json;

inline constexpr double kWriteZeroThreshold = 1e-14;

namespace detail {

inline double clean(double v) { return std::abs(v) < kWriteZeroThreshold ? 0.0 : v; }

inline json complex_json(Complex z) { return json::array({clean(z.real()), clean(z.imag())}); }

inline json vector_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(complex_json(v(i)));
  return out;
}

inline json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

template <class T>
T field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ParseError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad field '") + key + "': " + e.what());
  }
}

inline AlgebraShape shape_from_json(const json& j) {
  const auto blocks = field<std::vector<int>>(j, "shape");
  try {
    return AlgebraShape(blocks);
  } catch (const Error& e) {
    throw ParseError(std::string("bad shape: ") + e.what());
  }
}

}  // namespace detail

template <int Order>
json to_json(const Element<Order>& x) {
  json data = json::array();
  for (Eigen::Index r = 0; r < x.data().rows(); ++r)
    for (Eigen::Index c = 0; c < x.data().cols(); ++c) data.push_back(detail::complex_json(x.data()(r, c)));
  return json{{"shape", x.shape().blocks()}, {"order", Order}, {"rows", x.size()}, {"cols", x.size()},
              {"data", std::move(data)}};
}

/// Order field of an exchange document.
inline int json_order(const json& j) { return detail::field<int>(j, "order"); }

template <int Order>
Element<Order> element_from_json(const json& j) {
  const AlgebraShape shape = detail::shape_from_json(j);
  if (json_order(j) != Order)
    throw ParseError("expected order " + std::to_string(Order) + ", got " + std::to_string(json_order(j)));
  const int n = shape.power(Order);
  if (detail::field<int>(j, "rows") != n || detail::field<int>(j, "cols") != n)
    throw ParseError("rows/cols do not match shape " + shape.to_string());
  const json& data = j.at("data");
  if (!data.is_array() || static_cast<int>(data.size()) != n * n)
    throw ParseError("data must hold " + std::to_string(n * n) + " entries");
  Matrix m(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      const json& e = data[static_cast<std::size_t>(r * n + c)];
      if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
        throw ParseError("entries must be [re, im] number pairs");
      m(r, c) = Complex(e[0].get<double>(), e[1].get<double>());
    }
  try {
    return Element<Order>(shape, std::move(m));
  } catch (const Error& e) {
    throw ParseError(e.what());
  }
}

inline json to_json(const State& s) {
  json j = to_json(s.density());
  j["trace"] = s.block_weights().sum();
  return j;
}

inline State state_from_json(const json& j) {
  const AlgebraElement density = element_from_json<1>(j);
  try {
    return State::from_density(density);
  } catch (const Error& e) {
    throw ParseError(std::string("bad state: ") + e.what());
  }
}

inline json to_json(const FiniteMetricSpace& s) {
  std::vector<double> flat;
  for (int x = 0; x < s.size(); ++x)
    for (int y = 0; y < s.size(); ++y) flat.push_back(s.d(x, y));
  return json{{"n", s.size()}, {"d", flat}};
}

inline FiniteMetricSpace metric_space_from_json(const json& j) {
  const int n = detail::field<int>(j, "n");
  const auto flat = detail::field<std::vector<double>>(j, "d");
  if (n < 1 || static_cast<int>(flat.size()) != n * n) throw ParseError("d must hold n*n distances");
  FiniteMetricSpace s{Eigen::MatrixXd(n, n)};
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y) s.d(x, y) = flat[static_cast<std::size_t>(x * n + y)];
  return s;
}

/**
 * Lower-triangle text format: line i (0-based) holds the i + 1 distances
 * d(i, 0) ... d(i, i), whitespace separated, diagonal included. Blank lines
 * and lines starting with '#' are ignored.
 */
inline FiniteMetricSpace metric_space_from_text(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    std::vector<double> row;
    std::string tok;
    while (ls >> tok) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw ParseError("bad number '" + tok + "'");
      } catch (const std::logic_error&) {
        throw ParseError("bad number '" + tok + "'");
      }
    }
    if (row.size() != rows.size() + 1)
      throw ParseError("row " + std::to_string(rows.size()) + " must hold " + std::to_string(rows.size() + 1) +
                       " entries");
    rows.push_back(std::move(row));
  }
  const auto n = static_cast<Eigen::Index>(rows.size());
  if (n == 0) throw ParseError("empty distance table");
  FiniteMetricSpace s{Eigen::MatrixXd(n, n)};
  for (Eigen::Index x = 0; x < n; ++x)
    for (Eigen::Index y = 0; y <= x; ++y) s.d(x, y) = s.d(y, x) = rows[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)];
  return s;
}

inline json to_json(const ToleranceConfig& t) {
  return json{{"eq_tol", t.eq_tol},
              {"psd_tol", t.psd_tol},
              {"strict_floor", t.strict_floor ? json(*t.strict_floor) : json(nullptr)},
              {"sample_count", t.sample_count}};
}

inline json to_json(const AxiomReport& r) {
  json axioms = json::array();
  for (const AxiomRecord& rec : r.records) {
    json a{{"axiom", axiom_tag(rec.axiom)},
           {"passed", rec.passed},
           {"margin", detail::finite_or_null(rec.margin)},
           {"indeterminate", rec.indeterminate},
           {"required", rec.required}};
    if (rec.witness) a["witness"] = detail::vector_json(*rec.witness);
    axioms.push_back(std::move(a));
  }
  return json{{"mode", mode_name(r.mode)}, {"shape", r.shape.blocks()}, {"passed", r.passed()},
              {"tolerances", to_json(r.tolerances)}, {"seed", r.tolerances.seed}, {"axioms", std::move(axioms)}};
}

inline json to_json(const MkBracket& b) {
  return json{{"lower", detail::finite_or_null(b.lower)}, {"upper", detail::finite_or_null(b.upper)},
              {"converged", b.converged}, {"iterations", b.iterations}, {"exact", b.exact},
              {"unbounded", b.unbounded}};
}

inline std::string_view gauge_name(Gauge g) { return g == Gauge::trace ? "trace" : "unit_norm"; }

inline json to_json(const SearchConfig& c) {
  return json{{"shape", c.shape.blocks()},       {"floor", c.floor},
              {"trace_target", c.target()},      {"max_iter", c.max_iter},
              {"restarts", c.restarts},          {"seed", c.seed},
              {"residual_tol", c.residual_tol},  {"drop_triangle", c.drop_triangle},
              {"gauge", gauge_name(c.gauge)},    {"sample_count", c.sample_count}};
}

inline SearchConfig search_config_from_json(const json& j) {
  SearchConfig c;
  c.shape = detail::shape_from_json(j);
  c.floor = detail::field<double>(j, "floor");
  c.trace_target = detail::field<double>(j, "trace_target");
  c.max_iter = detail::field<int>(j, "max_iter");
  c.restarts = detail::field<int>(j, "restarts");
  c.seed = detail::field<std::uint64_t>(j, "seed");
  c.residual_tol = detail::field<double>(j, "residual_tol");
  c.drop_triangle = detail::field<bool>(j, "drop_triangle");
  const auto gauge = detail::field<std::string>(j, "gauge");
  if (gauge != "trace" && gauge != "unit_norm") throw ParseError("unknown gauge '" + gauge + "'");
  c.gauge = gauge == "trace" ? Gauge::trace : Gauge::unit_norm;
  c.sample_count = detail::field<int>(j, "sample_count");
  return c;
}

/// Serialized outcome; the residual history is downsampled to at most `max_points` entries.
inline json to_json(const SearchOutcome& o, std::size_t max_points = 1000) {
  json history = json::array();
  const std::size_t n = o.residual_history.size();
  const std::size_t keep = std::min(n, max_points);
  for (std::size_t i = 0; i < keep; ++i) {
    const std::size_t src = keep == 1 ? 0 : i * (n - 1) / (keep - 1);
    const ResidualSample& s = o.residual_history[src];
    history.push_back(json{{"iteration", s.iteration},
                           {"structural", s.structural},
                           {"rho_cone", s.rho_cone},
                           {"triangle_cone", s.triangle_cone}});
  }
  return json{{"status", status_name(o.status)},
              {"mode", mode_name(o.mode)},
              {"seed_used", o.seed_used},
              {"restart_index", o.restart_index},
              {"iterations", o.iterations},
              {"best_residual", detail::finite_or_null(o.best_residual)},
              {"scale_factor", o.scale_factor},
              {"config", to_json(o.config)},
              {"candidate", o.candidate ? to_json(o.candidate->rho) : json(nullptr)},
              {"report", o.candidate && o.candidate->report ? to_json(*o.candidate->report) : json(nullptr)},
              {"residual_history", std::move(history)}};
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

inline void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << j.dump(2) << '\n';
}

/// Reads a metric space from JSON ({n, d}) or, for any other extension, the lower-triangle text format.
inline FiniteMetricSpace read_metric_space(const std::string& path) {
  if (path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0)
    return metric_space_from_json(read_json_file(path));
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  return metric_space_from_text(in);
}

}  // namespace qmetric

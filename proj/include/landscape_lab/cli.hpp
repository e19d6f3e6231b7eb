/*
 Copyright 2026 The landscape_lab Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

// Command-line front end: configuration, dispatch and CSV/JSON reports.

#ifndef LANDSCAPE_LAB_CLI_HPP
#define LANDSCAPE_LAB_CLI_HPP

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "landscape_lab/landscape_lab.hpp"

namespace landscape_lab::cli {

using Json = nlohmann::ordered_json;

enum ExitCode : int { ok = 0, check_failed = 1, config_error = 2, numerical_fault = 3 };

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> names{"basis",      "propagate", "scan",       "ascent",
                                              "basins",     "rank",      "ce-boundary", "ce-slice",
                                              "ce-scan2d",  "census1d",  "kappa-thr"};
  return names;
}

struct RunConfig {
  std::string command;
  int n = 2;
  double horizon = 1.0;
  int segments = 4;
  std::string kappa = "auto";  // number, or "auto" for pi / (sqrt(3) T)
  unsigned long long seed = 0;
  unsigned threads = 0;  // 0: LANDSCAPE_LAB_THREADS, then hardware concurrency
  std::string format = "json";
  std::string output = "-";
  bool omit_wall_time = false;

  std::string system;  // boundary-trap | sigma3 | random | identity; empty: per command
  std::string grid;    // zero | corner | random | file; empty: per command
  std::string grid_file;

  int samples = 1000;      // ce-boundary inward perturbations
  double radius_rel = 1e-3;
  int directions = 64;     // cone test
  bool expect_trap = false;
  int count = 200;         // basins
  int steps = 0;           // scan / ce-slice / ce-scan2d; 0: per command
  double c_min = -1.4;
  double c_max = 1.4;
  double margin = kDefaultMargin;
  bool negate = false;
  bool emit_grid = false;
  std::string fn = "sin";  // sin | sinc | cubic | const
  double a = -20.0;
  double b = 20.0;
  int grid_points = 4001;
  int j1 = 0, z1 = 0, j2 = 1, z2 = 0;

  Tolerances tol;
  AscentSettings ascent;
};

namespace detail {

struct Field {
  std::string name;
  std::function<void(RunConfig&, const Json&)> set;
  std::function<Json(const RunConfig&)> get;
};

template <class T, class Access>
Field field(std::string name, Access access) {
  Field f;
  f.name = name;
  f.get = [access](const RunConfig& c) { return Json(access(const_cast<RunConfig&>(c))); };
  f.set = [access, name](RunConfig& c, const Json& v) {
    bool ok = false;
    if constexpr (std::is_same_v<T, bool>) ok = v.is_boolean();
    else if constexpr (std::is_same_v<T, std::string>) ok = v.is_string();
    else if constexpr (std::is_integral_v<T>) ok = v.is_number_integer() && (std::is_signed_v<T> || v >= 0);
    else ok = v.is_number();
    if (!ok) throw ConfigError("config key '" + name + "' has the wrong type");
    access(c) = v.template get<T>();
  };
  return f;
}

#define LANDSCAPE_LAB_FIELD(T, key, member) \
  field<T>(key, [](RunConfig& c) -> T& { return c.member; })

inline const std::vector<Field>& fields() {
  static const std::vector<Field> all = [] {
    std::vector<Field> f{
        LANDSCAPE_LAB_FIELD(std::string, "command", command),
        LANDSCAPE_LAB_FIELD(int, "N", n),
        LANDSCAPE_LAB_FIELD(double, "T", horizon),
        LANDSCAPE_LAB_FIELD(int, "Z", segments),
        LANDSCAPE_LAB_FIELD(unsigned long long, "seed", seed),
        LANDSCAPE_LAB_FIELD(unsigned, "threads", threads),
        LANDSCAPE_LAB_FIELD(std::string, "format", format),
        LANDSCAPE_LAB_FIELD(std::string, "output", output),
        LANDSCAPE_LAB_FIELD(bool, "omit_wall_time", omit_wall_time),
        LANDSCAPE_LAB_FIELD(std::string, "system", system),
        LANDSCAPE_LAB_FIELD(std::string, "grid", grid),
        LANDSCAPE_LAB_FIELD(std::string, "grid_file", grid_file),
        LANDSCAPE_LAB_FIELD(int, "samples", samples),
        LANDSCAPE_LAB_FIELD(double, "radius_rel", radius_rel),
        LANDSCAPE_LAB_FIELD(int, "directions", directions),
        LANDSCAPE_LAB_FIELD(bool, "expect_trap", expect_trap),
        LANDSCAPE_LAB_FIELD(int, "count", count),
        LANDSCAPE_LAB_FIELD(int, "steps", steps),
        LANDSCAPE_LAB_FIELD(double, "c_min", c_min),
        LANDSCAPE_LAB_FIELD(double, "c_max", c_max),
        LANDSCAPE_LAB_FIELD(double, "margin", margin),
        LANDSCAPE_LAB_FIELD(bool, "negate", negate),
        LANDSCAPE_LAB_FIELD(bool, "emit_grid", emit_grid),
        LANDSCAPE_LAB_FIELD(std::string, "fn", fn),
        LANDSCAPE_LAB_FIELD(double, "a", a),
        LANDSCAPE_LAB_FIELD(double, "b", b),
        LANDSCAPE_LAB_FIELD(int, "grid_points", grid_points),
        LANDSCAPE_LAB_FIELD(int, "j1", j1),
        LANDSCAPE_LAB_FIELD(int, "z1", z1),
        LANDSCAPE_LAB_FIELD(int, "j2", j2),
        LANDSCAPE_LAB_FIELD(int, "z2", z2),
        LANDSCAPE_LAB_FIELD(double, "tol_grad", tol.grad),
        LANDSCAPE_LAB_FIELD(double, "tol_hess_step_rel", tol.hess_step_rel),
        LANDSCAPE_LAB_FIELD(double, "tol_root", tol.root),
        LANDSCAPE_LAB_FIELD(double, "tol_merge", tol.merge),
        LANDSCAPE_LAB_FIELD(double, "tol_success_margin_rel", tol.success_margin_rel),
        LANDSCAPE_LAB_FIELD(double, "tol_active", tol.active),
        LANDSCAPE_LAB_FIELD(double, "tol_degenerate", tol.degenerate),
        LANDSCAPE_LAB_FIELD(double, "tol_rank", tol.rank),
        LANDSCAPE_LAB_FIELD(double, "armijo", ascent.armijo),
        LANDSCAPE_LAB_FIELD(double, "gtol", ascent.gtol),
        LANDSCAPE_LAB_FIELD(int, "max_iters", ascent.max_iters),
        LANDSCAPE_LAB_FIELD(int, "max_backtracks", ascent.max_backtracks),
    };
    // kappa accepts a number or "auto"
    Field k;
    k.name = "kappa";
    k.get = [](const RunConfig& c) { return Json(c.kappa); };
    k.set = [](RunConfig& c, const Json& v) {
      if (v.is_string()) {
        c.kappa = v.get<std::string>();
      } else if (v.is_number()) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
        c.kappa = buf;
      } else {
        throw ConfigError("config key 'kappa' must be a number or \"auto\"");
      }
    };
    f.insert(f.begin() + 4, k);
    return f;
  }();
  return all;
}

#undef LANDSCAPE_LAB_FIELD

inline bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

inline void require(bool cond, const std::string& message) {
  if (!cond) throw ConfigError(message);
}

}  // namespace detail

/// Applies every key of a JSON object onto the config. Unknown keys are errors.
inline void apply_json(RunConfig& config, const Json& overrides) {
  if (!overrides.is_object()) throw ConfigError("config file must hold a JSON object");
  for (const auto& [key, value] : overrides.items()) {
    bool found = false;
    for (const auto& f : detail::fields()) {
      if (f.name == key) {
        f.set(config, value);
        found = true;
        break;
      }
    }
    if (!found) throw ConfigError("unknown config key '" + key + "'");
  }
}

inline void apply_config_file(RunConfig& config, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("config file " + path + ": " + e.what());
  }
  apply_json(config, j);
}

inline double resolve_kappa(const RunConfig& c) {
  if (c.kappa == "auto") return kPi / (std::sqrt(3.0) * c.horizon);
  double v = 0.0;
  const char* first = c.kappa.data();
  const char* last = first + c.kappa.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) throw ConfigError("kappa must be a number or 'auto', got '" + c.kappa + "'");
  return v;
}

/// Fills per-command defaults and validates every parameter.
inline RunConfig resolve(RunConfig c) {
  using detail::contains;
  using detail::require;
  require(contains(commands(), c.command), "unknown command '" + c.command + "'");
  require(c.n >= 2 && c.n <= 16, "N must be in [2, 16]");
  require(std::isfinite(c.horizon) && c.horizon > 0.0, "T must be positive");
  require(c.segments >= 1 && c.segments <= 100000, "Z must be in [1, 100000]");
  const double kappa = resolve_kappa(c);
  require(std::isfinite(kappa) && kappa >= 0.0, "kappa must be finite and >= 0");
  require(c.format == "json" || c.format == "csv", "format must be json or csv");
  require(!c.output.empty(), "output must be a path or '-'");

  if (c.system.empty()) c.system = c.n == 2 ? "boundary-trap" : "random";
  require(contains({"boundary-trap", "sigma3", "random", "identity"}, c.system),
          "system must be boundary-trap, sigma3, random or identity");
  require(c.n == 2 || (c.system != "boundary-trap" && c.system != "sigma3"),
          "system '" + c.system + "' needs N = 2");
  if (c.grid.empty()) c.grid = c.command == "ascent" ? "random" : c.command == "scan" ? "zero" : "corner";
  require(contains({"zero", "corner", "random", "file"}, c.grid), "grid must be zero, corner, random or file");
  require(c.grid != "file" || !c.grid_file.empty(), "grid=file needs grid_file");

  if (c.steps == 0) c.steps = c.command == "ce-slice" ? 101 : c.command == "ce-scan2d" ? 400 : 21;
  require(c.samples >= 1, "samples must be >= 1");
  require(c.radius_rel > 0.0 && c.radius_rel < 1.0, "radius_rel must be in (0, 1)");
  require(c.directions >= 1, "directions must be >= 1");
  require(!c.expect_trap || c.command == "ce-boundary", "expect_trap applies to ce-boundary only");
  require(c.count >= 1, "count must be >= 1");
  require(c.steps >= 1, "steps must be >= 1");
  require(c.command != "ce-scan2d" || c.steps >= 10, "ce-scan2d needs steps >= 10");
  require(c.command != "scan" || c.steps >= 2, "scan needs steps >= 2");
  require(c.margin > 0.0 && c.margin < kPi / 2.0, "margin must be in (0, pi/2)");
  require(c.c_min <= c.c_max, "need c_min <= c_max");
  require(contains({"sin", "sinc", "cubic", "const"}, c.fn), "fn must be sin, sinc, cubic or const");
  require(c.a < c.b, "need a < b");
  require(c.fn != "sinc" || c.a > 0.0 || c.b < 0.0, "sinc census needs an interval avoiding 0");
  require(c.grid_points >= 2, "grid_points must be >= 2");
  const int controls = c.n * c.n - 1;
  for (auto [j, z] : {std::pair{c.j1, c.z1}, std::pair{c.j2, c.z2}})
    require(j >= 0 && j < controls && z >= 0 && z < c.segments, "scan coordinate out of range");
  require(c.j1 != c.j2 || c.z1 != c.z2, "scan coordinates must differ");
  for (double t : {c.tol.grad, c.tol.hess_step_rel, c.tol.root, c.tol.merge, c.tol.success_margin_rel,
                   c.tol.active, c.tol.degenerate, c.tol.rank, c.ascent.armijo, c.ascent.gtol})
    require(std::isfinite(t) && t > 0.0, "tolerances must be positive");
  require(c.ascent.max_iters >= 0 && c.ascent.max_backtracks >= 0, "iteration limits must be >= 0");
  return c;
}

inline Json echo(const RunConfig& c) {
  Json out = Json::object();
  for (const auto& f : detail::fields()) out[f.name] = f.get(c);
  out["kappa_resolved"] = resolve_kappa(c);
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

inline std::string hex(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

inline std::string decimal(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void put(Json& obj, const std::string& key, double v) {
  obj[key] = v;
  obj[key + "_hex"] = hex(v);
}

inline void put(Json& obj, const std::string& key, const std::vector<double>& v) {
  Json values = Json::array(), hexes = Json::array();
  for (double x : v) {
    values.push_back(x);
    hexes.push_back(hex(x));
  }
  obj[key] = std::move(values);
  obj[key + "_hex"] = std::move(hexes);
}

/// Row-major; complex entries interleaved as (re, im).
inline Json matrix_json(const CMatrix& m) {
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(2 * m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      data.push_back(m(r, c).real());
      data.push_back(m(r, c).imag());
    }
  Json out{{"rows", m.rows()}, {"cols", m.cols()}, {"layout", "row-major interleaved re,im"}};
  put(out, "data", data);
  return out;
}

inline Json matrix_json(const RMatrix& m) {
  std::vector<double> data;
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  Json out{{"rows", m.rows()}, {"cols", m.cols()}, {"layout", "row-major"}};
  put(out, "data", data);
  return out;
}

inline std::vector<double> to_vector(const RVector& v) { return {v.data(), v.data() + v.size()}; }

using Cell = std::variant<double, long long, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

inline Json table_json(const Table& t) {
  Json rows = Json::array(), hexes = Json::array();
  for (const auto& row : t.rows) {
    Json r = Json::array(), h = Json::array();
    for (const auto& cell : row) {
      if (const double* d = std::get_if<double>(&cell)) {
        r.push_back(*d);
        h.push_back(hex(*d));
      } else if (const long long* i = std::get_if<long long>(&cell)) {
        r.push_back(*i);
        h.push_back(nullptr);
      } else {
        r.push_back(std::get<std::string>(cell));
        h.push_back(nullptr);
      }
    }
    rows.push_back(std::move(r));
    hexes.push_back(std::move(h));
  }
  return Json{{"columns", t.columns}, {"rows", std::move(rows)}, {"rows_hex", std::move(hexes)}};
}

inline void write_csv(const Table& t, std::ostream& out) {
  auto cell_text = [](const Cell& cell) -> std::string {
    if (const double* d = std::get_if<double>(&cell)) return decimal(*d);
    if (const long long* i = std::get_if<long long>(&cell)) return std::to_string(*i);
    const std::string& s = std::get<std::string>(cell);
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
  };
  for (std::size_t k = 0; k < t.columns.size(); ++k) out << (k ? "," : "") << t.columns[k];
  out << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << cell_text(row[k]);
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Experiment setup

namespace detail {

inline CMatrix ground_state(int n) {
  CMatrix rho = CMatrix::Zero(n, n);
  rho(0, 0) = 1.0;
  return rho;
}

inline QuantumSystem make_system(const RunConfig& c, const BasisSet& basis, double kappa) {
  if (c.system == "boundary-trap")
    return {ground_state(2), boundary_trap_observable(2.0 * std::sqrt(3.0) * c.horizon * kappa)};
  if (c.system == "sigma3") return {ground_state(2), basis[2]};
  if (c.system == "identity") return {ground_state(c.n), CMatrix::Identity(c.n, c.n)};
  std::seed_seq sq{c.seed, 1ULL};
  std::mt19937_64 rng(sq);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto gaussian = [&] {
    CMatrix a(c.n, c.n);
    for (int r = 0; r < c.n; ++r)
      for (int k = 0; k < c.n; ++k) a(r, k) = Complex(normal(rng), normal(rng));
    return a;
  };
  const CMatrix a = gaussian();
  CMatrix rho = a * a.adjoint();
  rho /= rho.trace().real();
  const CMatrix o = gaussian();
  return {0.5 * (rho + rho.adjoint()), 0.5 * (o + o.adjoint())};
}

inline ControlGrid read_grid_file(const RunConfig& c, int controls, double kappa) {
  std::ifstream in(c.grid_file);
  if (!in) throw ConfigError("cannot open grid file " + c.grid_file);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("grid file " + c.grid_file + ": " + e.what());
  }
  if (j.is_object() && j.contains("values")) j = j["values"];
  require(j.is_array() && j.size() == static_cast<std::size_t>(controls),
          "grid file must hold " + std::to_string(controls) + " rows (one per control)");
  RMatrix values(controls, c.segments);
  for (int r = 0; r < controls; ++r) {
    const Json& row = j[static_cast<std::size_t>(r)];
    require(row.is_array() && row.size() == static_cast<std::size_t>(c.segments),
            "grid file rows must hold Z = " + std::to_string(c.segments) + " numbers");
    for (int z = 0; z < c.segments; ++z) {
      require(row[static_cast<std::size_t>(z)].is_number(), "grid file entries must be numbers");
      values(r, z) = row[static_cast<std::size_t>(z)].get<double>();
    }
  }
  return {c.horizon, kappa, values};
}

inline ControlGrid make_grid(const RunConfig& c, int controls, double kappa) {
  if (c.grid == "zero") return ControlGrid::constant(controls, c.segments, c.horizon, kappa, 0.0);
  if (c.grid == "corner") return ControlGrid::constant(controls, c.segments, c.horizon, kappa, kappa);
  if (c.grid == "file") return read_grid_file(c, controls, kappa);
  std::seed_seq sq{c.seed, 2ULL};
  std::mt19937_64 rng(sq);
  return ControlGrid::uniform(controls, c.segments, c.horizon, kappa, rng);
}

inline Json report_json(const CriticalPointReport& r) {
  Json out;
  out["location"] = matrix_json(r.location.values());
  put(out, "j_value", r.j_value);
  put(out, "grad_norm_projected", r.grad_norm_projected);
  Json active = Json::array();
  for (const auto& a : r.active_set)
    active.push_back({{"j", a.j},
                      {"z", a.z},
                      {"side", a.side == BoundSide::upper   ? "+"
                               : a.side == BoundSide::lower ? "-"
                                                            : "pinned"}});
  out["active_set"] = std::move(active);
  out["classification"] = to_string(r.classification);
  put(out, "hessian_eigenvalues", r.hessian_eigenvalues);
  out["degenerate"] = r.degenerate;
  return out;
}

inline Json cone_json(const ConeTestResult& cone) {
  Json out;
  out["surjective"] = cone.surjective;
  if (cone.witness) put(out, "witness", to_vector(*cone.witness));
  else out["witness"] = nullptr;
  put(out, "max_residual", cone.max_residual);
  out["directions_tested"] = cone.directions_tested;
  out["active_count"] = cone.active_count;
  return out;
}

inline const char* kind_name(CriticalKind k) {
  switch (k) {
    case CriticalKind::maximum: return "max";
    case CriticalKind::minimum: return "min";
    case CriticalKind::flat: return "flat";
  }
  return "unknown";
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Commands

struct RunReport {
  Json report;
  Table table;
  int exit_code = ok;
  std::string message;  // diagnostic for nonzero exit codes
};

namespace detail {

struct Context {
  const RunConfig& config;
  double kappa;
  unsigned threads;
  Json results = Json::object();
  Table table;
  int exit_code = ok;
  std::string message;
};

inline void cmd_basis(Context& ctx) {
  const BasisSet basis = build_su_basis(ctx.config.n);
  double ortho = 0.0;
  Json elements = Json::array();
  ctx.table.columns = {"index", "row", "col", "re", "im"};
  for (int i = 0; i < basis.size(); ++i) {
    elements.push_back(matrix_json(basis[i]));
    for (int k = 0; k < basis.size(); ++k)
      ortho = std::max(ortho, std::abs((basis[i] * basis[k]).trace() - Complex(i == k ? 2.0 : 0.0)));
    for (int r = 0; r < basis.dim; ++r)
      for (int col = 0; col < basis.dim; ++col)
        ctx.table.rows.push_back({static_cast<long long>(i), static_cast<long long>(r),
                                  static_cast<long long>(col), basis[i](r, col).real(),
                                  basis[i](r, col).imag()});
  }
  ctx.results["dim"] = basis.dim;
  ctx.results["size"] = basis.size();
  put(ctx.results, "orthogonality_error", ortho);
  ctx.results["elements"] = std::move(elements);
}

inline void cmd_propagate(Context& ctx) {
  const auto& c = ctx.config;
  const BasisSet basis = build_su_basis(c.n);
  const ControlGrid grid = make_grid(c, basis.size(), ctx.kappa);
  const QuantumSystem system = make_system(c, basis, ctx.kappa);
  const PropagationResult prop = propagate(grid, basis);
  ctx.results["grid"] = matrix_json(grid.values());
  ctx.results["total"] = matrix_json(prop.total);
  put(ctx.results, "unitarity_error", unitarity_error(prop.total));
  const Complex det = prop.total.determinant();
  put(ctx.results, "determinant", std::vector<double>{det.real(), det.imag()});
  put(ctx.results, "objective", objective(system, prop.total));
  Json segs = Json::array();
  for (const auto& u : prop.segment_unitaries) segs.push_back(matrix_json(u));
  ctx.results["segment_unitaries"] = std::move(segs);
  ctx.table.columns = {"row", "col", "re", "im"};
  for (int r = 0; r < basis.dim; ++r)
    for (int col = 0; col < basis.dim; ++col)
      ctx.table.rows.push_back({static_cast<long long>(r), static_cast<long long>(col),
                                prop.total(r, col).real(), prop.total(r, col).imag()});
}

inline void cmd_scan(Context& ctx) {
  const auto& c = ctx.config;
  const BasisSet basis = build_su_basis(c.n);
  const ControlGrid base = make_grid(c, basis.size(), ctx.kappa);
  const QuantumSystem system = make_system(c, basis, ctx.kappa);
  const auto steps = static_cast<std::size_t>(c.steps);
  auto coord = [&](std::size_t i) {
    return -ctx.kappa + 2.0 * ctx.kappa * static_cast<double>(i) / static_cast<double>(steps - 1);
  };
  std::vector<std::vector<std::array<double, 5>>> rows(steps);
  parallel_for(steps, ctx.threads, [&](std::size_t i) {
    rows[i].resize(steps);
    for (std::size_t k = 0; k < steps; ++k) {
      RMatrix v = base.values();
      v(c.j1, c.z1) = coord(i);
      v(c.j2, c.z2) = coord(k);
      const ControlGrid g = base.with_values(v);
      const RMatrix grad = gradient(system, g, basis).values;
      rows[i][k] = {coord(i), coord(k), objective(system, g, basis), grad(c.j1, c.z1), grad(c.j2, c.z2)};
    }
  });
  ctx.table.columns = {"x", "y", "J", "dJ_dx", "dJ_dy"};
  double jmin = std::numeric_limits<double>::infinity(), jmax = -jmin;
  for (const auto& row : rows)
    for (const auto& r : row) {
      ctx.table.rows.push_back({r[0], r[1], r[2], r[3], r[4]});
      jmin = std::min(jmin, r[2]);
      jmax = std::max(jmax, r[2]);
    }
  ctx.results["x"] = {{"j", c.j1}, {"z", c.z1}};
  ctx.results["y"] = {{"j", c.j2}, {"z", c.z2}};
  ctx.results["points"] = steps * steps;
  put(ctx.results, "j_min_on_grid", jmin);
  put(ctx.results, "j_max_on_grid", jmax);
}

inline void cmd_ascent(Context& ctx) {
  const auto& c = ctx.config;
  const BasisSet basis = build_su_basis(c.n);
  const ControlGrid start = make_grid(c, basis.size(), ctx.kappa);
  const QuantumSystem system = make_system(c, basis, ctx.kappa);
  const AscentTrace trace = gradient_ascent(system, start, basis, c.ascent, c.tol);
  const ObjectiveRange range = objective_range(system);
  put(ctx.results, "j_min", range.j_min);
  put(ctx.results, "j_max", range.j_max);
  ctx.results["converged"] = trace.converged;
  ctx.results["stop"] = to_string(trace.stop);
  ctx.results["iterations"] = trace.iterates.back().step;
  put(ctx.results, "start_j", trace.iterates.front().j_value);
  ctx.results["terminal"] = report_json(trace.terminal);
  ctx.table.columns = {"step", "J", "projected_grad_norm"};
  for (const auto& it : trace.iterates)
    ctx.table.rows.push_back({static_cast<long long>(it.step), it.j_value, it.projected_grad_norm});
}

inline void cmd_basins(Context& ctx) {
  const auto& c = ctx.config;
  const BasisSet basis = build_su_basis(c.n);
  const QuantumSystem system = make_system(c, basis, ctx.kappa);
  const BasinCensus census =
      basin_census(system, basis, {c.count, c.seed, ctx.kappa, c.segments, c.horizon}, c.ascent, c.tol,
                   ctx.threads);
  put(ctx.results, "trapped_fraction", census.trapped_fraction);
  put(ctx.results, "j_max", census.j_max);
  put(ctx.results, "success_threshold", census.success_threshold);
  std::map<std::string, int> by_class;
  int not_converged = 0;
  for (const auto& run : census.runs) {
    ++by_class[to_string(run.classification)];
    not_converged += run.stop == AscentStop::max_iterations ? 1 : 0;
  }
  ctx.results["classification_counts"] = by_class;
  ctx.results["runs_hitting_max_iters"] = not_converged;
  ctx.table.columns = {"run", "seed", "start_J", "terminal_J", "iterations", "stop", "classification", "trapped"};
  for (std::size_t i = 0; i < census.runs.size(); ++i) {
    const auto& r = census.runs[i];
    ctx.table.rows.push_back({static_cast<long long>(i), static_cast<long long>(r.seed), r.start_j,
                              r.terminal_j, static_cast<long long>(r.iterations), std::string(to_string(r.stop)),
                              std::string(to_string(r.classification)), static_cast<long long>(r.trapped)});
  }
}

inline void cmd_rank(Context& ctx) {
  const auto& c = ctx.config;
  const BasisSet basis = build_su_basis(c.n);
  const ControlGrid grid = make_grid(c, basis.size(), ctx.kappa);
  const TangentMap tm = psi_tangent_map(grid, basis);
  const RankResult rank = local_surjectivity_rank(tm, c.tol.rank);
  const ConeTestResult cone = boundary_cone_surjectivity(grid, tm, c.tol.active, c.directions, c.seed);
  ctx.results["grid"] = matrix_json(grid.values());
  ctx.results["rank"] = rank.rank;
  ctx.results["full_rank"] = basis.size();
  ctx.results["surjective"] = rank.surjective;
  put(ctx.results, "singular_values", to_vector(rank.singular_values));
  put(ctx.results, "projection_residual", tm.projection_residual);
  ctx.results["cone"] = cone_json(cone);
  ctx.table.columns = {"index", "singular_value"};
  for (Eigen::Index k = 0; k < rank.singular_values.size(); ++k)
    ctx.table.rows.push_back({static_cast<long long>(k), rank.singular_values(k)});
}

inline void cmd_ce_boundary(Context& ctx) {
  const auto& c = ctx.config;
  detail::require(c.n == 2, "ce-boundary needs N = 2");
  BoundaryTrapInstance inst = [&] {
    try {
      return boundary_trap_instance(c.horizon, c.segments, ctx.kappa);
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
  }();
  const double radius = c.radius_rel * (inst.kappa > 0.0 ? inst.kappa : 1.0);
  const BoundaryTrapVerification v =
      verify_boundary_trap(inst.system, inst.grid, inst.basis, c.samples, radius, c.seed, c.tol);
  const CriticalPointReport rep = classify_point(inst.system, inst.grid, inst.basis, c.tol);
  const TangentMap tm = psi_tangent_map(inst.grid, inst.basis);
  const ConeTestResult cone = boundary_cone_surjectivity(inst.grid, tm, c.tol.active, c.directions, c.seed);
  const CMatrix u = propagate(inst.grid, inst.basis).total;

  put(ctx.results, "alpha", inst.alpha);
  put(ctx.results, "kappa", inst.kappa);
  put(ctx.results, "kappa_thr", inst.kappa_thr);
  ctx.results["observable"] = matrix_json(inst.system.observable());
  ctx.results["corner_unitary"] = matrix_json(u);
  put(ctx.results, "corner_unitary_minus_identity_error", (u + CMatrix::Identity(2, 2)).norm());
  ctx.results["is_trap"] = v.is_trap;
  put(ctx.results, "j_at_corner", v.j_at_corner);
  put(ctx.results, "max_inward_gain", v.max_inward_gain);
  put(ctx.results, "j_global_max", v.j_global_max);
  put(ctx.results, "min_outward_gradient", v.min_outward_gradient);
  put(ctx.results, "projected_ascent_norm", v.projected_ascent_norm);
  ctx.results["trap_order"] = v.first_order ? "first-order" : "higher-order";
  ctx.results["samples"] = c.samples;
  put(ctx.results, "radius", radius);
  ctx.results["corner_classification"] = to_string(rep.classification);
  ctx.results["cone"] = cone_json(cone);
  ctx.table.columns = {"alpha", "kappa", "is_trap", "j_at_corner", "max_inward_gain", "j_global_max",
                       "min_outward_gradient", "cone_surjective"};
  ctx.table.rows.push_back({inst.alpha, inst.kappa, static_cast<long long>(v.is_trap), v.j_at_corner,
                            v.max_inward_gain, v.j_global_max, v.min_outward_gradient,
                            static_cast<long long>(cone.surjective)});
  if (c.expect_trap && !v.is_trap) {
    ctx.exit_code = check_failed;
    ctx.message = "expected a boundary trap, verification says otherwise";
  }
}

inline void cmd_ce_slice(Context& ctx) {
  const auto& c = ctx.config;
  SliceCensus sc;
  try {
    sc = slice_census_2d(c.c_min, c.c_max, c.steps, c.margin, ctx.threads);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  double loc_dev = 0.0, val_dev = 0.0;
  ctx.table.columns = {"c", "max_loc", "max_val", "min_loc", "min_val"};
  for (std::size_t k = 0; k < sc.per_slice.size(); ++k) {
    const auto& r = sc.per_slice[k];
    const auto& s = r.closed_form;
    loc_dev = std::max({loc_dev, std::abs(r.census_max_loc - s.max_loc), std::abs(r.census_min_loc - s.min_loc)});
    val_dev = std::max({val_dev, std::abs(r.census_max_val - s.max_val), std::abs(r.census_min_val - s.min_val)});
    ctx.table.rows.push_back({sc.c_values[k], s.max_loc, s.max_val, s.min_loc, s.min_val});
  }
  ctx.results["slices"] = sc.per_slice.size();
  ctx.results["one_max_one_min_per_slice"] = true;  // slice_census_2d throws otherwise
  put(ctx.results, "census_location_deviation", loc_dev);
  put(ctx.results, "census_value_deviation", val_dev);
}

inline void cmd_ce_scan2d(Context& ctx) {
  const auto& c = ctx.config;
  const TrapFreeScan scan = analytic2d_trap_free_scan(c.steps, c.margin, c.negate, ctx.threads);
  put(ctx.results, "min_grad_norm", scan.min_grad_norm);
  put(ctx.results, "argmin", std::vector<double>{scan.argmin_e1, scan.argmin_e2});
  ctx.results["grid_steps"] = scan.grid_steps;
  ctx.results["negate"] = c.negate;
  if (!c.emit_grid) {
    ctx.table.columns = {"min_grad_norm", "argmin_e1", "argmin_e2"};
    ctx.table.rows.push_back({scan.min_grad_norm, scan.argmin_e1, scan.argmin_e2});
    return;
  }
  const double limit = kPi / 2.0 - c.margin;
  const double sign = c.negate ? -1.0 : 1.0;
  ctx.table.columns = {"e1", "e2", "J", "d1", "d2"};
  for (int i = 0; i < c.steps; ++i)
    for (int k = 0; k < c.steps; ++k) {
      const double e1 = -limit + 2.0 * limit * i / (c.steps - 1.0);
      const double e2 = -limit + 2.0 * limit * k / (c.steps - 1.0);
      const Gradient2D g = landscape_lab::detail::analytic2d_partials(e1, e2);
      ctx.table.rows.push_back({e1, e2, sign * landscape_lab::detail::analytic2d_value(e1, e2), sign * g.d1, sign * g.d2});
    }
}

inline void cmd_census1d(Context& ctx) {
  const auto& c = ctx.config;
  std::function<double(double)> f, fp;
  if (c.fn == "sin") {
    f = [](double x) { return std::sin(x); };
    fp = [](double x) { return std::cos(x); };
  } else if (c.fn == "sinc") {
    f = [](double x) { return std::sin(x) / x; };
    fp = [](double x) { return (x * std::cos(x) - std::sin(x)) / (x * x); };
  } else if (c.fn == "cubic") {
    f = [](double x) { return x * x * x - x; };
    fp = [](double x) { return 3.0 * x * x - 1.0; };
  } else {
    f = [](double) { return 1.0; };
    fp = [](double) { return 0.0; };
  }
  const CensusResult1D census = critical_value_census_1d(f, fp, c.a, c.b, c.grid_points, c.tol);
  ctx.results["critical_point_count"] = census.critical_points.size();
  put(ctx.results, "critical_points", census.critical_points);
  put(ctx.results, "critical_values", census.critical_values);
  ctx.results["distinct_value_count"] = census.distinct_values.size();
  put(ctx.results, "distinct_values", census.distinct_values);
  Json cells = Json::array();
  for (const auto& [lo, hi] : census.coarse_cells) cells.push_back({lo, hi});
  ctx.results["coarse_cells"] = std::move(cells);
  ctx.table.columns = {"x", "value", "kind"};
  for (std::size_t i = 0; i < census.critical_points.size(); ++i)
    ctx.table.rows.push_back(
        {census.critical_points[i], census.critical_values[i], std::string(kind_name(census.kinds[i]))});
}

inline void cmd_kappa_thr(Context& ctx) {
  const auto& c = ctx.config;
  const KappaThreshold k = kappa_threshold(build_su_basis(c.n), c.horizon, c.segments);
  put(ctx.results, "kappa_thr", k.value);
  ctx.results["exact"] = k.exact;
  ctx.table.columns = {"N", "T", "Z", "kappa_thr", "exact"};
  ctx.table.rows.push_back({static_cast<long long>(c.n), c.horizon, static_cast<long long>(c.segments), k.value,
                            static_cast<long long>(k.exact)});
}

inline bool uses_controls(const std::string& command) {
  return command == "propagate" || command == "scan" || command == "ascent" || command == "basins" ||
         command == "rank" || command == "ce-boundary" || command == "kappa-thr";
}

}  // namespace detail

inline Json versions() {
  return Json{{"landscape_lab", kVersion},
              {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                            std::to_string(EIGEN_MINOR_VERSION)},
              {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                    std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                    std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
              {"cli11", CLI11_VERSION},
              {"compiler", __VERSION__}};
}

/// Runs one command. Throws ConfigError or NumericalFault; check failures are
/// reported through exit_code.
inline RunReport run(const RunConfig& input) {
  const auto t0 = std::chrono::steady_clock::now();
  const RunConfig c = resolve(input);
  detail::Context ctx{c, resolve_kappa(c), resolve_threads(c.threads)};
  using Handler = void (*)(detail::Context&);
  static const std::map<std::string, Handler> handlers{
      {"basis", detail::cmd_basis},         {"propagate", detail::cmd_propagate},
      {"scan", detail::cmd_scan},           {"ascent", detail::cmd_ascent},
      {"basins", detail::cmd_basins},       {"rank", detail::cmd_rank},
      {"ce-boundary", detail::cmd_ce_boundary}, {"ce-slice", detail::cmd_ce_slice},
      {"ce-scan2d", detail::cmd_ce_scan2d}, {"census1d", detail::cmd_census1d},
      {"kappa-thr", detail::cmd_kappa_thr}};
  try {
    handlers.at(c.command)(ctx);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }

  Json meta = Json::object();
  if (detail::uses_controls(c.command)) {
    const int constraints = c.n * c.n - 1;
    const long long parameters = static_cast<long long>(constraints) * c.segments;
    meta["control_parameters"] = parameters;
    meta["constraints"] = constraints;
    put(meta, "beta", static_cast<double>(parameters) / constraints);
    const KappaThreshold k = kappa_threshold(build_su_basis(c.n), c.horizon, c.segments);
    put(meta, "kappa_thr", k.value);
    meta["kappa_thr_conservative"] = !k.exact;
    meta["segment_condition_holds"] = ctx.kappa < k.value;
  }

  RunReport out;
  out.report["command"] = c.command;
  out.report["config"] = echo(c);
  out.report["versions"] = versions();
  out.report["metadata"] = std::move(meta);
  out.report["results"] = std::move(ctx.results);
  out.report["table"] = table_json(ctx.table);
  out.report["status"] = {{"exit_code", ctx.exit_code}, {"message", ctx.message}};
  if (!c.omit_wall_time)
    out.report["wall_time_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out.table = std::move(ctx.table);
  out.exit_code = ctx.exit_code;
  out.message = std::move(ctx.message);
  return out;
}

inline void write(const RunReport& r, const std::string& format, std::ostream& out) {
  if (format == "csv") write_csv(r.table, out);
  else out << r.report.dump(2) << '\n';
}

/// Full command-line entry point: parses argv, applies --config, runs and
/// writes the report. Returns the process exit code.
inline int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig config;
  std::string config_file;
  CLI::App app{"Control landscape laboratory: quantum control landscapes under bounded controls"};
  app.require_subcommand(0, 1);
  app.fallthrough();
  app.set_help_all_flag("--help-all", "Show help for all subcommands");
  const std::map<std::string, std::string> descriptions{
      {"basis", "Print the su(N) basis"},
      {"propagate", "Propagate a control grid"},
      {"scan", "Grid J and its gradient over two control coordinates"},
      {"ascent", "Projected gradient ascent from a grid"},
      {"basins", "Multistart ascent statistics"},
      {"rank", "Tangent-map rank and boundary cone test"},
      {"ce-boundary", "Verify the boundary-trap counterexample"},
      {"ce-slice", "Slice extrema of the analytic two-control landscape"},
      {"ce-scan2d", "Gradient-norm scan of the analytic two-control landscape"},
      {"census1d", "Critical-value census of a 1D function"},
      {"kappa-thr", "Control-bound threshold for the segment-duration condition"}};
  for (const auto& name : commands()) app.add_subcommand(name, descriptions.at(name));

  app.add_option("--config", config_file, "JSON file whose keys override flags");
  app.add_option("--N", config.n, "Hilbert-space dimension")->capture_default_str();
  app.add_option("--T", config.horizon, "Time horizon")->capture_default_str();
  app.add_option("--Z", config.segments, "Number of piecewise-constant segments")->capture_default_str();
  app.add_option("--kappa", config.kappa, "Control bound, or 'auto' for pi/(sqrt(3) T)")->capture_default_str();
  app.add_option("--seed", config.seed, "Random seed")->capture_default_str();
  app.add_option("--threads", config.threads, "Worker cap (0: LANDSCAPE_LAB_THREADS or hardware)")
      ->capture_default_str();
  app.add_option("--format", config.format, "json or csv")->capture_default_str();
  app.add_option("--output,-o", config.output, "Output path, '-' for stdout")->capture_default_str();
  app.add_flag("--omit-wall-time", config.omit_wall_time, "Leave wall time out of the report");
  app.add_option("--system", config.system, "boundary-trap, sigma3, random or identity");
  app.add_option("--grid", config.grid, "zero, corner, random or file");
  app.add_option("--grid-file", config.grid_file, "JSON array of control rows");
  app.add_option("--samples", config.samples, "Inward perturbation samples")->capture_default_str();
  app.add_option("--radius-rel", config.radius_rel, "Perturbation radius relative to kappa")->capture_default_str();
  app.add_option("--directions", config.directions, "Cone-test directions")->capture_default_str();
  app.add_flag("--expect-trap", config.expect_trap, "Exit 1 unless ce-boundary finds a trap");
  app.add_option("--count", config.count, "Basin runs")->capture_default_str();
  app.add_option("--steps", config.steps, "Grid steps (0: command default)")->capture_default_str();
  app.add_option("--c-min", config.c_min, "First slice")->capture_default_str();
  app.add_option("--c-max", config.c_max, "Last slice")->capture_default_str();
  app.add_option("--margin", config.margin, "Distance kept from +-pi/2")->capture_default_str();
  app.add_flag("--negate", config.negate, "Scan -J");
  app.add_flag("--emit-grid", config.emit_grid, "Emit every ce-scan2d grid point");
  app.add_option("--fn", config.fn, "sin, sinc, cubic or const")->capture_default_str();
  app.add_option("--a", config.a, "Census interval start")->capture_default_str();
  app.add_option("--b", config.b, "Census interval end")->capture_default_str();
  app.add_option("--grid-points", config.grid_points, "Census bracketing grid")->capture_default_str();
  app.add_option("--j1", config.j1, "Scan x control index")->capture_default_str();
  app.add_option("--z1", config.z1, "Scan x segment index (0-based)")->capture_default_str();
  app.add_option("--j2", config.j2, "Scan y control index")->capture_default_str();
  app.add_option("--z2", config.z2, "Scan y segment index (0-based)")->capture_default_str();
  app.add_option("--tol-grad", config.tol.grad, "Projected-gradient zero test")->capture_default_str();
  app.add_option("--tol-hess-step-rel", config.tol.hess_step_rel, "Hessian finite-difference step, relative")->capture_default_str();
  app.add_option("--tol-root", config.tol.root, "Census root tolerance")->capture_default_str();
  app.add_option("--tol-merge", config.tol.merge, "Merge distance for critical values")->capture_default_str();
  app.add_option("--tol-success-margin-rel", config.tol.success_margin_rel, "Relative margin counted as reaching the maximum")->capture_default_str();
  app.add_option("--tol-active", config.tol.active, "Distance at which a bound is active")->capture_default_str();
  app.add_option("--tol-degenerate", config.tol.degenerate, "Hessian eigenvalue treated as zero")->capture_default_str();
  app.add_option("--tol-rank", config.tol.rank, "Relative singular-value cutoff")->capture_default_str();
  app.add_option("--armijo", config.ascent.armijo, "Armijo sufficient-increase constant")->capture_default_str();
  app.add_option("--gtol", config.ascent.gtol, "Ascent stopping gradient")->capture_default_str();
  app.add_option("--max-iters", config.ascent.max_iters, "Ascent iteration cap")->capture_default_str();
  app.add_option("--max-backtracks", config.ascent.max_backtracks, "Line-search halvings per step")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return ok;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return config_error;
  }
  for (const auto* sub : app.get_subcommands()) config.command = sub->get_name();

  try {
    if (!config_file.empty()) apply_config_file(config, config_file);
    if (config.command.empty()) throw ConfigError("no command given; see --help");
    const RunReport report = run(config);
    if (config.output == "-") {
      write(report, config.format, out);
    } else {
      std::ofstream file(config.output, std::ios::binary);
      if (!file) throw ConfigError("cannot write " + config.output);
      write(report, config.format, file);
    }
    if (report.exit_code != ok) err << "check failed: " << report.message << '\n';
    return report.exit_code;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return config_error;
  } catch (const NumericalFault& e) {
    err << "numerical fault: " << e.what() << '\n';
    return numerical_fault;
  } catch (const std::exception& e) {
    err << "numerical fault: " << e.what() << '\n';
    return numerical_fault;
  }
}

}  // namespace landscape_lab::cli

#endif  // LANDSCAPE_LAB_CLI_HPP

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

// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "landscape_lab/cli.hpp"
#include "landscape_lab/landscape_lab.hpp"
#include "oracles.hpp"

namespace ll = landscape_lab;
using ll::CMatrix;
using ll::RMatrix;

namespace {

int failures = 0;

void report(int id, const char* title, bool pass, const std::string& detail) {
  std::printf("[%s] %d %s: %s\n", pass ? "PASS" : "FAIL", id, title, detail.c_str());
  std::fflush(stdout);
  failures += pass ? 0 : 1;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

ll::QuantumSystem random_system(int n, std::mt19937_64& rng) {
  return {oracle::random_density(n, rng), oracle::random_hermitian(n, rng)};
}

void gradient_oracle() {
  std::mt19937_64 rng(20260101);
  double worst = 0.0;
  long compared = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 2;
    const int segments = std::array<int, 3>{1, 4, 8}[static_cast<std::size_t>((trial / 2) % 3)];
    const auto basis = ll::build_su_basis(n);
    const auto sys = random_system(n, rng);
    const auto grid = ll::ControlGrid::uniform(basis.size(), segments, 1.0, 1.5, rng);
    const RMatrix g = ll::gradient(sys, grid, basis).values;
    const RMatrix fd = oracle::ridders_gradient(basis.elements, sys.rho0(), sys.observable(), grid.values(),
                                                grid.horizon());
    for (Eigen::Index k = 0; k < g.size(); ++k) {
      if (std::abs(g.data()[k]) <= 1e-8) continue;
      worst = std::max(worst, std::abs(g.data()[k] - fd.data()[k]) / std::abs(g.data()[k]));
      ++compared;
    }
  }
  report(1, "gradient oracle", worst < 1e-6,
         fmt("100 instances, %ld components vs extrapolated central differences, max relative error %.3e (< 1e-6)", compared, worst));
}

void unitarity_and_range() {
  std::mt19937_64 rng(20260102);
  std::uniform_int_distribution<int> seg(1, 8);
  std::uniform_real_distribution<double> kap(0.0, 3.0);
  double worst_unitarity = 0.0, worst_excess = -1e300;
  for (int trial = 0; trial < 10000; ++trial) {
    const int n = 2 + trial % 2;
    const auto basis = ll::build_su_basis(n);
    const auto sys = random_system(n, rng);
    const auto grid = ll::ControlGrid::uniform(basis.size(), seg(rng), 1.0, kap(rng), rng);
    const CMatrix u = ll::propagate(grid, basis).total;
    worst_unitarity = std::max(worst_unitarity, ll::unitarity_error(u));
    const auto range = ll::objective_range(sys);
    const double j = ll::objective(sys, u);
    worst_excess = std::max({worst_excess, j - range.j_max, range.j_min - j});
  }
  report(2, "unitarity and range", worst_unitarity < 1e-12 && worst_excess <= 1e-10,
         fmt("10^4 propagations, max ||U'U-I||_F %.3e (< 1e-12), max range excess %.3e (<= 1e-10)",
             worst_unitarity, worst_excess));
}

void boundary_counterexample() {
  const double kappa = ll::kPi / std::sqrt(3.0);
  const auto inst = ll::boundary_trap_instance(1.0, 4, kappa);
  const double minus_identity = (ll::propagate(inst.grid, inst.basis).total + CMatrix::Identity(2, 2)).norm();
  const auto v = ll::verify_boundary_trap(inst, 1000, 1e-3 * kappa, 0);
  const auto cone = ll::boundary_cone_surjectivity(inst.grid, ll::psi_tangent_map(inst.grid, inst.basis));
  const bool a = minus_identity < 1e-10;
  const bool b = v.is_trap && v.max_inward_gain <= 1e-10 && std::abs(v.j_at_corner) < 1e-12 &&
                 std::abs(v.j_global_max - std::sqrt(1.5)) < 1e-12;
  const bool c = !cone.surjective && cone.witness.has_value();
  std::string witness = "none";
  if (cone.witness) witness = fmt("(%.4f, %.4f, %.4f)", (*cone.witness)(0), (*cone.witness)(1), (*cone.witness)(2));
  report(3, "boundary-trap counterexample", a && b && c,
         fmt("kappa_thr %.6f; (a) ||U+I|| %.2e; (b) is_trap %d, max inward gain %.3e, J(corner) %.1e, "
             "J_max %.6f; (c) cone surjective %d, witness %s",
             inst.kappa_thr, minus_identity, v.is_trap, v.max_inward_gain, v.j_at_corner, v.j_global_max,
             cone.surjective, witness.c_str()));
}

void analytic_landscape() {
  const auto scan = ll::analytic2d_trap_free_scan(400, 0.15, false, ll::resolve_threads(0));
  const auto sc = ll::slice_census_2d(-1.4, 1.4, 101, 0.15, ll::resolve_threads(0));
  bool one_max = true;
  double loc_err = 0.0;
  for (std::size_t k = 0; k < sc.per_slice.size(); ++k) {
    const auto& r = sc.per_slice[k];
    one_max = one_max && r.census_maxima == 1;
    loc_err = std::max(loc_err, std::abs(r.census_max_loc - std::atan(-std::sqrt(std::cos(sc.c_values[k]) / 3.0))));
  }
  const double target = 4.0 / (3.0 * std::sqrt(3.0) * ll::kPi);
  const auto& mid = sc.per_slice[50];
  const double val_err = std::max(std::abs(mid.closed_form.max_val - target), std::abs(mid.census_max_val - target));
  const bool pass = scan.min_grad_norm > 0.05 && sc.per_slice.size() == 101 && one_max && loc_err < 1e-8 &&
                    sc.c_values[50] == 0.0 && val_err < 1e-9;
  report(4, "analytic two-control landscape", pass,
         fmt("(a) min |grad| %.4f at (%.3f, %.3f) (> 0.05); (b) 101 slices, one max each %d, "
             "max location error %.2e (< 1e-8), max_val(0) %.12f error %.1e (< 1e-9)",
             scan.min_grad_norm, scan.argmin_e1, scan.argmin_e2, one_max, loc_err, mid.closed_form.max_val,
             val_err));
}

void censuses() {
  auto sin_fn = [](double x) { return std::sin(x); };
  auto cos_fn = [](double x) { return std::cos(x); };
  const auto s = ll::critical_value_census_1d(sin_fn, cos_fn, -20.0, 20.0, 4001);
  const auto s_oracle = oracle::brute_force_roots(cos_fn, -20.0, 20.0, 400001);
  const bool sin_ok = s.distinct_values.size() == 2 && std::abs(s.distinct_values[0] + 1.0) < 1e-10 &&
                      std::abs(s.distinct_values[1] - 1.0) < 1e-10 &&
                      s.critical_points.size() == s_oracle.size();

  auto sinc = [](double x) { return std::sin(x) / x; };
  auto dsinc = [](double x) { return (x * std::cos(x) - std::sin(x)) / (x * x); };
  const auto c = ll::critical_value_census_1d(sinc, dsinc, 0.1, 30.0, 4001);
  const auto c_oracle = oracle::brute_force_roots(dsinc, 0.1, 30.0, 400001);
  std::vector<double> values = c.critical_values;
  std::sort(values.begin(), values.end());
  double gap = 1e300;
  for (std::size_t k = 1; k < values.size(); ++k) gap = std::min(gap, values[k] - values[k - 1]);
  const bool sinc_ok = c.critical_points.size() == c_oracle.size() && c.distinct_values.size() == values.size() &&
                       gap > 1e-6;
  // pi/2 + k pi lies in [-20, 20] for k = -6..5; k = 6 gives 20.42
  report(5, "critical-value censuses", sin_ok && sinc_ok,
         fmt("sin: %zu critical points (brute-force oracle %zu: pi/2 + k pi, k = -6..5), distinct values "
             "{%.12f, %.12f}; sinc: %zu critical points (oracle %zu), %zu distinct values, min gap %.3e (> 1e-6)",
             s.critical_points.size(), s_oracle.size(), s.distinct_values.empty() ? 0.0 : s.distinct_values.front(),
             s.distinct_values.empty() ? 0.0 : s.distinct_values.back(), c.critical_points.size(), c_oracle.size(),
             c.distinct_values.size(), gap));
}

void trap_halts_ascent() {
  const double kappa = ll::kPi / std::sqrt(3.0);
  const auto inst = ll::boundary_trap_instance(1.0, 4, kappa);
  const double j_max = ll::objective_range(inst.system).j_max;
  const auto at_trap = ll::gradient_ascent(inst.system, inst.grid, inst.basis);
  int reached = 0;
  for (unsigned s = 0; s < 50; ++s) {
    std::mt19937_64 rng(1000 + s);
    const auto start = ll::ControlGrid::uniform(3, 4, 1.0, kappa, rng);
    if (ll::gradient_ascent(inst.system, start, inst.basis).terminal.j_value >= j_max - 1e-4) ++reached;
  }
  const bool pass = at_trap.converged && at_trap.terminal.classification == ll::PointClass::boundary_trap_max &&
                    at_trap.terminal.j_value < j_max - 1.0 && reached >= 1;
  report(6, "trap halts ascent", pass,
         fmt("from corner: %s after %d steps, J %.2e (< J_max - 1); interior starts reaching J_max - 1e-4: %d/50",
             ll::to_string(at_trap.terminal.classification), at_trap.iterates.back().step,
             at_trap.terminal.j_value, reached));
}

void cli_determinism() {
  namespace cli = ll::cli;
  const std::vector<std::vector<std::string>> runs{
      {"basis", "--N", "3"},
      {"propagate", "--system", "random", "--grid", "random", "--seed", "4"},
      {"scan", "--steps", "9", "--seed", "1"},
      {"ascent", "--seed", "2"},
      {"basins", "--count", "16", "--seed", "3"},
      {"rank", "--grid", "random", "--seed", "6"},
      {"ce-boundary", "--seed", "8"},
      {"ce-slice"},
      {"ce-scan2d", "--steps", "50"},
      {"census1d", "--fn", "sinc", "--a", "0.1", "--b", "30"},
      {"kappa-thr", "--N", "3"}};
  int identical = 0;
  std::string mismatch;
  for (const auto& args : runs) {
    std::string payload[2];
    for (int rep = 0; rep < 2; ++rep) {
      std::vector<std::string> full{"landscape-lab"};
      full.insert(full.end(), args.begin(), args.end());
      full.insert(full.end(), {"--omit-wall-time", "--threads", rep == 0 ? "1" : "3"});
      std::vector<const char*> argv;
      for (const auto& a : full) argv.push_back(a.c_str());
      std::ostringstream out, err;
      cli::main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
      auto j = cli::Json::parse(out.str());
      j["config"].erase("threads");  // the only intended difference
      payload[rep] = j.dump();
    }
    if (payload[0] == payload[1]) ++identical;
    else mismatch += args[0] + " ";
  }
  report(7, "determinism", identical == static_cast<int>(runs.size()),
         fmt("%d/%zu commands byte-identical across repeated runs with 1 and 3 threads%s%s", identical, runs.size(),
             mismatch.empty() ? "" : "; differing: ", mismatch.c_str()));
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  gradient_oracle();
  unitarity_and_range();
  boundary_counterexample();
  analytic_landscape();
  censuses();
  trap_halts_ascent();
  cli_determinism();
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("acceptance: %d/7 criteria passed in %.1f s\n", 7 - failures, seconds);
  return failures;
}

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

// Critical points of box-constrained landscapes: classification, projected
// gradient ascent, multistart basin statistics and 1D critical-value censuses.

#ifndef LANDSCAPE_LAB_TRAPS_HPP
#define LANDSCAPE_LAB_TRAPS_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "landscape_lab/core.hpp"
#include "landscape_lab/landscape.hpp"
#include "landscape_lab/qdyn.hpp"

namespace landscape_lab {

struct Tolerances {
  double grad = 1e-8;            // projected-gradient criticality
  double hess_step_rel = 1e-4;   // Hessian finite-difference step, relative to kappa
  double root = 1e-10;           // bisection bracket width
  double merge = 1e-6;           // critical-value deduplication
  double success_margin_rel = 1e-4;  // relative to j_max - j_min
  double active = 1e-9;          // active-set detection, relative to kappa
  double degenerate = 1e-6;      // |Hessian eigenvalue| at or below this is zero
  double rank = 1e-8;            // singular-value cutoff, relative to the largest
};

enum class PointClass {
  interior_max,
  interior_min,
  interior_saddle,
  boundary_trap_max,
  boundary_trap_min,
  regular,
};

inline const char* to_string(PointClass c) {
  switch (c) {
    case PointClass::interior_max: return "interior-max";
    case PointClass::interior_min: return "interior-min";
    case PointClass::interior_saddle: return "interior-saddle";
    case PointClass::boundary_trap_max: return "boundary-trap-max";
    case PointClass::boundary_trap_min: return "boundary-trap-min";
    case PointClass::regular: return "regular";
  }
  return "unknown";
}

struct CriticalPointReport {
  ControlGrid location;
  double j_value = 0.0;
  double grad_norm_projected = 0.0;
  std::vector<ActiveConstraint> active_set;
  PointClass classification = PointClass::regular;
  /// Eigenvalues of the symmetrized Hessian over the free coordinates, ascending.
  std::vector<double> hessian_eigenvalues;
  bool degenerate = false;
};

namespace detail {

/// Zeroes gradient components that would leave the box for an ascent step
/// (sign = +1) or a descent step (sign = -1).
inline RMatrix project_gradient(const RMatrix& g, const std::vector<ActiveConstraint>& active,
                                double sign) {
  RMatrix p = g;
  for (const auto& a : active) {
    const double v = sign * g(a.j, a.z);
    if (a.side == BoundSide::pinned || (a.side == BoundSide::upper && v > 0.0) ||
        (a.side == BoundSide::lower && v < 0.0))
      p(a.j, a.z) = 0.0;
  }
  return p;
}

inline std::vector<std::pair<int, int>> free_coordinates(const ControlGrid& grid,
                                                         const std::vector<ActiveConstraint>& active) {
  std::vector<bool> taken(static_cast<std::size_t>(grid.parameter_count()), false);
  for (const auto& a : active) taken[static_cast<std::size_t>(a.z * grid.controls() + a.j)] = true;
  std::vector<std::pair<int, int>> out;
  for (int z = 0; z < grid.segments(); ++z)
    for (int j = 0; j < grid.controls(); ++j)
      if (!taken[static_cast<std::size_t>(z * grid.controls() + j)]) out.emplace_back(j, z);
  return out;
}

}  // namespace detail

/// Central finite-difference Hessian of J over the given coordinates, built
/// from the analytic gradient. Not symmetrized.
inline RMatrix free_hessian(const QuantumSystem& system, const ControlGrid& grid,
                            const BasisSet& basis, const std::vector<std::pair<int, int>>& coords,
                            double step) {
  const auto n = static_cast<Eigen::Index>(coords.size());
  RMatrix h(n, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    RMatrix plus = grid.values();
    RMatrix minus = grid.values();
    plus(coords[c].first, coords[c].second) += step;
    minus(coords[c].first, coords[c].second) -= step;
    const RMatrix gp = detail::gradient_values(system, basis, plus, grid.horizon());
    const RMatrix gm = detail::gradient_values(system, basis, minus, grid.horizon());
    for (Eigen::Index r = 0; r < n; ++r)
      h(r, c) = (gp(coords[r].first, coords[r].second) - gm(coords[r].first, coords[r].second)) /
                (2.0 * step);
  }
  return h;
}

/// First- and second-order classification of a grid point under the box
/// constraints. A point is a boundary trap for maximization when no admissible
/// first-order move increases J and the free-coordinate Hessian has no
/// positive eigenvalue.
inline CriticalPointReport classify_point(const QuantumSystem& system, const ControlGrid& grid,
                                          const BasisSet& basis, const Tolerances& tol = {}) {
  CriticalPointReport rep{grid};
  rep.j_value = objective(system, grid, basis);
  const RMatrix g = gradient(system, grid, basis).values;
  rep.active_set = active_set(grid, tol.active);
  const double ascent_norm = detail::project_gradient(g, rep.active_set, +1.0).norm();
  const double descent_norm = detail::project_gradient(g, rep.active_set, -1.0).norm();
  rep.grad_norm_projected = std::min(ascent_norm, descent_norm);

  const auto coords = detail::free_coordinates(grid, rep.active_set);
  const double step = tol.hess_step_rel * (grid.bound() > 0.0 ? grid.bound() : 1.0);
  const RMatrix h = free_hessian(system, grid, basis, coords, step);
  bool has_positive = false;
  bool has_negative = false;
  if (h.size() > 0) {
    Eigen::SelfAdjointEigenSolver<RMatrix> eig(0.5 * (h + h.transpose()), Eigen::EigenvaluesOnly);
    for (Eigen::Index k = 0; k < eig.eigenvalues().size(); ++k) {
      const double e = eig.eigenvalues()(k);
      rep.hessian_eigenvalues.push_back(e);
      if (std::abs(e) <= tol.degenerate) rep.degenerate = true;
      has_positive = has_positive || e > tol.degenerate;
      has_negative = has_negative || e < -tol.degenerate;
    }
  }

  if (rep.grad_norm_projected > tol.grad) {
    rep.classification = PointClass::regular;
    rep.degenerate = false;
    return rep;
  }

  bool pushes_outward = true;
  for (const auto& a : rep.active_set) {
    if (a.side == BoundSide::pinned) continue;
    const double outward = a.side == BoundSide::upper ? g(a.j, a.z) : -g(a.j, a.z);
    pushes_outward = pushes_outward && outward >= -tol.grad;
  }
  const bool max_like = ascent_norm <= tol.grad && !has_positive && pushes_outward;
  const bool min_like = descent_norm <= tol.grad && !has_negative;
  // A flat point satisfies both; it is reported as a degenerate saddle.
  if (max_like && min_like) {
    rep.degenerate = true;
    rep.classification = PointClass::interior_saddle;
  } else if (max_like) {
    rep.classification =
        rep.active_set.empty() ? PointClass::interior_max : PointClass::boundary_trap_max;
  } else if (min_like) {
    rep.classification =
        rep.active_set.empty() ? PointClass::interior_min : PointClass::boundary_trap_min;
  } else {
    rep.classification = PointClass::interior_saddle;
  }
  return rep;
}

struct AscentSettings {
  double armijo = 1e-4;
  double gtol = 1e-8;
  int max_iters = 2000;
  int max_backtracks = 60;
};

enum class AscentStop { gradient_tolerance, stalled, max_iterations };

inline const char* to_string(AscentStop s) {
  switch (s) {
    case AscentStop::gradient_tolerance: return "gradient-tolerance";
    case AscentStop::stalled: return "stalled";
    case AscentStop::max_iterations: return "max-iterations";
  }
  return "unknown";
}

struct AscentIterate {
  int step = 0;
  double j_value = 0.0;
  double projected_grad_norm = 0.0;
};

struct AscentTrace {
  std::vector<AscentIterate> iterates;
  bool converged = false;
  AscentStop stop = AscentStop::max_iterations;
  CriticalPointReport terminal;
};

/// Projected gradient ascent on the control box with backtracking (halving)
/// line search. The trial step starts at length kappa along the projected
/// gradient and is clipped to [-kappa, kappa]. A step is accepted only if it
/// satisfies the Armijo condition, so J never decreases. `stalled` means no
/// step length down to 2^-max_backtracks improved J.
inline AscentTrace gradient_ascent(const QuantumSystem& system, const ControlGrid& start,
                                   const BasisSet& basis, const AscentSettings& settings = {},
                                   const Tolerances& tol = {}) {
  const double kappa = start.bound();
  ControlGrid x = start;
  double j = objective(system, x, basis);
  AscentTrace trace{{}, false, AscentStop::max_iterations, CriticalPointReport{start}};
  bool stalled = false;
  for (int k = 0;; ++k) {
    if (!std::isfinite(j)) throw NumericalFault("gradient_ascent: non-finite objective");
    const RMatrix g = gradient(system, x, basis).values;
    const RMatrix p = detail::project_gradient(g, active_set(x, tol.active), +1.0);
    const double pnorm = p.norm();
    trace.iterates.push_back({k, j, pnorm});
    if (pnorm < settings.gtol) {
      trace.stop = AscentStop::gradient_tolerance;
      break;
    }
    if (stalled) {
      trace.stop = AscentStop::stalled;
      break;
    }
    if (k >= settings.max_iters) {
      trace.stop = AscentStop::max_iterations;
      break;
    }
    double step = kappa / pnorm;
    bool accepted = false;
    double gain = 0.0;
    for (int b = 0; b <= settings.max_backtracks && step > 0.0; ++b, step *= 0.5) {
      const RMatrix trial = (x.values() + step * p).cwiseMax(-kappa).cwiseMin(kappa);
      const double jt = detail::objective_values(system, basis, trial, x.horizon());
      const double predicted = (g.array() * (trial - x.values()).array()).sum();
      if (jt >= j && jt - j >= settings.armijo * predicted) {
        x = x.with_values(trial);
        gain = jt - j;
        j = jt;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      trace.stop = AscentStop::stalled;
      break;
    }
    // gain below the resolution of J: record the point, then stop
    stalled = gain <= 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(j));
  }
  trace.converged = trace.stop != AscentStop::max_iterations;
  Tolerances terminal_tol = tol;
  terminal_tol.grad = std::max(tol.grad, settings.gtol);
  // a stalled iterate is critical to the resolution ascent could reach
  if (trace.stop == AscentStop::stalled)
    terminal_tol.grad = std::max(terminal_tol.grad, trace.iterates.back().projected_grad_norm);
  trace.terminal = classify_point(system, x, basis, terminal_tol);
  return trace;
}

struct BasinSampler {
  int count = 1;
  unsigned long long seed = 0;
  double kappa = 1.0;
  int segments = 1;
  double horizon = 1.0;
};

struct BasinRun {
  unsigned long long seed = 0;
  double start_j = 0.0;
  double terminal_j = 0.0;
  int iterations = 0;
  AscentStop stop = AscentStop::max_iterations;
  PointClass classification = PointClass::regular;
  bool trapped = false;
};

struct BasinCensus {
  double trapped_fraction = 0.0;
  double j_max = 0.0;
  double success_threshold = 0.0;
  std::vector<BasinRun> runs;
};

/// Multistart ascent from uniform starts in the control box. Run i uses seed
/// sampler.seed + i, so results do not depend on the worker count.
inline BasinCensus basin_census(const QuantumSystem& system, const BasisSet& basis,
                                const BasinSampler& sampler, const AscentSettings& settings = {},
                                const Tolerances& tol = {}, unsigned threads = 1) {
  if (sampler.count < 1) throw DomainError("basin_census: count must be >= 1");
  const ObjectiveRange range = objective_range(system);
  BasinCensus out;
  out.j_max = range.j_max;
  out.success_threshold = range.j_max - tol.success_margin_rel * range.width();
  out.runs.resize(static_cast<std::size_t>(sampler.count));
  parallel_for(out.runs.size(), threads, [&](std::size_t i) {
    BasinRun& run = out.runs[i];
    run.seed = sampler.seed + i;
    std::mt19937_64 rng(run.seed);
    const ControlGrid start = ControlGrid::uniform(basis.size(), sampler.segments, sampler.horizon,
                                                   sampler.kappa, rng);
    const AscentTrace trace = gradient_ascent(system, start, basis, settings, tol);
    run.start_j = trace.iterates.front().j_value;
    run.terminal_j = trace.terminal.j_value;
    run.iterations = trace.iterates.back().step;
    run.stop = trace.stop;
    run.classification = trace.terminal.classification;
    run.trapped = range.width() > 0.0 && run.terminal_j < out.success_threshold;
  });
  const auto trapped = std::count_if(out.runs.begin(), out.runs.end(),
                                     [](const BasinRun& r) { return r.trapped; });
  out.trapped_fraction = static_cast<double>(trapped) / static_cast<double>(out.runs.size());
  return out;
}

enum class CriticalKind { maximum, minimum, flat };

struct CensusResult1D {
  std::vector<double> critical_points;
  std::vector<double> critical_values;
  std::vector<CriticalKind> kinds;
  std::vector<double> distinct_values;
  /// Grid cells where |f'| dips without changing sign: possible unbracketed
  /// pairs of critical points.
  std::vector<std::pair<double, double>> coarse_cells;
};

/// Brackets sign changes of f' on a uniform grid of `grid_points` nodes over
/// [a, b], bisects each bracket to width tol.root and merges critical values
/// closer than tol.merge. Critical points that do not flip the sign of f'
/// (including endpoints and flat stretches) are not reported; suspicious cells
/// are listed in coarse_cells.
inline CensusResult1D critical_value_census_1d(const std::function<double(double)>& f,
                                               const std::function<double(double)>& f_prime,
                                               double a, double b, int grid_points,
                                               const Tolerances& tol = {}) {
  if (!(a < b)) throw DomainError("critical_value_census_1d: need a < b");
  if (grid_points < 2) throw DomainError("critical_value_census_1d: need at least 2 grid points");
  const auto n = static_cast<std::size_t>(grid_points);
  std::vector<double> xs(n), ds(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = i + 1 == n ? b : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    ds[i] = f_prime(xs[i]);
    if (!std::isfinite(ds[i])) throw DomainError("critical_value_census_1d: f' not finite");
  }

  CensusResult1D out;
  auto record = [&](double x, double left, double right) {
    out.critical_points.push_back(x);
    out.critical_values.push_back(f(x));
    out.kinds.push_back(left > 0.0 && right < 0.0   ? CriticalKind::maximum
                        : left < 0.0 && right > 0.0 ? CriticalKind::minimum
                                                    : CriticalKind::flat);
  };
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (ds[i] == 0.0) {
      // an exact zero at a node counts only when f' flips sign across it
      if (i > 0 && ds[i - 1] * ds[i + 1] < 0.0) record(xs[i], ds[i - 1], ds[i + 1]);
      continue;
    }
    if (ds[i] * ds[i + 1] < 0.0) {
      double lo = xs[i], hi = xs[i + 1], dlo = ds[i];
      for (int it = 0; it < 200 && hi - lo > tol.root; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double dm = f_prime(mid);
        if (dm == 0.0) {
          lo = hi = mid;
          break;
        }
        if ((dm < 0.0) == (dlo < 0.0)) {
          lo = mid;
          dlo = dm;
        } else {
          hi = mid;
        }
      }
      record(0.5 * (lo + hi), ds[i], ds[i + 1]);
    } else if (i > 0 && ds[i - 1] * ds[i] > 0.0 && std::abs(ds[i]) < std::abs(ds[i - 1]) &&
               std::abs(ds[i]) < std::abs(ds[i + 1])) {
      out.coarse_cells.emplace_back(xs[i - 1], xs[i + 1]);
    }
  }

  std::vector<double> sorted = out.critical_values;
  std::sort(sorted.begin(), sorted.end());
  for (double v : sorted)
    if (out.distinct_values.empty() || v - out.distinct_values.back() > tol.merge)
      out.distinct_values.push_back(v);
  return out;
}

}  // namespace landscape_lab

#endif  // LANDSCAPE_LAB_TRAPS_HPP

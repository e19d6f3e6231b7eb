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

// Two explicit landscapes with traps:
//  * a qubit driven by sigma1..sigma3 with every control at its upper bound,
//    which is a local maximum of J for a tuned observable;
//  * the analytic two-parameter landscape
//      J(e1, e2) = (2/pi) (tan^3 e1 - tan e1 cos e2 + tan(e2/2)),
//    which has no critical point, yet every slice e2 = c has a local maximum.

#ifndef LANDSCAPE_LAB_COUNTEREXAMPLES_HPP
#define LANDSCAPE_LAB_COUNTEREXAMPLES_HPP

#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "landscape_lab/core.hpp"
#include "landscape_lab/landscape.hpp"
#include "landscape_lab/qdyn.hpp"
#include "landscape_lab/traps.hpp"

namespace landscape_lab {

// ---------------------------------------------------------------------------
// Qubit boundary trap
// ---------------------------------------------------------------------------

struct BoundaryTrapInstance {
  double horizon = 1.0;
  int segments = 1;
  double kappa = 0.0;
  double alpha = 0.0;  // 2 sqrt(3) T kappa
  double kappa_thr = 0.0;
  BasisSet basis;
  QuantumSystem system;
  ControlGrid grid;  // every control at +kappa
};

/// O(alpha) = sin(alpha + pi/3) sigma1 + sin(alpha - pi/3) sigma2 + sin(alpha) sigma3.
inline CMatrix boundary_trap_observable(double alpha) {
  const BasisSet pauli = build_su_basis(2);
  return std::sin(alpha + kPi / 3.0) * pauli[0] + std::sin(alpha - kPi / 3.0) * pauli[1] +
         std::sin(alpha) * pauli[2];
}

/// The qubit instance with rho0 = (I + sigma3)/2. Requires the segment
/// duration condition T/Z < 2 pi / (2 sqrt(3) kappa); the equality case is
/// rejected.
inline BoundaryTrapInstance boundary_trap_instance(double horizon, int segments, double kappa) {
  if (!(horizon > 0.0) || segments < 1 || !(kappa >= 0.0))
    throw DomainError("boundary_trap_instance: need T > 0, Z >= 1, kappa >= 0");
  BasisSet basis = build_su_basis(2);
  const double kappa_thr = kappa_threshold(basis, horizon, segments).value;
  const double alpha = 2.0 * std::sqrt(3.0) * horizon * kappa;
  // alpha / Z is the spectral spread times the segment duration.
  if (alpha / segments >= 2.0 * kPi * (1.0 - 1e-12)) {
    throw DomainError("boundary_trap_instance: segment condition violated, kappa = " +
                      std::to_string(kappa) + " must be below kappa_thr = " +
                      std::to_string(kappa_thr));
  }
  CMatrix rho0 = CMatrix::Zero(2, 2);
  rho0(0, 0) = 1.0;
  QuantumSystem system(rho0, boundary_trap_observable(alpha));
  ControlGrid grid = ControlGrid::constant(3, segments, horizon, kappa, kappa);
  return {horizon, segments, kappa, alpha, kappa_thr, std::move(basis), std::move(system),
          std::move(grid)};
}

struct BoundaryTrapVerification {
  bool is_trap = false;
  double j_at_corner = 0.0;
  double max_inward_gain = 0.0;
  double j_global_max = 0.0;
  /// Smallest outward-pointing gradient component over the active set. A
  /// positive value means the trap already holds at first order.
  double min_outward_gradient = 0.0;
  bool first_order = false;
  /// Norm of the gradient after removing outward components at active
  /// bounds. Nonzero means some admissible coordinate move raises J.
  double projected_ascent_norm = 0.0;
};

/// Samples `samples` admissible perturbations of norm `radius`: active
/// coordinates move inward only, free coordinates either way. The point is a
/// trap when none of them raises J by more than 1e-10, the projected ascent
/// gradient vanishes (tol.grad), and J is at least 1e-6 below the attainable
/// maximum. Samples rarely approach the faces of the inward orthant, so the
/// gradient condition catches single-coordinate escapes they miss.
inline BoundaryTrapVerification verify_boundary_trap(const QuantumSystem& system,
                                                     const ControlGrid& grid, const BasisSet& basis,
                                                     int samples, double radius,
                                                     unsigned long long seed,
                                                     const Tolerances& tol = {}) {
  BoundaryTrapVerification out;
  out.j_at_corner = objective(system, grid, basis);
  out.j_global_max = objective_range(system).j_max;
  const auto active = active_set(grid, tol.active);
  const RMatrix g = gradient(system, grid, basis).values;

  RMatrix inward = RMatrix::Zero(grid.controls(), grid.segments());
  out.min_outward_gradient = std::numeric_limits<double>::infinity();
  for (const auto& a : active) {
    if (a.side == BoundSide::pinned) continue;
    const double sign = a.side == BoundSide::upper ? -1.0 : 1.0;
    inward(a.j, a.z) = sign;
    out.min_outward_gradient = std::min(out.min_outward_gradient, -sign * g(a.j, a.z));
  }
  if (!std::isfinite(out.min_outward_gradient)) out.min_outward_gradient = 0.0;
  out.first_order = !active.empty() && out.min_outward_gradient > tol.grad;
  out.projected_ascent_norm = detail::project_gradient(g, active, +1.0).norm();

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  out.max_inward_gain = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    RMatrix d(grid.controls(), grid.segments());
    for (int z = 0; z < grid.segments(); ++z) {
      for (int j = 0; j < grid.controls(); ++j) {
        const double x = normal(rng);
        d(j, z) = inward(j, z) == 0.0 ? x : inward(j, z) * std::abs(x);
      }
    }
    d *= radius / d.norm();
    const RMatrix moved = (grid.values() + d).cwiseMax(-grid.bound()).cwiseMin(grid.bound());
    const double gain = detail::objective_values(system, basis, moved, grid.horizon()) - out.j_at_corner;
    out.max_inward_gain = std::max(out.max_inward_gain, gain);
  }
  out.is_trap = out.max_inward_gain <= 1e-10 && out.projected_ascent_norm <= tol.grad &&
                out.j_at_corner < out.j_global_max - 1e-6;
  return out;
}

inline BoundaryTrapVerification verify_boundary_trap(const BoundaryTrapInstance& inst, int samples,
                                                     double radius, unsigned long long seed) {
  return verify_boundary_trap(inst.system, inst.grid, inst.basis, samples, radius, seed);
}

// ---------------------------------------------------------------------------
// Analytic two-parameter landscape
// ---------------------------------------------------------------------------

inline constexpr double kDefaultMargin = 0.15;

/// A point of the open square (-pi/2, pi/2)^2 kept `margin` away from its edges.
class Analytic2DPoint {
 public:
  Analytic2DPoint(double e1, double e2, double margin = kDefaultMargin)
      : e1_(e1), e2_(e2), margin_(margin) {
    if (!(margin > 0.0) || margin >= kPi / 2.0)
      throw DomainError("Analytic2DPoint: margin must lie in (0, pi/2)");
    const double limit = kPi / 2.0 - margin;
    if (!(std::abs(e1) <= limit) || !(std::abs(e2) <= limit))
      throw DomainError("Analytic2DPoint: point outside the margin-restricted square");
  }
  double e1() const { return e1_; }
  double e2() const { return e2_; }
  double margin() const { return margin_; }

 private:
  double e1_;
  double e2_;
  double margin_;
};

struct Gradient2D {
  double d1 = 0.0;
  double d2 = 0.0;
  double norm() const { return std::hypot(d1, d2); }
};

namespace detail {

inline double analytic2d_value(double e1, double e2) {
  const double t = std::tan(e1);
  return (2.0 / kPi) * (t * t * t - t * std::cos(e2) + std::tan(0.5 * e2));
}

inline Gradient2D analytic2d_partials(double e1, double e2) {
  const double t = std::tan(e1);
  const double sec2_e1 = 1.0 + t * t;
  const double th = std::tan(0.5 * e2);
  const double sec2_half = 1.0 + th * th;
  return {(2.0 / kPi) * sec2_e1 * (3.0 * t * t - std::cos(e2)),
          (2.0 / kPi) * (t * std::sin(e2) + 0.5 * sec2_half)};
}

}  // namespace detail

inline double analytic2d_eval(const Analytic2DPoint& p) { return detail::analytic2d_value(p.e1(), p.e2()); }

inline Gradient2D analytic2d_gradient(const Analytic2DPoint& p) {
  return detail::analytic2d_partials(p.e1(), p.e2());
}

struct SliceExtrema {
  double c = 0.0;
  double max_loc = 0.0;
  double max_val = 0.0;
  double min_loc = 0.0;
  double min_val = 0.0;
};

/// Closed-form extrema of e1 -> J(e1, c): tan e1 = -+sqrt(cos c / 3).
inline SliceExtrema slice_critical_points(double c, double margin = kDefaultMargin) {
  const Analytic2DPoint check(0.0, c, margin);
  const double root = std::sqrt(std::cos(c) / 3.0);
  SliceExtrema s;
  s.c = c;
  s.max_loc = std::atan(-root);
  s.min_loc = std::atan(root);
  const double extremum = (2.0 / (3.0 * std::sqrt(3.0))) * std::pow(std::cos(c), 1.5);
  s.max_val = (2.0 / kPi) * (extremum + std::tan(0.5 * c));
  s.min_val = (2.0 / kPi) * (-extremum + std::tan(0.5 * c));
  return s;
}

struct SliceRecord {
  SliceExtrema closed_form;
  /// Independent numerical census of the same slice.
  int census_maxima = 0;
  int census_minima = 0;
  double census_max_loc = 0.0;
  double census_max_val = 0.0;
  double census_min_loc = 0.0;
  double census_min_val = 0.0;
};

struct SliceCensus {
  std::vector<double> c_values;
  std::vector<SliceRecord> per_slice;
};

/// Numerical census of the slice e2 = c over the margin-restricted e1 range.
inline CensusResult1D slice_census_1d(double c, double margin = kDefaultMargin,
                                      int grid_points = 2001, const Tolerances& tol = {}) {
  const double limit = kPi / 2.0 - margin;
  return critical_value_census_1d([c](double e1) { return detail::analytic2d_value(e1, c); },
                                  [c](double e1) { return detail::analytic2d_partials(e1, c).d1; },
                                  -limit, limit, grid_points, tol);
}

/// Slices at `steps` equally spaced c in [c_min, c_max]. Every slice is
/// checked to carry exactly one interior maximum and one interior minimum;
/// anything else raises NumericalFault.
inline SliceCensus slice_census_2d(double c_min, double c_max, int steps,
                                   double margin = kDefaultMargin, unsigned threads = 1) {
  if (steps < 1) throw DomainError("slice_census_2d: steps must be >= 1");
  if (!(c_min <= c_max)) throw DomainError("slice_census_2d: need c_min <= c_max");
  const double limit = kPi / 2.0 - margin;
  if (!(std::abs(c_min) <= limit) || !(std::abs(c_max) <= limit))
    throw DomainError("slice_census_2d: range leaves the margin-restricted domain");
  SliceCensus out;
  out.c_values.resize(static_cast<std::size_t>(steps));
  out.per_slice.resize(static_cast<std::size_t>(steps));
  for (int k = 0; k < steps; ++k)
    out.c_values[static_cast<std::size_t>(k)] =
        steps == 1 ? c_min : c_min + (c_max - c_min) * k / static_cast<double>(steps - 1);
  parallel_for(out.c_values.size(), threads, [&](std::size_t k) {
    const double c = out.c_values[k];
    SliceRecord& rec = out.per_slice[k];
    rec.closed_form = slice_critical_points(c, margin);
    const CensusResult1D census = slice_census_1d(c, margin);
    for (std::size_t i = 0; i < census.critical_points.size(); ++i) {
      if (census.kinds[i] == CriticalKind::maximum) {
        ++rec.census_maxima;
        rec.census_max_loc = census.critical_points[i];
        rec.census_max_val = census.critical_values[i];
      } else if (census.kinds[i] == CriticalKind::minimum) {
        ++rec.census_minima;
        rec.census_min_loc = census.critical_points[i];
        rec.census_min_val = census.critical_values[i];
      }
    }
    if (rec.census_maxima != 1 || rec.census_minima != 1)
      throw NumericalFault("slice_census_2d: slice c = " + std::to_string(c) +
                           " does not have exactly one maximum and one minimum");
  });
  return out;
}

struct TrapFreeScan {
  double min_grad_norm = std::numeric_limits<double>::infinity();
  double argmin_e1 = 0.0;
  double argmin_e2 = 0.0;
  int grid_steps = 0;
};

/// Minimum gradient norm over a grid_steps x grid_steps uniform grid of the
/// margin-restricted square. `negate` scans -J instead.
inline TrapFreeScan analytic2d_trap_free_scan(int grid_steps, double margin = kDefaultMargin,
                                              bool negate = false, unsigned threads = 1) {
  if (grid_steps < 10) throw DomainError("analytic2d_trap_free_scan: grid_steps must be >= 10");
  const Analytic2DPoint corner(0.0, 0.0, margin);
  const double limit = kPi / 2.0 - margin;
  const auto steps = static_cast<std::size_t>(grid_steps);
  auto coord = [&](std::size_t i) {
    return -limit + 2.0 * limit * static_cast<double>(i) / static_cast<double>(steps - 1);
  };
  std::vector<TrapFreeScan> rows(steps);
  parallel_for(steps, threads, [&](std::size_t i) {
    TrapFreeScan& row = rows[i];
    for (std::size_t k = 0; k < steps; ++k) {
      Gradient2D g = detail::analytic2d_partials(coord(i), coord(k));
      if (negate) g = {-g.d1, -g.d2};
      const double n = g.norm();
      if (n < row.min_grad_norm) {
        row.min_grad_norm = n;
        row.argmin_e1 = coord(i);
        row.argmin_e2 = coord(k);
      }
    }
  });
  TrapFreeScan best;
  for (const auto& row : rows)
    if (row.min_grad_norm < best.min_grad_norm) best = row;
  best.grid_steps = grid_steps;
  return best;
}

}  // namespace landscape_lab

#endif  // LANDSCAPE_LAB_COUNTEREXAMPLES_HPP

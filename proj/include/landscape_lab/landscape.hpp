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

// Control landscape J(eps) = Tr[O U_T(eps) rho0 U_T(eps)^dagger]: values,
// exact gradients, the attainable range, and local-surjectivity diagnostics
// for the control-to-unitary map.

#ifndef LANDSCAPE_LAB_LANDSCAPE_HPP
#define LANDSCAPE_LAB_LANDSCAPE_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "landscape_lab/core.hpp"
#include "landscape_lab/nnls.hpp"
#include "landscape_lab/qdyn.hpp"

namespace landscape_lab {

/// Initial density matrix and observable of a closed N-level system.
class QuantumSystem {
 public:
  QuantumSystem(CMatrix rho0, CMatrix observable)
      : rho0_(std::move(rho0)), observable_(std::move(observable)) {
    const Eigen::Index n = rho0_.rows();
    if (n < 2 || rho0_.cols() != n || observable_.rows() != n || observable_.cols() != n)
      throw DomainError("QuantumSystem: rho0 and observable must be square with matching size >= 2");
    if (hermiticity_error(rho0_) > 1e-12) throw DomainError("QuantumSystem: rho0 is not Hermitian");
    if (hermiticity_error(observable_) > 1e-12)
      throw DomainError("QuantumSystem: observable is not Hermitian");
    if (std::abs(rho0_.trace() - Complex(1.0, 0.0)) > 1e-12)
      throw DomainError("QuantumSystem: Tr rho0 must be 1");
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(rho0_, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -1e-12)
      throw DomainError("QuantumSystem: rho0 has a negative eigenvalue");
  }

  int dim() const { return static_cast<int>(rho0_.rows()); }
  const CMatrix& rho0() const { return rho0_; }
  const CMatrix& observable() const { return observable_; }

 private:
  CMatrix rho0_;
  CMatrix observable_;
};

struct ObjectiveRange {
  double j_min = 0.0;
  double j_max = 0.0;
  double width() const { return j_max - j_min; }
};

/// dJ/d eps(j, z), same shape as the control grid.
struct LandscapeGradient {
  RMatrix values;
};

/// Row j*Z + z holds the coordinates of -i U_T^dagger dU_T/d eps(j, z) in the
/// orthonormal basis B_k / sqrt(2).
struct TangentMap {
  RMatrix rows;
  int controls = 0;
  int segments = 0;
  /// Largest Frobenius distance between a left-translated derivative and its
  /// reassembly from coordinates; nonzero means it left Hermitian-traceless.
  double projection_residual = 0.0;

  int row_index(int j, int z) const { return j * segments + z; }
};

struct RankResult {
  int rank = 0;
  bool surjective = false;
  RVector singular_values;
};

enum class BoundSide { lower, upper, pinned };

struct ActiveConstraint {
  int j = 0;
  int z = 0;
  BoundSide side = BoundSide::upper;
};

struct ConeTestResult {
  bool surjective = true;
  std::optional<RVector> witness;
  double max_residual = 0.0;
  int directions_tested = 0;
  int active_count = 0;
};

struct KappaThreshold {
  double value = 0.0;
  /// True when the spectral spread used is the exact worst case (N = 2);
  /// otherwise it is an upper bound and the threshold is conservative.
  bool exact = false;
};

inline void require_unitary(const CMatrix& u, double tol, const char* what) {
  if (u.rows() != u.cols() || unitarity_error(u) > tol)
    throw DomainError(std::string(what) + ": matrix is not unitary within tolerance");
}

inline double objective(const QuantumSystem& system, const CMatrix& u) {
  if (u.rows() != system.dim() || u.cols() != system.dim())
    throw DomainError("objective: dimension mismatch");
  require_unitary(u, 1e-10, "objective");
  const Complex tr = (system.observable() * u * system.rho0() * u.adjoint()).trace();
  if (std::abs(tr.imag()) >= 1e-10) throw NumericalFault("objective: trace has imaginary part");
  return tr.real();
}

/// Attainable interval of J over all unitaries: sorted eigenvalues of O and
/// rho0 paired same-rank (max) or opposite-rank (min).
inline ObjectiveRange objective_range(const QuantumSystem& system) {
  Eigen::SelfAdjointEigenSolver<CMatrix> eo(system.observable(), Eigen::EigenvaluesOnly);
  Eigen::SelfAdjointEigenSolver<CMatrix> er(system.rho0(), Eigen::EigenvaluesOnly);
  std::vector<double> o(eo.eigenvalues().data(), eo.eigenvalues().data() + system.dim());
  std::vector<double> r(er.eigenvalues().data(), er.eigenvalues().data() + system.dim());
  std::sort(o.begin(), o.end());
  std::sort(r.begin(), r.end());
  ObjectiveRange range;
  const std::size_t n = o.size();
  for (std::size_t i = 0; i < n; ++i) {
    range.j_max += r[i] * o[i];
    range.j_min += r[n - 1 - i] * o[i];
  }
  return range;
}

namespace detail {

inline void require_system(const QuantumSystem& system, const BasisSet& basis) {
  if (system.dim() != basis.dim) throw DomainError("system dimension does not match basis");
}

inline double objective_values(const QuantumSystem& system, const BasisSet& basis,
                               const RMatrix& values, double horizon) {
  const CMatrix u = total_unitary(basis, values, horizon);
  return (system.observable() * u * system.rho0() * u.adjoint()).trace().real();
}

/// Shared prefix/suffix products: dU_T/d eps(j,z) = suffix[z] * L(j,z) * prefix[z].
struct ChainProducts {
  std::vector<SegmentSpectrum> spectra;
  std::vector<CMatrix> prefix;  // U_{z-1} ... U_1
  std::vector<CMatrix> suffix;  // U_Z ... U_{z+1}
  CMatrix total;
};

inline ChainProducts chain_products(const BasisSet& basis, const RMatrix& values, double horizon) {
  ChainProducts c;
  c.spectra = spectra(basis, values, horizon);
  const std::size_t segs = c.spectra.size();
  const CMatrix id = CMatrix::Identity(basis.dim, basis.dim);
  c.prefix.assign(segs, id);
  c.suffix.assign(segs, id);
  for (std::size_t z = 1; z < segs; ++z) c.prefix[z] = c.spectra[z - 1].unitary * c.prefix[z - 1];
  for (std::size_t z = segs - 1; z-- > 0;) c.suffix[z] = c.suffix[z + 1] * c.spectra[z + 1].unitary;
  c.total = c.spectra.back().unitary * c.prefix.back();
  return c;
}

inline RMatrix gradient_values(const QuantumSystem& system, const BasisSet& basis,
                               const RMatrix& values, double horizon) {
  require_system(system, basis);
  const ChainProducts c = chain_products(basis, values, horizon);
  RMatrix g(values.rows(), values.cols());
  const CMatrix tail = system.rho0() * c.total.adjoint() * system.observable();
  for (Eigen::Index z = 0; z < values.cols(); ++z) {
    const auto zi = static_cast<std::size_t>(z);
    // dJ = 2 Re Tr[O S L P rho0 U^dagger] = 2 Re Tr[L (P rho0 U^dagger O S)]
    const CMatrix m = c.prefix[zi] * tail * c.suffix[zi];
    for (Eigen::Index j = 0; j < values.rows(); ++j) {
      const CMatrix l = expm_frechet(c.spectra[zi], basis[static_cast<int>(j)]);
      g(j, z) = 2.0 * (l * m).trace().real();
    }
  }
  if (!g.allFinite()) throw NumericalFault("gradient: non-finite component");
  return g;
}

}  // namespace detail

inline double objective(const QuantumSystem& system, const ControlGrid& grid,
                        const BasisSet& basis) {
  detail::require_system(system, basis);
  return objective(system, propagate(grid, basis).total);
}

/// Exact gradient of J through the Frechet derivative of each segment propagator.
inline LandscapeGradient gradient(const QuantumSystem& system, const ControlGrid& grid,
                                  const BasisSet& basis) {
  return {detail::gradient_values(system, basis, grid.values(), grid.horizon())};
}

/// Gradient of phi_O(U) = Tr[O U rho0 U^dagger] with respect to right-translated
/// perturbations U -> U exp(i X), X = sum_k c_k B_k/sqrt(2): dJ = sum_k c_k g_k.
inline RVector observable_gradient(const QuantumSystem& system, const BasisSet& basis,
                                   const CMatrix& u) {
  detail::require_system(system, basis);
  const CMatrix m = system.rho0() * u.adjoint() * system.observable() * u;
  RVector g(basis.size());
  const Complex i(0.0, 1.0);
  for (int k = 0; k < basis.size(); ++k)
    g(k) = 2.0 * (i * basis[k] * m).trace().real() / std::sqrt(2.0);
  return g;
}

inline TangentMap psi_tangent_map(const ControlGrid& grid, const BasisSet& basis) {
  detail::require_compatible(grid.values(), basis);
  const detail::ChainProducts c = detail::chain_products(basis, grid.values(), grid.horizon());
  TangentMap tm;
  tm.controls = grid.controls();
  tm.segments = grid.segments();
  tm.rows = RMatrix::Zero(grid.parameter_count(), basis.size());
  const Complex minus_i(0.0, -1.0);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  const CMatrix u_dag = c.total.adjoint();
  for (int z = 0; z < grid.segments(); ++z) {
    const auto zi = static_cast<std::size_t>(z);
    const CMatrix left = u_dag * c.suffix[zi];
    for (int j = 0; j < grid.controls(); ++j) {
      const CMatrix x = minus_i * left * expm_frechet(c.spectra[zi], basis[j]) * c.prefix[zi];
      CMatrix rebuilt = CMatrix::Zero(basis.dim, basis.dim);
      const int r = tm.row_index(j, z);
      for (int k = 0; k < basis.size(); ++k) {
        const double coord = (basis[k] * x).trace().real() * inv_sqrt2;
        tm.rows(r, k) = coord;
        rebuilt += coord * inv_sqrt2 * basis[k];
      }
      tm.projection_residual = std::max(tm.projection_residual, (x - rebuilt).norm());
    }
  }
  return tm;
}

/// Numerical rank of the tangent map, counting singular values above
/// tol times the largest.
inline RankResult local_surjectivity_rank(const TangentMap& tm, double tol = 1e-8) {
  RankResult out;
  Eigen::JacobiSVD<RMatrix> svd(tm.rows);
  out.singular_values = svd.singularValues();
  const double top = out.singular_values.size() > 0 ? out.singular_values(0) : 0.0;
  if (top > 0.0) {
    for (Eigen::Index k = 0; k < out.singular_values.size(); ++k)
      if (out.singular_values(k) > tol * top) ++out.rank;
  }
  out.surjective = out.rank == tm.rows.cols();
  return out;
}

/// Controls with kappa - |eps| <= active_tol * kappa. With kappa = 0 every
/// control is pinned.
inline std::vector<ActiveConstraint> active_set(const ControlGrid& grid, double active_tol = 1e-9) {
  std::vector<ActiveConstraint> out;
  const double kappa = grid.bound();
  for (int z = 0; z < grid.segments(); ++z) {
    for (int j = 0; j < grid.controls(); ++j) {
      const double v = grid(j, z);
      if (kappa == 0.0) {
        out.push_back({j, z, BoundSide::pinned});
      } else if (kappa - std::abs(v) <= active_tol * kappa) {
        out.push_back({j, z, v > 0.0 ? BoundSide::upper : BoundSide::lower});
      }
    }
  }
  return out;
}

/// Distance from `direction` to the cone of admissible first-order variations
/// at `grid`: free controls vary both ways, controls at +kappa only decrease,
/// controls at -kappa only increase.
inline double cone_residual(const ControlGrid& grid, const TangentMap& tm, const RVector& direction,
                            double active_tol = 1e-9) {
  if (direction.size() != tm.rows.cols()) throw DomainError("cone_residual: direction size mismatch");
  std::vector<std::optional<BoundSide>> side(static_cast<std::size_t>(grid.parameter_count()));
  for (const auto& a : active_set(grid, active_tol))
    side[static_cast<std::size_t>(tm.row_index(a.j, a.z))] = a.side;

  std::vector<RVector> columns;
  for (int r = 0; r < grid.parameter_count(); ++r) {
    const RVector row = tm.rows.row(r).transpose();
    const auto& s = side[static_cast<std::size_t>(r)];
    if (!s) {
      columns.push_back(row);
      columns.push_back(-row);
    } else if (*s == BoundSide::upper) {
      columns.push_back(-row);
    } else if (*s == BoundSide::lower) {
      columns.push_back(row);
    }
  }
  if (columns.empty()) return direction.norm();
  RMatrix a(direction.size(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t k = 0; k < columns.size(); ++k) a.col(static_cast<Eigen::Index>(k)) = columns[k];
  return nnls(a, direction).residual;
}

/// Sampled test that one-sided admissible variations still generate all of
/// su(N). Each sampled unit direction is fitted by a sign-constrained least
/// squares; a residual above 1e-8 makes that direction a witness.
inline ConeTestResult boundary_cone_surjectivity(const ControlGrid& grid, const TangentMap& tm,
                                                 double active_tol = 1e-9, int samples = 64,
                                                 unsigned long long seed = 0) {
  ConeTestResult out;
  out.active_count = static_cast<int>(active_set(grid, active_tol).size());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Eigen::Index d = tm.rows.cols();
  for (int s = 0; s < samples; ++s) {
    RVector w(d);
    for (Eigen::Index k = 0; k < d; ++k) w(k) = normal(rng);
    w.normalize();
    const double res = cone_residual(grid, tm, w, active_tol);
    ++out.directions_tested;
    out.max_residual = std::max(out.max_residual, res);
    if (res > 1e-8) {
      out.surjective = false;
      out.witness = w;
      break;
    }
  }
  return out;
}

/// Largest kappa with T/Z < 2 pi / (E_max - E_min) over the control box.
inline KappaThreshold kappa_threshold(const BasisSet& basis, double horizon, int segments) {
  if (!(horizon > 0.0)) throw DomainError("kappa_threshold: T must be positive");
  if (segments < 1) throw DomainError("kappa_threshold: Z must be positive");
  KappaThreshold out;
  double spread_per_kappa = 0.0;
  if (basis.dim == 2) {
    // spectrum of sum_j eps_j sigma_j is +-|eps|, worst case |eps| = sqrt(3) kappa
    spread_per_kappa = 2.0 * std::sqrt(3.0);
    out.exact = true;
  } else {
    for (const auto& b : basis.elements) {
      Eigen::SelfAdjointEigenSolver<CMatrix> eig(b, Eigen::EigenvaluesOnly);
      spread_per_kappa += eig.eigenvalues().maxCoeff() - eig.eigenvalues().minCoeff();
    }
  }
  out.value = 2.0 * kPi * segments / (horizon * spread_per_kappa);
  return out;
}

}  // namespace landscape_lab

#endif  // LANDSCAPE_LAB_LANDSCAPE_HPP

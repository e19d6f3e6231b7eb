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

// Piecewise-constant closed-system dynamics on SU(N): su(N) generators,
// segment Hamiltonians, propagators and their Frechet derivatives.
// Units: hbar = 1.

#ifndef LANDSCAPE_LAB_QDYN_HPP
#define LANDSCAPE_LAB_QDYN_HPP

#include <cmath>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "landscape_lab/core.hpp"

namespace landscape_lab {

/// Orthogonal Hermitian traceless generators of su(N), normalized Tr[B_i B_j] = 2 delta_ij.
struct BasisSet {
  int dim = 0;
  std::vector<CMatrix> elements;

  int size() const { return static_cast<int>(elements.size()); }
  const CMatrix& operator[](int j) const { return elements[static_cast<std::size_t>(j)]; }
};

/// Generalized Gell-Mann basis: all symmetric pairs, then all antisymmetric
/// pairs, then the diagonal ladder. For N = 2 this yields sigma1, sigma2, sigma3.
inline BasisSet build_su_basis(int n) {
  if (n < 2) throw DomainError("build_su_basis: dimension must be >= 2, got " + std::to_string(n));
  BasisSet basis;
  basis.dim = n;
  basis.elements.reserve(static_cast<std::size_t>(n * n - 1));
  const Complex i(0.0, 1.0);
  for (int j = 0; j < n; ++j) {
    for (int k = j + 1; k < n; ++k) {
      CMatrix s = CMatrix::Zero(n, n);
      s(j, k) = 1.0;
      s(k, j) = 1.0;
      basis.elements.push_back(std::move(s));
    }
  }
  for (int j = 0; j < n; ++j) {
    for (int k = j + 1; k < n; ++k) {
      CMatrix a = CMatrix::Zero(n, n);
      a(j, k) = -i;
      a(k, j) = i;
      basis.elements.push_back(std::move(a));
    }
  }
  for (int l = 1; l < n; ++l) {
    CMatrix d = CMatrix::Zero(n, n);
    const double scale = std::sqrt(2.0 / (l * (l + 1.0)));
    for (int m = 0; m < l; ++m) d(m, m) = scale;
    d(l, l) = -scale * l;
    basis.elements.push_back(std::move(d));
  }
  return basis;
}

/// Bounded piecewise-constant control amplitudes eps(j, z), one row per
/// generator and one column per time segment. Segment z (0-based) covers
/// (z*T/Z, (z+1)*T/Z].
class ControlGrid {
 public:
  ControlGrid(double horizon, double bound, RMatrix values)
      : horizon_(horizon), bound_(bound), values_(std::move(values)) {
    if (!(horizon_ > 0.0) || !std::isfinite(horizon_))
      throw DomainError("ControlGrid: horizon must be positive and finite");
    if (!(bound_ >= 0.0) || !std::isfinite(bound_))
      throw DomainError("ControlGrid: bound must be non-negative and finite");
    if (values_.rows() < 1 || values_.cols() < 1)
      throw DomainError("ControlGrid: need at least one control and one segment");
    for (Eigen::Index z = 0; z < values_.cols(); ++z) {
      for (Eigen::Index j = 0; j < values_.rows(); ++j) {
        const double v = values_(j, z);
        if (!std::isfinite(v) || std::abs(v) > bound_) {
          throw DomainError("ControlGrid: |eps(" + std::to_string(j) + "," + std::to_string(z) +
                            ")| = " + std::to_string(std::abs(v)) + " exceeds bound " +
                            std::to_string(bound_));
        }
      }
    }
  }

  static ControlGrid constant(int controls, int segments, double horizon, double bound,
                              double value) {
    return ControlGrid(horizon, bound, RMatrix::Constant(controls, segments, value));
  }

  /// Uniform draw from [-bound, bound] in column-major order.
  template <class Rng>
  static ControlGrid uniform(int controls, int segments, double horizon, double bound, Rng& rng) {
    std::uniform_real_distribution<double> dist(-bound, bound);
    RMatrix v(controls, segments);
    for (Eigen::Index k = 0; k < v.size(); ++k) v.data()[k] = bound > 0.0 ? dist(rng) : 0.0;
    return ControlGrid(horizon, bound, std::move(v));
  }

  ControlGrid with_values(RMatrix values) const {
    return ControlGrid(horizon_, bound_, std::move(values));
  }

  double horizon() const { return horizon_; }
  double bound() const { return bound_; }
  int controls() const { return static_cast<int>(values_.rows()); }
  int segments() const { return static_cast<int>(values_.cols()); }
  int parameter_count() const { return controls() * segments(); }
  double segment_duration() const { return horizon_ / segments(); }
  const RMatrix& values() const { return values_; }
  double operator()(int j, int z) const { return values_(j, z); }

 private:
  double horizon_;
  double bound_;
  RMatrix values_;
};

struct PropagationResult {
  std::vector<CMatrix> segment_unitaries;
  CMatrix total;  // U_Z ... U_2 U_1
};

/// Eigendecomposition of a Hermitian segment generator together with exp(-i H dt).
struct SegmentSpectrum {
  RVector eigenvalues;
  CMatrix eigenvectors;
  CMatrix unitary;
  double dt = 0.0;
};

namespace detail {

inline void require_hermitian(const CMatrix& h, const char* what) {
  if (h.rows() != h.cols()) throw DomainError(std::string(what) + ": matrix is not square");
  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  if (hermiticity_error(h) > 1e-10 * scale)
    throw DomainError(std::string(what) + ": matrix is not Hermitian within tolerance");
}

inline CMatrix hamiltonian_from_column(const BasisSet& basis, const RMatrix& values, int z) {
  CMatrix h = CMatrix::Zero(basis.dim, basis.dim);
  for (int j = 0; j < basis.size(); ++j) h += values(j, z) * basis[j];
  return h;
}

inline void require_compatible(const RMatrix& values, const BasisSet& basis) {
  if (values.rows() != basis.size()) {
    throw DomainError("control rows (" + std::to_string(values.rows()) +
                      ") do not match basis size N^2-1 = " + std::to_string(basis.size()));
  }
}

}  // namespace detail

/// H_z = sum_j eps(j, z) B_j for the 0-based segment index z.
inline CMatrix assemble_segment_hamiltonian(const ControlGrid& grid, int z, const BasisSet& basis) {
  if (z < 0 || z >= grid.segments())
    throw DomainError("assemble_segment_hamiltonian: segment index " + std::to_string(z) +
                      " out of range [0, " + std::to_string(grid.segments()) + ")");
  detail::require_compatible(grid.values(), basis);
  return detail::hamiltonian_from_column(basis, grid.values(), z);
}

inline SegmentSpectrum segment_spectrum(const CMatrix& h, double dt) {
  detail::require_hermitian(h, "segment_spectrum");
  if (!(dt >= 0.0) || !std::isfinite(dt)) throw DomainError("segment_spectrum: dt must be >= 0");
  // Symmetrize so the solver's lower-triangle read matches the upper one exactly.
  const CMatrix hs = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(hs);
  if (eig.info() != Eigen::Success) throw NumericalFault("segment_spectrum: eigensolver failed");
  SegmentSpectrum s;
  s.eigenvalues = eig.eigenvalues();
  s.eigenvectors = eig.eigenvectors();
  s.dt = dt;
  Eigen::VectorXcd phases(s.eigenvalues.size());
  for (Eigen::Index a = 0; a < phases.size(); ++a)
    phases(a) = std::exp(Complex(0.0, -s.eigenvalues(a) * dt));
  s.unitary = s.eigenvectors * phases.asDiagonal() * s.eigenvectors.adjoint();
  return s;
}

/// exp(-i H dt) via Hermitian eigendecomposition.
inline CMatrix expm_step(const CMatrix& h, double dt) { return segment_spectrum(h, dt).unitary; }

/// Directional derivative d/ds exp(-i (H + s D) dt) at s = 0, reusing a
/// precomputed spectrum of H.
inline CMatrix expm_frechet(const SegmentSpectrum& s, const CMatrix& direction) {
  const Eigen::Index n = s.eigenvalues.size();
  if (direction.rows() != n || direction.cols() != n)
    throw DomainError("expm_frechet: direction dimension mismatch");
  const double radius = s.eigenvalues.cwiseAbs().maxCoeff();
  const double degeneracy = 1e-10 * std::max(1.0, radius);
  const double dt = s.dt;
  CMatrix kernel = s.eigenvectors.adjoint() * direction * s.eigenvectors;
  for (Eigen::Index b = 0; b < n; ++b) {
    for (Eigen::Index a = 0; a < n; ++a) {
      const double la = s.eigenvalues(a);
      const double lb = s.eigenvalues(b);
      const double gap = la - lb;
      Complex factor;
      if (std::abs(gap) <= degeneracy) {
        factor = Complex(0.0, -dt) * std::exp(Complex(0.0, -la * dt));
      } else {
        // (e^{-i la dt} - e^{-i lb dt}) / (la - lb), written without cancellation.
        const double half = 0.5 * gap * dt;
        const double sinc = std::sin(half) / half;
        factor = Complex(0.0, -dt) * std::exp(Complex(0.0, -0.5 * (la + lb) * dt)) * sinc;
      }
      kernel(a, b) *= factor;
    }
  }
  return s.eigenvectors * kernel * s.eigenvectors.adjoint();
}

inline CMatrix expm_frechet(const CMatrix& h, double dt, const CMatrix& direction) {
  if (direction.rows() != h.rows() || direction.cols() != h.cols())
    throw DomainError("expm_frechet: direction dimension mismatch");
  detail::require_hermitian(direction, "expm_frechet");
  return expm_frechet(segment_spectrum(h, dt), direction);
}

namespace detail {

/// Propagation over raw control values; bounds are not checked so that finite
/// difference probes may step past the box.
inline std::vector<SegmentSpectrum> spectra(const BasisSet& basis, const RMatrix& values,
                                            double horizon) {
  require_compatible(values, basis);
  const double dt = horizon / static_cast<double>(values.cols());
  std::vector<SegmentSpectrum> out;
  out.reserve(static_cast<std::size_t>(values.cols()));
  for (Eigen::Index z = 0; z < values.cols(); ++z)
    out.push_back(segment_spectrum(hamiltonian_from_column(basis, values, static_cast<int>(z)), dt));
  return out;
}

inline CMatrix total_unitary(const BasisSet& basis, const RMatrix& values, double horizon) {
  CMatrix total = CMatrix::Identity(basis.dim, basis.dim);
  for (const auto& s : spectra(basis, values, horizon)) total = s.unitary * total;
  return total;
}

}  // namespace detail

inline PropagationResult propagate(const ControlGrid& grid, const BasisSet& basis) {
  PropagationResult result;
  result.total = CMatrix::Identity(basis.dim, basis.dim);
  for (auto& s : detail::spectra(basis, grid.values(), grid.horizon())) {
    result.total = s.unitary * result.total;
    result.segment_unitaries.push_back(std::move(s.unitary));
  }
  return result;
}

}  // namespace landscape_lab

#endif  // LANDSCAPE_LAB_QDYN_HPP

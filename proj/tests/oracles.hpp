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

// Test-only reference computations. Nothing here calls into the
// eigendecomposition / Frechet path of the library.

#ifndef LANDSCAPE_LAB_TESTS_ORACLES_HPP
#define LANDSCAPE_LAB_TESTS_ORACLES_HPP

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using CMatrix = Eigen::MatrixXcd;
using RMatrix = Eigen::MatrixXd;
using Complex = std::complex<double>;

/// exp(A) by scaling and squaring with a truncated Taylor series.
inline CMatrix expm_taylor(const CMatrix& a) {
  const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const CMatrix scaled = a / std::ldexp(1.0, squarings);
  CMatrix term = CMatrix::Identity(a.rows(), a.cols());
  CMatrix sum = term;
  for (int k = 1; k <= 30; ++k) {
    term = term * scaled / static_cast<double>(k);
    sum += term;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum;
}

inline std::vector<CMatrix> pauli() {
  CMatrix s1(2, 2), s2(2, 2), s3(2, 2);
  s1 << 0, 1, 1, 0;
  s2 << 0, Complex(0, -1), Complex(0, 1), 0;
  s3 << 1, 0, 0, -1;
  return {s1, s2, s3};
}

/// Independent propagation of piecewise-constant controls (Taylor exponentials).
inline CMatrix propagate(const std::vector<CMatrix>& basis, const RMatrix& values, double horizon) {
  const auto n = basis.front().rows();
  const double dt = horizon / static_cast<double>(values.cols());
  CMatrix u = CMatrix::Identity(n, n);
  for (Eigen::Index z = 0; z < values.cols(); ++z) {
    CMatrix h = CMatrix::Zero(n, n);
    for (Eigen::Index j = 0; j < values.rows(); ++j) h += values(j, z) * basis[static_cast<std::size_t>(j)];
    u = expm_taylor(Complex(0, -dt) * h) * u;
  }
  return u;
}

inline double objective(const CMatrix& rho0, const CMatrix& obs, const CMatrix& u) {
  return (obs * u * rho0 * u.adjoint()).trace().real();
}

/// Extended-precision propagation and objective for high-accuracy derivative
/// oracles.
using CMatrixLd = Eigen::Matrix<std::complex<long double>, Eigen::Dynamic, Eigen::Dynamic>;

inline CMatrixLd expm_taylor_ld(const CMatrixLd& a) {
  const long double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.25L) squarings = static_cast<int>(std::ceil(std::log2(static_cast<double>(norm / 0.25L))));
  const CMatrixLd scaled = a / std::ldexp(1.0L, squarings);
  CMatrixLd term = CMatrixLd::Identity(a.rows(), a.cols());
  CMatrixLd sum = term;
  for (int k = 1; k <= 30; ++k) {
    term = term * scaled / static_cast<long double>(k);
    sum += term;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum;
}

inline long double objective_ld(const std::vector<CMatrix>& basis, const CMatrix& rho0, const CMatrix& obs,
                                const Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>& values,
                                long double horizon) {
  using C = std::complex<long double>;
  const auto n = basis.front().rows();
  const long double dt = horizon / static_cast<long double>(values.cols());
  CMatrixLd u = CMatrixLd::Identity(n, n);
  for (Eigen::Index z = 0; z < values.cols(); ++z) {
    CMatrixLd h = CMatrixLd::Zero(n, n);
    for (Eigen::Index j = 0; j < values.rows(); ++j)
      h += values(j, z) * basis[static_cast<std::size_t>(j)].cast<C>();
    u = expm_taylor_ld(C(0, -dt) * h) * u;
  }
  return (obs.cast<C>() * u * rho0.cast<C>() * u.adjoint()).trace().real();
}

/// Ridders-extrapolated central differences of J in long double, one
/// component at a time.
inline RMatrix ridders_gradient(const std::vector<CMatrix>& basis, const CMatrix& rho0, const CMatrix& obs,
                                const RMatrix& values, double horizon) {
  using LdMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  const LdMatrix x = values.cast<long double>();
  RMatrix g(values.rows(), values.cols());
  constexpr int kTable = 10;
  constexpr long double kCon = 1.4L, kCon2 = kCon * kCon, kSafe = 2.0L;
  for (Eigen::Index k = 0; k < values.size(); ++k) {
    auto central = [&](long double h) {
      LdMatrix p = x, m = x;
      p.data()[k] += h;
      m.data()[k] -= h;
      return (objective_ld(basis, rho0, obs, p, horizon) - objective_ld(basis, rho0, obs, m, horizon)) / (2 * h);
    };
    long double a[kTable][kTable];
    long double h = 0.05L, err = 1e300L, best = 0.0L;
    a[0][0] = central(h);
    for (int i = 1; i < kTable; ++i) {
      h /= kCon;
      a[0][i] = central(h);
      long double fac = kCon2;
      for (int j = 1; j <= i; ++j) {
        a[j][i] = (a[j - 1][i] * fac - a[j - 1][i - 1]) / (fac - 1.0L);
        fac *= kCon2;
        const long double e = std::max(std::abs(a[j][i] - a[j - 1][i]), std::abs(a[j][i] - a[j - 1][i - 1]));
        if (e <= err) {
          err = e;
          best = a[j][i];
        }
      }
      if (std::abs(a[i][i] - a[i - 1][i - 1]) >= kSafe * err) break;
    }
    g.data()[k] = static_cast<double>(best);
  }
  return g;
}

/// Central finite difference of a scalar function of a real matrix.
inline RMatrix fd_gradient(const std::function<double(const RMatrix&)>& f, const RMatrix& x,
                           double step) {
  RMatrix g(x.rows(), x.cols());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    RMatrix p = x, m = x;
    p.data()[k] += step;
    m.data()[k] -= step;
    g.data()[k] = (f(p) - f(m)) / (2.0 * step);
  }
  return g;
}

/// Qubit Bloch-vector rotation: U = exp(-i theta n.sigma) rotates r by 2 theta about n.
inline std::array<double, 3> rotate(const std::array<double, 3>& r, const std::array<double, 3>& n,
                                    double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  const double dot = n[0] * r[0] + n[1] * r[1] + n[2] * r[2];
  const std::array<double, 3> cross{n[1] * r[2] - n[2] * r[1], n[2] * r[0] - n[0] * r[2],
                                    n[0] * r[1] - n[1] * r[0]};
  std::array<double, 3> out{};
  for (int k = 0; k < 3; ++k) out[k] = r[k] * c + cross[k] * s + n[k] * dot * (1.0 - c);
  return out;
}

/// Sign-change bracketing with a very fine grid and plain bisection.
inline std::vector<double> brute_force_roots(const std::function<double(double)>& f, double a,
                                             double b, int points) {
  std::vector<double> roots;
  double xl = a, fl = f(a);
  for (int i = 1; i < points; ++i) {
    const double xr = a + (b - a) * i / (points - 1.0);
    const double fr = f(xr);
    if (fl * fr < 0.0) {
      double lo = xl, hi = xr, flo = fl;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((fm < 0.0) == (flo < 0.0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      roots.push_back(0.5 * (lo + hi));
    }
    xl = xr;
    fl = fr;
  }
  return roots;
}

/// Random Hermitian matrix with iid normal entries.
template <class Rng>
CMatrix random_hermitian(int n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  CMatrix a(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) a(r, c) = Complex(normal(rng), normal(rng));
  return 0.5 * (a + a.adjoint());
}

/// Random full-rank density matrix.
template <class Rng>
CMatrix random_density(int n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  CMatrix a(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) a(r, c) = Complex(normal(rng), normal(rng));
  CMatrix rho = a * a.adjoint();
  rho /= rho.trace().real();
  return 0.5 * (rho + rho.adjoint());
}

}  // namespace oracle

#endif  // LANDSCAPE_LAB_TESTS_ORACLES_HPP

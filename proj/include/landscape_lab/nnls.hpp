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

#ifndef LANDSCAPE_LAB_NNLS_HPP
#define LANDSCAPE_LAB_NNLS_HPP

#include <vector>

#include "landscape_lab/core.hpp"

namespace landscape_lab {

struct NnlsResult {
  RVector x;
  double residual = 0.0;  // ||A x - b||_2
  int iterations = 0;
};

/// Lawson-Hanson active-set solver for min ||A x - b|| subject to x >= 0.
inline NnlsResult nnls(const RMatrix& a, const RVector& b, int max_iterations = 0) {
  const Eigen::Index m = a.cols();
  if (a.rows() != b.size()) throw DomainError("nnls: row count mismatch");
  if (max_iterations <= 0) max_iterations = static_cast<int>(3 * m + 10);

  NnlsResult out;
  out.x = RVector::Zero(m);
  std::vector<bool> passive(static_cast<std::size_t>(m), false);
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff()) * std::max(1.0, b.norm());
  const double dual_tol = 1e-14 * scale * static_cast<double>(std::max<Eigen::Index>(1, m));

  auto solve_passive = [&](RVector& z) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = 0; j < m; ++j)
      if (passive[static_cast<std::size_t>(j)]) idx.push_back(j);
    RMatrix ap(a.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) ap.col(static_cast<Eigen::Index>(k)) = a.col(idx[k]);
    const RVector zp = ap.completeOrthogonalDecomposition().solve(b);
    z = RVector::Zero(m);
    for (std::size_t k = 0; k < idx.size(); ++k) z(idx[k]) = zp(static_cast<Eigen::Index>(k));
  };

  RVector w = a.transpose() * (b - a * out.x);
  while (out.iterations < max_iterations) {
    Eigen::Index t = -1;
    double best = dual_tol;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (!passive[static_cast<std::size_t>(j)] && w(j) > best) {
        best = w(j);
        t = j;
      }
    }
    if (t < 0) break;
    passive[static_cast<std::size_t>(t)] = true;

    RVector z;
    while (true) {
      ++out.iterations;
      solve_passive(z);
      bool feasible = true;
      for (Eigen::Index j = 0; j < m; ++j)
        if (passive[static_cast<std::size_t>(j)] && z(j) <= 0.0) feasible = false;
      if (feasible || out.iterations >= max_iterations) break;
      double alpha = 1.0;
      for (Eigen::Index j = 0; j < m; ++j) {
        if (passive[static_cast<std::size_t>(j)] && z(j) <= 0.0) {
          const double denom = out.x(j) - z(j);
          if (denom > 0.0) alpha = std::min(alpha, out.x(j) / denom);
        }
      }
      out.x += alpha * (z - out.x);
      for (Eigen::Index j = 0; j < m; ++j) {
        if (passive[static_cast<std::size_t>(j)] && out.x(j) <= 1e-15 * scale) {
          passive[static_cast<std::size_t>(j)] = false;
          out.x(j) = 0.0;
        }
      }
    }
    out.x = z.cwiseMax(0.0);
    w = a.transpose() * (b - a * out.x);
  }
  out.residual = (a * out.x - b).norm();
  return out;
}

}  // namespace landscape_lab

#endif  // LANDSCAPE_LAB_NNLS_HPP

// Copyright 2026 The gbc authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "gbc/combinatorics.hpp"
#include "gbc/pfaffian.hpp"
#include "gbc/rng.hpp"

namespace gbc {

// Centered Gaussian measure on R^N with covariance operator T.  The square
// root is taken by symmetric eigendecomposition so degenerate covariances
// sample on their support; spectral ensembles rely on this.
class GaussianMeasure {
 public:
  static GaussianMeasure from_covariance(const Eigen::MatrixXd& covariance) {
    if (covariance.rows() != covariance.cols())
      throw std::invalid_argument("GaussianMeasure: covariance must be square");
    GaussianMeasure g;
    g.covariance_ = 0.5 * (covariance + covariance.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g.covariance_);
    const Eigen::VectorXd lambda = es.eigenvalues();
    const double lambda_max = lambda.size() ? lambda.cwiseAbs().maxCoeff() : 0.0;
    Eigen::VectorXd sqrt_lambda(lambda.size());
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
      if (lambda(i) < -1e-10 * std::max(lambda_max, 1.0))
        throw std::invalid_argument("GaussianMeasure: covariance not PSD");
      sqrt_lambda(i) = std::sqrt(std::max(lambda(i), 0.0));
    }
    g.factor_ = es.eigenvectors() * sqrt_lambda.asDiagonal();
    g.min_eigenvalue_ = lambda.size() ? lambda.minCoeff() : 0.0;
    g.max_eigenvalue_ = lambda_max;
    g.diagonal_ = false;
    return g;
  }

  // Diagonal covariance fast path (spectral ensembles have one entry per
  // retained eigensection).
  static GaussianMeasure diagonal(const Eigen::VectorXd& variances) {
    GaussianMeasure g;
    g.variances_ = variances;
    g.diagonal_ = true;
    g.min_eigenvalue_ = variances.size() ? variances.minCoeff() : 0.0;
    g.max_eigenvalue_ = variances.size() ? variances.maxCoeff() : 0.0;
    if (g.min_eigenvalue_ < 0.0)
      throw std::invalid_argument("GaussianMeasure: negative variance");
    return g;
  }

  static GaussianMeasure standard(int n) {
    return diagonal(Eigen::VectorXd::Ones(n));
  }

  int dimension() const {
    return diagonal_ ? static_cast<int>(variances_.size())
                     : static_cast<int>(covariance_.rows());
  }

  bool nondegenerate() const {
    return min_eigenvalue_ > 1e-12 * std::max(max_eigenvalue_, 0.0);
  }

  Eigen::MatrixXd covariance() const {
    if (diagonal_) return Eigen::MatrixXd(variances_.asDiagonal());
    return covariance_;
  }

  double variance(int i) const {
    if (diagonal_) return variances_(i);
    return covariance_(i, i);
  }

  // T * v without materializing a dense covariance in the diagonal case.
  Eigen::MatrixXd apply_covariance(const Eigen::MatrixXd& v) const {
    if (diagonal_) return variances_.asDiagonal() * v;
    return covariance_ * v;
  }

  Eigen::VectorXd sample(RngStream& rng) const {
    const int n = dimension();
    Eigen::VectorXd z(n);
    for (int i = 0; i < n; ++i) z(i) = rng.next_normal();
    if (diagonal_) return variances_.cwiseSqrt().cwiseProduct(z);
    return factor_ * z;
  }

  GaussianMeasure pushforward(const Eigen::MatrixXd& map) const {
    if (map.cols() != dimension())
      throw std::invalid_argument("pushforward: shape mismatch");
    return from_covariance(map * covariance() * map.transpose());
  }

 private:
  Eigen::MatrixXd covariance_;
  Eigen::MatrixXd factor_;
  Eigen::VectorXd variances_;
  bool diagonal_ = false;
  double min_eigenvalue_ = 0.0;
  double max_eigenvalue_ = 0.0;
};

// E_tau det( u_ij . tau ) for tau standard Gaussian in R^K, where u is an
// r x r array of vectors in R^K.  Evaluated through the orthogonal-invariant
// expansion: sum over perfect matchings phi and full permutations sigma of
//   eps(sigma phi) prod_j u[phi_{2j-1}][sigma_{2j-1}] . u[phi_{2j}][sigma_{2j}],
// which equals Z * Q with Z = 1/(2^h h!) after the hyperoctahedral orbit of
// each (sigma, phi) pair is collapsed onto its matching representative.
inline double gaussian_det_average(
    const std::vector<std::vector<Eigen::VectorXd>>& u) {
  const int r = static_cast<int>(u.size());
  if (r % 2 != 0 || r <= 0 || r > 6)
    throw UnsupportedRankError("gaussian_det_average: even rank <= 6");
  for (const auto& row : u)
    if (static_cast<int>(row.size()) != r)
      throw std::invalid_argument("gaussian_det_average: ragged array");

  // Cache the Gram products u[i][j] . u[k][l].
  const int r2 = r * r;
  Eigen::MatrixXd gram(r2, r2);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j)
      for (int k = 0; k < r; ++k)
        for (int l = 0; l < r; ++l)
          gram(i * r + j, k * r + l) = u[i][j].dot(u[k][l]);

  const auto matchings = perfect_matchings(r);
  const auto perms = all_permutations(r);
  std::vector<int> perm_sign(perms.size());
  for (std::size_t i = 0; i < perms.size(); ++i)
    perm_sign[i] = permutation_sign(perms[i]);

  double total = 0.0;
  for (const auto& phi : matchings) {
    const int sphi = permutation_sign(phi);
    for (std::size_t is = 0; is < perms.size(); ++is) {
      const auto& sigma = perms[is];
      double term = static_cast<double>(sphi * perm_sign[is]);
      for (int j = 0; j < r; j += 2)
        term *= gram(phi[j] * r + sigma[j], phi[j + 1] * r + sigma[j + 1]);
      total += term;
    }
  }
  return total;
}

// The raw invariant polynomial Q (full double sum over S_r x S_r); only for
// oracle checks at small rank, the work is (r!)^2.
inline double gaussian_det_q(const std::vector<std::vector<Eigen::VectorXd>>& u) {
  const int r = static_cast<int>(u.size());
  if (r % 2 != 0 || r <= 0 || r > 4)
    throw UnsupportedRankError("gaussian_det_q: even rank <= 4");
  const auto perms = all_permutations(r);
  double total = 0.0;
  for (const auto& phi : perms) {
    const int sphi = permutation_sign(phi);
    for (const auto& sigma : perms) {
      double term = static_cast<double>(sphi * permutation_sign(sigma));
      for (int j = 0; j < r; j += 2)
        term *= u[phi[j]][sigma[j]].dot(u[phi[j + 1]][sigma[j + 1]]);
      total += term;
    }
  }
  return total;
}

// Skew 2-form array built from a square vector array per the curvature
// bridge: F_{ab|jk} = u[a][j].u[b][k] - u[a][k].u[b][j].  Feeding it to
// pfaffian_pair_sum reproduces gaussian_det_average(u).
inline SkewFormMatrix curvature_bridge(
    const std::vector<std::vector<Eigen::VectorXd>>& u) {
  const int r = static_cast<int>(u.size());
  SkewFormMatrix F(r, r);
  for (int a = 0; a < r; ++a)
    for (int b = a + 1; b < r; ++b) {
      Eigen::MatrixXd block(r, r);
      for (int j = 0; j < r; ++j)
        for (int k = 0; k < r; ++k)
          block(j, k) = u[a][j].dot(u[b][k]) - u[a][k].dot(u[b][j]);
      F.set(a, b, block);
    }
  return F;
}

}  // namespace gbc

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
#include "gbc/numerics.hpp"

namespace gbc {

struct UnsupportedRankError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct DimensionMismatchError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

namespace detail {

inline double pfaffian_perm_sum(const Eigen::MatrixXd& a) {
  const int r = static_cast<int>(a.rows());
  const int h = r / 2;
  double sum = 0.0;
  for (const auto& p : all_permutations(r)) {
    double term = static_cast<double>(permutation_sign(p));
    for (int j = 0; j < r; j += 2) term *= a(p[j], p[j + 1]);
    sum += term;
  }
  return sum / (std::pow(2.0, h) * factorial(h));
}

inline double pfaffian_cofactor(const Eigen::MatrixXd& a) {
  const int r = static_cast<int>(a.rows());
  if (r == 0) return 1.0;
  if (r == 2) return a(0, 1);
  double sum = 0.0;
  double sign = 1.0;  // (-1)^j for the minor struck at rows/cols {0, j}
  for (int j = 1; j < r; ++j) {
    if (a(0, j) != 0.0) {
      Eigen::MatrixXd minor(r - 2, r - 2);
      int mi = 0;
      for (int i2 = 1; i2 < r; ++i2) {
        if (i2 == j) continue;
        int mj = 0;
        for (int j2 = 1; j2 < r; ++j2) {
          if (j2 == j) continue;
          minor(mi, mj++) = a(i2, j2);
        }
        ++mi;
      }
      sum += sign * a(0, j) * pfaffian_cofactor(minor);
    }
    sign = -sign;
  }
  return sum;
}

}  // namespace detail

// Pfaffian of an even skew matrix.  The input is antisymmetrized first, so
// callers may pass data that is skew only up to rounding.  Permutation sum
// for r <= 4, cofactor expansion for r = 6, 8.
inline double pfaffian_sum(const Eigen::MatrixXd& entries) {
  const int r = static_cast<int>(entries.rows());
  if (entries.cols() != r) throw DimensionMismatchError("pfaffian_sum: square matrix required");
  if (r <= 0 || r % 2 != 0 || r > 8)
    throw UnsupportedRankError("pfaffian_sum: rank must be even and <= 8");
  const Eigen::MatrixXd a = 0.5 * (entries - entries.transpose());
  if (r <= 4) return detail::pfaffian_perm_sum(a);
  return detail::pfaffian_cofactor(a);
}

// r x r matrix of 2-form coefficients: entry (alpha, beta) holds the m x m
// skew array F_{alpha beta | j k}.
class SkewFormMatrix {
 public:
  SkewFormMatrix(int rank, int dim)
      : r_(rank), m_(dim), data_(static_cast<std::size_t>(rank) * rank,
                                 Eigen::MatrixXd::Zero(dim, dim)) {}

  int rank() const { return r_; }
  int dim() const { return m_; }

  const Eigen::MatrixXd& coeff(int alpha, int beta) const {
    return data_[static_cast<std::size_t>(alpha) * r_ + beta];
  }

  // Sets the (alpha, beta) block and maintains both antisymmetries.
  void set(int alpha, int beta, const Eigen::MatrixXd& block) {
    Eigen::MatrixXd skew = 0.5 * (block - block.transpose());
    data_[static_cast<std::size_t>(alpha) * r_ + beta] = skew;
    data_[static_cast<std::size_t>(beta) * r_ + alpha] = -skew;
    if (alpha == beta) data_[static_cast<std::size_t>(alpha) * r_ + beta].setZero();
  }

  double max_antisymmetry_defect() const {
    double defect = 0.0;
    for (int a = 0; a < r_; ++a)
      for (int b = 0; b < r_; ++b) {
        defect = std::max(defect,
                          (coeff(a, b) + coeff(b, a)).cwiseAbs().maxCoeff());
        defect = std::max(defect,
                          (coeff(a, b) + coeff(a, b).transpose()).cwiseAbs().maxCoeff());
      }
    return defect;
  }

 private:
  int r_;
  int m_;
  std::vector<Eigen::MatrixXd> data_;
};

// Pair-expanded Pfaffian value
//   (1/h!) sum_{sigma, phi in S'_r} eps(sigma phi)
//          F_{sigma1 sigma2 | phi1 phi2} ... F_{sigma(2h-1) sigma(2h) | phi(2h-1) phi(2h)},
// i.e. the top coefficient of the Pfaffian form evaluated on the coordinate
// frame.  Requires m = r.
inline double pfaffian_pair_sum(const SkewFormMatrix& F) {
  const int r = F.rank();
  if (F.dim() != r)
    throw DimensionMismatchError("pfaffian_pair_sum: needs dim == rank");
  if (r % 2 != 0 || r > 8) throw UnsupportedRankError("pfaffian_pair_sum: even rank <= 8");
  const int h = r / 2;
  const auto pairs = pair_increasing_permutations(r);
  std::vector<int> sign(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) sign[i] = permutation_sign(pairs[i]);
  double sum = 0.0;
  for (std::size_t is = 0; is < pairs.size(); ++is) {
    const auto& s = pairs[is];
    for (std::size_t ip = 0; ip < pairs.size(); ++ip) {
      const auto& p = pairs[ip];
      double term = static_cast<double>(sign[is] * sign[ip]);
      for (int j = 0; j < r; j += 2)
        term *= F.coeff(s[j], s[j + 1])(p[j], p[j + 1]);
      sum += term;
    }
  }
  return sum / factorial(h);
}

// Density of the Euler form against the metric volume form: the curvature is
// given in a positively oriented orthonormal frame, `volume_factor` is
// sqrt(det g) of the chart coordinates at the same point.
inline double euler_density(const SkewFormMatrix& F, double volume_factor) {
  const int r = F.rank();
  if (F.dim() != r)
    throw DimensionMismatchError("euler_density: top-degree case needs m == r");
  const int h = r / 2;
  return pfaffian_pair_sum(F) / (std::pow(kTwoPi, h) * volume_factor);
}

}  // namespace gbc

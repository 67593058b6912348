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
#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "gbc/geometry.hpp"
#include "gbc/models.hpp"
#include "gbc/numerics.hpp"
#include "gbc/parallel.hpp"

namespace gbc {

struct EmptyEnsembleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Spectral cutoff profile w: even, nonnegative, w(0) > 0.  The bump has
// exact compact support [0, scale]; the Gaussian is truncated where it
// falls below `cutoff_ratio` relative to its amplitude.
struct WProfile {
  std::string name = "bump";  // "bump" or "gauss"
  double scale = 1.0;
  double amplitude = 1.0;
  double cutoff_ratio = 1e-14;

  double operator()(double t) const {
    const double s = std::abs(t) / scale;
    if (name == "bump") {
      if (s >= 1.0) return 0.0;
      return amplitude * std::exp(1.0 - 1.0 / (1.0 - s * s));
    }
    if (name == "gauss") {
      const double v = amplitude * std::exp(-s * s);
      return v >= amplitude * cutoff_ratio ? v : 0.0;
    }
    throw std::invalid_argument("WProfile: unknown profile '" + name + "'");
  }

  double support() const {
    if (name == "bump") return scale;
    if (name == "gauss") return scale * std::sqrt(-std::log(cutoff_ratio));
    throw std::invalid_argument("WProfile: unknown profile '" + name + "'");
  }

  bool nonincreasing() const { return true; }  // both built-in profiles are
};

inline double sphere_volume(int m) {  // vol(S^{m-1})
  if (m == 1) return 2.0;
  if (m == 2) return kTwoPi;
  return 2.0 * std::pow(M_PI, 0.5 * m) / std::tgamma(0.5 * m);
}

struct KappaValue {
  double kappa = 0.0;        // (int_0^inf w(t) t^{m-1} dt) vol(S^{m-1})
  double kappa_tilde = 0.0;  // (2 pi)^{-m} kappa, the calibrated constant
};

inline KappaValue kappa(const WProfile& w, int m) {
  const double radius = w.support();
  const double integral = integrate_adaptive(
      [&](double t) { return w(t) * std::pow(t, m - 1); }, 0.0, radius, 1e-12);
  KappaValue out;
  out.kappa = integral * sphere_volume(m);
  out.kappa_tilde = out.kappa / std::pow(kTwoPi, m);
  return out;
}

// ---------------------------------------------------------------------------
// Covariant finite-difference Laplacian on the n x n periodic grid with
// unitary parallel-transport link factors, lattice-gauge style.  link(d, q)
// transports fiber data from node q to node q + e_d; with the convention
// nabla = d + W it equals exp(-h W_d) at the edge midpoint, which keeps the
// assembled operator exactly symmetric and compatible.
// ---------------------------------------------------------------------------
class LatticeBundle {
 public:
  LatticeBundle(const TorusModel& model, int n) : model_(model), n_(n) {
    if (n < 4) throw std::invalid_argument("LatticeBundle: n >= 4");
    h_ = kTwoPi / n;
    for (int d = 0; d < 2; ++d) links_[d].resize(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        for (int d = 0; d < 2; ++d) {
          Eigen::Vector2d mid(h_ * i, h_ * j);
          mid[d] += 0.5 * h_;
          const Eigen::Matrix2d w = model.connection0(ChartPoint{0, mid}, d);
          if ((w + w.transpose()).cwiseAbs().maxCoeff() > 1e-12)
            throw std::invalid_argument(
                "LatticeBundle: reference connection is not compatible "
                "(W_i not skew)");
          links_[d][index(i, j)] = rotation(-h_ * w(1, 0));
        }
      }
    }
  }

  const TorusModel& model() const { return model_; }
  int n() const { return n_; }
  double spacing() const { return h_; }
  int nodes() const { return n_ * n_; }
  double mass_weight() const { return h_ * h_; }

  int index(int i, int j) const {
    i %= n_;
    if (i < 0) i += n_;
    j %= n_;
    if (j < 0) j += n_;
    return i * n_ + j;
  }

  Eigen::Vector2d coords(int q) const {
    return Eigen::Vector2d(h_ * (q / n_), h_ * (q % n_));
  }

  int node_at(const Eigen::Vector2d& x, double tol = 1e-9) const {
    const double fi = x[0] / h_, fj = x[1] / h_;
    const int i = static_cast<int>(std::lround(fi));
    const int j = static_cast<int>(std::lround(fj));
    if (std::abs(fi - i) > tol || std::abs(fj - j) > tol)
      throw std::invalid_argument("LatticeBundle: point is not a grid node");
    return index(i, j);
  }

  int neighbor(int q, int d, int step) const {
    const int i = q / n_, j = q % n_;
    return d == 0 ? index(i + step, j) : index(i, j + step);
  }

  const Eigen::Matrix2d& link(int d, int q) const { return links_[d][q]; }

  // Transport of fiber data into q from q + step e_d (step = +1 or -1).
  Eigen::Matrix2d transport_in(int d, int q, int step) const {
    if (step > 0) return links_[d][q].transpose();
    return links_[d][neighbor(q, d, -1)];
  }

  // Covariant Laplacian (nabla^0)^* nabla^0 applied to a section given as a
  // (nodes x 2) array.
  Eigen::MatrixX2d apply(const Eigen::MatrixX2d& psi) const {
    Eigen::MatrixX2d out(nodes(), 2);
    const double inv_h2 = 1.0 / (h_ * h_);
    for (int q = 0; q < nodes(); ++q) {
      Eigen::Vector2d acc = 4.0 * psi.row(q).transpose();
      for (int d = 0; d < 2; ++d) {
        acc -= transport_in(d, q, +1) * psi.row(neighbor(q, d, +1)).transpose();
        acc -= transport_in(d, q, -1) * psi.row(neighbor(q, d, -1)).transpose();
      }
      out.row(q) = (inv_h2 * acc).transpose();
    }
    return out;
  }

  double operator_norm_bound() const { return 8.0 / (h_ * h_); }

  // Dense assembly for the generic eigensolver path (small grids).
  Eigen::MatrixXd dense_matrix() const {
    const int dim = 2 * nodes();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
    const double inv_h2 = 1.0 / (h_ * h_);
    for (int q = 0; q < nodes(); ++q) {
      m.block<2, 2>(2 * q, 2 * q) += 4.0 * inv_h2 * Eigen::Matrix2d::Identity();
      for (int d = 0; d < 2; ++d)
        for (int step : {+1, -1}) {
          const int r = neighbor(q, d, step);
          m.block<2, 2>(2 * q, 2 * r) -= inv_h2 * transport_in(d, q, step);
        }
    }
    return m;
  }

  static Eigen::Matrix2d rotation(double angle) {
    Eigen::Matrix2d r;
    r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
    return r;
  }

 private:
  const TorusModel& model_;
  int n_;
  double h_;
  std::array<std::vector<Eigen::Matrix2d>, 2> links_;
};

}  // namespace gbc

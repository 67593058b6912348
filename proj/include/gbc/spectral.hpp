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
#include <numeric>
#include <stdexcept>
#include <vector>

#include "gbc/lattice.hpp"
#include "gbc/parallel.hpp"

namespace gbc {

struct EigenSection {
  double lambda = 0.0;
  long id = 0;               // stable identity for nesting checks
  Eigen::MatrixX2d psi;      // L^2-normalized values per node
};

struct EigenSolveError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void sort_and_tag(std::vector<EigenSection>& modes) {
  std::sort(modes.begin(), modes.end(), [](const auto& a, const auto& b) {
    if (a.lambda != b.lambda) return a.lambda < b.lambda;
    return a.id < b.id;
  });
  for (std::size_t k = 0; k < modes.size(); ++k)
    modes[k].id = static_cast<long>(k);
}

inline void check_residuals(const LatticeBundle& lattice,
                            const std::vector<EigenSection>& modes) {
  const double bound = 1e-8 * lattice.operator_norm_bound();
  for (const auto& mode : modes) {
    const Eigen::MatrixX2d r =
        lattice.apply(mode.psi) - mode.lambda * mode.psi;
    const double norm =
        std::sqrt(lattice.mass_weight() * r.squaredNorm());
    if (!(norm <= bound))
      throw EigenSolveError("eigensections: residual " + std::to_string(norm) +
                            " exceeds the solver contract");
  }
}

}  // namespace detail

// Dense symmetric eigensolve of the full 2 n^2 operator; the generic path,
// intended for grids up to n = 48 (operator size 4608).
inline std::vector<EigenSection> eigensections_dense(const LatticeBundle& lattice,
                                                     double lambda_max) {
  const int nodes = lattice.nodes();
  const Eigen::MatrixXd m = lattice.dense_matrix();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.info() != Eigen::Success)
    throw EigenSolveError("eigensections: dense solver failed to converge");
  std::vector<EigenSection> out;
  const double inv_norm = 1.0 / std::sqrt(lattice.mass_weight());
  for (int k = 0; k < 2 * nodes; ++k) {
    const double lambda = std::max(es.eigenvalues()(k), 0.0);
    if (lambda > lambda_max) break;
    EigenSection mode;
    mode.lambda = lambda;
    mode.id = k;
    mode.psi.resize(nodes, 2);
    for (int q = 0; q < nodes; ++q) {
      mode.psi(q, 0) = es.eigenvectors()(2 * q, k) * inv_norm;
      mode.psi(q, 1) = es.eigenvectors()(2 * q + 1, k) * inv_norm;
    }
    out.push_back(std::move(mode));
  }
  detail::sort_and_tag(out);
  detail::check_residuals(lattice, out);
  return out;
}

// Block diagonalization for connections of the built-in form: links in
// direction 1 independent of x^1 and direction-2 links trivial.  The fiber
// is complexified (J acts as i), a discrete Fourier transform in x^1 turns
// the x^1 hopping into the real potential (2 - 2 cos(k h + theta(x2)))/h^2,
// and each frequency yields a real symmetric n x n block.  Every block
// eigenvector u gives the exact eigensection pair
//   psi_a = (cos(k x1) u, sin(k x1) u),  psi_b = J psi_a.
inline bool block_solver_applies(const LatticeBundle& lattice) {
  const int n = lattice.n();
  for (int j = 0; j < n; ++j) {
    const Eigen::Matrix2d u0 = lattice.link(0, lattice.index(0, j));
    for (int i = 1; i < n; ++i) {
      if ((lattice.link(0, lattice.index(i, j)) - u0).cwiseAbs().maxCoeff() >
          1e-14)
        return false;
    }
  }
  for (int q = 0; q < lattice.nodes(); ++q)
    if ((lattice.link(1, q) - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() >
        1e-14)
      return false;
  return true;
}

inline std::vector<EigenSection> eigensections_blocks(const LatticeBundle& lattice,
                                                      double lambda_max,
                                                      int jobs = 1) {
  if (!block_solver_applies(lattice))
    throw EigenSolveError(
        "eigensections: block solver needs x1-invariant direction-1 links and "
        "trivial direction-2 links");
  const int n = lattice.n();
  const double h = lattice.spacing();
  const double inv_h2 = 1.0 / (h * h);

  // Link angles theta(j): U_1 = rotation(theta), constant along x^1.
  std::vector<double> theta(n);
  for (int j = 0; j < n; ++j) {
    const Eigen::Matrix2d u = lattice.link(0, lattice.index(0, j));
    theta[j] = std::atan2(u(1, 0), u(0, 0));
  }

  struct BlockResult {
    std::vector<std::pair<double, Eigen::VectorXd>> kept;
  };
  std::vector<BlockResult> blocks(n);

  parallel_for(n, jobs, [&](std::size_t k1) {
    Eigen::MatrixXd block = Eigen::MatrixXd::Zero(n, n);
    for (int j = 0; j < n; ++j) {
      const double hop = kTwoPi * static_cast<double>(k1) / n + theta[j];
      block(j, j) = (2.0 - 2.0 * std::cos(hop)) * inv_h2 + 2.0 * inv_h2;
      const int jp = (j + 1) % n, jm = (j + n - 1) % n;
      block(j, jp) -= inv_h2;
      block(j, jm) -= inv_h2;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(block);
    if (es.info() != Eigen::Success)
      throw EigenSolveError("eigensections: block solver failed");
    for (int s = 0; s < n; ++s) {
      const double lambda = std::max(es.eigenvalues()(s), 0.0);
      if (lambda > lambda_max) break;
      blocks[k1].kept.emplace_back(lambda, es.eigenvectors().col(s));
    }
  });

  std::vector<EigenSection> out;
  const int nodes = lattice.nodes();
  const double norm = 1.0 / (h * std::sqrt(static_cast<double>(n)));
  for (int k1 = 0; k1 < n; ++k1) {
    long sub = 0;
    for (const auto& [lambda, u] : blocks[k1].kept) {
      for (int part = 0; part < 2; ++part) {
        EigenSection mode;
        mode.lambda = lambda;
        mode.id = (static_cast<long>(k1) * n + sub) * 2 + part;
        mode.psi.resize(nodes, 2);
        for (int i = 0; i < n; ++i) {
          const double angle = kTwoPi * static_cast<double>(k1) * i / n;
          const double c = std::cos(angle), s = std::sin(angle);
          for (int j = 0; j < n; ++j) {
            const double v = u(j) * norm;
            const int q = lattice.index(i, j);
            if (part == 0) {
              mode.psi(q, 0) = c * v;
              mode.psi(q, 1) = s * v;
            } else {
              mode.psi(q, 0) = -s * v;
              mode.psi(q, 1) = c * v;
            }
          }
        }
        out.push_back(std::move(mode));
      }
      ++sub;
    }
  }
  detail::sort_and_tag(out);
  detail::check_residuals(lattice, out);
  return out;
}

// Dense below the size cap, Fourier blocks above (when applicable).
inline std::vector<EigenSection> eigensections(const LatticeBundle& lattice,
                                               double lambda_max, int jobs = 1,
                                               int dense_cap = 48) {
  if (lattice.n() <= dense_cap && !block_solver_applies(lattice))
    return eigensections_dense(lattice, lambda_max);
  if (block_solver_applies(lattice))
    return eigensections_blocks(lattice, lambda_max, jobs);
  throw EigenSolveError(
      "eigensections: grid too large for the dense path and the block "
      "solver does not apply");
}

// Periodic Catmull-Rom interpolation of one scalar grid component; used to
// evaluate sampled spectral sections between nodes.
class PeriodicBicubic {
 public:
  PeriodicBicubic(Eigen::MatrixXd grid, double spacing)
      : g_(std::move(grid)), h_(spacing), n_(static_cast<int>(g_.rows())) {}

  double value(double x, double y) const { return eval(x, y, 0, 0); }
  double dx(double x, double y) const { return eval(x, y, 1, 0); }
  double dy(double x, double y) const { return eval(x, y, 0, 1); }

 private:
  static void weights(double t, double* w, double* dw) {
    // Catmull-Rom basis on [0, 1] for samples (-1, 0, 1, 2).
    w[0] = 0.5 * (-t + 2 * t * t - t * t * t);
    w[1] = 0.5 * (2 - 5 * t * t + 3 * t * t * t);
    w[2] = 0.5 * (t + 4 * t * t - 3 * t * t * t);
    w[3] = 0.5 * (-t * t + t * t * t);
    dw[0] = 0.5 * (-1 + 4 * t - 3 * t * t);
    dw[1] = 0.5 * (-10 * t + 9 * t * t);
    dw[2] = 0.5 * (1 + 8 * t - 9 * t * t);
    dw[3] = 0.5 * (-2 * t + 3 * t * t);
  }

  double eval(double x, double y, int ddx, int ddy) const {
    const double fx = x / h_, fy = y / h_;
    const int ix = static_cast<int>(std::floor(fx));
    const int iy = static_cast<int>(std::floor(fy));
    const double tx = fx - ix, ty = fy - iy;
    double wx[4], dwx[4], wy[4], dwy[4];
    weights(tx, wx, dwx);
    weights(ty, wy, dwy);
    const double* ax = ddx ? dwx : wx;
    const double* ay = ddy ? dwy : wy;
    double acc = 0.0;
    for (int a = 0; a < 4; ++a) {
      const int i = wrap(ix + a - 1);
      for (int b = 0; b < 4; ++b) {
        const int j = wrap(iy + b - 1);
        acc += ax[a] * ay[b] * g_(i, j);
      }
    }
    const double scale = (ddx ? 1.0 / h_ : 1.0) * (ddy ? 1.0 / h_ : 1.0);
    return acc * scale;
  }

  int wrap(int i) const {
    i %= n_;
    return i < 0 ? i + n_ : i;
  }

  Eigen::MatrixXd g_;
  double h_;
  int n_;
};

// Sample space U_eps = Range w(eps sqrt(Delta_0)) as a SectionFamily: the
// retained eigensections with independent N(0, w(eps sqrt(lambda_n)))
// coefficients.  Its covariance kernel is the Schwartz kernel of W_eps.
class SmoothedEnsemble final : public SectionFamily {
 public:
  SmoothedEnsemble(const LatticeBundle& lattice,
                   std::vector<const EigenSection*> modes,
                   Eigen::VectorXd variances, double epsilon)
      : lattice_(lattice),
        modes_(std::move(modes)),
        epsilon_(epsilon),
        measure_(GaussianMeasure::diagonal(variances)) {}

  const BundleModel& model() const override { return lattice_.model(); }
  int basis_size() const override { return static_cast<int>(modes_.size()); }
  const GaussianMeasure& measure() const override { return measure_; }
  double epsilon() const { return epsilon_; }
  const LatticeBundle& lattice() const { return lattice_; }
  const std::vector<const EigenSection*>& modes() const { return modes_; }

  std::vector<long> retained_ids() const {
    std::vector<long> ids(modes_.size());
    for (std::size_t k = 0; k < modes_.size(); ++k) ids[k] = modes_[k]->id;
    return ids;
  }

  Eigen::MatrixXd values(const ChartPoint& p) const override {
    const int q = lattice_.node_at(p.x);
    Eigen::MatrixXd v(modes_.size(), 2);
    for (std::size_t k = 0; k < modes_.size(); ++k) v.row(k) = modes_[k]->psi.row(q);
    return v;
  }

  BasisEval eval(const ChartPoint& p) const override {
    const int q = lattice_.node_at(p.x);
    const int count = static_cast<int>(modes_.size());
    BasisEval out;
    out.V.resize(count, 2);
    for (int i = 0; i < 2; ++i) out.Vd[i].resize(count, 2);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) out.Vdd[i][j].resize(count, 2);

    for (int k = 0; k < count; ++k) {
      const Eigen::MatrixX2d& psi = modes_[k]->psi;
      out.V.row(k) = psi.row(q);
      for (int d = 0; d < 2; ++d)
        out.Vd[d].row(k) = covariant_first(psi, q, d).transpose();
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
          if (i == j)
            out.Vdd[i][j].row(k) = covariant_second_axis(psi, q, i).transpose();
          else
            out.Vdd[i][j].row(k) = covariant_mixed(psi, q, i, j).transpose();
        }
    }
    return out;
  }

  // Interpolating evaluator for sampled sections (zero statistics).
  std::unique_ptr<SectionEvaluator> section(
      const Eigen::VectorXd& coefficients) const override;

 private:
  Eigen::Vector2d field_at(const Eigen::MatrixX2d& psi, int q) const {
    return psi.row(q).transpose();
  }

  Eigen::Vector2d covariant_first(const Eigen::MatrixX2d& psi, int q,
                                  int d) const {
    const auto& lat = lattice_;
    const Eigen::Vector2d up =
        lat.transport_in(d, q, +1) * field_at(psi, lat.neighbor(q, d, +1));
    const Eigen::Vector2d dn =
        lat.transport_in(d, q, -1) * field_at(psi, lat.neighbor(q, d, -1));
    return (up - dn) / (2.0 * lat.spacing());
  }

  Eigen::Vector2d covariant_second_axis(const Eigen::MatrixX2d& psi, int q,
                                        int d) const {
    const auto& lat = lattice_;
    const Eigen::Vector2d up =
        lat.transport_in(d, q, +1) * field_at(psi, lat.neighbor(q, d, +1));
    const Eigen::Vector2d dn =
        lat.transport_in(d, q, -1) * field_at(psi, lat.neighbor(q, d, -1));
    const double h = lat.spacing();
    return (up - 2.0 * field_at(psi, q) + dn) / (h * h);
  }

  Eigen::Vector2d covariant_mixed(const Eigen::MatrixX2d& psi, int q, int i,
                                  int j) const {
    const auto& lat = lattice_;
    const Eigen::Vector2d up =
        lat.transport_in(i, q, +1) *
        covariant_first(psi, lat.neighbor(q, i, +1), j);
    const Eigen::Vector2d dn =
        lat.transport_in(i, q, -1) *
        covariant_first(psi, lat.neighbor(q, i, -1), j);
    return (up - dn) / (2.0 * lat.spacing());
  }

  const LatticeBundle& lattice_;
  std::vector<const EigenSection*> modes_;
  double epsilon_;
  GaussianMeasure measure_;
};

namespace detail {

class InterpolatedSection final : public SectionEvaluator {
 public:
  InterpolatedSection(const SmoothedEnsemble& family,
                      const Eigen::VectorXd& coeff) {
    const auto& lattice = family.lattice();
    const int n = lattice.n();
    Eigen::MatrixXd c1 = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd c2 = Eigen::MatrixXd::Zero(n, n);
    const auto& modes = family.modes();
    for (std::size_t k = 0; k < modes.size(); ++k) {
      const auto& psi = modes[k]->psi;
      for (int q = 0; q < lattice.nodes(); ++q) {
        const int i = q / n, j = q % n;
        c1(i, j) += coeff(static_cast<int>(k)) * psi(q, 0);
        c2(i, j) += coeff(static_cast<int>(k)) * psi(q, 1);
      }
    }
    u1_ = std::make_unique<PeriodicBicubic>(std::move(c1), lattice.spacing());
    u2_ = std::make_unique<PeriodicBicubic>(std::move(c2), lattice.spacing());
  }

  Eigen::Vector2d value(const ChartPoint& p) const override {
    return Eigen::Vector2d(u1_->value(p.x[0], p.x[1]),
                           u2_->value(p.x[0], p.x[1]));
  }

  Eigen::Matrix2d jacobian(const ChartPoint& p) const override {
    Eigen::Matrix2d j;
    j << u1_->dx(p.x[0], p.x[1]), u1_->dy(p.x[0], p.x[1]),
        u2_->dx(p.x[0], p.x[1]), u2_->dy(p.x[0], p.x[1]);
    return j;
  }

 private:
  std::unique_ptr<PeriodicBicubic> u1_, u2_;
};

}  // namespace detail

inline std::unique_ptr<SectionEvaluator> SmoothedEnsemble::section(
    const Eigen::VectorXd& coefficients) const {
  if (coefficients.size() != basis_size())
    throw std::invalid_argument("section: coefficient count mismatch");
  return std::make_unique<detail::InterpolatedSection>(*this, coefficients);
}

// Retain the modes with w(eps sqrt(lambda)) > 0 and attach the diagonal
// Gaussian measure with those variances.
inline std::unique_ptr<SmoothedEnsemble> build_ensemble(
    const LatticeBundle& lattice, const std::vector<EigenSection>& spectrum,
    double epsilon, const WProfile& w) {
  std::vector<const EigenSection*> kept;
  std::vector<double> variances;
  for (const auto& mode : spectrum) {
    const double v = w(epsilon * std::sqrt(mode.lambda));
    if (v > 0.0) {
      kept.push_back(&mode);
      variances.push_back(v);
    }
  }
  if (kept.empty())
    throw EmptyEnsembleError(
        "build_ensemble: no modes retained (epsilon too large for the "
        "profile support)");
  Eigen::VectorXd var(variances.size());
  for (std::size_t i = 0; i < variances.size(); ++i) var(i) = variances[i];
  return std::make_unique<SmoothedEnsemble>(lattice, std::move(kept), var,
                                            epsilon);
}

}  // namespace gbc

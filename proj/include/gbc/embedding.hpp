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
#include <array>
#include <functional>
#include <memory>
#include <stdexcept>

#include "gbc/geometry.hpp"

namespace gbc {

// Field of N x N orthogonal projections of rank 2 over a chart; the source
// of a special (metric, connection)-pair via nabla = P d.
using ProjectionField = std::function<Eigen::MatrixXd(const ChartPoint&)>;

// Metric/connection/curvature evaluator for the pair induced by a
// projection field.  A smooth frame of Range(P) is built by Gram-Schmidt on
// two fixed pivot columns of P; in that (orthonormal) frame the induced
// metric Gram matrix is the identity and the connection matrices are
// W_i = E^T d_i E, differentiated centrally with step `step`.
class SpecialPairEvaluator {
 public:
  SpecialPairEvaluator(ProjectionField field, int ambient_dim, int pivot_a = 0,
                       int pivot_b = 1, double step = 1e-5)
      : field_(std::move(field)),
        n_(ambient_dim),
        pivots_{pivot_a, pivot_b},
        step_(step) {}

  Eigen::MatrixXd frame(const ChartPoint& p) const {
    const Eigen::MatrixXd proj = field_(p);
    if (proj.rows() != n_ || proj.cols() != n_)
      throw std::invalid_argument("SpecialPairEvaluator: projection shape");
    Eigen::VectorXd a = proj.col(pivots_[0]);
    Eigen::VectorXd b = proj.col(pivots_[1]);
    const double na = a.norm();
    if (na < 1e-10) throw DegenerateKernelError(p, "projection rank drop (pivot a)");
    a /= na;
    b -= a.dot(b) * a;
    const double nb = b.norm();
    if (nb < 1e-10) throw DegenerateKernelError(p, "projection rank drop (pivot b)");
    b /= nb;
    Eigen::MatrixXd e(n_, 2);
    e.col(0) = a;
    e.col(1) = b;
    return e;
  }

  Eigen::Matrix2d metric_gram(const ChartPoint& p) const {
    const Eigen::MatrixXd e = frame(p);
    return e.transpose() * e;  // identity by construction
  }

  // W_i = E^T d_i E (central difference).
  Eigen::Matrix2d connection(const ChartPoint& p, int i) const {
    const Eigen::MatrixXd e = frame(p);
    return e.transpose() * frame_derivative(p, i);
  }

  // F_{12} = d_1 W_2 - d_2 W_1 + [W_1, W_2], outer derivatives central.
  Eigen::Matrix2d curvature(const ChartPoint& p) const {
    auto w_at = [&](const ChartPoint& q, int i) { return connection(q, i); };
    std::array<Eigen::Matrix2d, 2> dw;
    for (int outer = 0; outer < 2; ++outer) {
      const int inner = 1 - outer;
      ChartPoint plus = p, minus = p;
      plus.x[outer] += step_;
      minus.x[outer] -= step_;
      dw[outer] = (w_at(plus, inner) - w_at(minus, inner)) / (2.0 * step_);
    }
    const Eigen::Matrix2d w1 = connection(p, 0), w2 = connection(p, 1);
    return dw[0] - dw[1] + w1 * w2 - w2 * w1;
  }

  // Idempotency/symmetry/rank diagnostics at a point.
  double projection_defect(const ChartPoint& p) const {
    const Eigen::MatrixXd proj = field_(p);
    const double sym = (proj - proj.transpose()).cwiseAbs().maxCoeff();
    const double idem = (proj * proj - proj).cwiseAbs().maxCoeff();
    const double rank = std::abs(proj.trace() - 2.0);
    return std::max({sym, idem, rank});
  }

 private:
  Eigen::MatrixXd frame_derivative(const ChartPoint& p, int i) const {
    ChartPoint plus = p, minus = p;
    plus.x[i] += step_;
    minus.x[i] -= step_;
    return (frame(plus) - frame(minus)) / (2.0 * step_);
  }

  ProjectionField field_;
  int n_;
  std::array<int, 2> pivots_;
  double step_;
};

// Section family induced by a projection field: Psi_n = P e_n with the
// standard Gaussian on R^N.  Derivatives fall back to central finite
// differences of the frame components (Richardson-extrapolated once), with
// the model's reference connection supplying the covariant corrections.
class ProjectionSectionFamily final : public SectionFamily {
 public:
  ProjectionSectionFamily(const BundleModel& model, ProjectionField field,
                          int ambient_dim, int pivot_a = 0, int pivot_b = 1,
                          double first_step = 1e-5, double second_step = 1e-4)
      : model_(model),
        evaluator_(std::move(field), ambient_dim, pivot_a, pivot_b),
        n_(ambient_dim),
        measure_(GaussianMeasure::standard(ambient_dim)),
        h1_(first_step),
        h2_(second_step) {}

  const BundleModel& model() const override { return model_; }
  int basis_size() const override { return n_; }
  const GaussianMeasure& measure() const override { return measure_; }

  Eigen::MatrixXd values(const ChartPoint& p) const override {
    // V_{n,alpha} = (P e_n) . E_alpha = E_{n,alpha}
    return evaluator_.frame(p);
  }

  BasisEval eval(const ChartPoint& p) const override {
    BasisEval out;
    out.V = values(p);
    for (int i = 0; i < 2; ++i) out.Vd[i] = covariant_first(p, i, h1_);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        // Outer Richardson step on the covariant first derivative field.
        out.Vdd[i][j] = 4.0 / 3.0 * covariant_second(p, i, j, h2_ / 2.0) -
                        1.0 / 3.0 * covariant_second(p, i, j, h2_);
      }
    return out;
  }

 private:
  Eigen::MatrixXd plain_derivative(const ChartPoint& p, int i, double h) const {
    ChartPoint plus = p, minus = p;
    plus.x[i] += h;
    minus.x[i] -= h;
    return (values(plus) - values(minus)) / (2.0 * h);
  }

  Eigen::MatrixXd covariant_first(const ChartPoint& p, int i, double h) const {
    const Eigen::MatrixXd d =
        4.0 / 3.0 * plain_derivative(p, i, h / 2.0) -
        1.0 / 3.0 * plain_derivative(p, i, h);
    return d + values(p) * model_.connection0(p, i).transpose();
  }

  Eigen::MatrixXd covariant_second(const ChartPoint& p, int i, int j,
                                   double h) const {
    ChartPoint plus = p, minus = p;
    plus.x[i] += h;
    minus.x[i] -= h;
    const Eigen::MatrixXd d =
        (covariant_first(plus, j, h1_) - covariant_first(minus, j, h1_)) /
        (2.0 * h);
    return d + covariant_first(p, j, h1_) * model_.connection0(p, i).transpose();
  }

  const BundleModel& model_;
  SpecialPairEvaluator evaluator_;
  int n_;
  GaussianMeasure measure_;
  double h1_;
  double h2_;
};

}  // namespace gbc

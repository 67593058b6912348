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
#include <memory>
#include <string>
#include <vector>

#include "gbc/geometry.hpp"

namespace gbc {

// ---------------------------------------------------------------------------
// Sphere with its tangent bundle inside the trivial R^3 bundle.
//
// Two spherical-coordinate charts; chart 1 is chart 0 composed with a fixed
// rotation that moves the coordinate poles from the z-axis to the x-axis, so
// every point of S^2 is interior to at least one chart's working band.
// Frames e_1 = d_theta(x), e_2 = d_phi(x)/sin(theta) are sigma_0-orthonormal
// and positively oriented; the reference connection is Levi-Civita, which is
// exactly the projection connection P d of the embedding.
// ---------------------------------------------------------------------------
class SphereTangentModel final : public BundleModel {
 public:
  static const Eigen::Matrix3d& chart_rotation(int c) {
    static const Eigen::Matrix3d r0 = Eigen::Matrix3d::Identity();
    static const Eigen::Matrix3d r1 = [] {
      Eigen::Matrix3d r;  // e_z -> e_x, e_x -> e_y, e_y -> e_z (det +1)
      r << 0, 0, 1, 1, 0, 0, 0, 1, 0;
      return r;
    }();
    return c == 0 ? r0 : r1;
  }

  std::string name() const override { return "sphere-tangent"; }
  std::string description() const override {
    return "unit sphere, tangent bundle in trivial R^3, round metric, "
           "Levi-Civita connection";
  }
  int euler_number() const override { return 2; }

  int num_charts() const override { return 2; }
  Chart chart(int c) const override {
    Chart ch;
    ch.id = c;
    ch.lo = Eigen::Vector2d(0.0, 0.0);
    ch.hi = Eigen::Vector2d(M_PI, kTwoPi);
    ch.periodic = {false, true};
    return ch;
  }

  Eigen::Vector3d ambient(const ChartPoint& p) const override {
    const double st = std::sin(p.x[0]), ct = std::cos(p.x[0]);
    const double sp = std::sin(p.x[1]), cp = std::cos(p.x[1]);
    return chart_rotation(p.chart) * Eigen::Vector3d(st * cp, st * sp, ct);
  }

  // Orthonormal frame as the columns of a 3x2 matrix.
  Eigen::Matrix<double, 3, 2> frame(const ChartPoint& p) const {
    const double st = std::sin(p.x[0]), ct = std::cos(p.x[0]);
    const double sp = std::sin(p.x[1]), cp = std::cos(p.x[1]);
    Eigen::Matrix<double, 3, 2> f;
    f.col(0) = Eigen::Vector3d(ct * cp, ct * sp, -st);
    f.col(1) = Eigen::Vector3d(-sp, cp, 0.0);
    return chart_rotation(p.chart) * f;
  }

  Eigen::Matrix2d metric(const ChartPoint& p) const override {
    Eigen::Matrix2d g = Eigen::Matrix2d::Identity();
    g(1, 1) = std::sin(p.x[0]) * std::sin(p.x[0]);
    return g;
  }

  Eigen::Matrix2d connection0(const ChartPoint& p, int i) const override {
    Eigen::Matrix2d w = Eigen::Matrix2d::Zero();
    if (i == 1) {
      const double ct = std::cos(p.x[0]);
      w(0, 1) = -ct;
      w(1, 0) = ct;
    }
    return w;
  }

  Eigen::Matrix2d curvature0(const ChartPoint& p) const override {
    const double st = std::sin(p.x[0]);
    Eigen::Matrix2d f;
    f << 0.0, st, -st, 0.0;
    return f;
  }

  double chart_weight(const ChartPoint& p) const override {
    // Distance from this chart's coordinate poles; larger is safer.
    const double axial = std::cos(p.x[0]);
    return 1.0 - std::abs(axial);
  }

  std::vector<QuadratureGrid> quadrature(int n_theta, int n_phi) const override {
    return {sphere_quadrature(n_theta, n_phi, /*chart=*/0)};
  }

  // Equatorial bands |cos(theta)| <= 0.76 of the two charts; since
  // 2 * 0.76^2 > 1 the bands cover the sphere with interior overlap.
  std::vector<SeedBox> seed_boxes() const override {
    const double cut = std::acos(0.76);
    std::vector<SeedBox> boxes(2);
    for (int c = 0; c < 2; ++c) {
      boxes[c].chart = c;
      boxes[c].lo = Eigen::Vector2d(cut, 0.0);
      boxes[c].hi = Eigen::Vector2d(M_PI - cut, kTwoPi);
      boxes[c].periodic = {false, true};
      boxes[c].margin = 0.2;
    }
    return boxes;
  }
};

// Sample space U = R^3 with the standard Gaussian: Psi_n = P_x e_n.  All
// derivatives are analytic; nabla^0 coincides with P d on this model.
class SphereTangentFamily final : public SectionFamily {
 public:
  explicit SphereTangentFamily(const SphereTangentModel& model)
      : model_(model), measure_(GaussianMeasure::standard(3)) {}

  const BundleModel& model() const override { return model_; }
  int basis_size() const override { return 3; }
  const GaussianMeasure& measure() const override { return measure_; }

  Eigen::MatrixXd values(const ChartPoint& p) const override {
    return model_.frame(p);  // V_{n,alpha} = (e_alpha)_n
  }

  BasisEval eval(const ChartPoint& p) const override {
    BasisEval out;
    const Eigen::Vector3d x = model_.ambient(p);
    const Eigen::Matrix<double, 3, 2> f = model_.frame(p);
    const double st = std::sin(p.x[0]), ct = std::cos(p.x[0]);

    out.V = f;

    // Coordinate tangents t_i = d_i x and their frame components.
    const Eigen::Vector3d t_theta = f.col(0);
    const Eigen::Vector3d t_phi = st * f.col(1);
    const std::array<Eigen::Vector3d, 2> t{t_theta, t_phi};

    // (nabla_i Psi_n)^alpha = -(x . e_n) (e_alpha . t_i)
    for (int i = 0; i < 2; ++i) {
      Eigen::MatrixXd vd(3, 2);
      for (int n = 0; n < 3; ++n)
        for (int a = 0; a < 2; ++a) vd(n, a) = -x(n) * f.col(a).dot(t[i]);
      out.Vd[i] = vd;
    }

    // Tangential second fundamental data: frame components of P d_i t_j.
    // (theta,theta): 0; (theta,phi) and (phi,theta): cos(theta) e_2;
    // (phi,phi): -sin(theta) cos(theta) e_1.
    auto proj_second = [&](int i, int j) -> Eigen::Vector2d {
      if (i != j) return Eigen::Vector2d(0.0, ct);
      if (i == 1) return Eigen::Vector2d(-st * ct, 0.0);
      return Eigen::Vector2d::Zero();
    };

    // nabla_i nabla_j Psi_n = -(x.e_n) P d_i t_j - (t_i.e_n) t_j
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        Eigen::MatrixXd vdd(3, 2);
        const Eigen::Vector2d second = proj_second(i, j);
        for (int n = 0; n < 3; ++n)
          for (int a = 0; a < 2; ++a)
            vdd(n, a) = -x(n) * second(a) - t[i](n) * f.col(a).dot(t[j]);
        out.Vdd[i][j] = vdd;
      }
    return out;
  }

 private:
  const SphereTangentModel& model_;
  GaussianMeasure measure_;
};

// ---------------------------------------------------------------------------
// Square torus [0, 2 pi)^2 with a trivial oriented rank-2 bundle.  The flat
// variant has nabla^0 = d; the curved variant carries the compatible
// connection  W0_1 = a sin(x2) J, W0_2 = 0,  whose curvature
// F0_{12} = -a cos(x2) J integrates to zero (trivial bundle).
// ---------------------------------------------------------------------------
class TorusModel final : public BundleModel {
 public:
  explicit TorusModel(double curvature_amplitude = 0.0)
      : amplitude_(curvature_amplitude) {}

  double amplitude() const { return amplitude_; }
  bool curved() const { return amplitude_ != 0.0; }

  std::string name() const override {
    return curved() ? "torus-curved" : "torus-flat";
  }
  std::string description() const override {
    if (!curved())
      return "flat square torus of side 2 pi, trivial rank-2 bundle, "
             "nabla^0 = d";
    return "flat square torus of side 2 pi, trivial rank-2 bundle, "
           "A0 = a sin(x2) J dx1 with a = " + std::to_string(amplitude_);
  }
  int euler_number() const override { return 0; }

  int num_charts() const override { return 1; }
  Chart chart(int) const override {
    Chart ch;
    ch.id = 0;
    ch.lo = Eigen::Vector2d(0.0, 0.0);
    ch.hi = Eigen::Vector2d(kTwoPi, kTwoPi);
    ch.periodic = {true, true};
    return ch;
  }

  Eigen::Matrix2d metric(const ChartPoint&) const override {
    return Eigen::Matrix2d::Identity();
  }

  Eigen::Matrix2d connection0(const ChartPoint& p, int i) const override {
    Eigen::Matrix2d w = Eigen::Matrix2d::Zero();
    if (i == 0 && curved()) {
      const double a = amplitude_ * std::sin(p.x[1]);
      w(0, 1) = -a;
      w(1, 0) = a;
    }
    return w;
  }

  Eigen::Matrix2d curvature0(const ChartPoint& p) const override {
    Eigen::Matrix2d f = Eigen::Matrix2d::Zero();
    if (curved()) {
      const double c = -amplitude_ * std::cos(p.x[1]);
      f(0, 1) = -c;
      f(1, 0) = c;
    }
    return f;
  }

  Eigen::Vector3d ambient(const ChartPoint& p) const override {
    return Eigen::Vector3d(p.x[0], p.x[1], 0.0);
  }

  double ambient_distance(const Eigen::Vector3d& a,
                          const Eigen::Vector3d& b) const override {
    double d2 = 0.0;
    for (int i = 0; i < 2; ++i) {
      double d = std::abs(a(i) - b(i));
      d = std::min(d, kTwoPi - d);
      d2 += d * d;
    }
    return std::sqrt(d2);
  }

  std::vector<QuadratureGrid> quadrature(int n, int) const override {
    return {torus_quadrature(n)};
  }

  std::vector<SeedBox> seed_boxes() const override {
    SeedBox box;
    box.chart = 0;
    box.lo = Eigen::Vector2d(0.0, 0.0);
    box.hi = Eigen::Vector2d(kTwoPi, kTwoPi);
    box.periodic = {true, true};
    box.margin = 0.0;
    return {box};
  }

 private:
  double amplitude_;
};

// Real Fourier family on the flat torus: for each mode k in `modes` and each
// fiber direction, cos(k.x) and sin(k.x) sections (just the constants for
// k = 0), all with unit coefficient variance by default.  Its covariance
// kernel is c(x - y) I with c even.
class TorusFourierFamily final : public SectionFamily {
 public:
  TorusFourierFamily(const TorusModel& model,
                     std::vector<Eigen::Vector2i> modes,
                     std::vector<double> variances = {})
      : model_(model), modes_(std::move(modes)) {
    if (model_.curved())
      throw std::invalid_argument(
          "TorusFourierFamily: analytic Fourier family requires the flat "
          "connection");
    int count = 0;
    for (const auto& k : modes_) count += (k[0] == 0 && k[1] == 0) ? 2 : 4;
    if (variances.empty()) {
      measure_ = GaussianMeasure::standard(count);
    } else {
      Eigen::VectorXd v(count);
      int slot = 0;
      for (std::size_t m = 0; m < modes_.size(); ++m) {
        const int per = (modes_[m][0] == 0 && modes_[m][1] == 0) ? 2 : 4;
        for (int j = 0; j < per; ++j) v(slot++) = variances.at(m);
      }
      measure_ = GaussianMeasure::diagonal(v);
    }
    basis_size_ = count;
  }

  const BundleModel& model() const override { return model_; }
  int basis_size() const override { return basis_size_; }
  const GaussianMeasure& measure() const override { return measure_; }

  Eigen::MatrixXd values(const ChartPoint& p) const override {
    Eigen::MatrixXd v = Eigen::MatrixXd::Zero(basis_size_, 2);
    int slot = 0;
    for (const auto& k : modes_) {
      const double phase = k[0] * p.x[0] + k[1] * p.x[1];
      if (k[0] == 0 && k[1] == 0) {
        v(slot++, 0) = 1.0;
        v(slot++, 1) = 1.0;
      } else {
        for (int f = 0; f < 2; ++f) {
          v(slot++, f) = std::cos(phase);
          v(slot++, f) = std::sin(phase);
        }
      }
    }
    return v;
  }

  BasisEval eval(const ChartPoint& p) const override {
    BasisEval out;
    out.V = values(p);
    for (int i = 0; i < 2; ++i) out.Vd[i] = derivative(p, i);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) out.Vdd[i][j] = second_derivative(p, i, j);
    return out;
  }

 private:
  Eigen::MatrixXd derivative(const ChartPoint& p, int i) const {
    Eigen::MatrixXd v = Eigen::MatrixXd::Zero(basis_size_, 2);
    int slot = 0;
    for (const auto& k : modes_) {
      const double phase = k[0] * p.x[0] + k[1] * p.x[1];
      if (k[0] == 0 && k[1] == 0) {
        slot += 2;
      } else {
        for (int f = 0; f < 2; ++f) {
          v(slot++, f) = -k[i] * std::sin(phase);
          v(slot++, f) = k[i] * std::cos(phase);
        }
      }
    }
    return v;
  }

  Eigen::MatrixXd second_derivative(const ChartPoint& p, int i, int j) const {
    Eigen::MatrixXd v = Eigen::MatrixXd::Zero(basis_size_, 2);
    int slot = 0;
    for (const auto& k : modes_) {
      const double phase = k[0] * p.x[0] + k[1] * p.x[1];
      if (k[0] == 0 && k[1] == 0) {
        slot += 2;
      } else {
        const double kk = static_cast<double>(k[i]) * k[j];
        for (int f = 0; f < 2; ++f) {
          v(slot++, f) = -kk * std::cos(phase);
          v(slot++, f) = -kk * std::sin(phase);
        }
      }
    }
    return v;
  }

  const TorusModel& model_;
  std::vector<Eigen::Vector2i> modes_;
  GaussianMeasure measure_;
  int basis_size_ = 0;
};

// Constant sections e_1, e_2 on either torus variant.  On the curved model
// the covariant derivatives pick up the connection matrices.
class TorusConstantFamily final : public SectionFamily {
 public:
  explicit TorusConstantFamily(const TorusModel& model)
      : model_(model), measure_(GaussianMeasure::standard(2)) {}

  const BundleModel& model() const override { return model_; }
  int basis_size() const override { return 2; }
  const GaussianMeasure& measure() const override { return measure_; }

  Eigen::MatrixXd values(const ChartPoint&) const override {
    return Eigen::MatrixXd::Identity(2, 2);
  }

  BasisEval eval(const ChartPoint& p) const override {
    BasisEval out;
    out.V = values(p);
    for (int i = 0; i < 2; ++i)
      out.Vd[i] = (model_.connection0(p, i) * out.V.transpose()).transpose();
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        // nabla_i nabla_j e_f = (d_i W_j + W_i W_j) e_f
        const Eigen::Matrix2d wj = model_.connection0(p, j);
        const Eigen::Matrix2d wi = model_.connection0(p, i);
        Eigen::Matrix2d dwj = Eigen::Matrix2d::Zero();
        if (model_.curved() && j == 0 && i == 1) {
          const double da = model_.amplitude() * std::cos(p.x[1]);
          dwj(0, 1) = -da;
          dwj(1, 0) = da;
        }
        out.Vdd[i][j] = ((dwj + wi * wj) * out.V.transpose()).transpose();
      }
    return out;
  }

 private:
  const TorusModel& model_;
  GaussianMeasure measure_;
};

}  // namespace gbc

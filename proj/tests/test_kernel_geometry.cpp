#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <vector>

#include "gbc/embedding.hpp"
#include "gbc/kernel.hpp"
#include "gbc/models.hpp"
#include "gbc/rng.hpp"

using namespace gbc;

namespace {

std::vector<ChartPoint> sphere_sample_points() {
  std::vector<ChartPoint> pts;
  for (double theta : {0.5, 1.2, 2.0, 2.7})
    for (double phi : {0.3, 1.7, 3.9, 5.6}) pts.push_back({0, {theta, phi}});
  return pts;
}

// Family wrapper whose reference frame is rotated pointwise by R(x); the
// covariant data transforms exactly, so gauge covariance of the derived
// quantities can be tested without finite differences.
class RotatedFrameModel final : public BundleModel {
 public:
  RotatedFrameModel(const BundleModel& base,
                    std::function<double(const ChartPoint&)> angle)
      : base_(base), angle_(std::move(angle)) {}

  std::string name() const override { return base_.name() + "+rotated-frame"; }
  std::string description() const override { return name(); }
  int euler_number() const override { return base_.euler_number(); }
  int num_charts() const override { return base_.num_charts(); }
  Chart chart(int c) const override { return base_.chart(c); }
  Eigen::Matrix2d metric(const ChartPoint& p) const override {
    return base_.metric(p);
  }
  Eigen::Vector3d ambient(const ChartPoint& p) const override {
    return base_.ambient(p);
  }
  std::vector<QuadratureGrid> quadrature(int a, int b) const override {
    return base_.quadrature(a, b);
  }

  Eigen::Matrix2d rotation(const ChartPoint& p) const {
    const double t = angle_(p);
    Eigen::Matrix2d r;
    r << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
    return r;
  }

  // W~_i = R^T W_i R + R^T d_i R
  Eigen::Matrix2d connection0(const ChartPoint& p, int i) const override {
    const Eigen::Matrix2d r = rotation(p);
    const double h = 1e-6;
    ChartPoint plus = p, minus = p;
    plus.x[i] += h;
    minus.x[i] -= h;
    const Eigen::Matrix2d dr = (rotation(plus) - rotation(minus)) / (2.0 * h);
    return r.transpose() * base_.connection0(p, i) * r + r.transpose() * dr;
  }

  Eigen::Matrix2d curvature0(const ChartPoint& p) const override {
    const Eigen::Matrix2d r = rotation(p);
    return r.transpose() * base_.curvature0(p) * r;
  }

 private:
  const BundleModel& base_;
  std::function<double(const ChartPoint&)> angle_;
};

class RotatedFrameFamily final : public SectionFamily {
 public:
  RotatedFrameFamily(const RotatedFrameModel& model, const SectionFamily& base)
      : model_(model), base_(base) {}

  const BundleModel& model() const override { return model_; }
  int basis_size() const override { return base_.basis_size(); }
  const GaussianMeasure& measure() const override { return base_.measure(); }

  Eigen::MatrixXd values(const ChartPoint& p) const override {
    return base_.values(p) * model_.rotation(p);
  }

  BasisEval eval(const ChartPoint& p) const override {
    // Components in the rotated frame: row-vectors acquire R on the right;
    // covariant derivatives transform the same way.
    const Eigen::Matrix2d r = model_.rotation(p);
    BasisEval out = base_.eval(p);
    out.V = (out.V * r).eval();
    for (int i = 0; i < 2; ++i) out.Vd[i] = (out.Vd[i] * r).eval();
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) out.Vdd[i][j] = (out.Vdd[i][j] * r).eval();
    return out;
  }

 private:
  const RotatedFrameModel& model_;
  const SectionFamily& base_;
};

}  // namespace

TEST_CASE("sphere kernel diagonal is the fiber identity") {
  SphereTangentModel model;
  SphereTangentFamily family(model);
  for (const auto& p : sphere_sample_points()) {
    const Eigen::Matrix2d c = covariance_kernel(family, p, p);
    REQUIRE((c - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() < 1e-14);
    REQUIRE((induced_metric(kernel_at(family, p)) - Eigen::Matrix2d::Identity())
                .cwiseAbs()
                .maxCoeff() < 1e-10);
  }
}

TEST_CASE("two-point kernel is symmetric under swapping arguments") {
  SphereTangentModel model;
  SphereTangentFamily family(model);
  ChartPoint x{0, {0.9, 1.1}};
  ChartPoint y{0, {M_PI - 0.9, 1.1 + M_PI}};  // antipodal point
  const Eigen::Matrix2d cxy = covariance_kernel(family, x, y);
  const Eigen::Matrix2d cyx = covariance_kernel(family, y, x);
  CHECK((cxy - cyx.transpose()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("induced metric inverts the covariance") {
  SphereTangentModel model;
  SphereTangentFamily family(model);
  KernelData kd = kernel_at(family, {0, {1.0, 2.0}});
  kd.C << 4.0, 0.0, 0.0, 1.0;
  const Eigen::Matrix2d m = induced_metric(kd);
  CHECK(m(0, 0) == Catch::Approx(0.25).epsilon(1e-15));
  CHECK(m(1, 1) == Catch::Approx(1.0).epsilon(1e-15));
  kd.C.setZero();
  CHECK_THROWS_AS(induced_metric(kd), DegenerateKernelError);
}

TEST_CASE("sphere connection form equals Levi-Civita") {
  SphereTangentModel model;
  SphereTangentFamily family(model);
  for (const auto& p : sphere_sample_points()) {
    const auto gamma = connection_form(kernel_at(family, p), model);
    for (int i = 0; i < 2; ++i) {
      // nabla^E = d - Gamma must agree with nabla^0 = d + W0
      REQUIRE((gamma[i] + model.connection0(p, i)).cwiseAbs().maxCoeff() < 1e-6);
      // metric compatibility: skew in the orthonormalized frame
      REQUIRE((gamma[i] + gamma[i].transpose()).cwiseAbs().maxCoeff() < 1e-8);
    }
  }
}

TEST_CASE("sphere relative connection vanishes against Levi-Civita") {
  SphereTangentModel model;
  SphereTangentFamily family(model);
  for (const auto& p : sphere_sample_points()) {
    const auto a = relative_connection(kernel_at(family, p));
    for (int i = 0; i < 2; ++i)
      REQUIRE(a[i].cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("sphere curvature from the kernel reproduces constant curvature one") {
  SphereTangentModel model;
  SphereTangentFamily family(model);
  for (const auto& p : sphere_sample_points()) {
    const Eigen::Matrix2d f = curvature_from_kernel(kernel_at(family, p), model);
    REQUIRE((f - model.curvature0(p)).cwiseAbs().maxCoeff() < 1e-10);
    const double density = euler_density_from_kernel(kernel_at(family, p), model);
    REQUIRE(density == Catch::Approx(1.0 / kTwoPi).epsilon(1e-10));
  }
}

TEST_CASE("sphere euler density integrates to the Euler characteristic") {
  SphereTangentModel model;
  SphereTangentFamily family(model);
  const auto grid = model.quadrature(64, 128)[0];
  std::vector<double> density(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k)
    density[k] = euler_density_from_kernel(
        kernel_at(family, {grid.chart, grid.nodes[k]}), model);
  CHECK(integrate_density(grid, density) == Catch::Approx(2.0).margin(1e-6));
}

TEST_CASE("flat torus fourier family has vanishing Gamma, A and F") {
  TorusModel flat;
  TorusFourierFamily family(flat, {{0, 0}, {1, 0}, {0, 1}, {2, 1}},
                            {1.0, 0.5, 0.5, 0.25});
  for (double x1 : {0.3, 2.9})
    for (double x2 : {1.1, 5.0}) {
      const KernelData kd = kernel_at(family, {0, {x1, x2}});
      const auto gamma = connection_form(kd, flat);
      const auto a = relative_connection(kd);
      for (int i = 0; i < 2; ++i) {
        REQUIRE(gamma[i].cwiseAbs().maxCoeff() < 1e-13);
        REQUIRE(a[i].cwiseAbs().maxCoeff() < 1e-13);
      }
      REQUIRE(curvature_from_kernel(kd, flat).cwiseAbs().maxCoeff() < 1e-13);
    }
}

TEST_CASE("constant family on the flat torus has zero connection form") {
  TorusModel flat;
  TorusConstantFamily family(flat);
  const KernelData kd = kernel_at(family, {0, {1.0, 2.0}});
  const auto gamma = connection_form(kd, flat);
  CHECK(gamma[0].cwiseAbs().maxCoeff() == 0.0);
  CHECK(gamma[1].cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("derivative split identity for the diagonal covariance") {
  // nabla0_i [C(x,x)] = D_i + D_i^T, tested by finite differences on a
  // weighted sphere family whose C(x) genuinely varies.
  SphereTangentModel model;
  class WeightedSphereFamily final : public SectionFamily {
   public:
    explicit WeightedSphereFamily(const SphereTangentModel& m)
        : base_(m), measure_(GaussianMeasure::diagonal(
                        (Eigen::VectorXd(3) << 1.0, 2.0, 3.0).finished())) {}
    const BundleModel& model() const override { return base_.model(); }
    int basis_size() const override { return 3; }
    const GaussianMeasure& measure() const override { return measure_; }
    Eigen::MatrixXd values(const ChartPoint& p) const override {
      return base_.values(p);
    }
    BasisEval eval(const ChartPoint& p) const override { return base_.eval(p); }

   private:
    SphereTangentFamily base_;
    GaussianMeasure measure_;
  } family(model);

  const double h = 1e-6;
  for (const auto& p : sphere_sample_points()) {
    const KernelData kd = kernel_at(family, p);
    for (int i = 0; i < 2; ++i) {
      ChartPoint plus = p, minus = p;
      plus.x[i] += h;
      minus.x[i] -= h;
      const Eigen::Matrix2d cp = kernel_at(family, plus).C;
      const Eigen::Matrix2d cm = kernel_at(family, minus).C;
      const Eigen::Matrix2d w = model.connection0(p, i);
      const Eigen::Matrix2d cov_dc =
          (cp - cm) / (2.0 * h) + w * kd.C + kd.C * w.transpose();
      REQUIRE((cov_dc - (kd.D[i] + kd.D[i].transpose())).cwiseAbs().maxCoeff() <
              1e-8);

      // inverse-derivative identity nabla_i C^{-1} = -C^{-1} (nabla_i C) C^{-1}
      const Eigen::Matrix2d inv_p = cp.inverse();
      const Eigen::Matrix2d inv_m = cm.inverse();
      const Eigen::Matrix2d cinv = kd.C.inverse();
      const Eigen::Matrix2d cov_dinv =
          (inv_p - inv_m) / (2.0 * h) + w * cinv + cinv * w.transpose();
      const Eigen::Matrix2d expected = -cinv * cov_dc * cinv;
      REQUIRE((cov_dinv - expected).cwiseAbs().maxCoeff() < 1e-8);
    }
  }
}

TEST_CASE("gauge covariance: rotating the frame conjugates A and F") {
  SphereTangentModel base_model;
  SphereTangentFamily base_family(base_model);
  RotatedFrameModel model(base_model, [](const ChartPoint& p) {
    return 0.7 * std::sin(p.x[0]) + 0.3 * std::cos(p.x[1]);
  });
  RotatedFrameFamily family(model, base_family);

  for (const auto& p : sphere_sample_points()) {
    const Eigen::Matrix2d r = model.rotation(p);
    const KernelData kd_base = kernel_at(base_family, p);
    const KernelData kd_rot = kernel_at(family, p);

    const auto a_base = relative_connection(kd_base);
    const auto a_rot = relative_connection(kd_rot);
    for (int i = 0; i < 2; ++i)
      REQUIRE((a_rot[i] - r.transpose() * a_base[i] * r).cwiseAbs().maxCoeff() <
              1e-7);

    const Eigen::Matrix2d f_base = curvature_from_kernel(kd_base, base_model);
    const Eigen::Matrix2d f_rot = curvature_from_kernel(kd_rot, model);
    REQUIRE((f_rot - r.transpose() * f_base * r).cwiseAbs().maxCoeff() < 1e-7);

    // Euler density is frame independent.
    REQUIRE(euler_density_from_kernel(kd_rot, model) ==
            Catch::Approx(euler_density_from_kernel(kd_base, base_model))
                .epsilon(1e-8));
  }
}

TEST_CASE("ampleness reports") {
  SphereTangentModel model;
  SphereTangentFamily family(model);
  const auto report = check_ample(family, sphere_sample_points());
  CHECK(report.pass);
  CHECK(report.min_singular_value == Catch::Approx(1.0).epsilon(1e-12));

  // A single section with a zero fails.
  TorusModel flat;
  class SingleSection final : public SectionFamily {
   public:
    explicit SingleSection(const TorusModel& m)
        : model_(m), measure_(GaussianMeasure::standard(1)) {}
    const BundleModel& model() const override { return model_; }
    int basis_size() const override { return 1; }
    const GaussianMeasure& measure() const override { return measure_; }
    Eigen::MatrixXd values(const ChartPoint& p) const override {
      Eigen::MatrixXd v(1, 2);
      v << std::sin(p.x[0]), 0.0;
      return v;
    }
    BasisEval eval(const ChartPoint& p) const override {
      BasisEval out;
      out.V = values(p);
      for (int i = 0; i < 2; ++i) out.Vd[i] = Eigen::MatrixXd::Zero(1, 2);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) out.Vdd[i][j] = Eigen::MatrixXd::Zero(1, 2);
      return out;
    }

   private:
    const TorusModel& model_;
    GaussianMeasure measure_;
  } single(flat);
  std::vector<ChartPoint> pts{{0, {0.0, 1.0}}, {0, {1.0, 1.0}}};
  CHECK_FALSE(check_ample(single, pts).pass);

  // The Fourier family passes (constant modes alone span the fibers).
  TorusFourierFamily fourier(flat, {{0, 0}, {1, 0}});
  CHECK(check_ample(fourier, pts).pass);
}

TEST_CASE("special pair from the sphere embedding recovers Levi-Civita") {
  SphereTangentModel model;
  ProjectionField field = [&](const ChartPoint& p) {
    const Eigen::Vector3d x = model.ambient(p);
    return Eigen::MatrixXd(Eigen::Matrix3d::Identity() - x * x.transpose());
  };
  SpecialPairEvaluator pair(field, 3);
  // Pivot columns 0,1 of P stay independent away from x = +/- e_1, e_2;
  // compare in the pair's own frame by conjugating the model connection.
  for (double theta : {0.8, 1.4, 2.2}) {
    ChartPoint p{0, {theta, 2.6}};
    CHECK(pair.projection_defect(p) < 1e-12);
    CHECK((pair.metric_gram(p) - Eigen::Matrix2d::Identity()).norm() < 1e-12);

    // The curvature coefficient in any orthonormal frame of TS^2 with the
    // same orientation equals sin(theta) J up to conjugation, and the Euler
    // density is frame independent; J is fixed by conjugation with SO(2),
    // so compare F directly up to the orientation of the pair frame.
    const Eigen::Matrix2d f = pair.curvature(p);
    const Eigen::Matrix2d f_model = model.curvature0(p);
    CHECK(std::abs(std::abs(f(0, 1)) - std::abs(f_model(0, 1))) < 1e-5);
    CHECK(std::abs(f(0, 0)) < 1e-5);
    CHECK(std::abs(f(0, 1) + f(1, 0)) < 1e-5);
  }
}

TEST_CASE("constant projection yields a flat special pair") {
  TorusModel flat;
  Eigen::MatrixXd p0 = Eigen::MatrixXd::Zero(4, 4);
  p0(0, 0) = p0(1, 1) = 1.0;
  SpecialPairEvaluator pair([p0](const ChartPoint&) { return p0; }, 4);
  ChartPoint p{0, {1.0, 2.0}};
  CHECK(pair.connection(p, 0).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(pair.connection(p, 1).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(pair.curvature(p).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("random smooth projection field: P d P curvature matches the kernel route") {
  TorusModel flat;
  // Smooth rank-2 projection field in R^3: rotate a base projection by a
  // trigonometric rotation field.
  auto rot = [](const ChartPoint& p) {
    const double a = 0.4 * std::sin(p.x[0]) + 0.2 * std::cos(p.x[1]);
    const double b = 0.3 * std::cos(p.x[0] + p.x[1]);
    Eigen::Matrix3d rx = Eigen::Matrix3d::Identity();
    rx(1, 1) = std::cos(a);
    rx(1, 2) = -std::sin(a);
    rx(2, 1) = std::sin(a);
    rx(2, 2) = std::cos(a);
    Eigen::Matrix3d rz = Eigen::Matrix3d::Identity();
    rz(0, 0) = std::cos(b);
    rz(0, 1) = -std::sin(b);
    rz(1, 0) = std::sin(b);
    rz(1, 1) = std::cos(b);
    return (rx * rz).eval();
  };
  ProjectionField field = [&](const ChartPoint& p) {
    Eigen::Matrix3d p0 = Eigen::Matrix3d::Zero();
    p0(0, 0) = p0(1, 1) = 1.0;
    const Eigen::Matrix3d r = rot(p);
    return Eigen::MatrixXd(r * p0 * r.transpose());
  };

  SpecialPairEvaluator pair(field, 3);
  ProjectionSectionFamily family(flat, field, 3);

  for (double x1 : {0.5, 2.5})
    for (double x2 : {1.5, 4.5}) {
      ChartPoint p{0, {x1, x2}};
      const KernelData kd = kernel_at(family, p);
      // same frame on both routes, so F matches entrywise
      const Eigen::Matrix2d f_kernel = curvature_from_kernel(kd, flat);
      const Eigen::Matrix2d f_pair = pair.curvature(p);
      REQUIRE((f_kernel - f_pair).cwiseAbs().maxCoeff() < 2e-5);

      // connection_form agrees with the P d P connection: W^E = -Gamma
      const auto gamma = connection_form(kd, flat);
      for (int i = 0; i < 2; ++i)
        REQUIRE((pair.connection(p, i) + gamma[i]).cwiseAbs().maxCoeff() < 1e-6);
    }
}

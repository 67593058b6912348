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
#include <cmath>
#include <limits>
#include <vector>

#include "gbc/geometry.hpp"
#include "gbc/pfaffian.hpp"

namespace gbc {

// Diagonal jets of the covariance kernel at one point, all expressed in the
// chart's sigma_0-orthonormal frame.  Derivatives act on the first (x) slot
// unless stated otherwise; D_i never differentiates through the diagonal
// restriction.
struct KernelData {
  ChartPoint point;
  Eigen::Matrix2d C;                              // C(x)
  std::array<Eigen::Matrix2d, 2> D;               // nabla0_{x^i} C |_{x=y}
  std::array<std::array<Eigen::Matrix2d, 2>, 2> E;  // nabla0_{x^i} nabla0_{x^j} C |_{x=y}
  std::array<std::array<Eigen::Matrix2d, 2>, 2> G;  // nabla0_{y^i} nabla0_{x^j} C |_{x=y}
};

inline Eigen::MatrixXd apply_measure(const GaussianMeasure& measure,
                                     const Eigen::MatrixXd& v) {
  return measure.apply_covariance(v);
}

// Two-point kernel C(x,y)^{alpha beta} = sum T_{nn'} Psi_n^a(x) Psi_n'^b(y).
inline Eigen::Matrix2d covariance_kernel(const SectionFamily& family,
                                         const ChartPoint& x,
                                         const ChartPoint& y) {
  const Eigen::MatrixXd vx = family.values(x);
  const Eigen::MatrixXd vy = family.values(y);
  return vx.transpose() * apply_measure(family.measure(), vy);
}

inline KernelData kernel_at(const SectionFamily& family, const ChartPoint& p) {
  KernelData kd;
  kd.point = p;
  const BasisEval basis = family.eval(p);
  const Eigen::MatrixXd tv = apply_measure(family.measure(), basis.V);
  std::array<Eigen::MatrixXd, 2> tvd;
  for (int i = 0; i < 2; ++i) tvd[i] = apply_measure(family.measure(), basis.Vd[i]);
  kd.C = basis.V.transpose() * tv;
  for (int i = 0; i < 2; ++i) kd.D[i] = basis.Vd[i].transpose() * tv;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      kd.E[i][j] = basis.Vdd[i][j].transpose() * tv;
      kd.G[i][j] = basis.Vd[j].transpose() * tvd[i];
    }
  return kd;
}

namespace detail {
inline void require_positive(const KernelData& kd) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(kd.C);
  const double lo = es.eigenvalues()(0), hi = es.eigenvalues()(1);
  if (!(lo > 1e-12 * std::max(hi, 0.0)) || !std::isfinite(lo))
    throw DegenerateKernelError(kd.point, "covariance kernel is degenerate");
}
}  // namespace detail

// Gram matrix of the induced metric on E in the reference frame: the
// covariance C(x) is the metric on E^*, so the metric on E is its inverse.
inline Eigen::Matrix2d induced_metric(const KernelData& kd) {
  detail::require_positive(kd);
  return kd.C.inverse();
}

// Gamma_i = d_{x^i} C(x,y)|_{x=y} C(x)^{-1}; the induced connection in the
// frame is d - Gamma.  The plain x-derivative is recovered from the
// covariant one before forming the product.
inline std::array<Eigen::Matrix2d, 2> connection_form(const KernelData& kd,
                                                      const BundleModel& model) {
  detail::require_positive(kd);
  const Eigen::Matrix2d cinv = kd.C.inverse();
  std::array<Eigen::Matrix2d, 2> gamma;
  for (int i = 0; i < 2; ++i) {
    const Eigen::Matrix2d plain =
        kd.D[i] - model.connection0(kd.point, i) * kd.C;
    gamma[i] = plain * cinv;
  }
  return gamma;
}

// A_i = -nabla0_{x^i} C(x,y)|_{x=y} C(x)^{-1}; globally defined and
// tensorial, with nabla^E = nabla^0 + A.
inline std::array<Eigen::Matrix2d, 2> relative_connection(const KernelData& kd) {
  detail::require_positive(kd);
  const Eigen::Matrix2d cinv = kd.C.inverse();
  return {-kd.D[0] * cinv, -kd.D[1] * cinv};
}

// Full-frame connection matrices of the induced connection: W^E = W^0 + A.
inline std::array<Eigen::Matrix2d, 2> induced_connection(const KernelData& kd,
                                                         const BundleModel& model) {
  auto a = relative_connection(kd);
  return {model.connection0(kd.point, 0) + a[0],
          model.connection0(kd.point, 1) + a[1]};
}

// Curvature coefficient F^E_{12} from the kernel jets:
//   F^E = F^0 + nabla0_1 A_2 - nabla0_2 A_1 + [A_1, A_2],
//   nabla0_i A_j = -T_ij C^{-1} - D_j d_i(C^{-1}),
//   T_ij = E_ij + G_ij,   d_i(C^{-1}) = -C^{-1} (D_i + D_i^T) C^{-1}.
inline Eigen::Matrix2d curvature_from_kernel(const KernelData& kd,
                                             const BundleModel& model) {
  detail::require_positive(kd);
  const Eigen::Matrix2d cinv = kd.C.inverse();
  const std::array<Eigen::Matrix2d, 2> a = {-kd.D[0] * cinv, -kd.D[1] * cinv};
  std::array<Eigen::Matrix2d, 2> dcinv;
  for (int i = 0; i < 2; ++i) {
    const Eigen::Matrix2d dc = kd.D[i] + kd.D[i].transpose();
    dcinv[i] = -cinv * dc * cinv;
  }
  auto nabla_a = [&](int i, int j) -> Eigen::Matrix2d {
    const Eigen::Matrix2d t = kd.E[i][j] + kd.G[i][j];
    return -t * cinv - kd.D[j] * dcinv[i];
  };
  return model.curvature0(kd.point) + nabla_a(0, 1) - nabla_a(1, 0) +
         a[0] * a[1] - a[1] * a[0];
}

// Euler form density (against the metric volume) of the induced pair.
inline double euler_density_from_kernel(const KernelData& kd,
                                        const BundleModel& model) {
  const Eigen::Matrix2d f = curvature_from_kernel(kd, model);
  SkewFormMatrix skew(2, 2);
  Eigen::Matrix2d block;
  block << 0.0, f(0, 1), -f(0, 1), 0.0;
  skew.set(0, 1, block);
  return euler_density(skew, model.volume_factor(kd.point));
}

struct AmplenessReport {
  double min_singular_value = std::numeric_limits<double>::infinity();
  ChartPoint argmin;
  bool pass = false;
};

// Smallest r-th singular value of the N x r evaluation matrix over the given
// nodes; the family is ample on the sample when it stays positive.
inline AmplenessReport check_ample(const SectionFamily& family,
                                   const std::vector<ChartPoint>& nodes,
                                   double threshold = 1e-8) {
  AmplenessReport report;
  for (const auto& p : nodes) {
    const Eigen::MatrixXd v = family.values(p);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(v);
    const double smin = svd.singularValues().minCoeff();
    if (smin < report.min_singular_value) {
      report.min_singular_value = smin;
      report.argmin = p;
    }
  }
  report.pass = report.min_singular_value > threshold;
  return report;
}

inline std::vector<ChartPoint> grid_points(const QuadratureGrid& grid) {
  std::vector<ChartPoint> pts(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    pts[i] = ChartPoint{grid.chart, grid.nodes[i]};
  return pts;
}

}  // namespace gbc

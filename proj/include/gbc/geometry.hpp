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
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gbc/gaussian.hpp"
#include "gbc/quadrature.hpp"

namespace gbc {

// All built-in models are surfaces carrying an oriented rank-2 bundle
// (m = r = 2); the rank-generic algebra lives in pfaffian.hpp/gaussian.hpp.

struct Chart {
  int id = 0;
  Eigen::Vector2d lo{0.0, 0.0};
  Eigen::Vector2d hi{1.0, 1.0};
  std::array<bool, 2> periodic{false, false};
  int orientation = +1;  // all charts are positively oriented
};

struct ChartPoint {
  int chart = 0;
  Eigen::Vector2d x{0.0, 0.0};
};

// Rectangle in one chart used to seed the zero search.  The union of all
// boxes covers the manifold with overlap; the margin says how far outside
// the box a Newton iterate may wander before it is handed to another box.
struct SeedBox {
  int chart = 0;
  Eigen::Vector2d lo{0.0, 0.0};
  Eigen::Vector2d hi{1.0, 1.0};
  std::array<bool, 2> periodic{false, false};
  double margin = 0.0;
};

struct DegenerateKernelError : std::runtime_error {
  DegenerateKernelError(const ChartPoint& p, const std::string& what_happened)
      : std::runtime_error(format(p, what_happened)), point(p) {}
  static std::string format(const ChartPoint& p, const std::string& msg) {
    std::ostringstream os;
    os << msg << " at chart " << p.chart << ", x = (" << p.x[0] << ", "
       << p.x[1] << ")";
    return os.str();
  }
  ChartPoint point;
};

// A compact surface with an oriented rank-2 bundle, a reference metric
// sigma_0 (the chart frames are sigma_0-orthonormal) and a compatible
// reference connection nabla^0.  Connection matrices follow the convention
//   (nabla_i psi)^frame = d_i psi + W_i psi,
// so W_i is skew in the orthonormal frame.
class BundleModel {
 public:
  virtual ~BundleModel() = default;

  virtual std::string name() const = 0;
  virtual std::string description() const = 0;
  int dim() const { return 2; }
  int rank() const { return 2; }
  virtual int euler_number() const = 0;

  virtual int num_charts() const = 0;
  virtual Chart chart(int c) const = 0;

  virtual Eigen::Matrix2d metric(const ChartPoint& p) const = 0;
  double volume_factor(const ChartPoint& p) const {
    return std::sqrt(metric(p).determinant());
  }

  // Reference pair in the chart frame: W0_i and the curvature coefficient
  // F0_{12} = d_1 W0_2 - d_2 W0_1 + [W0_1, W0_2].
  virtual Eigen::Matrix2d connection0(const ChartPoint& p, int i) const = 0;
  virtual Eigen::Matrix2d curvature0(const ChartPoint& p) const = 0;

  // Embedding used for test functions and cross-chart deduplication.
  virtual Eigen::Vector3d ambient(const ChartPoint& p) const = 0;
  virtual double ambient_distance(const Eigen::Vector3d& a,
                                  const Eigen::Vector3d& b) const {
    return (a - b).norm();
  }

  // Relative chart weight for attributing zeros found in overlaps.
  virtual double chart_weight(const ChartPoint& p) const {
    (void)p;
    return 1.0;
  }

  // Quadrature covering the whole manifold (metric weights included).
  virtual std::vector<QuadratureGrid> quadrature(int size_a,
                                                 int size_b) const = 0;

  // Seed rectangles for the zero search; every point of M must be interior
  // to at least one box.
  virtual std::vector<SeedBox> seed_boxes() const = 0;
};

// Pointwise data of a finite basis of sections in a chart frame: rows index
// the basis, columns the fiber components.
struct BasisEval {
  Eigen::MatrixXd V;                             // N x 2 values
  std::array<Eigen::MatrixXd, 2> Vd;             // nabla0_i Psi
  std::array<std::array<Eigen::MatrixXd, 2>, 2> Vdd;  // nabla0_i nabla0_j Psi
};

// A section of the model's bundle that can be evaluated anywhere, used by
// the zero locator.  jacobian() returns d(u^alpha)/d(x^j) with alpha as the
// row index (plain chart-coordinate derivatives of the frame components).
class SectionEvaluator {
 public:
  virtual ~SectionEvaluator() = default;
  virtual Eigen::Vector2d value(const ChartPoint& p) const = 0;
  virtual Eigen::Matrix2d jacobian(const ChartPoint& p) const = 0;
};

// Finite sample space of sections (U, gamma): basis with pointwise
// derivative data plus a Gaussian measure on the coefficients.
class SectionFamily {
 public:
  virtual ~SectionFamily() = default;

  virtual const BundleModel& model() const = 0;
  virtual int basis_size() const = 0;
  virtual const GaussianMeasure& measure() const = 0;

  virtual Eigen::MatrixXd values(const ChartPoint& p) const = 0;
  virtual BasisEval eval(const ChartPoint& p) const = 0;

  virtual std::unique_ptr<SectionEvaluator> section(
      const Eigen::VectorXd& coefficients) const;
};

namespace detail {

class LinearCombinationSection final : public SectionEvaluator {
 public:
  LinearCombinationSection(const SectionFamily& family, Eigen::VectorXd coeff)
      : family_(family), coeff_(std::move(coeff)) {}

  Eigen::Vector2d value(const ChartPoint& p) const override {
    return family_.values(p).transpose() * coeff_;
  }

  Eigen::Matrix2d jacobian(const ChartPoint& p) const override {
    const BasisEval basis = family_.eval(p);
    Eigen::Matrix2d j;
    for (int i = 0; i < 2; ++i) {
      // plain derivative = covariant minus the connection action
      const Eigen::MatrixXd plain =
          basis.Vd[i] - basis.V * family_.model().connection0(p, i).transpose();
      j.col(i) = plain.transpose() * coeff_;
    }
    return j;
  }

 private:
  const SectionFamily& family_;
  Eigen::VectorXd coeff_;
};

}  // namespace detail

inline std::unique_ptr<SectionEvaluator> SectionFamily::section(
    const Eigen::VectorXd& coefficients) const {
  if (coefficients.size() != basis_size())
    throw std::invalid_argument("section: coefficient count mismatch");
  return std::make_unique<detail::LinearCombinationSection>(*this, coefficients);
}

}  // namespace gbc

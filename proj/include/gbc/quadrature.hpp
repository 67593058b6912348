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
#include <string>
#include <vector>

#include "gbc/numerics.hpp"

namespace gbc {

// Gauss-Legendre rule on [-1, 1], nodes ascending.  Newton iteration on the
// three-term recurrence; accurate to ~1e-15 for the sizes used here.
inline void gauss_legendre(int n, std::vector<double>& nodes,
                           std::vector<double>& weights) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n >= 1");
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Chebyshev-based initial guess for the i-th root (descending order).
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    weights[i] = w;
    weights[n - 1 - i] = w;
  }
}

// Nodes and total weights for one chart.  Weights include the metric volume
// factor: sum_k w_k * f(x_k) approximates the integral of f against the
// Riemannian measure restricted to this chart (times the partition of unity).
struct QuadratureGrid {
  int chart = 0;
  std::vector<Eigen::Vector2d> nodes;
  std::vector<double> weights;
  std::vector<double> partition;  // partition-of-unity value per node

  std::size_t size() const { return nodes.size(); }
};

// Integral of a sampled density: pairwise sum of weight * value * partition.
inline double integrate_density(const QuadratureGrid& grid,
                                const std::vector<double>& values) {
  if (grid.size() == 0) throw std::invalid_argument("integrate_density: empty grid");
  if (values.size() != grid.size())
    throw std::invalid_argument("integrate_density: value/node count mismatch");
  std::vector<double> terms(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k)
    terms[k] = grid.weights[k] * grid.partition[k] * values[k];
  return pairwise_sum(terms);
}

inline double integrate_density(const std::vector<QuadratureGrid>& grids,
                                const std::vector<std::vector<double>>& values) {
  if (grids.empty()) throw std::invalid_argument("integrate_density: no grids");
  std::vector<double> parts(grids.size());
  for (std::size_t g = 0; g < grids.size(); ++g)
    parts[g] = integrate_density(grids[g], values[g]);
  return pairwise_sum(parts);
}

// Product rule on the (theta, phi) sphere chart: Gauss-Legendre in cos(theta)
// times the uniform (trapezoid) rule in phi.  Exact for band-limited smooth
// integrands; nodes stay away from the poles.  Total weight is the area 4*pi.
inline QuadratureGrid sphere_quadrature(int n_theta, int n_phi, int chart = 0) {
  QuadratureGrid grid;
  grid.chart = chart;
  std::vector<double> t, wt;
  gauss_legendre(n_theta, t, wt);
  const double dphi = kTwoPi / n_phi;
  grid.nodes.reserve(static_cast<std::size_t>(n_theta) * n_phi);
  grid.weights.reserve(grid.nodes.capacity());
  for (int a = 0; a < n_theta; ++a) {
    const double theta = std::acos(t[a]);
    for (int b = 0; b < n_phi; ++b) {
      grid.nodes.emplace_back(theta, dphi * (b + 0.5));
      grid.weights.push_back(wt[a] * dphi);
    }
  }
  grid.partition.assign(grid.size(), 1.0);
  return grid;
}

// Uniform periodic grid on the square torus of side `side`; the trapezoid
// rule is exact for trigonometric polynomials below the Nyquist order.
inline QuadratureGrid torus_quadrature(int n, double side = kTwoPi,
                                       int chart = 0) {
  QuadratureGrid grid;
  grid.chart = chart;
  const double h = side / n;
  grid.nodes.reserve(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) grid.nodes.emplace_back(h * i, h * j);
  grid.weights.assign(grid.size(), h * h);
  grid.partition.assign(grid.size(), 1.0);
  return grid;
}

}  // namespace gbc

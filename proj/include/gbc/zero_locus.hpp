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
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "gbc/geometry.hpp"
#include "gbc/kernel.hpp"
#include "gbc/numerics.hpp"
#include "gbc/parallel.hpp"
#include "gbc/rng.hpp"

namespace gbc {

struct NumericalDegeneracyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct LocatedZero {
  int chart = 0;
  Eigen::Vector2d x{0.0, 0.0};
  Eigen::Vector3d ambient{0.0, 0.0, 0.0};
  int index = 0;
  double condition = 0.0;
  double residual = 0.0;
};

struct SignedZeroSet {
  std::vector<LocatedZero> zeros;
  bool degenerate = false;
  std::string reason;
  double section_scale = 0.0;
  double separation_radius = 0.0;

  int index_sum() const {
    int s = 0;
    for (const auto& z : zeros) s += z.index;
    return s;
  }
};

struct ZeroFinderOptions {
  int cells_a = 32;   // seed cells along the first coordinate of each box
  int cells_b = 96;   // along the second
  int max_newton_iterations = 50;
  double tolerance = 1e-13;      // on |u| relative to the section scale
  double condition_limit = 1e8;  // Jacobian conditioning at an accepted zero
};

namespace detail {

inline double wrap_into(double v, double lo, double hi) {
  const double period = hi - lo;
  double t = std::fmod(v - lo, period);
  if (t < 0) t += period;
  return lo + t;
}

struct SeedGrid {
  SeedBox box;
  int na = 0, nb = 0;          // cell counts
  double ha = 0.0, hb = 0.0;   // cell sizes
  Eigen::MatrixXd u1, u2;      // corner values, (na+1) x (nb+1)

  Eigen::Vector2d corner(int i, int j) const {
    return Eigen::Vector2d(box.lo[0] + ha * i, box.lo[1] + hb * j);
  }
};

inline SeedGrid evaluate_seed_grid(const SectionEvaluator& section,
                                   const SeedBox& box, int na, int nb) {
  SeedGrid g;
  g.box = box;
  g.na = na;
  g.nb = nb;
  g.ha = (box.hi[0] - box.lo[0]) / na;
  g.hb = (box.hi[1] - box.lo[1]) / nb;
  g.u1.resize(na + 1, nb + 1);
  g.u2.resize(na + 1, nb + 1);
  for (int i = 0; i <= na; ++i)
    for (int j = 0; j <= nb; ++j) {
      const Eigen::Vector2d u =
          section.value(ChartPoint{box.chart, g.corner(i, j)});
      g.u1(i, j) = u(0);
      g.u2(i, j) = u(1);
    }
  return g;
}

inline bool sign_change(double a, double b, double c, double d) {
  const double mn = std::min(std::min(a, b), std::min(c, d));
  const double mx = std::max(std::max(a, b), std::max(c, d));
  return mn <= 0.0 && mx >= 0.0;
}

}  // namespace detail

// Sign-bracketed cells spawn Newton refinements from their centers; accepted
// zeros are deduplicated across charts by ambient distance, keeping the
// representative from the chart with the larger partition weight.  Index of
// a zero: sign of det of the chart Jacobian of the local representative,
// which at a zero is independent of the connection used to differentiate.
inline SignedZeroSet find_zeros(const SectionEvaluator& section,
                                const BundleModel& model,
                                const ZeroFinderOptions& opt = {}) {
  SignedZeroSet out;

  const auto boxes = model.seed_boxes();
  std::vector<detail::SeedGrid> grids;
  grids.reserve(boxes.size());
  double scale = 0.0;
  double min_spacing = std::numeric_limits<double>::infinity();
  for (const auto& box : boxes) {
    grids.push_back(detail::evaluate_seed_grid(section, box, opt.cells_a, opt.cells_b));
    const auto& g = grids.back();
    scale = std::max({scale, g.u1.cwiseAbs().maxCoeff(), g.u2.cwiseAbs().maxCoeff()});
    min_spacing = std::min({min_spacing, g.ha, g.hb});
  }
  out.section_scale = scale;
  out.separation_radius = 0.5 * min_spacing;
  if (scale == 0.0) {
    out.degenerate = true;
    out.reason = "zero section";
    return out;
  }

  for (const auto& g : grids) {
    const auto& box = g.box;
    for (int i = 0; i < g.na; ++i) {
      for (int j = 0; j < g.nb; ++j) {
        if (!detail::sign_change(g.u1(i, j), g.u1(i + 1, j), g.u1(i, j + 1),
                                 g.u1(i + 1, j + 1)) ||
            !detail::sign_change(g.u2(i, j), g.u2(i + 1, j), g.u2(i, j + 1),
                                 g.u2(i + 1, j + 1)))
          continue;

        // Newton from the cell center, confined to a few cells around the
        // start: an iterate that leaves the ball is chasing a zero owned by
        // another cell, while stalling inside it signals a near-degenerate
        // crossing.
        const Eigen::Vector2d start =
            g.corner(i, j) + 0.5 * Eigen::Vector2d(g.ha, g.hb);
        const double basin_radius = 4.0 * std::max(g.ha, g.hb);
        Eigen::Vector2d x = start;           // wrapped into the box
        Eigen::Vector2d unwrapped = start;   // accumulates raw steps
        bool escaped = false;
        bool converged = false;
        double residual_norm = std::numeric_limits<double>::infinity();
        for (int iter = 0; iter < opt.max_newton_iterations; ++iter) {
          const ChartPoint p{box.chart, x};
          const Eigen::Vector2d u = section.value(p);
          residual_norm = u.norm();
          if (residual_norm <= opt.tolerance * scale) {
            converged = true;
            break;
          }
          const Eigen::Matrix2d jac = section.jacobian(p);
          Eigen::Vector2d step = jac.fullPivLu().solve(u);
          if (!step.allFinite()) {
            escaped = true;
            break;
          }
          const double cap = std::max(g.ha, g.hb);
          if (step.norm() > cap) step *= cap / step.norm();
          // Backtracking guard against fold-point oscillation.
          Eigen::Vector2d next = x - step;
          for (int back = 0; back < 5; ++back) {
            ChartPoint q{box.chart, next};
            for (int d = 0; d < 2; ++d)
              if (box.periodic[d])
                q.x[d] = detail::wrap_into(q.x[d], box.lo[d], box.hi[d]);
            if (section.value(q).norm() < residual_norm) break;
            step *= 0.5;
            next = x - step;
          }
          unwrapped -= step;
          x -= step;
          if ((unwrapped - start).norm() > basin_radius) {
            escaped = true;
            break;
          }
          for (int d = 0; d < 2; ++d) {
            if (box.periodic[d]) {
              x[d] = detail::wrap_into(x[d], box.lo[d], box.hi[d]);
            } else if (x[d] < box.lo[d] - box.margin ||
                       x[d] > box.hi[d] + box.margin) {
              escaped = true;
            }
          }
          if (escaped) break;
        }
        if (escaped) continue;  // another cell or chart owns this basin
        if (!converged) {
          // Exhausted iterations close to a zero means the zero itself is
          // nearly degenerate; far from one it is just a spurious start.
          if (residual_norm <= 1e-6 * scale) {
            out.degenerate = true;
            out.reason = "newton stalled near a zero";
            return out;
          }
          continue;
        }

        const ChartPoint p{box.chart, x};
        const Eigen::Matrix2d jac = section.jacobian(p);
        Eigen::JacobiSVD<Eigen::Matrix2d> svd(jac);
        const double smin = svd.singularValues()(1);
        const double smax = svd.singularValues()(0);
        const double condition =
            smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
        if (condition > opt.condition_limit) {
          out.degenerate = true;
          std::ostringstream os;
          os << "jacobian condition " << condition << " at a zero";
          out.reason = os.str();
          return out;
        }

        LocatedZero z;
        z.chart = box.chart;
        z.x = x;
        z.ambient = model.ambient(p);
        z.index = jac.determinant() > 0.0 ? +1 : -1;
        z.condition = condition;
        z.residual = section.value(p).norm();

        // Deduplicate across boxes/charts by ambient separation.
        bool merged = false;
        for (auto& existing : out.zeros) {
          if (model.ambient_distance(existing.ambient, z.ambient) <
              out.separation_radius) {
            if (model.chart_weight(p) >
                model.chart_weight(ChartPoint{existing.chart, existing.x}))
              existing = z;
            merged = true;
            break;
          }
        }
        if (!merged) out.zeros.push_back(z);
      }
    }
  }
  return out;
}

// <f, [Z_u]> for the point-mass current: the index-signed sum of f over the
// zero set.  Refuses degenerate sets; the caller resamples.
inline double pair_current(const SignedZeroSet& zeros,
                           const std::function<double(const Eigen::Vector3d&)>& f) {
  if (zeros.degenerate)
    throw NumericalDegeneracyError("pair_current: degenerate zero set (" +
                                   zeros.reason + ")");
  std::vector<double> terms(zeros.zeros.size());
  for (std::size_t k = 0; k < zeros.zeros.size(); ++k)
    terms[k] = zeros.zeros[k].index * f(zeros.zeros[k].ambient);
  return pairwise_sum(terms);
}

struct MCEstimate {
  int samples = 0;
  double mean = 0.0;
  double stderr_ = 0.0;
  int failures = 0;
  double quadrature = 0.0;      // integral of f times the Euler density
  int index_sum_min = 0;
  int index_sum_max = 0;
  std::vector<double> values;   // per-sample pairings, index order
};

// Monte Carlo mean of <f, [Z_u]> over sections drawn from the family.
// Degenerate draws are resampled within the sample's own substream, so the
// estimate depends only on (seed, n), never on the worker partition.  The
// comparison quadrature integrates f against the Euler density of the
// family's induced pair.
inline MCEstimate mc_expected_current(
    const SectionFamily& family,
    const std::function<double(const Eigen::Vector3d&)>& f, int n,
    const RngStream& base, const ZeroFinderOptions& opt = {}, int jobs = 1,
    int quad_a = 64, int quad_b = 128) {
  if (n < 100)
    throw std::invalid_argument("mc_expected_current: need at least 100 samples");
  const BundleModel& model = family.model();

  MCEstimate est;
  est.samples = n;
  est.values.assign(n, 0.0);
  std::vector<int> index_sums(n, 0);
  std::vector<int> failures(n, 0);

  parallel_for(n, jobs, [&](std::size_t i) {
    RngStream stream = base.substream(i);
    for (int attempt = 0;; ++attempt) {
      const Eigen::VectorXd c = family.measure().sample(stream);
      const auto section = family.section(c);
      const SignedZeroSet zeros = find_zeros(*section, model, opt);
      if (!zeros.degenerate) {
        est.values[i] = pair_current(zeros, f);
        index_sums[i] = zeros.index_sum();
        break;
      }
      ++failures[i];
      if (attempt >= 100)
        throw NumericalDegeneracyError(
            "mc_expected_current: persistent degeneracy in one substream: " +
            zeros.reason);
    }
  });

  est.mean = pairwise_sum(est.values) / n;
  std::vector<double> sq(n);
  for (int i = 0; i < n; ++i)
    sq[i] = (est.values[i] - est.mean) * (est.values[i] - est.mean);
  const double sample_var = n > 1 ? pairwise_sum(sq) / (n - 1) : 0.0;
  est.stderr_ = std::sqrt(sample_var / n);
  for (int i = 0; i < n; ++i) est.failures += failures[i];
  est.index_sum_min = *std::min_element(index_sums.begin(), index_sums.end());
  est.index_sum_max = *std::max_element(index_sums.begin(), index_sums.end());

  const double accepted = static_cast<double>(n);
  const double rate = accepted / (accepted + est.failures);
  if (rate < 0.999) {
    std::ostringstream os;
    os << "mc_expected_current: acceptance rate " << rate
       << " below 99.9%; the model likely violates generic transversality";
    throw NumericalDegeneracyError(os.str());
  }

  // Quadrature side of the identity.
  const auto grids = model.quadrature(quad_a, quad_b);
  std::vector<std::vector<double>> vals(grids.size());
  for (std::size_t g = 0; g < grids.size(); ++g) {
    vals[g].assign(grids[g].size(), 0.0);
    parallel_for(grids[g].size(), jobs, [&](std::size_t k) {
      const ChartPoint p{grids[g].chart, grids[g].nodes[k]};
      vals[g][k] = f(model.ambient(p)) *
                   euler_density_from_kernel(kernel_at(family, p), model);
    });
  }
  est.quadrature = integrate_density(grids, vals);
  return est;
}

}  // namespace gbc

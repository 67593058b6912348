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
#include <limits>
#include <optional>
#include <set>
#include <vector>

#include "gbc/kernel.hpp"
#include "gbc/lattice.hpp"
#include "gbc/spectral.hpp"

namespace gbc {

struct SweepEntry {
  double epsilon = 0.0;
  bool rejected = false;  // failed the resolution guard eps >= 8h
  int modes = 0;
  // sup-norm statistics over the grid (max-abs matrix entries)
  double metric_err = 0.0;      // || eps^m sigma_eps - kappa_tilde sigma_0 ||
  double metric_spatial = 0.0;  // || eps^m sigma_eps - spatial mean ||
  double metric_mean = 0.0;     // mean of tr(eps^m sigma_eps)/2
  double a_sup = 0.0;           // || A^eps ||
  double f_err = 0.0;           // || F^eps - F^0 ||
  double ker3 = 0.0;            // || eps^m (E_ii + G_ii) ||, max over i
};

struct ConvergenceReport {
  int grid = 0;
  WProfile profile;
  KappaValue kappa;
  std::vector<SweepEntry> entries;  // descending epsilon
  bool nesting_ok = true;
  // log-log fits over the accepted entries (error vs epsilon)
  std::optional<LineFit> metric_fit;
  std::optional<LineFit> a_fit;
  std::optional<LineFit> f_fit;
  // ker3 ratio check: value(smaller eps) / value(larger eps) stays below 1.5
  double ker3_max_ratio = 0.0;
};

namespace detail {

inline double max_abs(const Eigen::Matrix2d& m) {
  return m.cwiseAbs().maxCoeff();
}

inline std::optional<LineFit> fit_loglog(const std::vector<double>& eps,
                                         const std::vector<double>& err) {
  if (eps.size() < 2) return std::nullopt;
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(err[i] > 0.0) || !std::isfinite(err[i])) return std::nullopt;
    lx.push_back(std::log(eps[i]));
    ly.push_back(std::log(err[i]));
  }
  return fit_line(lx, ly);
}

}  // namespace detail

// White-noise-limit sweep: build the smoothed ensemble at each epsilon,
// derive the induced pair from its covariance kernel, and compare with the
// model's reference pair.  The error columns are the diagnostics of the
// reconstruction theorem; the fits key on slopes, not constants.  Entries
// below the resolution guard eps >= 8h are rejected up front.
inline ConvergenceReport convergence_sweep(const TorusModel& model, int grid_n,
                                           std::vector<double> eps_list,
                                           const WProfile& w, int jobs = 1) {
  ConvergenceReport report;
  report.grid = grid_n;
  report.profile = w;
  report.kappa = kappa(w, /*m=*/2);

  std::sort(eps_list.begin(), eps_list.end(), std::greater<double>());
  LatticeBundle lattice(model, grid_n);
  const double guard = 8.0 * lattice.spacing();

  double eps_min_accepted = std::numeric_limits<double>::infinity();
  for (double eps : eps_list)
    if (eps >= guard) eps_min_accepted = std::min(eps_min_accepted, eps);
  if (!std::isfinite(eps_min_accepted))
    throw std::invalid_argument(
        "convergence_sweep: every epsilon violates the resolution guard");

  const double support = w.support();
  const double lambda_max =
      (support / eps_min_accepted) * (support / eps_min_accepted) * (1.0 + 1e-9);
  const auto spectrum = eigensections(lattice, lambda_max, jobs);

  std::vector<long> previous_ids;
  bool previous_valid = false;
  std::vector<double> fit_eps, fit_metric, fit_a, fit_f, ker3_values;

  for (double eps : eps_list) {
    SweepEntry entry;
    entry.epsilon = eps;
    if (eps < guard) {
      entry.rejected = true;
      report.entries.push_back(entry);
      continue;
    }
    const auto ensemble = build_ensemble(lattice, spectrum, eps, w);
    entry.modes = ensemble->basis_size();

    // Nesting of retained-mode index sets along decreasing epsilon.
    const std::vector<long> ids = ensemble->retained_ids();
    if (previous_valid && w.nonincreasing()) {
      const std::set<long> now(ids.begin(), ids.end());
      for (long id : previous_ids)
        if (!now.count(id)) report.nesting_ok = false;
    }
    previous_ids = ids;
    previous_valid = true;

    const double eps_m = eps * eps;  // eps^m, m = 2
    const int nodes = lattice.nodes();
    std::vector<Eigen::Matrix2d> metric_field(nodes);
    std::vector<double> a_vals(nodes), f_vals(nodes), k3_vals(nodes);

    parallel_for(nodes, jobs, [&](std::size_t q) {
      const ChartPoint p{0, lattice.coords(static_cast<int>(q))};
      const KernelData kd = kernel_at(*ensemble, p);
      metric_field[q] = eps_m * kd.C;
      const auto a = relative_connection(kd);
      a_vals[q] = std::max(detail::max_abs(a[0]), detail::max_abs(a[1]));
      const Eigen::Matrix2d f = curvature_from_kernel(kd, model);
      f_vals[q] = detail::max_abs(f - model.curvature0(p));
      double k3 = 0.0;
      for (int i = 0; i < 2; ++i)
        k3 = std::max(k3, detail::max_abs(eps_m * (kd.E[i][i] + kd.G[i][i])));
      k3_vals[q] = k3;
    });

    Eigen::Matrix2d mean = Eigen::Matrix2d::Zero();
    for (const auto& m : metric_field) mean += m;
    mean /= static_cast<double>(nodes);
    entry.metric_mean = 0.5 * mean.trace();
    const Eigen::Matrix2d target =
        report.kappa.kappa_tilde * Eigen::Matrix2d::Identity();
    for (int q = 0; q < nodes; ++q) {
      entry.metric_err =
          std::max(entry.metric_err, detail::max_abs(metric_field[q] - target));
      entry.metric_spatial =
          std::max(entry.metric_spatial, detail::max_abs(metric_field[q] - mean));
      entry.a_sup = std::max(entry.a_sup, a_vals[q]);
      entry.f_err = std::max(entry.f_err, f_vals[q]);
      entry.ker3 = std::max(entry.ker3, k3_vals[q]);
    }

    fit_eps.push_back(eps);
    fit_metric.push_back(entry.metric_err);
    fit_a.push_back(entry.a_sup);
    fit_f.push_back(entry.f_err);
    ker3_values.push_back(entry.ker3);
    report.entries.push_back(entry);
  }

  report.metric_fit = detail::fit_loglog(fit_eps, fit_metric);
  report.a_fit = detail::fit_loglog(fit_eps, fit_a);
  report.f_fit = detail::fit_loglog(fit_eps, fit_f);

  // ker3 boundedness: moving to the next smaller epsilon must not inflate
  // the rescaled mixed second derivatives (no eps^-2 blow-up).
  for (std::size_t i = 0; i + 1 < ker3_values.size(); ++i) {
    const double big = ker3_values[i], small = ker3_values[i + 1];
    const double floor = 1e-12;
    const double ratio = (big <= floor && small <= floor) ? 1.0
                         : big <= floor ? std::numeric_limits<double>::infinity()
                                        : small / big;
    report.ker3_max_ratio = std::max(report.ker3_max_ratio, ratio);
  }
  return report;
}

}  // namespace gbc

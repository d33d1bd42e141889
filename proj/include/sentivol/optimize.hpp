#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "sentivol/error.hpp"

namespace sentivol {

struct NelderMeadOptions {
  double f_abs_tol = 1e-10;
  double f_rel_tol = 1e-12;
  double x_tol = 1e-8;
  std::size_t max_evaluations = 20000;
  /// Dimension-dependent coefficients (Gao & Han); plain NM when false.
  bool adaptive = true;
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = std::numeric_limits<double>::infinity();
  std::size_t evaluations = 0;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Derivative-free simplex minimization. Non-finite objective values are
/// treated as +inf, so infeasible regions are simply never accepted.
template <typename Objective>
NelderMeadResult nelder_mead(Objective&& objective, std::span<const double> start, std::span<const double> steps,
                             const NelderMeadOptions& opts = {}) {
  const std::size_t n = start.size();
  if (n == 0 || steps.size() != n) fail(Errc::invalid_argument, "nelder_mead: start/steps size mismatch");
  const double dn = static_cast<double>(n);
  const double refl = 1.0;
  const double expa = opts.adaptive ? 1.0 + 2.0 / dn : 2.0;
  const double contr = opts.adaptive ? 0.75 - 0.5 / dn : 0.5;
  const double shrink = opts.adaptive ? 1.0 - 1.0 / dn : 0.5;

  NelderMeadResult res;
  auto eval = [&](const std::vector<double>& x) {
    ++res.evaluations;
    const double v = objective(std::span<const double>(x));
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  std::vector<std::vector<double>> simplex(n + 1, std::vector<double>(start.begin(), start.end()));
  for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += steps[i];
  std::vector<double> fv(n + 1);
  for (std::size_t i = 0; i <= n; ++i) fv[i] = eval(simplex[i]);

  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n), xr(n), xe(n), xc(n);
  auto point = [&](double coef, const std::vector<double>& toward, std::vector<double>& out) {
    for (std::size_t j = 0; j < n; ++j) out[j] = centroid[j] + coef * (toward[j] - centroid[j]);
  };

  while (true) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    {
      std::vector<std::vector<double>> s2(n + 1);
      std::vector<double> f2(n + 1);
      for (std::size_t i = 0; i <= n; ++i) {
        s2[i] = std::move(simplex[order[i]]);
        f2[i] = fv[order[i]];
      }
      simplex = std::move(s2);
      fv = std::move(f2);
    }

    const double f_spread = fv[n] - fv[0];
    double x_spread = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
      for (std::size_t j = 0; j < n; ++j) x_spread = std::max(x_spread, std::abs(simplex[i][j] - simplex[0][j]));
    }
    if (std::isfinite(fv[0]) && f_spread <= opts.f_abs_tol + opts.f_rel_tol * std::abs(fv[0]) && x_spread <= opts.x_tol) {
      res.converged = true;
      break;
    }
    if (res.evaluations >= opts.max_evaluations) break;
    ++res.iterations;

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i][j] / dn;
    }

    point(-refl, simplex[n], xr);
    const double fr = eval(xr);
    if (fr < fv[0]) {
      point(-refl * expa, simplex[n], xe);
      const double fe = eval(xe);
      if (fe < fr) {
        simplex[n] = xe;
        fv[n] = fe;
      } else {
        simplex[n] = xr;
        fv[n] = fr;
      }
      continue;
    }
    if (fr < fv[n - 1]) {
      simplex[n] = xr;
      fv[n] = fr;
      continue;
    }
    bool accepted = false;
    if (fr < fv[n]) {
      point(-refl * contr, simplex[n], xc);  // outside contraction
      const double fc = eval(xc);
      if (fc <= fr) {
        simplex[n] = xc;
        fv[n] = fc;
        accepted = true;
      }
    } else {
      point(contr, simplex[n], xc);  // inside contraction
      const double fc = eval(xc);
      if (fc < fv[n]) {
        simplex[n] = xc;
        fv[n] = fc;
        accepted = true;
      }
    }
    if (!accepted) {
      for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = 0; j < n; ++j) simplex[i][j] = simplex[0][j] + shrink * (simplex[i][j] - simplex[0][j]);
        fv[i] = eval(simplex[i]);
      }
    }
  }

  res.x = simplex[0];
  res.value = fv[0];
  return res;
}

}  // namespace sentivol

#pragma once

// GARCH(1,1) with an exogenous linear mean equation:
//   y_t = mu + x_t' beta + eps_t,   eps_t = sigma_t z_t
//   sigma2_t = alpha0 + alpha1 eps_{t-1}^2 + beta1 sigma2_{t-1}
// with z_t standard normal or unit-variance Student-t.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "sentivol/error.hpp"
#include "sentivol/optimize.hpp"
#include "sentivol/regress.hpp"

namespace sentivol {

enum class Distribution { normal, student_t };
enum class EstimationMode { joint, two_step };

constexpr std::string_view to_string(Distribution d) noexcept { return d == Distribution::normal ? "normal" : "student_t"; }
constexpr std::string_view to_string(EstimationMode m) noexcept { return m == EstimationMode::joint ? "joint" : "two_step"; }

struct GarchParams {
  double mu = 0.0;
  std::vector<double> betas;
  double alpha0 = 0.0;
  double alpha1 = 0.0;
  double beta1 = 0.0;
  double nu = 8.0;  // Student-t only
};

inline void validate(const GarchParams& p, Distribution dist) {
  if (!std::isfinite(p.mu)) fail(Errc::invalid_params, "mu must be finite");
  for (double b : p.betas) {
    if (!std::isfinite(b)) fail(Errc::invalid_params, "betas must be finite");
  }
  if (!(p.alpha0 > 0.0) || !std::isfinite(p.alpha0)) fail(Errc::invalid_params, "alpha0 must be > 0");
  if (!(p.alpha1 >= 0.0) || !(p.beta1 >= 0.0)) fail(Errc::invalid_params, "alpha1 and beta1 must be >= 0");
  if (!(p.alpha1 + p.beta1 < 1.0)) fail(Errc::invalid_params, "alpha1 + beta1 must be < 1");
  if (dist == Distribution::student_t && !(p.nu > 2.0 && std::isfinite(p.nu))) {
    fail(Errc::nu_out_of_range, "nu must be > 2");
  }
}

/// sigma2_1 = sigma2_init, then the GARCH(1,1) recursion.
inline std::vector<double> variance_recursion(const GarchParams& p, std::span<const double> residuals, double sigma2_init) {
  if (!(sigma2_init > 0.0) || !std::isfinite(sigma2_init)) fail(Errc::nonpositive_init, "sigma2_init must be > 0");
  std::vector<double> s2(residuals.size());
  for (std::size_t t = 0; t < residuals.size(); ++t) {
    if (!std::isfinite(residuals[t])) fail(Errc::non_finite_input, "residual " + std::to_string(t));
    s2[t] = t == 0 ? sigma2_init
                   : p.alpha0 + p.alpha1 * residuals[t - 1] * residuals[t - 1] + p.beta1 * s2[t - 1];
  }
  return s2;
}

inline double normal_logpdf(double eps, double sigma2) {
  if (!(sigma2 > 0.0)) fail(Errc::nonpositive_variance, "sigma2 must be > 0");
  return -0.5 * std::log(2.0 * std::numbers::pi * sigma2) - eps * eps / (2.0 * sigma2);
}

namespace detail {
/// log Gamma((nu+1)/2) - log Gamma(nu/2) - 0.5 log(pi (nu-2))
inline double student_t_log_norm(double nu) {
  return std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) - 0.5 * std::log(std::numbers::pi * (nu - 2.0));
}
}  // namespace detail

/// Log density of the Student-t scaled so that its variance is sigma2.
inline double student_t_logpdf(double eps, double sigma2, double nu) {
  if (!(nu > 2.0) || !std::isfinite(nu)) fail(Errc::nu_out_of_range, "nu must be > 2");
  if (!(sigma2 > 0.0)) fail(Errc::nonpositive_variance, "sigma2 must be > 0");
  return detail::student_t_log_norm(nu) - 0.5 * std::log(sigma2) -
         0.5 * (nu + 1.0) * std::log1p(eps * eps / ((nu - 2.0) * sigma2));
}

namespace detail {

inline double sample_variance(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size() - 1);
}

/// Initial variance: sample variance of the residuals, or the unconditional
/// variance when the residuals are degenerate.
inline double initial_variance(std::span<const double> eps, const GarchParams& p) {
  const double v = sample_variance(eps);
  if (v > 0.0 && std::isfinite(v)) return v;
  return p.alpha0 / (1.0 - p.alpha1 - p.beta1);
}

inline void mean_residuals(const GarchParams& p, std::span<const double> y, const Eigen::Ref<const Eigen::MatrixXd>& x,
                           std::vector<double>& eps) {
  eps.resize(y.size());
  const auto k = static_cast<Eigen::Index>(p.betas.size());
  for (std::size_t t = 0; t < y.size(); ++t) {
    double m = p.mu;
    for (Eigen::Index j = 0; j < k; ++j) m += x(static_cast<Eigen::Index>(t), j) * p.betas[static_cast<std::size_t>(j)];
    eps[t] = y[t] - m;
  }
}

/// Unchecked likelihood kernel; returns NaN/-inf instead of throwing so the
/// optimizer can reject the point. Fills `path` when given.
inline double log_likelihood_kernel(const GarchParams& p, std::span<const double> eps, Distribution dist,
                                    std::vector<double>* path = nullptr) {
  const double init = initial_variance(eps, p);
  if (!(init > 0.0) || !std::isfinite(init)) return kNaN;
  if (path) path->resize(eps.size());
  double s2 = init;
  double ll = 0.0;
  if (dist == Distribution::normal) {
    const double c = -0.5 * std::log(2.0 * std::numbers::pi);
    for (std::size_t t = 0; t < eps.size(); ++t) {
      if (t > 0) s2 = p.alpha0 + p.alpha1 * eps[t - 1] * eps[t - 1] + p.beta1 * s2;
      if (path) (*path)[t] = s2;
      ll += c - 0.5 * std::log(s2) - 0.5 * eps[t] * eps[t] / s2;
    }
  } else {
    const double c = student_t_log_norm(p.nu);
    const double scale = p.nu - 2.0;
    const double power = 0.5 * (p.nu + 1.0);
    for (std::size_t t = 0; t < eps.size(); ++t) {
      if (t > 0) s2 = p.alpha0 + p.alpha1 * eps[t - 1] * eps[t - 1] + p.beta1 * s2;
      if (path) (*path)[t] = s2;
      ll += c - 0.5 * std::log(s2) - power * std::log1p(eps[t] * eps[t] / (scale * s2));
    }
  }
  return ll;
}

inline void check_shapes(const GarchParams& p, std::size_t n, const Eigen::Ref<const Eigen::MatrixXd>& x) {
  if (static_cast<std::size_t>(x.cols()) != p.betas.size()) {
    fail(Errc::invalid_argument, "X has " + std::to_string(x.cols()) + " columns but params carry " +
                                     std::to_string(p.betas.size()) + " betas");
  }
  if (x.cols() > 0 && static_cast<std::size_t>(x.rows()) != n) {
    fail(Errc::invalid_argument, "rows of X do not match y");
  }
}

}  // namespace detail

/// Exact log-likelihood of y under the model; sigma2_1 is the sample
/// variance of the mean-equation residuals.
inline double log_likelihood(const GarchParams& p, std::span<const double> y, const Eigen::Ref<const Eigen::MatrixXd>& x,
                             Distribution dist) {
  validate(p, dist);
  detail::check_shapes(p, y.size(), x);
  std::vector<double> eps;
  detail::mean_residuals(p, y, x, eps);
  const double ll = detail::log_likelihood_kernel(p, eps, dist);
  if (!std::isfinite(ll)) fail(Errc::non_finite_likelihood, "log-likelihood is not finite");
  return ll;
}

struct GarchFit {
  GarchParams params;
  Distribution distribution = Distribution::normal;
  EstimationMode mode = EstimationMode::joint;
  std::vector<double> variance_path;
  double log_likelihood = kNaN;
  bool converged = false;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  /// Order: mu, betas..., alpha0, alpha1, beta1[, nu]. Absent when the
  /// Hessian is not positive definite; the nu entry is NaN when nu sits on
  /// its clamp.
  std::optional<std::vector<double>> std_errors;
  /// Mean-equation OLS (two-step mode only).
  std::optional<OlsFit> mean_equation;

  std::vector<double> parameter_vector() const {
    std::vector<double> v{params.mu};
    v.insert(v.end(), params.betas.begin(), params.betas.end());
    v.insert(v.end(), {params.alpha0, params.alpha1, params.beta1});
    if (distribution == Distribution::student_t) v.push_back(params.nu);
    return v;
  }
};

struct GarchFitOptions {
  /// Seeds of the perturbed starts; the unperturbed moment-based guess is
  /// always tried first, so the default gives 5 starts.
  std::vector<std::uint64_t> seeds{1, 2, 3, 4};
  std::size_t max_evaluations_per_start = 6000;
  std::size_t polish_rounds = 4;
  bool compute_std_errors = true;
};

namespace detail {

inline constexpr double kMaxPersistence = 0.9999;
inline constexpr double kLogNuMinusTwoLo = -4.6;  // nu >= 2.01
inline constexpr double kLogNuMinusTwoHi = 6.9;   // nu <= ~1000

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double logit(double p) { return std::log(p / (1.0 - p)); }

/// Maps optimizer coordinates to model parameters on standardized data.
/// Layout: [mu, betas... (joint only), log alpha0, persistence logit,
/// alpha1-share logit, (log(nu-2) for Student-t)].
struct Transform {
  std::size_t n_betas = 0;
  bool has_mean = true;
  Distribution dist = Distribution::normal;
  GarchParams fixed_mean;  // two-step: mean fixed from OLS

  std::size_t size() const { return (has_mean ? 1 + n_betas : 0) + 3 + (dist == Distribution::student_t ? 1 : 0); }

  GarchParams to_params(std::span<const double> th) const {
    GarchParams p;
    std::size_t i = 0;
    if (has_mean) {
      p.mu = th[i++];
      p.betas.assign(th.begin() + 1, th.begin() + 1 + static_cast<std::ptrdiff_t>(n_betas));
      i += n_betas;
    } else {
      p.mu = fixed_mean.mu;
      p.betas = fixed_mean.betas;
    }
    p.alpha0 = std::exp(th[i]);
    const double persistence = kMaxPersistence * logistic(th[i + 1]);
    const double share = logistic(th[i + 2]);
    p.alpha1 = persistence * share;
    p.beta1 = persistence * (1.0 - share);
    if (dist == Distribution::student_t) {
      p.nu = 2.0 + std::exp(std::clamp(th[i + 3], kLogNuMinusTwoLo, kLogNuMinusTwoHi));
    }
    return p;
  }

  std::vector<double> from_params(const GarchParams& p) const {
    std::vector<double> th;
    if (has_mean) {
      th.push_back(p.mu);
      th.insert(th.end(), p.betas.begin(), p.betas.end());
    }
    const double persistence = std::clamp((p.alpha1 + p.beta1) / kMaxPersistence, 1e-6, 1.0 - 1e-6);
    const double share = std::clamp(p.alpha1 / std::max(p.alpha1 + p.beta1, 1e-12), 1e-6, 1.0 - 1e-6);
    th.push_back(std::log(p.alpha0));
    th.push_back(logit(persistence));
    th.push_back(logit(share));
    if (dist == Distribution::student_t) th.push_back(std::log(p.nu - 2.0));
    return th;
  }
};

/// Location/scale standardization of y and the exogenous columns.
struct Scaling {
  double y_mean = 0.0, y_scale = 1.0;
  Eigen::VectorXd x_mean, x_scale;

  /// Standardized-data parameters back to the original units.
  GarchParams unscale(const GarchParams& s) const {
    GarchParams p = s;
    double shift = y_mean + y_scale * s.mu;
    for (std::size_t j = 0; j < s.betas.size(); ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      p.betas[j] = y_scale * s.betas[j] / x_scale(jj);
      shift -= p.betas[j] * x_mean(jj);
    }
    p.mu = shift;
    p.alpha0 = y_scale * y_scale * s.alpha0;
    return p;
  }

  GarchParams scale(const GarchParams& p) const {
    GarchParams s = p;
    double mu = p.mu - y_mean;
    for (std::size_t j = 0; j < p.betas.size(); ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      mu += p.betas[j] * x_mean(jj);
      s.betas[j] = p.betas[j] * x_scale(jj) / y_scale;
    }
    s.mu = mu / y_scale;
    s.alpha0 = p.alpha0 / (y_scale * y_scale);
    return s;
  }
};

inline std::vector<double> natural_vector(const GarchParams& p, Distribution dist) {
  std::vector<double> v{p.mu};
  v.insert(v.end(), p.betas.begin(), p.betas.end());
  v.insert(v.end(), {p.alpha0, p.alpha1, p.beta1});
  if (dist == Distribution::student_t) v.push_back(p.nu);
  return v;
}

/// Central-difference Hessian of f at th.
template <typename F>
Eigen::MatrixXd numeric_hessian(F&& f, const std::vector<double>& th, double h) {
  const std::size_t n = th.size();
  Eigen::MatrixXd hess(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::vector<double> x = th;
  const double f0 = f(x);
  for (std::size_t i = 0; i < n; ++i) {
    x = th;
    x[i] = th[i] + 2.0 * h;
    const double fp = f(x);
    x[i] = th[i] - 2.0 * h;
    const double fm = f(x);
    hess(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = (fp - 2.0 * f0 + fm) / (4.0 * h * h);
    for (std::size_t j = 0; j < i; ++j) {
      double acc = 0.0;
      for (int si : {1, -1}) {
        for (int sj : {1, -1}) {
          x = th;
          x[i] += si * h;
          x[j] += sj * h;
          acc += si * sj * f(x);
        }
      }
      const double v = acc / (4.0 * h * h);
      hess(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      hess(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
    }
  }
  return hess;
}

}  // namespace detail

/// Maximum-likelihood GARCH(1,1) fit. `x` holds the exogenous regressors
/// without an intercept (zero columns allowed).
inline GarchFit fit(std::span<const double> y, const Eigen::Ref<const Eigen::MatrixXd>& x, Distribution dist,
                    EstimationMode mode, const GarchFitOptions& opts = {}) {
  const std::size_t n = y.size();
  if (n < 30) fail(Errc::insufficient_observations, "GARCH fit needs at least 30 observations, got " + std::to_string(n));
  const auto k = static_cast<std::size_t>(x.cols());
  if (k > 0 && static_cast<std::size_t>(x.rows()) != n) fail(Errc::invalid_argument, "rows of X do not match y");
  for (double v : y) {
    if (!std::isfinite(v)) fail(Errc::non_finite_input, "y must be finite");
  }
  const Eigen::VectorXd y_vec = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(n));
  Eigen::MatrixXd x_design = k > 0 ? Eigen::MatrixXd(x) : Eigen::MatrixXd(static_cast<Eigen::Index>(n), 0);

  // Rank check and mean-equation start in original units.
  const OlsFit ols = ols_fit(y_vec, with_intercept(x_design));

  detail::Scaling sc;
  sc.y_mean = y_vec.mean();
  sc.y_scale = std::sqrt((y_vec.array() - sc.y_mean).square().sum() / static_cast<double>(n));
  if (!(sc.y_scale > 0.0)) fail(Errc::invalid_argument, "y is constant");
  sc.x_mean = x_design.colwise().mean().transpose();
  sc.x_scale.resize(static_cast<Eigen::Index>(k));
  for (std::size_t j = 0; j < k; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    sc.x_scale(jj) = std::sqrt((x_design.col(jj).array() - sc.x_mean(jj)).square().sum() / static_cast<double>(n));
    if (!(sc.x_scale(jj) > 0.0)) fail(Errc::rank_deficient_design, "regressor " + std::to_string(j) + " is constant");
  }
  std::vector<double> ys(n);
  for (std::size_t t = 0; t < n; ++t) ys[t] = (y[t] - sc.y_mean) / sc.y_scale;
  Eigen::MatrixXd xs(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
  for (std::size_t j = 0; j < k; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    xs.col(jj) = (x_design.col(jj).array() - sc.x_mean(jj)) / sc.x_scale(jj);
  }

  GarchParams ols_params;
  ols_params.mu = ols.coefficients(0);
  for (std::size_t j = 0; j < k; ++j) ols_params.betas.push_back(ols.coefficients(static_cast<Eigen::Index>(j + 1)));
  ols_params.alpha0 = 1.0;  // placeholder for scale()
  const GarchParams ols_std = sc.scale(ols_params);

  detail::Transform tr;
  tr.n_betas = k;
  tr.dist = dist;
  tr.has_mean = mode == EstimationMode::joint;
  tr.fixed_mean = ols_std;

  // Moment-based initial guess with variance targeting.
  std::vector<double> eps0;
  detail::mean_residuals(ols_std, ys, xs, eps0);
  GarchParams guess = ols_std;
  guess.alpha1 = 0.05;
  guess.beta1 = 0.85;
  guess.alpha0 = std::max(detail::sample_variance(eps0), 1e-8) * (1.0 - guess.alpha1 - guess.beta1);
  guess.nu = 8.0;
  const std::vector<double> base = tr.from_params(guess);

  std::vector<double> eps_buf;
  auto objective = [&](std::span<const double> th) {
    const GarchParams p = tr.to_params(th);
    detail::mean_residuals(p, ys, xs, eps_buf);
    const double ll = detail::log_likelihood_kernel(p, eps_buf, dist);
    return std::isfinite(ll) ? -ll : std::numeric_limits<double>::infinity();
  };

  const std::size_t dim = tr.size();
  const std::size_t n_mean = tr.has_mean ? 1 + k : 0;
  std::vector<double> steps(dim, 0.5);
  for (std::size_t i = 0; i < n_mean; ++i) steps[i] = 0.1;

  NelderMeadOptions coarse;
  coarse.f_abs_tol = 1e-7;
  coarse.f_rel_tol = 0.0;
  coarse.x_tol = 1e-4;
  coarse.max_evaluations = opts.max_evaluations_per_start;

  std::vector<std::vector<double>> starts{base};
  for (std::uint64_t seed : opts.seeds) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<double> s = base;
    for (std::size_t i = 0; i < dim; ++i) s[i] += (i < n_mean ? 0.1 : 0.5) * z(rng);
    starts.push_back(std::move(s));
  }

  NelderMeadResult best;
  std::size_t evaluations = 0, iterations = 0;
  for (const auto& s : starts) {
    NelderMeadResult r = nelder_mead(objective, s, steps, coarse);
    evaluations += r.evaluations;
    iterations += r.iterations;
    if (r.value < best.value) best = std::move(r);
  }
  if (!std::isfinite(best.value)) fail(Errc::non_finite_likelihood, "no start produced a finite likelihood");

  // Polish the best start with fresh, smaller simplices until it stops moving.
  NelderMeadOptions fine;
  fine.f_abs_tol = 1e-10;
  fine.f_rel_tol = 0.0;
  fine.x_tol = 1e-7;
  fine.max_evaluations = opts.max_evaluations_per_start;
  std::vector<double> fine_steps(dim);
  for (std::size_t i = 0; i < dim; ++i) fine_steps[i] = 0.1 * steps[i];
  bool converged = false;
  for (std::size_t round = 0; round < std::max<std::size_t>(opts.polish_rounds, 1); ++round) {
    NelderMeadResult r = nelder_mead(objective, best.x, fine_steps, fine);
    evaluations += r.evaluations;
    iterations += r.iterations;
    const double gain = best.value - r.value;
    if (r.value <= best.value) best = std::move(r);
    converged = best.converged;
    if (converged && gain < 1e-9) break;
  }

  GarchFit out;
  out.distribution = dist;
  out.mode = mode;
  out.converged = converged;
  out.iterations = iterations;
  out.evaluations = evaluations;
  const GarchParams std_params = tr.to_params(best.x);
  out.params = sc.unscale(std_params);
  if (mode == EstimationMode::two_step) {
    out.params.mu = ols_params.mu;
    out.params.betas = ols_params.betas;
    out.mean_equation = ols;
  }
  {
    std::vector<double> eps;
    detail::mean_residuals(out.params, y, x_design, eps);
    out.log_likelihood = detail::log_likelihood_kernel(out.params, eps, dist, &out.variance_path);
  }
  if (!std::isfinite(out.log_likelihood)) fail(Errc::non_finite_likelihood, "fitted log-likelihood is not finite");

  if (opts.compute_std_errors) {
    // The likelihood is flat in nu once nu sits on its clamp, so nu is then
    // held fixed and the remaining SEs are conditional on it.
    std::vector<std::size_t> free_idx;
    bool nu_pinned = false;
    for (std::size_t i = 0; i < dim; ++i) {
      const bool is_nu = dist == Distribution::student_t && i + 1 == dim;
      if (is_nu && (best.x[i] <= detail::kLogNuMinusTwoLo + 1e-3 || best.x[i] >= detail::kLogNuMinusTwoHi - 1e-3)) {
        nu_pinned = true;
        continue;
      }
      free_idx.push_back(i);
    }
    std::vector<double> th_free(free_idx.size());
    for (std::size_t i = 0; i < free_idx.size(); ++i) th_free[i] = best.x[free_idx[i]];
    const Eigen::MatrixXd hess = detail::numeric_hessian(
        [&](const std::vector<double>& tf) {
          std::vector<double> th = best.x;
          for (std::size_t i = 0; i < free_idx.size(); ++i) th[free_idx[i]] = tf[i];
          return objective(th);
        },
        th_free, 1e-4);
    Eigen::LLT<Eigen::MatrixXd> llt(hess);
    if (hess.allFinite() && llt.info() == Eigen::Success) {
      const Eigen::MatrixXd cov_free = llt.solve(Eigen::MatrixXd::Identity(hess.rows(), hess.cols()));
      Eigen::MatrixXd cov_th = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
      for (std::size_t a = 0; a < free_idx.size(); ++a) {
        for (std::size_t b = 0; b < free_idx.size(); ++b) {
          cov_th(static_cast<Eigen::Index>(free_idx[a]), static_cast<Eigen::Index>(free_idx[b])) =
              cov_free(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
        }
      }
      // Delta method through theta -> standardized params -> original units.
      auto g = [&](const std::vector<double>& th) {
        GarchParams p = sc.unscale(tr.to_params(th));
        if (!tr.has_mean) {
          p.mu = ols_params.mu;
          p.betas = ols_params.betas;
        }
        return detail::natural_vector(p, dist);
      };
      const std::vector<double> g0 = g(best.x);
      Eigen::MatrixXd jac(static_cast<Eigen::Index>(g0.size()), static_cast<Eigen::Index>(dim));
      for (std::size_t i = 0; i < dim; ++i) {
        std::vector<double> tp = best.x, tm = best.x;
        const double h = 1e-6 * std::max(1.0, std::abs(best.x[i]));
        tp[i] += h;
        tm[i] -= h;
        const auto gp = g(tp), gm = g(tm);
        for (std::size_t r = 0; r < g0.size(); ++r) {
          jac(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i)) = (gp[r] - gm[r]) / (2.0 * h);
        }
      }
      const Eigen::MatrixXd cov = jac * cov_th * jac.transpose();
      std::vector<double> se(g0.size());
      bool ok = true;
      for (std::size_t r = 0; r < g0.size(); ++r) {
        const double v = cov(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(r));
        ok = ok && std::isfinite(v) && v >= 0.0;
        se[r] = std::sqrt(std::max(v, 0.0));
      }
      if (!tr.has_mean) {
        // Mean parameters are OLS estimates in two-step mode.
        for (std::size_t r = 0; r <= k; ++r) se[r] = ols.std_errors(static_cast<Eigen::Index>(r));
      }
      if (nu_pinned) se.back() = kNaN;
      if (ok) out.std_errors = std::move(se);
    }
  }
  return out;
}

struct SimulatedPath {
  std::vector<double> y;
  std::vector<double> sigma2;
};

/// Simulates y_t = mu + x_t' beta + sigma_t z_t, starting from the
/// unconditional variance. Deterministic for a given seed.
inline SimulatedPath simulate(const GarchParams& p, const Eigen::Ref<const Eigen::MatrixXd>& x, std::size_t length,
                              std::uint64_t seed, Distribution dist) {
  validate(p, dist);
  if (length < 1) fail(Errc::invalid_params, "T must be >= 1");
  if (static_cast<std::size_t>(x.cols()) != p.betas.size()) fail(Errc::invalid_params, "exog columns do not match betas");
  if (x.cols() > 0 && static_cast<std::size_t>(x.rows()) != length) fail(Errc::invalid_params, "exog rows do not match T");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::student_t_distribution<double> student(dist == Distribution::student_t ? p.nu : 5.0);
  const double t_scale = dist == Distribution::student_t ? std::sqrt((p.nu - 2.0) / p.nu) : 1.0;

  SimulatedPath out;
  out.y.resize(length);
  out.sigma2.resize(length);
  double s2 = p.alpha0 / (1.0 - p.alpha1 - p.beta1);
  double prev_eps = 0.0;
  for (std::size_t t = 0; t < length; ++t) {
    if (t > 0) s2 = p.alpha0 + p.alpha1 * prev_eps * prev_eps + p.beta1 * s2;
    const double z = dist == Distribution::normal ? normal(rng) : t_scale * student(rng);
    const double eps = std::sqrt(s2) * z;
    double mean = p.mu;
    for (std::size_t j = 0; j < p.betas.size(); ++j) {
      mean += p.betas[j] * x(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j));
    }
    out.y[t] = mean + eps;
    out.sigma2[t] = s2;
    prev_eps = eps;
  }
  return out;
}

inline SimulatedPath simulate(const GarchParams& p, std::size_t length, std::uint64_t seed, Distribution dist) {
  return simulate(p, Eigen::MatrixXd(static_cast<Eigen::Index>(length), 0), length, seed, dist);
}

/// z_t = eps_t / sigma_t on the fitted variance path.
inline std::vector<double> standardized_residuals(const GarchFit& f, std::span<const double> y,
                                                  const Eigen::Ref<const Eigen::MatrixXd>& x) {
  detail::check_shapes(f.params, y.size(), x);
  if (f.variance_path.size() != y.size()) fail(Errc::invalid_argument, "fit was produced from a different sample");
  std::vector<double> eps;
  detail::mean_residuals(f.params, y, x, eps);
  for (std::size_t t = 0; t < eps.size(); ++t) eps[t] /= std::sqrt(f.variance_path[t]);
  return eps;
}

struct QqReference {
  Distribution kind = Distribution::normal;
  double nu = 0.0;  // Student-t only; quantiles are of the unit-variance t

  static QqReference normal() { return {}; }
  static QqReference student_t(double nu) { return {Distribution::student_t, nu}; }
};

struct QqPoint {
  double theoretical = 0.0;
  double empirical = 0.0;
};

/// Sorted sample against reference quantiles at plotting positions (i - 0.5)/n.
inline std::vector<QqPoint> qq_data(std::span<const double> values, QqReference ref) {
  if (values.size() < 3) fail(Errc::too_few_points, "Q-Q data needs at least 3 values");
  if (ref.kind == Distribution::student_t && !(ref.nu > 2.0)) fail(Errc::nu_out_of_range, "reference nu must be > 2");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  std::vector<QqPoint> out(sorted.size());
  const boost::math::normal normal;
  const boost::math::students_t student(ref.kind == Distribution::student_t ? ref.nu : 3.0);
  const double t_scale = ref.kind == Distribution::student_t ? std::sqrt((ref.nu - 2.0) / ref.nu) : 1.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double prob = (static_cast<double>(i) + 0.5) / n;
    const double q = ref.kind == Distribution::normal ? boost::math::quantile(normal, prob)
                                                      : t_scale * boost::math::quantile(student, prob);
    out[i] = {q, sorted[i]};
  }
  return out;
}

}  // namespace sentivol

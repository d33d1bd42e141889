#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "sentivol/error.hpp"

namespace sentivol {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Prepends a column of ones.
inline Eigen::MatrixXd with_intercept(const Eigen::Ref<const Eigen::MatrixXd>& z) {
  Eigen::MatrixXd x(z.rows(), z.cols() + 1);
  x.col(0).setOnes();
  x.rightCols(z.cols()) = z;
  return x;
}

struct OlsFit {
  Eigen::VectorXd coefficients;  // intercept first
  Eigen::VectorXd std_errors;
  Eigen::VectorXd t_values;
  Eigen::VectorXd p_values;
  Eigen::VectorXd residuals;
  double r2 = 0.0;
  double adj_r2 = 0.0;
  double f_statistic = kNaN;
  double f_p_value = kNaN;
  double sigma2 = 0.0;  // SSR / (n - k - 1)
  std::size_t n_obs = 0;
  std::size_t n_regressors = 0;  // excluding the intercept
};

namespace detail {

inline double t_two_sided(double t, double df) {
  if (std::isnan(t)) return kNaN;
  if (std::isinf(t)) return 0.0;
  boost::math::students_t dist(df);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

inline double chi2_upper(double x, double df) {
  if (!(x > 0.0)) return 1.0;
  if (std::isinf(x)) return 0.0;
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared(df), x));
}

}  // namespace detail

/// OLS via column-pivoted Householder QR. `x` must carry the intercept as
/// its first column.
inline OlsFit ols_fit(const Eigen::Ref<const Eigen::VectorXd>& y, const Eigen::Ref<const Eigen::MatrixXd>& x) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  if (y.size() != n) fail(Errc::invalid_argument, "y has " + std::to_string(y.size()) + " rows, X has " + std::to_string(n));
  if (p < 1 || !(x.col(0).array() == 1.0).all()) {
    fail(Errc::invalid_argument, "design must start with an intercept column of ones");
  }
  if (!y.allFinite() || !x.allFinite()) fail(Errc::non_finite_input, "OLS inputs must be finite");
  const Eigen::Index k = p - 1;
  if (!(n > k + 1)) {
    fail(Errc::insufficient_observations, std::to_string(n) + " observations for " + std::to_string(k) + " regressors");
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  qr.setThreshold(1e-10);
  if (qr.rank() < p) {
    fail(Errc::rank_deficient_design, "rank " + std::to_string(qr.rank()) + " < " + std::to_string(p) + " columns");
  }

  OlsFit fit;
  fit.n_obs = static_cast<std::size_t>(n);
  fit.n_regressors = static_cast<std::size_t>(k);
  fit.coefficients = qr.solve(y);
  fit.residuals = y - x * fit.coefficients;

  const double ssr = fit.residuals.squaredNorm();
  const double sst = (y.array() - y.mean()).square().sum();
  const double df_resid = static_cast<double>(n - p);
  fit.sigma2 = ssr / df_resid;
  fit.r2 = sst > 0.0 ? 1.0 - ssr / sst : 0.0;
  fit.adj_r2 = 1.0 - (1.0 - fit.r2) * static_cast<double>(n - 1) / df_resid;

  // (X'X)^{-1} = P (R'R)^{-1} P'
  const Eigen::MatrixXd r = qr.matrixR().topLeftCorner(p, p).template triangularView<Eigen::Upper>();
  const Eigen::MatrixXd r_inv =
      r.template triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
  const Eigen::MatrixXd perm = qr.colsPermutation();
  const Eigen::MatrixXd xtx_inv = perm * (r_inv * r_inv.transpose()) * perm.transpose();

  fit.std_errors = (fit.sigma2 * xtx_inv.diagonal().array()).sqrt();
  fit.t_values.resize(p);
  fit.p_values.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double b = fit.coefficients(j);
    const double se = fit.std_errors(j);
    const double t = se > 0.0 ? b / se : (b == 0.0 ? kNaN : std::copysign(kInf, b));
    fit.t_values(j) = t;
    fit.p_values(j) = detail::t_two_sided(t, df_resid);
  }

  if (k > 0 && sst > 0.0) {
    const double num = (sst - ssr) / static_cast<double>(k);
    const double den = ssr / df_resid;
    if (den > 0.0) {
      fit.f_statistic = num / den;
      fit.f_p_value = fit.f_statistic > 0.0
                          ? boost::math::cdf(boost::math::complement(
                                boost::math::fisher_f(static_cast<double>(k), df_resid), fit.f_statistic))
                          : 1.0;
    } else {
      fit.f_statistic = kInf;
      fit.f_p_value = 0.0;
    }
  }
  return fit;
}

enum class TestName { breusch_pagan, durbin_watson };

constexpr std::string_view to_string(TestName t) noexcept {
  return t == TestName::breusch_pagan ? "breusch_pagan" : "durbin_watson";
}

struct TestResult {
  TestName name = TestName::breusch_pagan;
  double statistic = 0.0;
  std::optional<double> p_value;
  std::optional<int> degrees_of_freedom;
  bool approximate_p = false;
};

enum class BpVariant { koenker, classical };

/// Breusch-Pagan LM test: auxiliary regression of squared residuals on the
/// fit's design. Koenker form n*R2_aux; classical form ESS/(2 sigma^4).
inline TestResult breusch_pagan(const OlsFit& fit, const Eigen::Ref<const Eigen::MatrixXd>& x,
                                BpVariant variant = BpVariant::koenker) {
  if (static_cast<std::size_t>(x.rows()) != fit.n_obs) {
    fail(Errc::invalid_argument, "design rows do not match the fit");
  }
  const Eigen::VectorXd e2 = fit.residuals.array().square().matrix();
  const OlsFit aux = ols_fit(e2, x);
  const double n = static_cast<double>(fit.n_obs);
  double stat = 0.0;
  if (variant == BpVariant::koenker) {
    stat = n * aux.r2;
  } else {
    const double s2 = e2.sum() / n;
    const Eigen::VectorXd fitted = e2 - aux.residuals;
    const double ess = (fitted.array() - e2.mean()).square().sum();
    stat = s2 > 0.0 ? ess / (2.0 * s2 * s2) : 0.0;
  }
  const int df = static_cast<int>(fit.n_regressors);
  TestResult r;
  r.name = TestName::breusch_pagan;
  r.statistic = stat;
  r.degrees_of_freedom = df;
  r.p_value = detail::chi2_upper(stat, df);
  return r;
}

/// DW = sum_{t>=2} (e_t - e_{t-1})^2 / sum e_t^2. The p-value is a two-sided
/// normal approximation with mean 2 and variance 4/n, flagged approximate.
inline TestResult durbin_watson(std::span<const double> residuals) {
  if (residuals.size() < 2) fail(Errc::too_few_points, "Durbin-Watson needs at least 2 residuals");
  double num = 0.0, den = 0.0;
  for (std::size_t t = 0; t < residuals.size(); ++t) {
    if (!std::isfinite(residuals[t])) fail(Errc::non_finite_input, "residual " + std::to_string(t));
    den += residuals[t] * residuals[t];
    if (t > 0) {
      const double d = residuals[t] - residuals[t - 1];
      num += d * d;
    }
  }
  if (den == 0.0) fail(Errc::all_zero_residuals, "Durbin-Watson undefined");
  TestResult r;
  r.name = TestName::durbin_watson;
  r.statistic = num / den;
  const double z = (r.statistic - 2.0) / std::sqrt(4.0 / static_cast<double>(residuals.size()));
  r.p_value = 2.0 * boost::math::cdf(boost::math::complement(boost::math::normal(), std::abs(z)));
  r.approximate_p = true;
  return r;
}

inline TestResult durbin_watson(const Eigen::Ref<const Eigen::VectorXd>& residuals) {
  return durbin_watson(std::span<const double>(residuals.data(), static_cast<std::size_t>(residuals.size())));
}

/// VIF_j = 1 / (1 - R2_j), R2_j from regressing column j on the others plus
/// an intercept. A singular auxiliary design yields +inf.
inline std::vector<double> vif(const Eigen::Ref<const Eigen::MatrixXd>& z) {
  const Eigen::Index m = z.cols();
  if (m < 2) fail(Errc::invalid_argument, "VIF needs at least 2 columns");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(m));
  for (Eigen::Index j = 0; j < m; ++j) {
    Eigen::MatrixXd others(z.rows(), m - 1);
    for (Eigen::Index c = 0, o = 0; c < m; ++c) {
      if (c != j) others.col(o++) = z.col(c);
    }
    try {
      const OlsFit aux = ols_fit(z.col(j), with_intercept(others));
      out.push_back(aux.r2 < 1.0 ? 1.0 / (1.0 - aux.r2) : kInf);
    } catch (const Error& e) {
      if (e.code() != Errc::rank_deficient_design) throw;
      out.push_back(kInf);
    }
  }
  return out;
}

}  // namespace sentivol

#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sentivol/error.hpp"
#include "sentivol/series.hpp"

namespace sentivol {

/// Daily log returns ln(P_t / P_{t-1}), each dated at t.
inline MarketSeries log_returns(const MarketSeries& prices) {
  const auto& pts = prices.points();
  if (pts.size() < 2) fail(Errc::too_few_points, prices.name() + ": need at least 2 prices");
  for (const auto& p : pts) {
    if (!(p.value > 0.0)) fail(Errc::nonpositive_price, prices.name() + " at " + p.date.to_string());
  }
  std::vector<SeriesPoint> out;
  out.reserve(pts.size() - 1);
  for (std::size_t t = 1; t < pts.size(); ++t) {
    out.push_back({pts[t].date, std::log(pts[t].value / pts[t - 1].value)});
  }
  return MarketSeries(prices.name(), std::move(out));
}

/// Natural cubic spline: piecewise cubic, C2, zero second derivative at both ends.
class Spline {
 public:
  Spline(std::vector<double> x, std::vector<double> y, std::vector<double> m)
      : x_(std::move(x)), y_(std::move(y)), m_(std::move(m)) {}

  const std::vector<double>& knots_x() const noexcept { return x_; }
  const std::vector<double>& knots_y() const noexcept { return y_; }
  const std::vector<double>& second_derivs() const noexcept { return m_; }
  std::size_t size() const noexcept { return x_.size(); }
  double lower() const noexcept { return x_.front(); }
  double upper() const noexcept { return x_.back(); }

  /// Index i of the piece [x_i, x_{i+1}] containing x (clamped to the valid range).
  std::size_t interval(double x) const noexcept {
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    std::size_t i = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
    return std::min(i, x_.size() - 2);
  }

  /// Evaluates the cubic of piece i (or its first/second derivative) at any x,
  /// including outside the piece. Used for continuity checks.
  double eval_piece(std::size_t i, double x, int derivative = 0) const {
    const double h = x_[i + 1] - x_[i];
    const double a = (x_[i + 1] - x) / h;
    const double b = (x - x_[i]) / h;
    const double mi = m_[i], mj = m_[i + 1];
    switch (derivative) {
      case 0:
        return a * y_[i] + b * y_[i + 1] + ((a * a * a - a) * mi + (b * b * b - b) * mj) * (h * h) / 6.0;
      case 1:
        return (y_[i + 1] - y_[i]) / h - (3.0 * a * a - 1.0) * h / 6.0 * mi + (3.0 * b * b - 1.0) * h / 6.0 * mj;
      case 2:
        return a * mi + b * mj;
      default:
        return 0.0;
    }
  }

  double operator()(double x) const {
    if (!(x >= x_.front() && x <= x_.back())) {
      fail(Errc::out_of_range_x, std::to_string(x) + " outside [" + std::to_string(x_.front()) + ", " +
                                     std::to_string(x_.back()) + "]");
    }
    const std::size_t i = interval(x);
    if (x == x_[i]) return y_[i];
    if (x == x_[i + 1]) return y_[i + 1];
    return eval_piece(i, x);
  }

 private:
  std::vector<double> x_, y_, m_;
};

/// Solves the natural-spline tridiagonal system for the knot second derivatives.
inline Spline fit_natural_spline(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) fail(Errc::invalid_argument, "knot x and y lengths differ");
  const std::size_t n = x.size();
  if (n < 2) fail(Errc::too_few_knots, "need at least 2 knots, got " + std::to_string(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) fail(Errc::non_finite_input, "knot " + std::to_string(i));
    if (i > 0 && x[i] == x[i - 1]) fail(Errc::duplicate_x, "x = " + std::to_string(x[i]));
    if (i > 0 && x[i] < x[i - 1]) fail(Errc::invalid_argument, "knot x must be strictly increasing");
  }

  std::vector<double> m(n, 0.0);
  if (n > 2) {
    // Thomas algorithm on the n-2 interior unknowns:
    // h_{i-1} M_{i-1} + 2 (h_{i-1} + h_i) M_i + h_i M_{i+1} = 6 (d_i - d_{i-1})
    const std::size_t k = n - 2;
    std::vector<double> diag(k), upper(k), rhs(k);
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t i = j + 1;
      const double h0 = x[i] - x[i - 1];
      const double h1 = x[i + 1] - x[i];
      diag[j] = 2.0 * (h0 + h1);
      upper[j] = h1;
      rhs[j] = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
    }
    for (std::size_t j = 1; j < k; ++j) {
      const double lower = x[j + 1] - x[j];  // h_{i-1} for row i = j+1
      const double w = lower / diag[j - 1];
      diag[j] -= w * upper[j - 1];
      rhs[j] -= w * rhs[j - 1];
    }
    m[k] = rhs[k - 1] / diag[k - 1];
    for (std::size_t j = k - 1; j-- > 0;) {
      m[j + 1] = (rhs[j] - upper[j] * m[j + 2]) / diag[j];
    }
  }
  return Spline(std::vector<double>(x.begin(), x.end()), std::vector<double>(y.begin(), y.end()), std::move(m));
}

inline double spline_eval(const Spline& s, double x) { return s(x); }

/// Values of `series` at `target_dates`: known dates copied verbatim, gaps
/// filled by a natural spline over day offsets from the first known date.
inline MarketSeries fill_missing(const MarketSeries& series, std::span<const Date> target_dates) {
  const auto& pts = series.points();
  if (pts.size() < 2) fail(Errc::too_few_points, series.name() + ": spline fill needs at least 2 known points");
  const Date origin = pts.front().date;
  const Date last = pts.back().date;

  std::vector<SeriesPoint> out;
  out.reserve(target_dates.size());
  std::optional<Spline> spline;
  std::size_t cursor = 0;
  for (const Date& d : target_dates) {
    if (d < origin || d > last) {
      fail(Errc::target_outside_span, series.name() + ": " + d.to_string() + " outside " + origin.to_string() +
                                          ".." + last.to_string());
    }
    while (cursor < pts.size() && pts[cursor].date < d) ++cursor;
    if (cursor < pts.size() && pts[cursor].date == d) {
      out.push_back(pts[cursor]);
      continue;
    }
    if (!spline) {
      std::vector<double> xs, ys;
      xs.reserve(pts.size());
      ys.reserve(pts.size());
      for (const auto& p : pts) {
        xs.push_back(static_cast<double>(p.date.days_since(origin)));
        ys.push_back(p.value);
      }
      spline = fit_natural_spline(xs, ys);
    }
    out.push_back({d, (*spline)(static_cast<double>(d.days_since(origin)))});
  }
  return MarketSeries(series.name(), std::move(out));
}

struct SummaryStats {
  std::size_t count = 0;
  double mean = 0.0;
  double std_dev = 0.0;
  double min = 0.0;
  double max = 0.0;
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
};

/// Sample moments. std_dev uses n-1; skewness g1 = m3/m2^1.5 and excess
/// kurtosis g2 = m4/m2^2 - 3 are the moment-ratio estimators. Constant
/// input reports 0 for both.
inline SummaryStats describe(std::span<const double> values) {
  if (values.empty()) fail(Errc::empty_input, "describe needs at least one value");
  SummaryStats s;
  s.count = values.size();
  const double n = static_cast<double>(s.count);
  double sum = 0.0;
  s.min = values[0];
  s.max = values[0];
  for (double v : values) {
    if (!std::isfinite(v)) fail(Errc::non_finite_input, "describe");
    sum += v;
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
  }
  s.mean = std::clamp(sum / n, s.min, s.max);
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : values) {
    const double d = v - s.mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  s.std_dev = s.count > 1 ? std::sqrt(m2 / (n - 1.0)) : 0.0;
  m2 /= n;
  m3 /= n;
  m4 /= n;
  // Relative threshold so that rounding noise on constant input is not read as spread.
  const double scale = std::max(std::abs(s.mean), 1.0);
  if (m2 > 1e-28 * scale * scale) {
    s.skewness = m3 / std::pow(m2, 1.5);
    s.excess_kurtosis = m4 / (m2 * m2) - 3.0;
  }
  return s;
}

}  // namespace sentivol

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "sentivol/csv.hpp"
#include "sentivol/error.hpp"
#include "sentivol/garch.hpp"
#include "sentivol/regress.hpp"
#include "sentivol/sentiment.hpp"
#include "sentivol/timeseries.hpp"

namespace sentivol::report {

inline constexpr std::string_view kAbsent = "—";

enum class Style { plain, markdown };

/// Fixed 4-decimal rendering with an ASCII minus; non-finite values are absent.
inline std::string format_number(double v, int decimals = 4) {
  if (!std::isfinite(v)) return std::string(kAbsent);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s = buf;
  if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

inline std::string format_optional(const std::optional<double>& v) {
  return v ? format_number(*v) : std::string(kAbsent);
}

struct CoefficientRow {
  std::string variable;
  double coefficient = 0.0;
  std::optional<double> std_error;
  std::optional<double> p_value;
};

struct FitStatistic {
  std::string name;
  double value = 0.0;
  bool integer = false;

  std::string text() const {
    return integer ? std::to_string(static_cast<long long>(std::llround(value))) : format_number(value);
  }
};

struct CoefficientTable {
  std::string title;
  std::vector<CoefficientRow> rows;
  std::vector<FitStatistic> stats;
};

struct DiagnosticRow {
  std::string statistic;
  double value = 0.0;
  bool integer = false;
  std::optional<double> p_value;
  std::string p_method;  // e.g. "chi-square", "normal-approximation"
};

struct DiagnosticsTable {
  std::string title = "Residual Diagnostics";
  std::vector<DiagnosticRow> rows;
};

struct VifRow {
  std::string variable;
  double vif = 0.0;
};

struct VifTable {
  std::string title = "Variance Inflation Factors";
  std::vector<VifRow> rows;
};

struct SummaryRow {
  std::string variable;
  SummaryStats stats;
};

struct SummaryTable {
  std::string title = "Summary Statistics";
  std::vector<SummaryRow> rows;
};

// ---------------------------------------------------------------------------
// Builders

inline CoefficientTable ols_table(const OlsFit& fit, const std::vector<std::string>& labels,
                                  std::string title = "OLS Estimates of S&P 500 Returns") {
  if (labels.size() != static_cast<std::size_t>(fit.coefficients.size())) {
    fail(Errc::invalid_argument, "need one label per coefficient");
  }
  CoefficientTable t;
  t.title = std::move(title);
  for (std::size_t j = 0; j < labels.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    t.rows.push_back({labels[j], fit.coefficients(jj), fit.std_errors(jj), fit.p_values(jj)});
  }
  t.stats = {{"Observations", static_cast<double>(fit.n_obs), true},
             {"Adjusted R²", fit.adj_r2},
             {"F-statistic", fit.f_statistic},
             {"p-value", fit.f_p_value}};
  return t;
}

namespace detail {

inline std::optional<double> z_p_value(double coef, const std::optional<double>& se) {
  if (!se || !(*se > 0.0)) return std::nullopt;
  const boost::math::normal n;
  return 2.0 * boost::math::cdf(boost::math::complement(n, std::abs(coef / *se)));
}

inline std::string garch_title(const GarchFit& f, std::string_view part) {
  std::string t = "GARCH(1,1) ";
  t += part;
  t += f.distribution == Distribution::normal ? ", normal innovations" : ", Student-t innovations";
  t += f.mode == EstimationMode::joint ? ", joint MLE" : ", two-step";
  return t;
}

}  // namespace detail

/// Mean-equation rows (Constant, regressors). Mean p-values use the normal
/// reference in joint mode and the OLS t reference in two-step mode.
inline CoefficientTable garch_mean_table(const GarchFit& f, const std::vector<std::string>& labels) {
  const std::vector<double> v = f.parameter_vector();
  const std::size_t n_mean = 1 + f.params.betas.size();
  if (labels.size() != n_mean) fail(Errc::invalid_argument, "need one label per mean coefficient");
  CoefficientTable t;
  t.title = detail::garch_title(f, "mean equation");
  for (std::size_t j = 0; j < n_mean; ++j) {
    CoefficientRow r{labels[j], v[j], std::nullopt, std::nullopt};
    if (f.std_errors) r.std_error = (*f.std_errors)[j];
    if (f.mean_equation) {
      r.p_value = f.mean_equation->p_values(static_cast<Eigen::Index>(j));
    } else {
      r.p_value = detail::z_p_value(r.coefficient, r.std_error);
    }
    t.rows.push_back(std::move(r));
  }
  t.stats.push_back({"Observations", static_cast<double>(f.variance_path.size()), true});
  t.stats.push_back({"Log-likelihood", f.log_likelihood});
  if (f.mean_equation) {
    t.stats.push_back({"Adjusted R² (mean eq.)", f.mean_equation->adj_r2});
    t.stats.push_back({"F-statistic (mean eq.)", f.mean_equation->f_statistic});
    t.stats.push_back({"p-value (mean eq.)", f.mean_equation->f_p_value});
  }
  return t;
}

inline CoefficientTable garch_variance_table(const GarchFit& f) {
  const std::vector<double> v = f.parameter_vector();
  const std::size_t off = 1 + f.params.betas.size();
  std::vector<std::string> labels{"alpha0", "alpha1", "beta1"};
  if (f.distribution == Distribution::student_t) labels.push_back("nu");
  CoefficientTable t;
  t.title = detail::garch_title(f, "variance equation");
  for (std::size_t j = 0; j < labels.size(); ++j) {
    CoefficientRow r{labels[j], v[off + j], std::nullopt, std::nullopt};
    if (f.std_errors) r.std_error = (*f.std_errors)[off + j];
    if (labels[j] != "nu") r.p_value = detail::z_p_value(r.coefficient, r.std_error);
    t.rows.push_back(std::move(r));
  }
  t.stats.push_back({"Persistence (alpha1 + beta1)", f.params.alpha1 + f.params.beta1});
  t.stats.push_back({"Converged", f.converged ? 1.0 : 0.0, true});
  return t;
}

inline DiagnosticsTable diagnostics_table(const TestResult& bp, const TestResult& dw) {
  DiagnosticsTable t;
  t.rows.push_back({"BP Statistic", bp.statistic, false, bp.p_value, "chi-square"});
  t.rows.push_back({"Degrees of Freedom", static_cast<double>(bp.degrees_of_freedom.value_or(0)), true, std::nullopt, ""});
  t.rows.push_back({"DW Statistic", dw.statistic, false, dw.p_value, dw.approximate_p ? "normal-approximation" : ""});
  return t;
}

inline VifTable vif_table(const std::vector<std::string>& labels, const std::vector<double>& values) {
  if (labels.size() != values.size()) fail(Errc::invalid_argument, "need one label per VIF");
  VifTable t;
  for (std::size_t j = 0; j < labels.size(); ++j) t.rows.push_back({labels[j], values[j]});
  return t;
}

// ---------------------------------------------------------------------------
// Rendering

namespace detail {

/// Display width in code points (UTF-8 continuation bytes skipped).
inline std::size_t width(std::string_view s) {
  return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](char c) { return (c & 0xC0) != 0x80; }));
}

inline std::string pad(std::string_view s, std::size_t w, bool right) {
  const std::size_t n = width(s);
  const std::string fill(n < w ? w - n : 0, ' ');
  return right ? fill + std::string(s) : std::string(s) + fill;
}

struct Grid {
  std::string title;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::pair<std::string, std::string>> footer;
  std::vector<std::string> notes;
};

inline std::string render_grid(const Grid& g, Style style) {
  std::ostringstream os;
  const std::size_t ncol = g.header.size();
  if (style == Style::markdown) {
    if (!g.title.empty()) os << "**" << g.title << "**\n\n";
    os << '|';
    for (const auto& h : g.header) os << ' ' << h << " |";
    os << "\n|:---|";
    for (std::size_t c = 1; c < ncol; ++c) os << "---:|";
    os << '\n';
    auto line = [&](const std::vector<std::string>& cells) {
      os << '|';
      for (const auto& c : cells) os << ' ' << c << " |";
      os << '\n';
    };
    for (const auto& r : g.rows) line(r);
    for (const auto& [label, value] : g.footer) {
      std::vector<std::string> cells(ncol);
      cells[0] = label;
      if (ncol > 1) cells[1] = value;
      line(cells);
    }
    if (!g.notes.empty()) os << '\n';
    for (const auto& n : g.notes) os << "_" << n << "_\n";
    return os.str();
  }

  std::vector<std::size_t> w(ncol, 0);
  for (std::size_t c = 0; c < ncol; ++c) w[c] = width(g.header[c]);
  for (const auto& r : g.rows) {
    for (std::size_t c = 0; c < ncol; ++c) w[c] = std::max(w[c], width(r[c]));
  }
  for (const auto& [label, value] : g.footer) {
    w[0] = std::max(w[0], width(label));
    if (ncol > 1) w[1] = std::max(w[1], width(value));
  }
  std::size_t total = 0;
  for (std::size_t c = 0; c < ncol; ++c) total += w[c] + (c ? 2 : 0);
  const std::string rule(total, '-');

  auto line = [&](const std::vector<std::string>& cells) {
    std::string s;
    for (std::size_t c = 0; c < ncol; ++c) {
      if (c) s += "  ";
      s += pad(cells[c], w[c], c > 0);
    }
    while (!s.empty() && s.back() == ' ') s.pop_back();
    os << s << '\n';
  };
  if (!g.title.empty()) os << g.title << '\n';
  line(g.header);
  os << rule << '\n';
  for (const auto& r : g.rows) line(r);
  if (!g.footer.empty()) {
    os << rule << '\n';
    for (const auto& [label, value] : g.footer) {
      std::vector<std::string> cells(ncol);
      cells[0] = label;
      if (ncol > 1) cells[1] = value;
      line(cells);
    }
  }
  os << rule << '\n';
  for (const auto& n : g.notes) os << n << '\n';
  return os.str();
}

}  // namespace detail

inline std::string render_coefficient_table(const CoefficientTable& t, Style style = Style::plain) {
  detail::Grid g;
  g.title = t.title;
  g.header = {"Variable", "Coefficient", "Std Error", "p-value"};
  for (const auto& r : t.rows) {
    g.rows.push_back({r.variable, format_number(r.coefficient), format_optional(r.std_error), format_optional(r.p_value)});
  }
  for (const auto& s : t.stats) g.footer.push_back({s.name, s.text()});
  return detail::render_grid(g, style);
}

inline std::string render_diagnostics_table(const DiagnosticsTable& t, Style style = Style::plain) {
  detail::Grid g;
  g.title = t.title;
  g.header = {"Statistic", "Value", "p-value"};
  bool approx = false;
  for (const auto& r : t.rows) {
    const std::string v = r.integer ? FitStatistic{r.statistic, r.value, true}.text() : format_number(r.value);
    g.rows.push_back({r.statistic, v, format_optional(r.p_value)});
    approx = approx || r.p_method == "normal-approximation";
  }
  if (approx) g.notes.push_back("DW p-value: two-sided normal approximation (approximate).");
  return detail::render_grid(g, style);
}

inline std::string render_vif_table(const VifTable& t, Style style = Style::plain) {
  detail::Grid g;
  g.title = t.title;
  g.header = {"Variable", "VIF"};
  bool singular = false;
  for (const auto& r : t.rows) {
    g.rows.push_back({r.variable, format_number(r.vif)});
    singular = singular || !std::isfinite(r.vif);
  }
  if (singular) g.notes.push_back(std::string(kAbsent) + ": auxiliary regression is singular (infinite VIF).");
  return detail::render_grid(g, style);
}

inline std::string render_summary_table(const SummaryTable& t, Style style = Style::plain) {
  detail::Grid g;
  g.title = t.title;
  g.header = {"Variable", "N", "Mean", "Std Dev", "Min", "Max", "Skewness", "Excess Kurtosis"};
  for (const auto& r : t.rows) {
    const auto& s = r.stats;
    g.rows.push_back({r.variable, std::to_string(s.count), format_number(s.mean), format_number(s.std_dev),
                      format_number(s.min), format_number(s.max), format_number(s.skewness),
                      format_number(s.excess_kurtosis)});
  }
  return detail::render_grid(g, style);
}

// ---------------------------------------------------------------------------
// CSV (full precision; absent values are empty cells)

namespace detail {

inline std::string csv_value(const std::optional<double>& v) {
  return v && std::isfinite(*v) ? csv::format_double(*v) : std::string();
}

inline std::string csv_number(double v, bool integer) {
  if (integer) return std::to_string(static_cast<long long>(std::llround(v)));
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return std::isfinite(v) ? csv::format_double(v) : std::string();
}

inline std::optional<double> read_optional(const std::string& cell, const std::string& path, std::size_t line) {
  const std::string t = csv::trim(cell);
  if (t.empty()) return std::nullopt;
  if (t == "inf") return kInf;
  if (t == "-inf") return -kInf;
  auto v = csv::parse_double(t);
  if (!v) fail(Errc::non_numeric_value, path + ":" + std::to_string(line) + ": \"" + cell + "\"");
  return v;
}

inline double read_required(const std::string& cell, const std::string& path, std::size_t line) {
  auto v = read_optional(cell, path, line);
  if (!v) fail(Errc::non_numeric_value, path + ":" + std::to_string(line) + ": empty value");
  return *v;
}

inline bool looks_integer(std::string_view s) {
  const std::string t = csv::trim(s);
  return !t.empty() && t.find_first_of(".eEn") == std::string::npos;
}

inline csv::Table read_with_header(const std::string& path, const std::vector<std::string>& header) {
  csv::Table t = csv::read_table(path);
  if (t.header != header) {
    std::string want;
    for (const auto& h : header) want += (want.empty() ? "" : ",") + h;
    fail(Errc::missing_column, path + ": expected header " + want);
  }
  return t;
}

}  // namespace detail

inline void write_coefficients_csv(std::ostream& os, const CoefficientTable& t) {
  csv::Writer w(os);
  w.row({"variable", "coefficient", "std_error", "p_value"});
  for (const auto& r : t.rows) {
    w.row({r.variable, detail::csv_number(r.coefficient, false), detail::csv_value(r.std_error),
           detail::csv_value(r.p_value)});
  }
}

inline void write_fit_stats_csv(std::ostream& os, const CoefficientTable& t) {
  csv::Writer w(os);
  w.row({"statistic", "value"});
  for (const auto& s : t.stats) w.row({s.name, detail::csv_number(s.value, s.integer)});
}

inline void write_diagnostics_csv(std::ostream& os, const DiagnosticsTable& t) {
  csv::Writer w(os);
  w.row({"statistic", "value", "p_value", "p_method"});
  for (const auto& r : t.rows) {
    w.row({r.statistic, detail::csv_number(r.value, r.integer), detail::csv_value(r.p_value), r.p_method});
  }
}

inline void write_vif_csv(std::ostream& os, const VifTable& t) {
  csv::Writer w(os);
  w.row({"variable", "vif"});
  for (const auto& r : t.rows) w.row({r.variable, detail::csv_number(r.vif, false)});
}

inline void write_summary_csv(std::ostream& os, const SummaryTable& t) {
  csv::Writer w(os);
  w.row({"variable", "n", "mean", "std_dev", "min", "max", "skewness", "excess_kurtosis"});
  for (const auto& r : t.rows) {
    const auto& s = r.stats;
    w.row({r.variable, std::to_string(s.count), csv::format_double(s.mean), csv::format_double(s.std_dev),
           csv::format_double(s.min), csv::format_double(s.max), csv::format_double(s.skewness),
           csv::format_double(s.excess_kurtosis)});
  }
}

/// Coefficient rows plus an optional fit-statistics file.
inline CoefficientTable read_coefficient_table(const std::string& coef_path, const std::string& stats_path = {},
                                               std::string title = {}) {
  CoefficientTable out;
  out.title = std::move(title);
  const auto t = detail::read_with_header(coef_path, {"variable", "coefficient", "std_error", "p_value"});
  for (const auto& r : t.rows) {
    out.rows.push_back({r.fields[0], detail::read_required(r.fields[1], coef_path, r.line),
                        detail::read_optional(r.fields[2], coef_path, r.line),
                        detail::read_optional(r.fields[3], coef_path, r.line)});
  }
  if (!stats_path.empty()) {
    const auto s = detail::read_with_header(stats_path, {"statistic", "value"});
    for (const auto& r : s.rows) {
      const auto v = detail::read_optional(r.fields[1], stats_path, r.line);
      out.stats.push_back({r.fields[0], v.value_or(kNaN), detail::looks_integer(r.fields[1])});
    }
  }
  return out;
}

inline DiagnosticsTable read_diagnostics_table(const std::string& path) {
  DiagnosticsTable out;
  const auto t = detail::read_with_header(path, {"statistic", "value", "p_value", "p_method"});
  for (const auto& r : t.rows) {
    out.rows.push_back({r.fields[0], detail::read_required(r.fields[1], path, r.line), detail::looks_integer(r.fields[1]),
                        detail::read_optional(r.fields[2], path, r.line), r.fields[3]});
  }
  return out;
}

inline VifTable read_vif_table(const std::string& path) {
  VifTable out;
  const auto t = detail::read_with_header(path, {"variable", "vif"});
  for (const auto& r : t.rows) out.rows.push_back({r.fields[0], detail::read_required(r.fields[1], path, r.line)});
  return out;
}

inline SummaryTable read_summary_table(const std::string& path) {
  SummaryTable out;
  const auto t =
      detail::read_with_header(path, {"variable", "n", "mean", "std_dev", "min", "max", "skewness", "excess_kurtosis"});
  for (const auto& r : t.rows) {
    SummaryStats s;
    s.count = static_cast<std::size_t>(detail::read_required(r.fields[1], path, r.line));
    s.mean = detail::read_required(r.fields[2], path, r.line);
    s.std_dev = detail::read_required(r.fields[3], path, r.line);
    s.min = detail::read_required(r.fields[4], path, r.line);
    s.max = detail::read_required(r.fields[5], path, r.line);
    s.skewness = detail::read_required(r.fields[6], path, r.line);
    s.excess_kurtosis = detail::read_required(r.fields[7], path, r.line);
    out.rows.push_back({r.fields[0], s});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Bundle and figure data

struct RunMetadata {
  std::string version;
  std::vector<std::pair<std::string, std::string>> config;  // echo of the effective configuration
  std::string sample_start;                                 // first/last panel dates (no wall-clock time)
  std::string sample_end;
  std::size_t headlines_loaded = 0;
  std::size_t headlines_kept = 0;
  std::size_t observations = 0;
};

struct ResidualPoint {
  double sentiment = 0.0;
  double residual = 0.0;
};

struct ReportBundle {
  std::optional<CoefficientTable> ols;
  std::optional<CoefficientTable> garch_mean;
  std::optional<CoefficientTable> garch_variance;
  std::optional<DiagnosticsTable> diagnostics;
  std::optional<VifTable> vif;
  std::optional<SummaryTable> summary;
  std::optional<DailySentimentSeries> daily;
  std::optional<CategoryCounts> categories;
  std::optional<std::vector<ResidualPoint>> residuals_vs_sentiment;
  std::optional<std::vector<QqPoint>> qq;
  RunMetadata metadata;
  bool garch_converged = true;
};

enum class Figure { items_per_day, daily_sentiment, category_distribution, residuals_vs_sentiment, qq };

constexpr std::string_view to_string(Figure f) noexcept {
  switch (f) {
    case Figure::items_per_day: return "items_per_day";
    case Figure::daily_sentiment: return "daily_sentiment";
    case Figure::category_distribution: return "category_distribution";
    case Figure::residuals_vs_sentiment: return "residuals_vs_sentiment";
    case Figure::qq: return "qq";
  }
  return "?";
}

inline constexpr Figure kAllFigures[] = {Figure::items_per_day, Figure::daily_sentiment, Figure::category_distribution,
                                         Figure::residuals_vs_sentiment, Figure::qq};

/// Plot-ready CSV, sorted by its x column.
inline void export_figure_data(const ReportBundle& b, Figure which, std::ostream& os) {
  auto missing = [&] { fail(Errc::missing_series, std::string(to_string(which)) + " is not in the bundle"); };
  csv::Writer w(os);
  switch (which) {
    case Figure::items_per_day:
      if (!b.daily) missing();
      w.row({"date", "count"});
      for (const auto& p : b.daily->points) w.row({p.date.to_string(), std::to_string(p.count)});
      break;
    case Figure::daily_sentiment:
      if (!b.daily) missing();
      w.row({"date", "mean_score"});
      for (const auto& p : b.daily->points) w.row({p.date.to_string(), csv::format_double(p.mean_score)});
      break;
    case Figure::category_distribution: {
      if (!b.categories) missing();
      w.row({"label", "count"});
      w.row({"negative", std::to_string(b.categories->negative)});
      w.row({"neutral", std::to_string(b.categories->neutral)});
      w.row({"positive", std::to_string(b.categories->positive)});
      break;
    }
    case Figure::residuals_vs_sentiment: {
      if (!b.residuals_vs_sentiment) missing();
      auto pts = *b.residuals_vs_sentiment;
      std::stable_sort(pts.begin(), pts.end(), [](const auto& a, const auto& c) { return a.sentiment < c.sentiment; });
      w.row({"sentiment", "residual"});
      for (const auto& p : pts) w.row({csv::format_double(p.sentiment), csv::format_double(p.residual)});
      break;
    }
    case Figure::qq:
      if (!b.qq) missing();
      w.row({"theoretical", "empirical"});
      for (const auto& p : *b.qq) w.row({csv::format_double(p.theoretical), csv::format_double(p.empirical)});
      break;
  }
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(Errc::io_error, "cannot open " + path + " for writing");
  out << content;
  if (!out) fail(Errc::io_error, "write failed: " + path);
}

template <typename Fn>
void write_with(const std::string& path, Fn&& fn) {
  std::ostringstream os;
  fn(os);
  write_text_file(path, os.str());
}

inline void export_figure_data(const ReportBundle& b, Figure which, const std::string& path) {
  write_with(path, [&](std::ostream& os) { export_figure_data(b, which, os); });
}

}  // namespace sentivol::report

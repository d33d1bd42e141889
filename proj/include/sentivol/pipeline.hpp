#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sentivol/garch.hpp"
#include "sentivol/ingest.hpp"
#include "sentivol/regress.hpp"
#include "sentivol/report.hpp"
#include "sentivol/sentiment.hpp"
#include "sentivol/timeseries.hpp"

namespace sentivol {

inline constexpr std::string_view kVersion = "0.1.0";

struct MarketSource {
  std::string name;
  std::string path;
};

struct PipelineConfig {
  std::string headlines;
  std::vector<MarketSource> markets;  // order gives the regressor order
  std::vector<std::string> keywords;  // empty: no filtering
  ScoreMode score_mode = ScoreMode::prob_diff;
  FillMode fill = FillMode::spline;
  Distribution dist = Distribution::student_t;
  EstimationMode mode = EstimationMode::joint;
  BpVariant bp = BpVariant::koenker;
  std::string out = "out";
  std::vector<std::uint64_t> seeds{1, 2, 3, 4};
  std::string returns_series = "SP500";
  double returns_scale = 1.0;  // 100 gives log returns in percent
  std::map<std::string, std::string> date_columns;   // per series, default "date"
  std::map<std::string, std::string> value_columns;  // per series, default "value"
  std::map<std::string, std::string> labels;         // display names

  void set_market(std::string name, std::string path) {
    for (auto& m : markets) {
      if (m.name == name) {
        m.path = std::move(path);
        return;
      }
    }
    markets.push_back({std::move(name), std::move(path)});
  }

  std::string label(const std::string& name) const {
    if (auto it = labels.find(name); it != labels.end()) return it->second;
    return name == "Sentiment" ? "Sentiment Score" : name;
  }

  std::string date_column(const std::string& name) const {
    auto it = date_columns.find(name);
    return it == date_columns.end() ? "date" : it->second;
  }

  std::string value_column(const std::string& name) const {
    auto it = value_columns.find(name);
    return it == value_columns.end() ? "value" : it->second;
  }
};

// ---------------------------------------------------------------------------
// Option parsing

namespace detail {

inline std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace detail

inline ScoreMode parse_score_mode(const std::string& s) {
  const auto v = detail::lower(s);
  if (v == "prob-diff" || v == "prob_diff") return ScoreMode::prob_diff;
  if (v == "logit-diff" || v == "logit_diff") return ScoreMode::logit_diff;
  fail(Errc::config_error, "score mode must be prob-diff or logit-diff, got \"" + s + "\"");
}

inline FillMode parse_fill(const std::string& s) {
  const auto v = detail::lower(s);
  if (v == "spline") return FillMode::spline;
  if (v == "drop") return FillMode::drop;
  fail(Errc::config_error, "fill must be spline or drop, got \"" + s + "\"");
}

inline Distribution parse_distribution(const std::string& s) {
  const auto v = detail::lower(s);
  if (v == "normal") return Distribution::normal;
  if (v == "t" || v == "student-t" || v == "student_t") return Distribution::student_t;
  fail(Errc::config_error, "dist must be normal or t, got \"" + s + "\"");
}

inline EstimationMode parse_mode(const std::string& s) {
  const auto v = detail::lower(s);
  if (v == "joint") return EstimationMode::joint;
  if (v == "two-step" || v == "two_step") return EstimationMode::two_step;
  fail(Errc::config_error, "mode must be joint or two-step, got \"" + s + "\"");
}

inline BpVariant parse_bp_variant(const std::string& s) {
  const auto v = detail::lower(s);
  if (v == "koenker") return BpVariant::koenker;
  if (v == "classical") return BpVariant::classical;
  fail(Errc::config_error, "bp must be koenker or classical, got \"" + s + "\"");
}

inline std::string_view score_mode_name(ScoreMode m) { return m == ScoreMode::prob_diff ? "prob-diff" : "logit-diff"; }
inline std::string_view fill_name(FillMode f) { return f == FillMode::spline ? "spline" : "drop"; }
inline std::string_view dist_name(Distribution d) { return d == Distribution::normal ? "normal" : "t"; }
inline std::string_view mode_name(EstimationMode m) { return m == EstimationMode::joint ? "joint" : "two-step"; }

inline std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t end = s.find(',', start);
    if (end == std::string_view::npos) end = s.size();
    std::string item = csv::trim(s.substr(start, end - start));
    if (!item.empty()) out.push_back(std::move(item));
    start = end + 1;
  }
  return out;
}

inline std::uint64_t parse_seed(const std::string& s) {
  const std::string t = csv::trim(s);
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size()) fail(Errc::config_error, "bad seed \"" + s + "\"");
  return v;
}

/// Multi-start seeds derived from a single base seed.
inline std::vector<std::uint64_t> seeds_from(std::uint64_t base) { return {base, base + 1, base + 2, base + 3}; }

/// Flat `key = value` file; `#` starts a comment. Relative paths resolve
/// against `base_dir`.
inline PipelineConfig parse_config(std::string_view text, const std::string& origin = "<config>",
                                   const std::filesystem::path& base_dir = {}) {
  PipelineConfig cfg;
  auto resolve = [&](const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() || base_dir.empty() ? p : (base_dir / path).lexically_normal().string();
  };
  std::size_t line_no = 0, start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    std::string line(text.substr(start, end - start));
    start = end + 1;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (csv::trim(line).empty()) continue;
    const auto eq = line.find('=');
    const std::string where = origin + ":" + std::to_string(line_no);
    if (eq == std::string::npos) fail(Errc::config_error, where + ": expected key = value");
    const std::string key = csv::trim(std::string_view(line).substr(0, eq));
    const std::string value = csv::trim(std::string_view(line).substr(eq + 1));
    auto suffix = [&](std::string_view prefix) -> std::optional<std::string> {
      if (key.size() > prefix.size() && key.compare(0, prefix.size(), prefix) == 0) return key.substr(prefix.size());
      return std::nullopt;
    };
    try {
      if (key == "headlines") {
        cfg.headlines = resolve(value);
      } else if (auto name = suffix("market.")) {
        cfg.set_market(*name, resolve(value));
      } else if (auto n2 = suffix("date_column.")) {
        cfg.date_columns[*n2] = value;
      } else if (auto n3 = suffix("value_column.")) {
        cfg.value_columns[*n3] = value;
      } else if (auto n4 = suffix("label.")) {
        cfg.labels[*n4] = value;
      } else if (key == "keywords") {
        cfg.keywords = split_list(value);
      } else if (key == "score_mode") {
        cfg.score_mode = parse_score_mode(value);
      } else if (key == "fill") {
        cfg.fill = parse_fill(value);
      } else if (key == "dist") {
        cfg.dist = parse_distribution(value);
      } else if (key == "mode") {
        cfg.mode = parse_mode(value);
      } else if (key == "bp") {
        cfg.bp = parse_bp_variant(value);
      } else if (key == "out") {
        cfg.out = resolve(value);
      } else if (key == "seed") {
        cfg.seeds = seeds_from(parse_seed(value));
      } else if (key == "seeds") {
        cfg.seeds.clear();
        for (const auto& s : split_list(value)) cfg.seeds.push_back(parse_seed(s));
      } else if (key == "returns_series") {
        cfg.returns_series = value;
      } else if (key == "returns_scale") {
        const auto v = csv::parse_double(value);
        if (!v || !(*v > 0.0) || !std::isfinite(*v)) fail(Errc::config_error, "returns_scale must be positive");
        cfg.returns_scale = *v;
      } else {
        fail(Errc::config_error, "unknown key \"" + key + "\"");
      }
    } catch (const Error& e) {
      if (e.code() != Errc::config_error) throw;
      fail(Errc::config_error, where + ": " + e.detail());
    }
  }
  return cfg;
}

inline PipelineConfig load_config(const std::string& path) {
  const std::string text = csv::read_file(path);
  return parse_config(text, path, std::filesystem::path(path).parent_path());
}

/// Effective configuration as ordered key/value pairs.
inline std::vector<std::pair<std::string, std::string>> config_echo(const PipelineConfig& c) {
  std::vector<std::pair<std::string, std::string>> out;
  out.emplace_back("headlines", c.headlines);
  for (const auto& m : c.markets) out.emplace_back("market." + m.name, m.path);
  std::string kw;
  for (const auto& k : c.keywords) kw += (kw.empty() ? "" : ",") + k;
  out.emplace_back("keywords", kw);
  out.emplace_back("score_mode", std::string(score_mode_name(c.score_mode)));
  out.emplace_back("fill", std::string(fill_name(c.fill)));
  out.emplace_back("dist", std::string(dist_name(c.dist)));
  out.emplace_back("mode", std::string(mode_name(c.mode)));
  out.emplace_back("bp", c.bp == BpVariant::koenker ? "koenker" : "classical");
  std::string seeds;
  for (auto s : c.seeds) seeds += (seeds.empty() ? "" : ",") + std::to_string(s);
  out.emplace_back("seeds", seeds);
  out.emplace_back("returns_series", c.returns_series);
  out.emplace_back("returns_scale", csv::format_double(c.returns_scale));
  for (const auto& [k, v] : c.date_columns) out.emplace_back("date_column." + k, v);
  for (const auto& [k, v] : c.value_columns) out.emplace_back("value_column." + k, v);
  for (const auto& [k, v] : c.labels) out.emplace_back("label." + k, v);
  return out;
}

// ---------------------------------------------------------------------------
// Stage helpers

/// Runs `fn`, attaching `stage` to any library error that lacks one.
template <typename Fn>
auto in_stage(std::string_view stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    if (!e.stage().empty()) throw;
    throw e.with_stage(std::string(stage));
  }
}

inline std::vector<Headline> load_and_filter_headlines(const std::string& path, const std::vector<std::string>& keywords) {
  if (path.empty()) fail(Errc::config_error, "no headlines file configured");
  auto all = load_headlines(path, headline_format_for(path));
  if (keywords.empty()) return all;
  return filter_by_keywords(all, keywords);
}

inline void write_headlines_csv(std::ostream& os, std::span<const Headline> hs) {
  csv::Writer w(os);
  w.row({"date", "source", "title", "body", "pos", "neg", "neu"});
  for (const auto& h : hs) {
    std::vector<std::string> row{h.date.to_string(), h.source, h.title, h.body.value_or("")};
    for (int k = 0; k < 3; ++k) row.push_back(h.logits ? csv::format_double((*h.logits)[k]) : std::string());
    w.row(row);
  }
}

inline void write_scored_csv(std::ostream& os, std::span<const Headline> hs, std::span<const ScoredHeadline> scored) {
  csv::Writer w(os);
  w.row({"date", "title", "p_positive", "p_negative", "p_neutral", "label", "score"});
  for (std::size_t i = 0; i < scored.size(); ++i) {
    const auto& s = scored[i];
    w.row({s.date.to_string(), hs[i].title, csv::format_double(s.probs[0]), csv::format_double(s.probs[1]),
           csv::format_double(s.probs[2]), std::string(to_string(s.label)), csv::format_double(s.score)});
  }
}

inline DailySentimentSeries read_daily_sentiment(const std::string& path) {
  const auto t = csv::read_table(path);
  const auto dc = t.column("date");
  const auto vc = t.column("mean_score");
  if (!dc || !vc) fail(Errc::missing_column, path + ": expected date,mean_score");
  const auto cc = t.column("count");
  DailySentimentSeries out;
  for (const auto& r : t.rows) {
    auto d = Date::parse(r.fields[*dc]);
    if (!d) fail(Errc::malformed_record, path + ":" + std::to_string(r.line) + ": invalid date");
    auto v = csv::parse_double(r.fields[*vc]);
    if (!v) fail(Errc::non_numeric_value, path + ":" + std::to_string(r.line));
    std::size_t count = 0;
    if (cc) count = static_cast<std::size_t>(csv::parse_double(r.fields[*cc]).value_or(0.0));
    out.points.push_back({*d, *v, count});
  }
  return out;
}

/// Loads every configured market series; the returns source must be present.
inline std::vector<MarketSeries> load_markets(const PipelineConfig& cfg) {
  bool has_returns = false;
  for (const auto& m : cfg.markets) has_returns = has_returns || m.name == cfg.returns_series;
  if (!has_returns) {
    fail(Errc::missing_series, "no market path for the returns series " + cfg.returns_series +
                                   " (use --market " + cfg.returns_series + "=PATH)");
  }
  std::vector<MarketSeries> out;
  for (const auto& m : cfg.markets) {
    out.push_back(load_market_series(m.path, m.name, cfg.date_column(m.name), cfg.value_column(m.name)));
  }
  return out;
}

/// Log returns of the returns source aligned with sentiment and the other series.
inline AlignedPanel build_panel(const PipelineConfig& cfg, const std::vector<MarketSeries>& markets,
                                const DailySentimentSeries& daily) {
  const MarketSeries* prices = nullptr;
  std::vector<MarketSeries> exog;
  for (const auto& m : markets) {
    if (m.name() == cfg.returns_series) {
      prices = &m;
    } else {
      exog.push_back(m);
    }
  }
  if (!prices) fail(Errc::missing_series, cfg.returns_series);
  MarketSeries returns = log_returns(*prices);
  if (cfg.returns_scale != 1.0) {
    std::vector<SeriesPoint> pts;
    for (const auto& p : returns.points()) pts.push_back({p.date, cfg.returns_scale * p.value});
    returns = MarketSeries(returns.name(), std::move(pts));
  }
  return align_panel(returns, daily.as_series("Sentiment"), exog, cfg.fill);
}

inline std::vector<std::string> regressor_labels(const PipelineConfig& cfg, const AlignedPanel& panel) {
  std::vector<std::string> out;
  for (const auto& n : panel.regressor_names()) out.push_back(cfg.label(n));
  return out;
}

inline std::vector<std::string> coefficient_labels(const PipelineConfig& cfg, const AlignedPanel& panel) {
  std::vector<std::string> out{"Constant"};
  for (auto& l : regressor_labels(cfg, panel)) out.push_back(std::move(l));
  return out;
}

struct OlsStage {
  OlsFit fit;
  report::CoefficientTable table;
};

inline OlsStage run_ols(const PipelineConfig& cfg, const AlignedPanel& panel) {
  const Eigen::MatrixXd x = with_intercept(panel.regressors());
  OlsStage s{ols_fit(panel.response(), x), {}};
  s.table = report::ols_table(s.fit, coefficient_labels(cfg, panel),
                              "OLS Estimates of " + cfg.label(cfg.returns_series) + " Returns");
  return s;
}

struct DiagnoseStage {
  report::DiagnosticsTable diagnostics;
  std::optional<report::VifTable> vif;
  report::SummaryTable summary;
};

inline DiagnoseStage run_diagnostics(const PipelineConfig& cfg, const AlignedPanel& panel, const OlsFit& fit) {
  DiagnoseStage d;
  const Eigen::MatrixXd z = panel.regressors();
  const auto bp = breusch_pagan(fit, with_intercept(z), cfg.bp);
  const auto dw = durbin_watson(fit.residuals);
  d.diagnostics = report::diagnostics_table(bp, dw);
  const auto labels = regressor_labels(cfg, panel);
  if (z.cols() >= 2) d.vif = report::vif_table(labels, vif(z));
  d.summary.rows.push_back({"Returns (" + cfg.label(cfg.returns_series) + ")", describe(panel.returns())});
  d.summary.rows.push_back({labels[0], describe(panel.sentiment())});
  for (std::size_t j = 0; j < panel.exog().size(); ++j) {
    d.summary.rows.push_back({labels[j + 1], describe(panel.exog()[j].values)});
  }
  return d;
}

struct GarchStage {
  GarchFit fit;
  std::vector<double> z;
  std::vector<QqPoint> qq;
  report::CoefficientTable mean_table;
  report::CoefficientTable variance_table;
};

inline GarchStage run_garch(const PipelineConfig& cfg, const AlignedPanel& panel) {
  GarchFitOptions opts;
  opts.seeds = cfg.seeds;
  const Eigen::MatrixXd x = panel.regressors();
  GarchStage g;
  g.fit = fit(panel.returns(), x, cfg.dist, cfg.mode, opts);
  g.z = standardized_residuals(g.fit, panel.returns(), x);
  g.qq = qq_data(g.z, cfg.dist == Distribution::normal ? QqReference::normal()
                                                       : QqReference::student_t(g.fit.params.nu));
  g.mean_table = report::garch_mean_table(g.fit, coefficient_labels(cfg, panel));
  g.variance_table = report::garch_variance_table(g.fit);
  return g;
}

// ---------------------------------------------------------------------------
// Output layout

namespace files {
inline constexpr const char* headlines_filtered = "headlines_filtered.csv";
inline constexpr const char* scored_headlines = "scored_headlines.csv";
inline constexpr const char* panel = "panel.csv";
inline constexpr const char* ols_coefficients = "ols_coefficients.csv";
inline constexpr const char* ols_fit_stats = "ols_fit_stats.csv";
inline constexpr const char* ols_residuals = "ols_residuals.csv";
inline constexpr const char* diagnostics = "diagnostics.csv";
inline constexpr const char* vif = "vif.csv";
inline constexpr const char* summary = "summary_stats.csv";
inline constexpr const char* garch_mean = "garch_mean_coefficients.csv";
inline constexpr const char* garch_mean_stats = "garch_mean_fit_stats.csv";
inline constexpr const char* garch_variance = "garch_variance_coefficients.csv";
inline constexpr const char* garch_variance_stats = "garch_variance_fit_stats.csv";
inline constexpr const char* standardized_residuals = "standardized_residuals.csv";
inline constexpr const char* metadata = "run_metadata.json";
inline constexpr const char* titles = "titles.json";
inline constexpr const char* report_text = "report.txt";
inline constexpr const char* report_markdown = "report.md";
}  // namespace files

inline std::string figure_file(report::Figure f) { return std::string(report::to_string(f)) + ".csv"; }

inline std::filesystem::path ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(Errc::io_error, "cannot create " + dir + ": " + ec.message());
  return std::filesystem::path(dir);
}

/// Table titles keyed by CSV name, so `report` can rebuild captions.
inline void record_title(const std::filesystem::path& dir, const std::string& file, const std::string& title) {
  const auto path = dir / files::titles;
  nlohmann::json j = nlohmann::json::object();
  if (std::filesystem::exists(path)) j = nlohmann::json::parse(csv::read_file(path.string()), nullptr, false);
  if (!j.is_object()) j = nlohmann::json::object();
  j[file] = title;
  report::write_text_file(path.string(), j.dump(2) + "\n");
}

inline void write_coefficient_files(const std::filesystem::path& dir, const report::CoefficientTable& t,
                                    const char* coef_file, const char* stats_file) {
  record_title(dir, coef_file, t.title);
  report::write_with((dir / coef_file).string(), [&](std::ostream& os) { report::write_coefficients_csv(os, t); });
  report::write_with((dir / stats_file).string(), [&](std::ostream& os) { report::write_fit_stats_csv(os, t); });
}

inline void write_ols_outputs(const std::filesystem::path& dir, const AlignedPanel& panel, const OlsStage& s) {
  write_coefficient_files(dir, s.table, files::ols_coefficients, files::ols_fit_stats);
  report::write_with((dir / files::ols_residuals).string(), [&](std::ostream& os) {
    csv::Writer w(os);
    w.row({"date", "sentiment", "residual"});
    for (std::size_t i = 0; i < panel.size(); ++i) {
      w.row({panel.dates()[i].to_string(), csv::format_double(panel.sentiment()[i]),
             csv::format_double(s.fit.residuals(static_cast<Eigen::Index>(i)))});
    }
  });
}

inline void write_diagnostic_outputs(const std::filesystem::path& dir, const DiagnoseStage& d) {
  report::write_with((dir / files::diagnostics).string(),
                     [&](std::ostream& os) { report::write_diagnostics_csv(os, d.diagnostics); });
  if (d.vif) report::write_with((dir / files::vif).string(), [&](std::ostream& os) { report::write_vif_csv(os, *d.vif); });
  report::write_with((dir / files::summary).string(), [&](std::ostream& os) { report::write_summary_csv(os, d.summary); });
}

inline void write_garch_outputs(const std::filesystem::path& dir, const AlignedPanel& panel, const GarchStage& g) {
  write_coefficient_files(dir, g.mean_table, files::garch_mean, files::garch_mean_stats);
  write_coefficient_files(dir, g.variance_table, files::garch_variance, files::garch_variance_stats);
  report::write_with((dir / files::standardized_residuals).string(), [&](std::ostream& os) {
    csv::Writer w(os);
    w.row({"date", "z", "sigma2"});
    for (std::size_t i = 0; i < panel.size(); ++i) {
      w.row({panel.dates()[i].to_string(), csv::format_double(g.z[i]), csv::format_double(g.fit.variance_path[i])});
    }
  });
  report::ReportBundle b;
  b.qq = g.qq;
  report::export_figure_data(b, report::Figure::qq, (dir / figure_file(report::Figure::qq)).string());
}

/// Full text report from whatever tables the bundle carries.
inline std::string render_report(const report::ReportBundle& b, report::Style style) {
  std::string out;
  auto section = [&](const std::string& s) {
    if (!out.empty()) out += '\n';
    out += s;
  };
  if (b.garch_mean) section(report::render_coefficient_table(*b.garch_mean, style));
  if (b.garch_variance) section(report::render_coefficient_table(*b.garch_variance, style));
  if (b.ols) section(report::render_coefficient_table(*b.ols, style));
  if (b.diagnostics) section(report::render_diagnostics_table(*b.diagnostics, style));
  if (b.vif) section(report::render_vif_table(*b.vif, style));
  if (b.summary) section(report::render_summary_table(*b.summary, style));
  if (!b.garch_converged) section("WARNING: the GARCH optimizer did not reach its convergence tolerance.\n");
  return out;
}

/// Rebuilds the table part of a bundle from a directory of stage outputs.
inline report::ReportBundle load_report_tables(const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path d(dir);
  auto has = [&](const char* f) { return fs::exists(d / f); };
  report::ReportBundle b;
  auto title_from = [&](const char* coef_file, std::string fallback) {
    if (has(files::titles)) {
      const auto j = nlohmann::json::parse(csv::read_file((d / files::titles).string()), nullptr, false);
      if (j.is_object() && j.contains(coef_file) && j[coef_file].is_string()) return j[coef_file].get<std::string>();
    }
    return fallback;
  };
  if (has(files::garch_mean)) {
    b.garch_mean = report::read_coefficient_table((d / files::garch_mean).string(),
                                                  has(files::garch_mean_stats) ? (d / files::garch_mean_stats).string() : "",
                                                  title_from(files::garch_mean, "GARCH(1,1) mean equation"));
  }
  if (has(files::garch_variance)) {
    b.garch_variance = report::read_coefficient_table(
        (d / files::garch_variance).string(),
        has(files::garch_variance_stats) ? (d / files::garch_variance_stats).string() : "",
        title_from(files::garch_variance, "GARCH(1,1) variance equation"));
    for (const auto& s : b.garch_variance->stats) {
      if (s.name == "Converged") b.garch_converged = s.value != 0.0;
    }
  }
  if (has(files::ols_coefficients)) {
    b.ols = report::read_coefficient_table((d / files::ols_coefficients).string(),
                                           has(files::ols_fit_stats) ? (d / files::ols_fit_stats).string() : "",
                                           title_from(files::ols_coefficients, "OLS Estimates of S&P 500 Returns"));
  }
  if (has(files::diagnostics)) b.diagnostics = report::read_diagnostics_table((d / files::diagnostics).string());
  if (has(files::vif)) b.vif = report::read_vif_table((d / files::vif).string());
  if (has(files::summary)) b.summary = report::read_summary_table((d / files::summary).string());
  if (!b.garch_mean && !b.garch_variance && !b.ols && !b.diagnostics && !b.vif && !b.summary) {
    fail(Errc::missing_series, dir + " holds no table CSVs");
  }
  return b;
}

// ---------------------------------------------------------------------------
// Full run

/// ingest -> score -> align -> OLS + diagnostics -> GARCH -> residual
/// diagnostics, writing every artifact under cfg.out. Output depends only on
/// the inputs and the configuration.
inline report::ReportBundle run_pipeline(const PipelineConfig& cfg) {
  report::ReportBundle b;
  b.metadata.version = std::string(kVersion);
  b.metadata.config = config_echo(cfg);

  std::vector<Headline> all, kept;
  std::vector<MarketSeries> markets;
  in_stage("ingest", [&] {
    if (cfg.headlines.empty()) fail(Errc::config_error, "no headlines file configured");
    all = load_headlines(cfg.headlines, headline_format_for(cfg.headlines));
    kept = cfg.keywords.empty() ? all : filter_by_keywords(all, cfg.keywords);
    if (kept.empty()) fail(Errc::empty_input, "no headline matches the keywords");
    markets = load_markets(cfg);
  });
  b.metadata.headlines_loaded = all.size();
  b.metadata.headlines_kept = kept.size();

  std::vector<ScoredHeadline> scored;
  in_stage("score", [&] {
    scored = score_headlines(kept, cfg.score_mode);
    b.daily = aggregate_daily(scored);
    b.categories = category_distribution(scored);
  });

  const AlignedPanel panel = in_stage("align", [&] { return build_panel(cfg, markets, *b.daily); });
  b.metadata.observations = panel.size();
  b.metadata.sample_start = panel.dates().front().to_string();
  b.metadata.sample_end = panel.dates().back().to_string();

  const OlsStage ols = in_stage("ols", [&] { return run_ols(cfg, panel); });
  b.ols = ols.table;
  std::vector<report::ResidualPoint> rs;
  for (std::size_t i = 0; i < panel.size(); ++i) {
    rs.push_back({panel.sentiment()[i], ols.fit.residuals(static_cast<Eigen::Index>(i))});
  }
  b.residuals_vs_sentiment = std::move(rs);

  const DiagnoseStage diag = in_stage("diagnose", [&] { return run_diagnostics(cfg, panel, ols.fit); });
  b.diagnostics = diag.diagnostics;
  b.vif = diag.vif;
  b.summary = diag.summary;

  const GarchStage garch = in_stage("garch", [&] { return run_garch(cfg, panel); });
  b.garch_mean = garch.mean_table;
  b.garch_variance = garch.variance_table;
  b.qq = garch.qq;
  b.garch_converged = garch.fit.converged;

  in_stage("report", [&] {
    const auto dir = ensure_dir(cfg.out);
    report::write_with((dir / files::headlines_filtered).string(),
                       [&](std::ostream& os) { write_headlines_csv(os, kept); });
    report::write_with((dir / files::scored_headlines).string(),
                       [&](std::ostream& os) { write_scored_csv(os, kept, scored); });
    report::write_with((dir / files::panel).string(), [&](std::ostream& os) { write_panel(os, panel); });
    write_ols_outputs(dir, panel, ols);
    write_diagnostic_outputs(dir, diag);
    write_garch_outputs(dir, panel, garch);
    for (auto f : report::kAllFigures) report::export_figure_data(b, f, (dir / figure_file(f)).string());

    nlohmann::ordered_json meta;
    meta["version"] = b.metadata.version;
    meta["config"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : b.metadata.config) meta["config"][k] = v;
    meta["sample"] = {{"start", b.metadata.sample_start}, {"end", b.metadata.sample_end},
                      {"observations", b.metadata.observations}};
    meta["headlines"] = {{"loaded", b.metadata.headlines_loaded}, {"kept", b.metadata.headlines_kept}};
    meta["fill_counts"] = panel.fill_counts();
    meta["garch"] = {{"converged", garch.fit.converged},
                     {"iterations", garch.fit.iterations},
                     {"evaluations", garch.fit.evaluations},
                     {"std_errors", garch.fit.std_errors.has_value()}};
    report::write_text_file((dir / files::metadata).string(), meta.dump(2) + "\n");
    report::write_text_file((dir / files::report_text).string(), render_report(b, report::Style::plain));
    report::write_text_file((dir / files::report_markdown).string(), render_report(b, report::Style::markdown));
  });
  return b;
}

}  // namespace sentivol

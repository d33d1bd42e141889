// sentivol command-line driver.
//
// Exit codes: 0 success, 1 input error, 2 non-convergence or numerical
// failure, 3 internal error.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>

#include "sentivol/pipeline.hpp"

namespace fs = std::filesystem;
using namespace sentivol;

namespace {

constexpr int kOk = 0;
constexpr int kInputError = 1;
constexpr int kNumericalError = 2;
constexpr int kInternalError = 3;

struct Options {
  std::string config;
  std::string headlines;
  std::vector<std::string> markets;
  std::string keywords;
  std::string score_mode, fill, dist, mode;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string panel;
  std::string sentiment;
  std::string style = "plain";
  // simulate
  double mu = 0.0, alpha0 = 0.1, alpha1 = 0.1, beta1 = 0.8, nu = 8.0;
  std::size_t length = 1000;
};

std::vector<std::string> read_keywords(const std::string& arg) {
  if (fs::is_regular_file(arg)) {
    std::string text = csv::read_file(arg);
    for (char& c : text) {
      if (c == '\n' || c == '\r') c = ',';
    }
    return split_list(text);
  }
  return split_list(arg);
}

PipelineConfig make_config(const Options& o) {
  PipelineConfig cfg = o.config.empty() ? PipelineConfig{} : load_config(o.config);
  if (!o.headlines.empty()) cfg.headlines = o.headlines;
  for (const auto& m : o.markets) {
    const auto eq = m.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == m.size()) {
      fail(Errc::config_error, "--market expects NAME=PATH, got \"" + m + "\"");
    }
    cfg.set_market(m.substr(0, eq), m.substr(eq + 1));
  }
  if (!o.keywords.empty()) {
    cfg.keywords = read_keywords(o.keywords);
    if (cfg.keywords.empty()) fail(Errc::empty_keyword_list, "--keywords names no keyword");
  }
  if (!o.score_mode.empty()) cfg.score_mode = parse_score_mode(o.score_mode);
  if (!o.fill.empty()) cfg.fill = parse_fill(o.fill);
  if (!o.dist.empty()) cfg.dist = parse_distribution(o.dist);
  if (!o.mode.empty()) cfg.mode = parse_mode(o.mode);
  if (!o.out.empty()) cfg.out = o.out;
  if (o.seed) cfg.seeds = seeds_from(*o.seed);
  return cfg;
}

report::Style parse_style(const std::string& s) {
  if (s == "plain") return report::Style::plain;
  if (s == "markdown") return report::Style::markdown;
  fail(Errc::config_error, "style must be plain or markdown");
}

std::string panel_path(const Options& o, const PipelineConfig& cfg) {
  return o.panel.empty() ? (fs::path(cfg.out) / files::panel).string() : o.panel;
}

AlignedPanel load_panel(const Options& o, const PipelineConfig& cfg) {
  return in_stage("ingest", [&] { return read_panel(panel_path(o, cfg)); });
}

void write_daily_outputs(const fs::path& dir, const report::ReportBundle& b) {
  for (auto f : {report::Figure::items_per_day, report::Figure::daily_sentiment, report::Figure::category_distribution}) {
    report::export_figure_data(b, f, (dir / figure_file(f)).string());
  }
}

int cmd_ingest(const Options& o) {
  const PipelineConfig cfg = make_config(o);
  const auto kept = in_stage("ingest", [&] { return load_and_filter_headlines(cfg.headlines, cfg.keywords); });
  const auto dir = ensure_dir(cfg.out);
  report::write_with((dir / files::headlines_filtered).string(), [&](std::ostream& os) { write_headlines_csv(os, kept); });
  std::cout << "kept " << kept.size() << " headlines -> " << (dir / files::headlines_filtered).string() << '\n';
  if (cfg.markets.empty()) return kOk;

  const auto markets = in_stage("ingest", [&] { return load_markets(cfg); });
  const DailySentimentSeries daily = in_stage("score", [&] {
    if (!o.sentiment.empty()) return read_daily_sentiment(o.sentiment);
    if (kept.empty()) fail(Errc::empty_input, "no headline matches the keywords");
    return aggregate_daily(score_headlines(kept, cfg.score_mode));
  });
  const AlignedPanel panel = in_stage("align", [&] { return build_panel(cfg, markets, daily); });
  report::write_with((dir / files::panel).string(), [&](std::ostream& os) { write_panel(os, panel); });
  std::cout << "panel: " << panel.size() << " rows -> " << (dir / files::panel).string() << '\n';
  return kOk;
}

int cmd_score(const Options& o) {
  const PipelineConfig cfg = make_config(o);
  const auto kept = in_stage("ingest", [&] { return load_and_filter_headlines(cfg.headlines, cfg.keywords); });
  report::ReportBundle b;
  std::vector<ScoredHeadline> scored;
  in_stage("score", [&] {
    scored = score_headlines(kept, cfg.score_mode);
    b.daily = aggregate_daily(scored);
    b.categories = category_distribution(scored);
  });
  const auto dir = ensure_dir(cfg.out);
  report::write_with((dir / files::scored_headlines).string(), [&](std::ostream& os) { write_scored_csv(os, kept, scored); });
  write_daily_outputs(dir, b);
  std::cout << "scored " << scored.size() << " headlines over " << b.daily->points.size() << " days -> "
            << dir.string() << '\n';
  return kOk;
}

int cmd_fit_ols(const Options& o) {
  const PipelineConfig cfg = make_config(o);
  const AlignedPanel panel = load_panel(o, cfg);
  const OlsStage s = in_stage("ols", [&] { return run_ols(cfg, panel); });
  const auto dir = ensure_dir(cfg.out);
  write_ols_outputs(dir, panel, s);
  std::cout << report::render_coefficient_table(s.table, parse_style(o.style));
  return kOk;
}

int cmd_diagnose(const Options& o) {
  const PipelineConfig cfg = make_config(o);
  const AlignedPanel panel = load_panel(o, cfg);
  const OlsStage s = in_stage("ols", [&] { return run_ols(cfg, panel); });
  const DiagnoseStage d = in_stage("diagnose", [&] { return run_diagnostics(cfg, panel, s.fit); });
  const auto dir = ensure_dir(cfg.out);
  write_diagnostic_outputs(dir, d);
  report::ReportBundle b;
  b.diagnostics = d.diagnostics;
  b.vif = d.vif;
  b.summary = d.summary;
  std::vector<report::ResidualPoint> rs;
  for (std::size_t i = 0; i < panel.size(); ++i) {
    rs.push_back({panel.sentiment()[i], s.fit.residuals(static_cast<Eigen::Index>(i))});
  }
  b.residuals_vs_sentiment = std::move(rs);
  report::export_figure_data(b, report::Figure::residuals_vs_sentiment,
                             (dir / figure_file(report::Figure::residuals_vs_sentiment)).string());
  std::cout << render_report(b, parse_style(o.style));
  return kOk;
}

int cmd_fit_garch(const Options& o) {
  const PipelineConfig cfg = make_config(o);
  const AlignedPanel panel = load_panel(o, cfg);
  const GarchStage g = in_stage("garch", [&] { return run_garch(cfg, panel); });
  const auto dir = ensure_dir(cfg.out);
  write_garch_outputs(dir, panel, g);
  const auto style = parse_style(o.style);
  std::cout << report::render_coefficient_table(g.mean_table, style) << '\n'
            << report::render_coefficient_table(g.variance_table, style);
  if (!g.fit.converged) {
    std::cerr << "garch: no-convergence: optimizer stopped before reaching its tolerance\n";
    return kNumericalError;
  }
  return kOk;
}

int cmd_simulate(const Options& o) {
  const PipelineConfig cfg = make_config(o);
  GarchParams p;
  p.mu = o.mu;
  p.alpha0 = o.alpha0;
  p.alpha1 = o.alpha1;
  p.beta1 = o.beta1;
  p.nu = o.nu;
  const std::uint64_t seed = o.seed.value_or(1);
  const auto path = simulate(p, o.length, seed, cfg.dist);
  const auto dir = ensure_dir(cfg.out);
  const std::string file = (dir / "simulated.csv").string();
  report::write_with(file, [&](std::ostream& os) {
    csv::Writer w(os);
    w.row({"t", "y", "sigma2"});
    for (std::size_t t = 0; t < path.y.size(); ++t) {
      w.row({std::to_string(t + 1), csv::format_double(path.y[t]), csv::format_double(path.sigma2[t])});
    }
  });
  std::cout << "simulated " << path.y.size() << " points -> " << file << '\n';
  return kOk;
}

int cmd_report(const Options& o) {
  const PipelineConfig cfg = make_config(o);
  const auto style = parse_style(o.style);
  const auto b = in_stage("report", [&] { return load_report_tables(cfg.out); });
  const std::string text = render_report(b, style);
  const auto dir = fs::path(cfg.out);
  report::write_text_file((dir / (style == report::Style::plain ? files::report_text : files::report_markdown)).string(),
                          text);
  std::cout << text;
  return b.garch_converged ? kOk : kNumericalError;
}

int cmd_run(const Options& o) {
  const PipelineConfig cfg = make_config(o);
  const auto b = run_pipeline(cfg);
  std::cout << render_report(b, parse_style(o.style));
  std::cout << "\noutputs written to " << cfg.out << '\n';
  if (!b.garch_converged) {
    std::cerr << "garch: no-convergence: optimizer stopped before reaching its tolerance\n";
    return kNumericalError;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"News-sentiment and GARCH(1,1) volatility pipeline"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  app.fallthrough();

  Options o;
  app.add_option("--config", o.config, "key = value configuration file")->check(CLI::ExistingFile);
  app.add_option("--headlines", o.headlines, "headline file (.csv or .jsonl)");
  app.add_option("--market", o.markets, "market series as NAME=PATH (repeatable)");
  app.add_option("--keywords", o.keywords, "comma-separated keywords or a keyword file");
  app.add_option("--score-mode", o.score_mode, "prob-diff or logit-diff");
  app.add_option("--fill", o.fill, "spline or drop");
  app.add_option("--dist", o.dist, "normal or t");
  app.add_option("--mode", o.mode, "joint or two-step");
  app.add_option("--out", o.out, "output directory");
  app.add_option("--seed", o.seed, "base seed for the optimizer starts (or the simulation)");
  app.add_option("--panel", o.panel, "aligned panel CSV (default OUT/panel.csv)");
  app.add_option("--sentiment", o.sentiment, "daily sentiment CSV for ingest (date,mean_score)");
  app.add_option("--style", o.style, "plain or markdown");

  int (*handler)(const Options&) = nullptr;
  auto sub = [&](const char* name, const char* help, int (*fn)(const Options&)) {
    auto* s = app.add_subcommand(name, help);
    s->callback([&handler, fn] { handler = fn; });
    return s;
  };
  sub("ingest", "filter headlines; with --market also build the aligned panel", cmd_ingest);
  sub("score", "score headlines and aggregate daily sentiment", cmd_score);
  sub("fit-ols", "OLS mean equation on the panel", cmd_fit_ols);
  sub("fit-garch", "GARCH(1,1) fit on the panel", cmd_fit_garch);
  sub("diagnose", "Breusch-Pagan, Durbin-Watson, VIF and summary statistics", cmd_diagnose);
  auto* sim = sub("simulate", "simulate a GARCH(1,1) path", cmd_simulate);
  sim->add_option("--mu", o.mu, "mean");
  sim->add_option("--alpha0", o.alpha0, "variance intercept");
  sim->add_option("--alpha1", o.alpha1, "ARCH coefficient");
  sim->add_option("--beta1", o.beta1, "GARCH coefficient");
  sim->add_option("--nu", o.nu, "Student-t degrees of freedom");
  sim->add_option("--length", o.length, "number of points");
  sub("report", "render tables from the CSVs in --out", cmd_report);
  sub("run", "full pipeline", cmd_run);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInputError;
  }

  try {
    return handler(o);
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return e.is_numerical() ? kNumericalError : kInputError;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternalError;
  } catch (...) {
    std::cerr << "internal error\n";
    return kInternalError;
  }
}

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "sentivol.hpp"

namespace fs = std::filesystem;
using namespace sentivol;

namespace {

const std::string kDemo = SENTIVOL_DEMO_DIR;

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() / ("sentivol_pipeline_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  std::string str() const { return path_.string(); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

PipelineConfig demo_config(const std::string& out) {
  PipelineConfig c = load_config(kDemo + "/demo.conf");
  c.out = out;
  return c;
}

Errc code_of(const std::function<void()>& fn, std::string* stage = nullptr) {
  try {
    fn();
  } catch (const Error& e) {
    if (stage) *stage = e.stage();
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::invalid_argument;
}

std::map<std::string, std::string> read_dir(const std::string& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) out[e.path().filename().string()] = csv::read_file(e.path().string());
  return out;
}

}  // namespace

TEST(Config, ParsesKeysCommentsAndRelativePaths) {
  const auto c = parse_config(
      "# demo\n"
      "headlines = news.csv\n"
      "market.SP500 = prices/sp.csv   # trailing comment\n"
      "market.VIX = /abs/vix.csv\n"
      "keywords = Ukraine, russia ,,war\n"
      "score_mode = logit-diff\r\n"
      "fill = drop\n"
      "dist = normal\n"
      "mode = two-step\n"
      "bp = classical\n"
      "seed = 7\n"
      "label.VIX = Volatility Index\n"
      "value_column.VIX = close\n"
      "returns_scale = 100\n",
      "cfg", "/base");
  EXPECT_EQ(c.headlines, "/base/news.csv");
  ASSERT_EQ(c.markets.size(), 2u);
  EXPECT_EQ(c.markets[0].name, "SP500");
  EXPECT_EQ(c.markets[0].path, "/base/prices/sp.csv");
  EXPECT_EQ(c.markets[1].path, "/abs/vix.csv");
  EXPECT_EQ(c.keywords, (std::vector<std::string>{"Ukraine", "russia", "war"}));
  EXPECT_EQ(c.score_mode, ScoreMode::logit_diff);
  EXPECT_EQ(c.fill, FillMode::drop);
  EXPECT_EQ(c.dist, Distribution::normal);
  EXPECT_EQ(c.mode, EstimationMode::two_step);
  EXPECT_EQ(c.bp, BpVariant::classical);
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{7, 8, 9, 10}));
  EXPECT_EQ(c.label("VIX"), "Volatility Index");
  EXPECT_EQ(c.label("Sentiment"), "Sentiment Score");
  EXPECT_EQ(c.label("EPU"), "EPU");
  EXPECT_EQ(c.value_column("VIX"), "close");
  EXPECT_EQ(c.value_column("EPU"), "value");
  EXPECT_EQ(c.date_column("VIX"), "date");
  EXPECT_EQ(c.returns_scale, 100.0);
}

TEST(Config, Defaults) {
  const PipelineConfig c;
  EXPECT_EQ(c.score_mode, ScoreMode::prob_diff);
  EXPECT_EQ(c.fill, FillMode::spline);
  EXPECT_EQ(c.dist, Distribution::student_t);
  EXPECT_EQ(c.mode, EstimationMode::joint);
  EXPECT_EQ(c.returns_series, "SP500");
  EXPECT_EQ(c.returns_scale, 1.0);
}

TEST(Config, LaterMarketEntryReplacesPath) {
  auto c = parse_config("market.A = a1\nmarket.B = b\nmarket.A = a2\n");
  ASSERT_EQ(c.markets.size(), 2u);
  EXPECT_EQ(c.markets[0].path, "a2");
  c.set_market("C", "c");
  EXPECT_EQ(c.markets.back().name, "C");
}

TEST(Config, ErrorsNameTheLine) {
  for (const std::string bad : {"headlines = x\nnonsense\n", "headlines = x\ncolour = red\n", "x = 1\n",
                                "fill = cubic\n", "seed = -3\n", "returns_scale = 0\n", "dist = cauchy\n"}) {
    try {
      parse_config(bad, "my.conf");
      ADD_FAILURE() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::config_error) << bad;
      EXPECT_NE(std::string(e.what()).find("my.conf:"), std::string::npos) << e.what();
    }
  }
  try {
    parse_config("fill = drop\n\n# c\ncolour = red\n", "f");
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("f:4"), std::string::npos) << e.what();
  }
}

TEST(Config, EnumSpellings) {
  EXPECT_EQ(parse_score_mode("PROB_DIFF"), ScoreMode::prob_diff);
  EXPECT_EQ(parse_distribution("student-t"), Distribution::student_t);
  EXPECT_EQ(parse_mode("two_step"), EstimationMode::two_step);
  EXPECT_THROW(parse_mode("both"), Error);
  EXPECT_EQ(seeds_from(5), (std::vector<std::uint64_t>{5, 6, 7, 8}));
  EXPECT_EQ(split_list(" a ,b,, c "), (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_TRUE(split_list("").empty());
}

TEST(Config, EchoRoundTripsThroughParser) {
  const auto c = load_config(kDemo + "/demo.conf");
  std::string text;
  for (const auto& [k, v] : config_echo(c)) {
    if (k == "seeds" || v.empty()) continue;
    text += k + " = " + v + "\n";
  }
  const auto back = parse_config(text);
  EXPECT_EQ(config_echo(back), config_echo(c));
}

TEST(Stage, AttachesOnlyWhenMissing) {
  std::string stage;
  EXPECT_EQ(code_of([] { in_stage("score", [] { fail(Errc::empty_input, "x"); }); }, &stage), Errc::empty_input);
  EXPECT_EQ(stage, "score");
  code_of([] { in_stage("outer", [] { in_stage("inner", [] { fail(Errc::io_error); }); }); }, &stage);
  EXPECT_EQ(stage, "inner");
  EXPECT_EQ(in_stage("x", [] { return 4; }), 4);
}

TEST(Headlines, CsvWriterRoundTrip) {
  TempDir dir;
  std::vector<Headline> hs(2);
  hs[0].date = Date::from_ymd(2024, 2, 1);
  hs[0].source = "Wire, Inc.";
  hs[0].title = "Ukraine \"talks\" resume";
  hs[0].body = "line one";
  hs[0].logits = Logits{0.1 + 0.2, -1.0 / 3.0, 2.5};
  hs[1].date = Date::from_ymd(2024, 2, 2);
  hs[1].source = "X";
  hs[1].title = "No logits here";
  report::write_with(dir.file("h.csv"), [&](std::ostream& os) { write_headlines_csv(os, hs); });
  const auto back = load_headlines(dir.file("h.csv"), HeadlineFormat::csv);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].title, hs[0].title);
  EXPECT_EQ(back[0].source, hs[0].source);
  EXPECT_EQ(back[0].body, hs[0].body);
  ASSERT_TRUE(back[0].logits.has_value());
  EXPECT_EQ(*back[0].logits, *hs[0].logits);
  EXPECT_FALSE(back[1].logits.has_value());
  EXPECT_FALSE(back[1].body.has_value());
}

TEST(Pipeline, MissingReturnsMarketIsAnIngestError) {
  TempDir dir;
  PipelineConfig c = demo_config(dir.str());
  c.markets.erase(c.markets.begin());  // drop SP500
  std::string stage;
  EXPECT_EQ(code_of([&] { run_pipeline(c); }, &stage), Errc::missing_series);
  EXPECT_EQ(stage, "ingest");
  EXPECT_TRUE(fs::is_empty(dir.str()));
}

TEST(Pipeline, UnmatchedKeywordsAndMissingFiles) {
  TempDir dir;
  PipelineConfig c = demo_config(dir.str());
  c.keywords = {"zzzzqqq"};
  std::string stage;
  EXPECT_EQ(code_of([&] { run_pipeline(c); }, &stage), Errc::empty_input);
  EXPECT_EQ(stage, "ingest");
  c = demo_config(dir.str());
  c.set_market("VIX", dir.file("nope.csv"));
  EXPECT_EQ(code_of([&] { run_pipeline(c); }, &stage), Errc::file_not_found);
  EXPECT_EQ(stage, "ingest");
  c = demo_config(dir.str());
  c.headlines.clear();
  EXPECT_EQ(code_of([&] { run_pipeline(c); }), Errc::config_error);
}

TEST(Pipeline, DemoRunProducesTablesAndFiles) {
  TempDir dir;
  const auto b = run_pipeline(demo_config(dir.str()));
  ASSERT_TRUE(b.ols && b.garch_mean && b.garch_variance && b.diagnostics && b.vif && b.summary);
  std::vector<std::string> vars;
  for (const auto& r : b.ols->rows) vars.push_back(r.variable);
  const std::vector<std::string> want{"Constant", "Sentiment Score", "VIX", "Bond 10-years", "OFR", "EPU"};
  EXPECT_EQ(vars, want);
  EXPECT_EQ(b.ols->title, "OLS Estimates of S&P 500 Returns");
  EXPECT_EQ(b.garch_mean->rows.size(), 6u);
  EXPECT_EQ(b.garch_variance->rows.size(), 4u);
  EXPECT_EQ(b.vif->rows.size(), 5u);
  EXPECT_EQ(b.summary->rows.size(), 6u);
  EXPECT_EQ(b.metadata.observations, b.qq->size());
  EXPECT_EQ(b.metadata.observations, b.residuals_vs_sentiment->size());
  EXPECT_EQ(b.categories->total(), b.metadata.headlines_kept);
  EXPECT_LT(b.metadata.headlines_kept, b.metadata.headlines_loaded);

  for (const char* f : {files::headlines_filtered, files::scored_headlines, files::panel, files::ols_coefficients,
                        files::ols_fit_stats, files::ols_residuals, files::diagnostics, files::vif, files::summary,
                        files::garch_mean, files::garch_mean_stats, files::garch_variance, files::garch_variance_stats,
                        files::standardized_residuals, files::metadata, files::titles, files::report_text,
                        files::report_markdown}) {
    EXPECT_TRUE(fs::exists(dir.file(f))) << f;
  }
  for (auto f : report::kAllFigures) EXPECT_TRUE(fs::exists(dir.file(figure_file(f)))) << figure_file(f);

  // the panel written to disk reproduces the OLS fit
  const AlignedPanel panel = read_panel(dir.file(files::panel));
  EXPECT_EQ(panel.size(), b.metadata.observations);
  PipelineConfig c = demo_config(dir.str());
  const auto ols = run_ols(c, panel);
  for (std::size_t j = 0; j < ols.table.rows.size(); ++j) {
    EXPECT_NEAR(ols.table.rows[j].coefficient, b.ols->rows[j].coefficient,
                1e-12 * std::max(1.0, std::abs(b.ols->rows[j].coefficient)));
  }
}

TEST(Pipeline, DemoRunIsByteIdentical) {
  TempDir a, b;
  run_pipeline(demo_config(a.str()));
  run_pipeline(demo_config(b.str()));
  const auto fa = read_dir(a.str()), fb = read_dir(b.str());
  ASSERT_EQ(fa.size(), fb.size());
  for (const auto& [name, content] : fa) EXPECT_EQ(content, fb.at(name)) << name;
}

TEST(Pipeline, ReportRebuildsFromCsvs) {
  TempDir dir;
  const auto b = run_pipeline(demo_config(dir.str()));
  const auto loaded = load_report_tables(dir.str());
  EXPECT_EQ(render_report(loaded, report::Style::plain), csv::read_file(dir.file(files::report_text)));
  EXPECT_EQ(render_report(loaded, report::Style::markdown), csv::read_file(dir.file(files::report_markdown)));
  EXPECT_EQ(loaded.garch_converged, b.garch_converged);
  TempDir empty;
  EXPECT_EQ(code_of([&] { load_report_tables(empty.str()); }), Errc::missing_series);
}

TEST(Pipeline, TwoStepMeanEqualsOls) {
  TempDir dir;
  PipelineConfig c = demo_config(dir.str());
  c.mode = EstimationMode::two_step;
  const auto b = run_pipeline(c);
  ASSERT_EQ(b.garch_mean->rows.size(), b.ols->rows.size());
  for (std::size_t j = 0; j < b.ols->rows.size(); ++j) {
    EXPECT_NEAR(b.garch_mean->rows[j].coefficient, b.ols->rows[j].coefficient,
                1e-10 * std::max(1.0, std::abs(b.ols->rows[j].coefficient)));
    EXPECT_EQ(b.garch_mean->rows[j].std_error, b.ols->rows[j].std_error);
  }
  bool has_r2 = false;
  for (const auto& s : b.garch_mean->stats) has_r2 = has_r2 || s.name.find("Adjusted R") != std::string::npos;
  EXPECT_TRUE(has_r2);
}

TEST(Pipeline, DropModeUsesSubsetOfSplineDates) {
  TempDir d1, d2;
  PipelineConfig c = demo_config(d1.str());
  run_pipeline(c);
  c.out = d2.str();
  c.fill = FillMode::drop;
  run_pipeline(c);
  const auto spline = read_panel(d1.file(files::panel)), drop = read_panel(d2.file(files::panel));
  EXPECT_LT(drop.size(), spline.size());
  EXPECT_TRUE(std::includes(spline.dates().begin(), spline.dates().end(), drop.dates().begin(), drop.dates().end()));
}

TEST(Pipeline, ReturnsScaleScalesOlsCoefficients) {
  TempDir d1, d2;
  PipelineConfig c = demo_config(d1.str());
  c.returns_scale = 1.0;
  const auto a = run_pipeline(c);
  c.out = d2.str();
  c.returns_scale = 100.0;
  const auto b = run_pipeline(c);
  for (std::size_t j = 0; j < a.ols->rows.size(); ++j) {
    EXPECT_NEAR(b.ols->rows[j].coefficient, 100.0 * a.ols->rows[j].coefficient,
                1e-9 * std::max(1.0, std::abs(b.ols->rows[j].coefficient)));
    EXPECT_NEAR(*b.ols->rows[j].p_value, *a.ols->rows[j].p_value, 1e-9);
  }
}

TEST(Pipeline, DailySentimentCsvRoundTrip) {
  TempDir dir;
  report::ReportBundle b;
  DailySentimentSeries d;
  d.points = {{Date::from_ymd(2024, 1, 5), 0.1 + 0.2, 3}, {Date::from_ymd(2024, 1, 6), -0.75, 1}};
  b.daily = d;
  report::export_figure_data(b, report::Figure::daily_sentiment, dir.file("d.csv"));
  const auto back = read_daily_sentiment(dir.file("d.csv"));
  ASSERT_EQ(back.points.size(), 2u);
  EXPECT_EQ(back.points[0].mean_score, 0.1 + 0.2);
  EXPECT_EQ(back.points[1].date, Date::from_ymd(2024, 1, 6));
}

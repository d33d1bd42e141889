#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "sentivol/csv.hpp"
#include "sentivol/date.hpp"
#include "sentivol/error.hpp"
#include "sentivol/series.hpp"
#include "sentivol/timeseries.hpp"

namespace sentivol {

/// Class logits in (positive, negative, neutral) order.
using Logits = std::array<double, 3>;

struct Headline {
  Date date;
  std::string source;
  std::string title;
  std::optional<std::string> body;
  std::optional<Logits> logits;
};

enum class HeadlineFormat { csv, jsonl };

inline HeadlineFormat headline_format_for(std::string_view path) {
  const auto dot = path.rfind('.');
  if (dot != std::string_view::npos) {
    std::string ext(path.substr(dot + 1));
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == "jsonl" || ext == "ndjson") return HeadlineFormat::jsonl;
  }
  return HeadlineFormat::csv;
}

namespace detail {

inline std::string where(const std::string& path, std::size_t line) { return path + ":" + std::to_string(line); }

inline Date require_date(std::string_view text, const std::string& path, std::size_t line) {
  auto d = Date::parse(csv::trim(text));
  if (!d) fail(Errc::malformed_record, where(path, line) + ": invalid date \"" + std::string(text) + "\"");
  return *d;
}

inline Headline headline_from_json(const nlohmann::json& obj, const std::string& path, std::size_t line) {
  if (!obj.is_object()) fail(Errc::malformed_record, where(path, line) + ": expected a JSON object");
  auto text_field = [&](const char* key, bool required) -> std::optional<std::string> {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) {
      if (required) fail(Errc::malformed_record, where(path, line) + ": missing \"" + key + "\"");
      return std::nullopt;
    }
    if (!it->is_string()) fail(Errc::malformed_record, where(path, line) + ": \"" + key + "\" must be a string");
    return it->get<std::string>();
  };
  Headline h;
  h.date = require_date(*text_field("date", true), path, line);
  h.title = *text_field("title", true);
  h.body = text_field("body", false);
  h.source = text_field("source", false).value_or("");
  if (auto it = obj.find("logits"); it != obj.end() && !it->is_null()) {
    if (!it->is_array() || it->size() != 3) {
      fail(Errc::malformed_record, where(path, line) + ": logits must be [pos, neg, neu]");
    }
    Logits l{};
    for (std::size_t k = 0; k < 3; ++k) {
      if (!(*it)[k].is_number() || !std::isfinite((*it)[k].get<double>())) {
        fail(Errc::malformed_record, where(path, line) + ": logits must be finite numbers");
      }
      l[k] = (*it)[k].get<double>();
    }
    h.logits = l;
  }
  return h;
}

}  // namespace detail

/// Loads headlines. CSV needs `date` and `title` columns; `source`, `body`
/// and the logit triple `pos,neg,neu` are optional (all three logits or none
/// per row). JSONL records use keys date, title, body, source, logits.
inline std::vector<Headline> load_headlines(const std::string& path, HeadlineFormat format) {
  std::vector<Headline> out;
  if (format == HeadlineFormat::jsonl) {
    const std::string text = csv::read_file(path);
    std::size_t line = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
      std::size_t end = text.find('\n', start);
      if (end == std::string::npos) end = text.size();
      ++line;
      std::string_view raw(text.data() + start, end - start);
      const std::string trimmed = csv::trim(raw.substr(0, raw.size() - (raw.ends_with('\r') ? 1 : 0)));
      if (!trimmed.empty()) {
        nlohmann::json obj;
        try {
          obj = nlohmann::json::parse(trimmed);
        } catch (const nlohmann::json::parse_error& e) {
          fail(Errc::malformed_record, detail::where(path, line) + ": " + e.what());
        }
        out.push_back(detail::headline_from_json(obj, path, line));
      }
      start = end + 1;
    }
    if (out.empty()) fail(Errc::empty_file, path);
    return out;
  }

  const csv::Table table = csv::read_table(path);
  const auto date_col = table.column("date");
  const auto title_col = table.column("title");
  if (!date_col) fail(Errc::missing_column, path + ": date");
  if (!title_col) fail(Errc::missing_column, path + ": title");
  const auto source_col = table.column("source");
  const auto body_col = table.column("body");
  const std::array<std::optional<std::size_t>, 3> logit_cols{table.column("pos"), table.column("neg"),
                                                             table.column("neu")};
  const bool has_logits = logit_cols[0] && logit_cols[1] && logit_cols[2];
  if (!has_logits && (logit_cols[0] || logit_cols[1] || logit_cols[2])) {
    fail(Errc::missing_column, path + ": logit columns must be pos, neg and neu together");
  }
  if (table.rows.empty()) fail(Errc::empty_file, path + ": header only");

  for (const auto& row : table.rows) {
    Headline h;
    h.date = detail::require_date(row.fields[*date_col], path, row.line);
    h.title = row.fields[*title_col];
    if (source_col) h.source = row.fields[*source_col];
    if (body_col && !row.fields[*body_col].empty()) h.body = row.fields[*body_col];
    if (has_logits) {
      int present = 0;
      Logits l{};
      for (std::size_t k = 0; k < 3; ++k) {
        const std::string& cell = row.fields[*logit_cols[k]];
        if (csv::trim(cell).empty()) continue;
        auto v = csv::parse_double(cell);
        if (!v) fail(Errc::malformed_record, detail::where(path, row.line) + ": non-numeric logit \"" + cell + "\"");
        l[k] = *v;
        ++present;
      }
      if (present == 3) {
        h.logits = l;
      } else if (present != 0) {
        fail(Errc::malformed_record, detail::where(path, row.line) + ": partial logit triple");
      }
    }
    out.push_back(std::move(h));
  }
  return out;
}

/// Lowercases ASCII, drops every byte that is not an ASCII letter, digit or
/// whitespace, collapses whitespace runs to one space and trims.
inline std::string normalize_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (unsigned char c : text) {
    if (c < 0x80 && std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (c >= 0x80 || !std::isalnum(c)) continue;
    if (pending_space) out += ' ';
    pending_space = false;
    out += static_cast<char>(std::tolower(c));
  }
  return out;
}

inline std::string headline_text(const Headline& h) {
  return h.body ? normalize_text(h.title + " " + *h.body) : normalize_text(h.title);
}

/// Headlines whose normalized title+body contains at least one normalized
/// keyword as a substring. Order preserved.
inline std::vector<Headline> filter_by_keywords(std::span<const Headline> headlines,
                                                std::span<const std::string> keywords) {
  std::vector<std::string> needles;
  for (const auto& k : keywords) {
    std::string n = normalize_text(k);
    if (!n.empty()) needles.push_back(std::move(n));
  }
  if (needles.empty()) fail(Errc::empty_keyword_list, "at least one nonblank keyword required");
  std::vector<Headline> out;
  for (const auto& h : headlines) {
    const std::string text = headline_text(h);
    if (std::any_of(needles.begin(), needles.end(),
                    [&](const std::string& n) { return text.find(n) != std::string::npos; })) {
      out.push_back(h);
    }
  }
  return out;
}

inline MarketSeries load_market_series(const std::string& path, const std::string& name,
                                       const std::string& date_column, const std::string& value_column) {
  const csv::Table table = csv::read_table(path);
  const auto dc = table.column(date_column);
  const auto vc = table.column(value_column);
  if (!dc) fail(Errc::missing_column, path + ": " + date_column);
  if (!vc) fail(Errc::missing_column, path + ": " + value_column);

  std::vector<SeriesPoint> pts;
  pts.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const Date d = detail::require_date(row.fields[*dc], path, row.line);
    auto v = csv::parse_double(row.fields[*vc]);
    if (!v) {
      fail(Errc::non_numeric_value, detail::where(path, row.line) + ": row " + std::to_string(r + 1) + " value \"" +
                                        row.fields[*vc] + "\"");
    }
    pts.push_back({d, *v});
  }
  std::stable_sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.date < b.date; });
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (pts[i].date == pts[i - 1].date) fail(Errc::duplicate_date, path + ": " + pts[i].date.to_string());
  }
  return MarketSeries(name, std::move(pts));
}

struct NamedColumn {
  std::string name;
  std::vector<double> values;

  friend bool operator==(const NamedColumn&, const NamedColumn&) = default;
};

/// Date-indexed regression panel. Every column has one finite value per date.
class AlignedPanel {
 public:
  AlignedPanel(std::vector<Date> dates, std::vector<double> returns, std::vector<double> sentiment,
               std::vector<NamedColumn> exog, std::map<std::string, std::size_t> fill_counts = {})
      : dates_(std::move(dates)),
        returns_(std::move(returns)),
        sentiment_(std::move(sentiment)),
        exog_(std::move(exog)),
        fill_counts_(std::move(fill_counts)) {
    const auto n = dates_.size();
    auto check = [&](const std::string& name, const std::vector<double>& col) {
      if (col.size() != n) {
        fail(Errc::invalid_argument, "panel column " + name + " has " + std::to_string(col.size()) +
                                         " rows, expected " + std::to_string(n));
      }
      for (double v : col) {
        if (!std::isfinite(v)) fail(Errc::non_finite_input, "panel column " + name);
      }
    };
    check("returns", returns_);
    check("Sentiment", sentiment_);
    for (const auto& c : exog_) check(c.name, c.values);
    for (std::size_t i = 1; i < n; ++i) {
      if (!(dates_[i - 1] < dates_[i])) fail(Errc::invalid_argument, "panel dates must be strictly increasing");
    }
  }

  std::size_t size() const noexcept { return dates_.size(); }
  const std::vector<Date>& dates() const noexcept { return dates_; }
  const std::vector<double>& returns() const noexcept { return returns_; }
  const std::vector<double>& sentiment() const noexcept { return sentiment_; }
  const std::vector<NamedColumn>& exog() const noexcept { return exog_; }
  const std::map<std::string, std::size_t>& fill_counts() const noexcept { return fill_counts_; }

  /// Regressor names in design-matrix order: Sentiment, then exog columns.
  std::vector<std::string> regressor_names() const {
    std::vector<std::string> names{"Sentiment"};
    for (const auto& c : exog_) names.push_back(c.name);
    return names;
  }

  /// Regressors without intercept, one row per date.
  Eigen::MatrixXd regressors() const {
    Eigen::MatrixXd x(static_cast<Eigen::Index>(size()), static_cast<Eigen::Index>(1 + exog_.size()));
    for (std::size_t i = 0; i < size(); ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      x(r, 0) = sentiment_[i];
      for (std::size_t j = 0; j < exog_.size(); ++j) x(r, static_cast<Eigen::Index>(j + 1)) = exog_[j].values[i];
    }
    return x;
  }

  Eigen::VectorXd response() const {
    return Eigen::Map<const Eigen::VectorXd>(returns_.data(), static_cast<Eigen::Index>(returns_.size()));
  }

 private:
  std::vector<Date> dates_;
  std::vector<double> returns_;
  std::vector<double> sentiment_;
  std::vector<NamedColumn> exog_;
  std::map<std::string, std::size_t> fill_counts_;
};

enum class FillMode { spline, drop };

/// Joins returns, sentiment and exogenous series on the trading-day calendar
/// (dates where returns exist). Gaps are spline-filled or the date dropped;
/// in spline mode dates outside a column's observed span are dropped since
/// the spline does not extrapolate.
inline AlignedPanel align_panel(const MarketSeries& returns, const MarketSeries& sentiment,
                                std::span<const MarketSeries> exog, FillMode fill) {
  if (returns.empty()) fail(Errc::empty_input, "returns series is empty");
  if (sentiment.empty()) fail(Errc::empty_input, "sentiment series is empty");
  std::vector<const MarketSeries*> columns{&sentiment};
  for (const auto& e : exog) {
    if (e.empty()) fail(Errc::empty_input, e.name() + " series is empty");
    columns.push_back(&e);
  }

  const std::vector<Date> calendar = returns.dates();
  const std::size_t n_cols = columns.size();
  // observed[c][i]: value of column c on calendar[i], if present.
  std::vector<std::vector<std::optional<double>>> observed(n_cols, std::vector<std::optional<double>>(calendar.size()));
  for (std::size_t c = 0; c < n_cols; ++c) {
    const auto& pts = columns[c]->points();
    std::size_t k = 0, hits = 0;
    for (std::size_t i = 0; i < calendar.size(); ++i) {
      while (k < pts.size() && pts[k].date < calendar[i]) ++k;
      if (k < pts.size() && pts[k].date == calendar[i]) {
        observed[c][i] = pts[k].value;
        ++hits;
      }
    }
    if (hits == 0) {
      fail(Errc::empty_intersection, columns[c]->name() + " shares no dates with " + returns.name());
    }
  }

  std::vector<bool> keep(calendar.size(), true);
  for (std::size_t c = 0; c < n_cols; ++c) {
    if (fill == FillMode::spline && columns[c]->size() < 2 &&
        std::any_of(observed[c].begin(), observed[c].end(), [](const auto& v) { return !v; })) {
      fail(Errc::spline_fill_impossible, columns[c]->name() + " has fewer than 2 known points");
    }
    const Date lo = columns[c]->points().front().date;
    const Date hi = columns[c]->points().back().date;
    for (std::size_t i = 0; i < calendar.size(); ++i) {
      if (observed[c][i]) continue;
      if (fill == FillMode::drop || calendar[i] < lo || calendar[i] > hi) keep[i] = false;
    }
  }

  std::vector<Date> dates;
  for (std::size_t i = 0; i < calendar.size(); ++i) {
    if (keep[i]) dates.push_back(calendar[i]);
  }
  if (dates.empty()) fail(Errc::empty_intersection, "no trading date has every column available");

  std::map<std::string, std::size_t> fill_counts;
  std::vector<std::vector<double>> values(n_cols);
  for (std::size_t c = 0; c < n_cols; ++c) {
    std::size_t gaps = 0;
    for (std::size_t i = 0; i < calendar.size(); ++i) {
      if (keep[i] && !observed[c][i]) ++gaps;
    }
    if (gaps == 0) {
      for (std::size_t i = 0; i < calendar.size(); ++i) {
        if (keep[i]) values[c].push_back(*observed[c][i]);
      }
    } else {
      values[c] = fill_missing(*columns[c], dates).values();
    }
    fill_counts[columns[c]->name()] = gaps;
  }

  std::vector<double> ret;
  ret.reserve(dates.size());
  const auto& rp = returns.points();
  for (std::size_t i = 0; i < calendar.size(); ++i) {
    if (keep[i]) ret.push_back(rp[i].value);
  }
  std::vector<NamedColumn> exog_cols;
  for (std::size_t c = 1; c < n_cols; ++c) exog_cols.push_back({columns[c]->name(), std::move(values[c])});
  return AlignedPanel(std::move(dates), std::move(ret), std::move(values[0]), std::move(exog_cols),
                      std::move(fill_counts));
}

/// Panel CSV: date,returns,Sentiment,<exog...> with full-precision values.
inline void write_panel(std::ostream& os, const AlignedPanel& panel) {
  csv::Writer w(os);
  std::vector<std::string> header{"date", "returns", "Sentiment"};
  for (const auto& c : panel.exog()) header.push_back(c.name);
  w.row(header);
  for (std::size_t i = 0; i < panel.size(); ++i) {
    std::vector<std::string> row{panel.dates()[i].to_string(), csv::format_double(panel.returns()[i]),
                                 csv::format_double(panel.sentiment()[i])};
    for (const auto& c : panel.exog()) row.push_back(csv::format_double(c.values[i]));
    w.row(row);
  }
}

inline AlignedPanel read_panel(const std::string& path) {
  const csv::Table t = csv::read_table(path);
  if (t.header.size() < 3 || t.header[0] != "date" || t.header[1] != "returns" || t.header[2] != "Sentiment") {
    fail(Errc::missing_column, path + ": panel header must start with date,returns,Sentiment");
  }
  std::vector<Date> dates;
  std::vector<double> ret, sent;
  std::vector<NamedColumn> exog;
  for (std::size_t c = 3; c < t.header.size(); ++c) exog.push_back({t.header[c], {}});
  for (const auto& row : t.rows) {
    dates.push_back(detail::require_date(row.fields[0], path, row.line));
    auto num = [&](std::size_t c) {
      auto v = csv::parse_double(row.fields[c]);
      if (!v) fail(Errc::non_numeric_value, detail::where(path, row.line) + ": column " + t.header[c]);
      return *v;
    };
    ret.push_back(num(1));
    sent.push_back(num(2));
    for (std::size_t c = 3; c < t.header.size(); ++c) exog[c - 3].values.push_back(num(c));
  }
  return AlignedPanel(std::move(dates), std::move(ret), std::move(sent), std::move(exog));
}

}  // namespace sentivol

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sentivol/date.hpp"
#include "sentivol/error.hpp"
#include "sentivol/ingest.hpp"
#include "sentivol/series.hpp"

namespace sentivol {

enum class Label { positive = 0, negative = 1, neutral = 2 };

constexpr std::string_view to_string(Label l) noexcept {
  switch (l) {
    case Label::positive: return "positive";
    case Label::negative: return "negative";
    case Label::neutral: return "neutral";
  }
  return "neutral";
}

enum class ScoreMode { prob_diff, logit_diff };

namespace detail {
inline void require_finite(std::span<const double> v) {
  for (double x : v) {
    if (!std::isfinite(x)) fail(Errc::non_finite_input, "logits must be finite");
  }
}
}  // namespace detail

/// exp(z_i - max z) / sum_j exp(z_j - max z)
inline std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) fail(Errc::invalid_argument, "softmax needs at least one logit");
  detail::require_finite(logits);
  const double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - top);
    sum += out[i];
  }
  for (double& p : out) p /= sum;
  return out;
}

inline Logits softmax(const Logits& logits) {
  const auto p = softmax(std::span<const double>(logits));
  return {p[0], p[1], p[2]};
}

/// Argmax with ties resolved positive > negative > neutral.
inline Label predict_class(const Logits& logits) {
  detail::require_finite(logits);
  std::size_t best = 0;
  for (std::size_t k = 1; k < 3; ++k) {
    if (logits[k] > logits[best]) best = k;
  }
  return static_cast<Label>(best);
}

inline double sentiment_score(const Logits& logits, ScoreMode mode) {
  detail::require_finite(logits);
  if (mode == ScoreMode::logit_diff) return logits[0] - logits[1];
  const Logits p = softmax(logits);
  return p[0] - p[1];
}

// Toy word lists for the lexicon fallback. Not a substitute for a trained classifier.
inline constexpr std::array<std::string_view, 24> kPositiveWords{
    "rally",     "rallies",  "gain",     "gains",   "surge",   "surges",   "rebound", "rebounds",
    "recovery",  "optimism", "peace",    "ceasefire", "truce", "agreement", "growth", "rise",
    "rises",     "boost",    "boosts",   "upbeat",  "record",  "soar",     "soars",   "relief"};
inline constexpr std::array<std::string_view, 26> kNegativeWords{
    "war",      "crisis",    "loss",      "losses",  "attack",  "attacks", "sanction", "sanctions", "fear",
    "fears",    "plunge",    "plunges",   "drop",    "drops",   "decline", "declines", "slump",     "escalates",
    "invasion", "killed",    "strike",    "strikes", "threat",  "turmoil", "selloff",  "recession"};

/// Pseudo-logits (count_pos, count_neg, 0.5) from whole-word hits in
/// normalized text.
inline Logits lexicon_score(std::string_view normalized_text) {
  double pos = 0.0, neg = 0.0;
  std::size_t start = 0;
  while (start < normalized_text.size()) {
    std::size_t end = normalized_text.find(' ', start);
    if (end == std::string_view::npos) end = normalized_text.size();
    const std::string_view word = normalized_text.substr(start, end - start);
    if (std::find(kPositiveWords.begin(), kPositiveWords.end(), word) != kPositiveWords.end()) pos += 1.0;
    if (std::find(kNegativeWords.begin(), kNegativeWords.end(), word) != kNegativeWords.end()) neg += 1.0;
    start = end + 1;
  }
  return {pos, neg, 0.5};
}

struct ScoredHeadline {
  Date date;
  Logits probs{};
  Label label = Label::neutral;
  double score = 0.0;
};

/// Scores a headline from its logits, falling back to the lexicon scorer
/// when the record carries none.
inline ScoredHeadline score_headline(const Headline& h, ScoreMode mode) {
  const Logits logits = h.logits ? *h.logits : lexicon_score(headline_text(h));
  return {h.date, softmax(logits), predict_class(logits), sentiment_score(logits, mode)};
}

inline std::vector<ScoredHeadline> score_headlines(std::span<const Headline> headlines, ScoreMode mode) {
  std::vector<ScoredHeadline> out;
  out.reserve(headlines.size());
  for (const auto& h : headlines) out.push_back(score_headline(h, mode));
  return out;
}

struct DailySentimentPoint {
  Date date;
  double mean_score = 0.0;
  std::size_t count = 0;
};

struct DailySentimentSeries {
  std::vector<DailySentimentPoint> points;

  MarketSeries as_series(std::string name = "Sentiment") const {
    std::vector<SeriesPoint> pts;
    pts.reserve(points.size());
    for (const auto& p : points) pts.push_back({p.date, p.mean_score});
    return MarketSeries(std::move(name), std::move(pts));
  }
};

/// Unweighted mean score and headline count per date, sorted by date.
inline DailySentimentSeries aggregate_daily(std::span<const ScoredHeadline> scored) {
  if (scored.empty()) fail(Errc::empty_input, "no scored headlines to aggregate");
  std::map<Date, std::pair<double, std::size_t>> acc;
  for (const auto& s : scored) {
    if (!std::isfinite(s.score)) fail(Errc::non_finite_input, "score on " + s.date.to_string());
    auto& [sum, n] = acc[s.date];
    sum += s.score;
    ++n;
  }
  DailySentimentSeries out;
  out.points.reserve(acc.size());
  for (const auto& [date, sn] : acc) {
    out.points.push_back({date, sn.first / static_cast<double>(sn.second), sn.second});
  }
  return out;
}

struct CategoryCounts {
  std::size_t positive = 0;
  std::size_t negative = 0;
  std::size_t neutral = 0;

  std::size_t total() const noexcept { return positive + negative + neutral; }
  friend bool operator==(const CategoryCounts&, const CategoryCounts&) = default;
};

inline CategoryCounts category_distribution(std::span<const ScoredHeadline> scored) {
  CategoryCounts c;
  for (const auto& s : scored) {
    switch (s.label) {
      case Label::positive: ++c.positive; break;
      case Label::negative: ++c.negative; break;
      case Label::neutral: ++c.neutral; break;
    }
  }
  return c;
}

}  // namespace sentivol

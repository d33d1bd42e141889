#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "sentivol/date.hpp"
#include "sentivol/error.hpp"

namespace sentivol {

struct SeriesPoint {
  Date date;
  double value = 0.0;

  friend bool operator==(const SeriesPoint&, const SeriesPoint&) = default;
};

/// Named daily series with strictly increasing dates and finite values.
class MarketSeries {
 public:
  MarketSeries() = default;

  MarketSeries(std::string name, std::vector<SeriesPoint> points)
      : name_(std::move(name)), points_(std::move(points)) {
    if (name_.empty()) fail(Errc::invalid_argument, "series name must be nonempty");
    for (std::size_t i = 0; i < points_.size(); ++i) {
      if (!std::isfinite(points_[i].value)) {
        fail(Errc::non_finite_input, name_ + " at " + points_[i].date.to_string());
      }
      if (i > 0 && !(points_[i - 1].date < points_[i].date)) {
        fail(points_[i - 1].date == points_[i].date ? Errc::duplicate_date : Errc::invalid_argument,
             name_ + ": dates not strictly increasing at " + points_[i].date.to_string());
      }
    }
  }

  const std::string& name() const noexcept { return name_; }
  const std::vector<SeriesPoint>& points() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }

  std::vector<double> values() const {
    std::vector<double> v;
    v.reserve(points_.size());
    for (const auto& p : points_) v.push_back(p.value);
    return v;
  }

  std::vector<Date> dates() const {
    std::vector<Date> d;
    d.reserve(points_.size());
    for (const auto& p : points_) d.push_back(p.date);
    return d;
  }

  friend bool operator==(const MarketSeries&, const MarketSeries&) = default;

 private:
  std::string name_;
  std::vector<SeriesPoint> points_;
};

}  // namespace sentivol

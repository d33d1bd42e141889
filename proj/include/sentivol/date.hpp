#pragma once

#include <charconv>
#include <chrono>
#include <compare>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace sentivol {

/// Calendar date with day resolution. Always holds a valid date.
class Date {
 public:
  constexpr Date() = default;
  explicit constexpr Date(std::chrono::sys_days days) : days_(days) {}

  /// Parses `YYYY-MM-DD`, optionally followed by a `T` or space and a time
  /// part, which is ignored.
  static std::optional<Date> parse(std::string_view text) {
    if (text.size() < 10) return std::nullopt;
    if (text.size() > 10 && text[10] != 'T' && text[10] != ' ') return std::nullopt;
    if (text[4] != '-' || text[7] != '-') return std::nullopt;
    int y = 0;
    unsigned m = 0, d = 0;
    if (!parse_digits(text.substr(0, 4), y) || !parse_digits(text.substr(5, 2), m) ||
        !parse_digits(text.substr(8, 2), d)) {
      return std::nullopt;
    }
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                          std::chrono::day{d}};
    if (!ymd.ok()) return std::nullopt;
    return Date(std::chrono::sys_days{ymd});
  }

  static constexpr Date from_ymd(int y, unsigned m, unsigned d) {
    return Date(std::chrono::sys_days{std::chrono::year{y} / std::chrono::month{m} / std::chrono::day{d}});
  }

  constexpr std::chrono::sys_days days() const { return days_; }
  constexpr long serial() const { return days_.time_since_epoch().count(); }

  constexpr Date plus_days(long n) const { return Date(days_ + std::chrono::days{n}); }

  /// Signed day count from `origin` to this date.
  constexpr long days_since(Date origin) const { return (days_ - origin.days_).count(); }

  /// Monday = 1 ... Sunday = 7.
  unsigned iso_weekday() const { return std::chrono::weekday{days_}.iso_encoding(); }

  std::string to_string() const {
    const std::chrono::year_month_day ymd{days_};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
  }

  friend constexpr auto operator<=>(const Date&, const Date&) = default;

 private:
  template <typename T>
  static bool parse_digits(std::string_view s, T& out) {
    for (char c : s) {
      if (c < '0' || c > '9') return false;
    }
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
  }

  std::chrono::sys_days days_{};
};

}  // namespace sentivol

#pragma once

// Minimal RFC-4180 reader/writer. Quoted fields may contain commas, doubled
// quotes, and line breaks; CRLF and LF line endings are both accepted.

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "sentivol/error.hpp"

namespace sentivol::csv {

struct Record {
  std::size_t line = 0;  // 1-based line on which the record starts
  std::vector<std::string> fields;
};

struct Table {
  std::vector<std::string> header;
  std::vector<Record> rows;

  std::optional<std::size_t> column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    return std::nullopt;
  }
};

inline std::vector<Record> parse_records(std::string_view text, const std::string& origin = "<memory>") {
  std::vector<Record> out;
  std::size_t i = 0;
  std::size_t line = 1;
  if (text.substr(0, 3) == "\xEF\xBB\xBF") i = 3;  // UTF-8 BOM

  while (i < text.size()) {
    Record rec;
    rec.line = line;
    std::string field;
    bool in_quotes = false;
    bool field_was_quoted = false;
    bool done = false;
    while (!done) {
      if (i >= text.size()) {
        if (in_quotes) fail(Errc::malformed_record, origin + ":" + std::to_string(rec.line) + ": unterminated quoted field");
        rec.fields.push_back(std::move(field));
        break;
      }
      const char c = text[i];
      if (in_quotes) {
        if (c == '"') {
          if (i + 1 < text.size() && text[i + 1] == '"') {
            field += '"';
            i += 2;
          } else {
            in_quotes = false;
            ++i;
          }
        } else {
          if (c == '\n') ++line;
          field += c;
          ++i;
        }
        continue;
      }
      switch (c) {
        case '"':
          if (!field.empty() || field_was_quoted) {
            fail(Errc::malformed_record, origin + ":" + std::to_string(line) + ": stray quote");
          }
          in_quotes = true;
          field_was_quoted = true;
          ++i;
          break;
        case ',':
          rec.fields.push_back(std::move(field));
          field.clear();
          field_was_quoted = false;
          ++i;
          break;
        case '\r':
          ++i;
          break;
        case '\n':
          rec.fields.push_back(std::move(field));
          ++line;
          ++i;
          done = true;
          break;
        default:
          field += c;
          ++i;
      }
    }
    // Blank lines carry no record.
    if (!(rec.fields.size() == 1 && rec.fields[0].empty())) out.push_back(std::move(rec));
  }
  return out;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::file_not_found, path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Reads a headed CSV file. Rows must have the header's field count.
inline Table read_table(const std::string& path) {
  const std::string text = read_file(path);
  auto records = parse_records(text, path);
  if (records.empty()) fail(Errc::empty_file, path);
  Table t;
  t.header = std::move(records.front().fields);
  for (auto& h : t.header) {
    while (!h.empty() && (h.back() == ' ' || h.back() == '\t')) h.pop_back();
    while (!h.empty() && (h.front() == ' ' || h.front() == '\t')) h.erase(h.begin());
  }
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].fields.size() != t.header.size()) {
      fail(Errc::malformed_record, path + ":" + std::to_string(records[r].line) + ": expected " +
                                       std::to_string(t.header.size()) + " fields, found " +
                                       std::to_string(records[r].fields.size()));
    }
    t.rows.push_back(std::move(records[r]));
  }
  return t;
}

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t')) --e;
  return std::string(s.substr(b, e - b));
}

/// Strict finite-double parse; surrounding blanks allowed, nothing else.
inline std::optional<double> parse_double(std::string_view text) {
  const std::string s = trim(text);
  if (s.empty()) return std::nullopt;
  const char* first = s.data();
  if (*first == '+') ++first;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

/// Shortest representation that round-trips.
inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

inline std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

class Writer {
 public:
  explicit Writer(std::ostream& os) : os_(os) {}

  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) os_ << ',';
      os_ << escape(fields[i]);
    }
    os_ << '\n';
  }

 private:
  std::ostream& os_;
};

}  // namespace sentivol::csv

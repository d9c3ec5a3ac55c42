#pragma once

#include <array>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "lingdiv/error.hpp"
#include "lingdiv/month.hpp"
#include "lingdiv/registry.hpp"
#include "lingdiv/text.hpp"

namespace lingdiv {

// One language-labeled, geo-referenced, timestamped text observation.
struct Record {
  std::string id;
  std::int64_t timestamp = 0;  // seconds since the Unix epoch, UTC
  YearMonth month;             // calendar month of `timestamp`
  std::string country;         // ISO 3166-1 alpha-3
  std::string language;        // ISO 639-3
  std::uint32_t char_count = 0;
  bool is_retweet = false;
};

struct IngestConfig {
  int min_chars = 40;
  bool drop_retweets = true;
  MonthRange date_range{YearMonth(2018, 7), YearMonth(2020, 8)};
  CountryRegistry registry;
  LanguageSet languages;

  void validate() const {
    if (min_chars < 0) throw Error(ErrorCode::ConfigError, "min_chars must be >= 0");
    if (date_range.empty()) throw Error(ErrorCode::ConfigError, "date_range is empty");
  }
};

enum class RejectReason : std::size_t {
  MalformedLine,
  UnknownCountry,
  UnknownLanguage,
  OutOfRange,
  RetweetDropped,
  TooShort,
};
inline constexpr std::size_t kRejectReasonCount = 6;

inline std::string_view to_string(RejectReason r) {
  static constexpr std::array<std::string_view, kRejectReasonCount> names = {
      "MalformedLine", "UnknownCountry", "UnknownLanguage", "OutOfRange", "RetweetDropped", "TooShort"};
  return names[static_cast<std::size_t>(r)];
}

struct Rejection {
  RejectReason reason;
  std::string detail;
};

using ValidationResult = std::variant<Record, Rejection>;

// Fields of one input line before validation. Absent keys stay nullopt.
struct RawRecord {
  std::optional<std::string> id, ts, country, lang, chars, text, rt;
};

namespace detail {

// days since 1970-01-01 for a proleptic Gregorian date
constexpr std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

constexpr YearMonth month_from_days(std::int64_t z) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned m = mp < 10 ? mp + 3 : mp - 9;
  return YearMonth(static_cast<int>(y + (m <= 2)), static_cast<int>(m));
}

inline bool read_digits(std::string_view s, size_t pos, size_t n, int& out) {
  if (pos + n > s.size()) return false;
  out = 0;
  for (size_t i = 0; i < n; ++i) {
    char c = s[pos + i];
    if (c < '0' || c > '9') return false;
    out = out * 10 + (c - '0');
  }
  return true;
}

constexpr bool leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }
constexpr int days_in_month(int y, int m) {
  constexpr int d[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  return m == 2 && leap(y) ? 29 : d[m - 1];
}

}  // namespace detail

// ISO-8601 instant: YYYY-MM-DD[(T| )hh:mm[:ss[.fff]]][Z|(+|-)hh[:]mm].
// A missing zone designator is read as UTC.
inline std::optional<std::int64_t> parse_timestamp(std::string_view s) {
  s = text::trim(s);
  int y, mo, d, h = 0, mi = 0, sec = 0;
  if (!detail::read_digits(s, 0, 4, y) || s.size() < 10 || s[4] != '-' || !detail::read_digits(s, 5, 2, mo) ||
      s[7] != '-' || !detail::read_digits(s, 8, 2, d))
    return std::nullopt;
  if (mo < 1 || mo > 12 || d < 1 || d > detail::days_in_month(y, mo)) return std::nullopt;
  size_t pos = 10;
  if (pos < s.size() && (s[pos] == 'T' || s[pos] == ' ')) {
    if (!detail::read_digits(s, pos + 1, 2, h) || pos + 3 >= s.size() || s[pos + 3] != ':' ||
        !detail::read_digits(s, pos + 4, 2, mi))
      return std::nullopt;
    pos += 6;
    if (pos < s.size() && s[pos] == ':') {
      if (!detail::read_digits(s, pos + 1, 2, sec)) return std::nullopt;
      pos += 3;
      if (pos < s.size() && (s[pos] == '.' || s[pos] == ',')) {
        ++pos;
        size_t start = pos;
        while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
        if (pos == start) return std::nullopt;
      }
    }
    if (h > 23 || mi > 59 || sec > 60) return std::nullopt;
  }
  int offset_min = 0;
  if (pos < s.size()) {
    char z = s[pos];
    if (z == 'Z' || z == 'z') {
      ++pos;
    } else if (z == '+' || z == '-') {
      int oh, om;
      if (!detail::read_digits(s, pos + 1, 2, oh)) return std::nullopt;
      size_t mpos = pos + 3;
      if (mpos < s.size() && s[mpos] == ':') ++mpos;
      if (!detail::read_digits(s, mpos, 2, om)) return std::nullopt;
      offset_min = (oh * 60 + om) * (z == '+' ? 1 : -1);
      pos = mpos + 2;
    }
  }
  if (pos != s.size()) return std::nullopt;
  std::int64_t days = detail::days_from_civil(y, static_cast<unsigned>(mo), static_cast<unsigned>(d));
  return days * 86400 + h * 3600 + mi * 60 + sec - offset_min * 60;
}

inline YearMonth month_of(std::int64_t timestamp) {
  std::int64_t days = timestamp >= 0 ? timestamp / 86400 : -((-timestamp + 86399) / 86400);
  return detail::month_from_days(days);
}

// Character count after removing URL tokens (http://, https://, www.) and
// #-prefixed tokens. Remaining tokens are joined by single spaces and counted
// in Unicode code points.
inline std::size_t cleaned_length(std::string_view text) {
  auto starts_with_ci = [](std::string_view tok, std::string_view prefix) {
    if (tok.size() < prefix.size()) return false;
    for (size_t i = 0; i < prefix.size(); ++i)
      if (std::tolower(static_cast<unsigned char>(tok[i])) != prefix[i]) return false;
    return true;
  };
  std::size_t total = 0, kept = 0;
  size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (start == i) break;
    auto tok = text.substr(start, i - start);
    if (tok.front() == '#' || starts_with_ci(tok, "http://") || starts_with_ci(tok, "https://") ||
        starts_with_ci(tok, "www."))
      continue;
    total += text::utf8_length(tok);
    ++kept;
  }
  return kept == 0 ? 0 : total + (kept - 1);
}

inline ValidationResult validate(const RawRecord& raw, const IngestConfig& config) {
  auto reject = [](RejectReason r, std::string detail) { return ValidationResult(Rejection{r, std::move(detail)}); };
  if (!raw.id || !raw.ts || !raw.country || !raw.lang || (!raw.chars && !raw.text))
    return reject(RejectReason::MalformedLine, "missing required field");

  Record rec;
  rec.id = *raw.id;
  auto ts = parse_timestamp(*raw.ts);
  if (!ts) return reject(RejectReason::MalformedLine, "bad timestamp '" + *raw.ts + "'");
  rec.timestamp = *ts;
  rec.month = month_of(*ts);

  if (raw.text) {
    rec.char_count = static_cast<std::uint32_t>(cleaned_length(*raw.text));
  } else {
    auto n = text::parse_number<std::int64_t>(*raw.chars);
    if (!n || *n < 0 || *n > UINT32_MAX) return reject(RejectReason::MalformedLine, "bad chars '" + *raw.chars + "'");
    rec.char_count = static_cast<std::uint32_t>(*n);
  }
  if (raw.rt) {
    auto b = text::parse_bool(*raw.rt);
    if (!b) return reject(RejectReason::MalformedLine, "bad rt '" + *raw.rt + "'");
    rec.is_retweet = *b;
  }

  rec.country = *raw.country;
  if (!config.registry.contains(rec.country)) return reject(RejectReason::UnknownCountry, rec.country);
  rec.language = *raw.lang;
  if (!config.languages.accepts(rec.language)) return reject(RejectReason::UnknownLanguage, rec.language);
  if (!config.date_range.contains(rec.month)) return reject(RejectReason::OutOfRange, rec.month.str());
  if (config.drop_retweets && rec.is_retweet) return reject(RejectReason::RetweetDropped, rec.id);
  if (rec.char_count < static_cast<std::uint32_t>(config.min_chars))
    return reject(RejectReason::TooShort, std::to_string(rec.char_count));
  return rec;
}

namespace detail {

inline std::optional<std::string>* raw_slot(RawRecord& raw, std::string_view key) {
  if (key == "id") return &raw.id;
  if (key == "ts") return &raw.ts;
  if (key == "country") return &raw.country;
  if (key == "lang") return &raw.lang;
  if (key == "chars") return &raw.chars;
  if (key == "text") return &raw.text;
  if (key == "rt") return &raw.rt;
  return nullptr;
}

inline std::string unescape_value(std::string_view v) {
  std::string out;
  out.reserve(v.size());
  for (size_t i = 0; i < v.size(); ++i) {
    if (v[i] == '\\' && i + 1 < v.size()) {
      char n = v[++i];
      out.push_back(n == 't' ? '\t' : n == 'n' ? '\n' : n == 'r' ? '\r' : n);
    } else {
      out.push_back(v[i]);
    }
  }
  return out;
}

}  // namespace detail

// Key/value line encoding: TAB-separated `key=value` fields. Values escape
// TAB, newline, CR and backslash as \t \n \r \\. Unknown keys are ignored;
// a repeated known key or a field without '=' makes the line malformed.
inline std::optional<RawRecord> parse_kv_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  RawRecord raw;
  size_t pos = 0;
  while (pos <= line.size()) {
    size_t end = line.find('\t', pos);
    if (end == std::string_view::npos) end = line.size();
    auto field = line.substr(pos, end - pos);
    pos = end + 1;
    if (field.empty()) continue;
    auto eq = field.find('=');
    if (eq == std::string_view::npos || eq == 0) return std::nullopt;
    auto* slot = detail::raw_slot(raw, field.substr(0, eq));
    if (!slot) continue;
    if (*slot) return std::nullopt;
    *slot = detail::unescape_value(field.substr(eq + 1));
  }
  return raw;
}

inline std::string escape_kv_value(std::string_view v) {
  std::string out;
  out.reserve(v.size());
  for (char c : v) {
    switch (c) {
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\\': out += "\\\\"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

inline std::string format_timestamp(std::int64_t ts) {
  std::int64_t days = ts >= 0 ? ts / 86400 : -((-ts + 86399) / 86400);
  std::int64_t secs = ts - days * 86400;
  YearMonth ym = detail::month_from_days(days);
  std::int64_t day = days - detail::days_from_civil(ym.year(), static_cast<unsigned>(ym.month()), 1) + 1;
  char buf[96];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02lldT%02lld:%02lld:%02lldZ", ym.year(), ym.month(),
                static_cast<long long>(day), static_cast<long long>(secs / 3600),
                static_cast<long long>(secs / 60 % 60), static_cast<long long>(secs % 60));
  return buf;
}

// Writes a record in the key/value encoding (`chars` form, no text).
inline void write_kv_record(std::ostream& out, const Record& r) {
  out << "id=" << escape_kv_value(r.id) << "\tts=" << format_timestamp(r.timestamp) << "\tcountry=" << r.country
      << "\tlang=" << r.language << "\tchars=" << r.char_count << "\trt=" << (r.is_retweet ? 1 : 0) << '\n';
}

struct IngestStats {
  std::uint64_t lines_read = 0;  // non-blank record lines (header excluded)
  std::uint64_t blank_lines = 0;
  std::uint64_t accepted = 0;
  std::array<std::uint64_t, kRejectReasonCount> rejected{};
  bool complete = true;

  std::uint64_t& count(RejectReason r) { return rejected[static_cast<std::size_t>(r)]; }
  std::uint64_t count(RejectReason r) const { return rejected[static_cast<std::size_t>(r)]; }

  std::uint64_t total_rejected() const {
    std::uint64_t n = 0;
    for (auto v : rejected) n += v;
    return n;
  }

  IngestStats& merge(const IngestStats& o) {
    lines_read += o.lines_read;
    blank_lines += o.blank_lines;
    accepted += o.accepted;
    for (std::size_t i = 0; i < kRejectReasonCount; ++i) rejected[i] += o.rejected[i];
    complete = complete && o.complete;
    return *this;
  }

  bool operator==(const IngestStats&) const = default;

  void write(std::ostream& out) const {
    out << "lines_read=" << lines_read << '\n' << "blank_lines=" << blank_lines << '\n' << "accepted=" << accepted << '\n';
    for (std::size_t i = 0; i < kRejectReasonCount; ++i)
      out << to_string(static_cast<RejectReason>(i)) << '=' << rejected[i] << '\n';
    out << "complete=" << (complete ? "true" : "false") << '\n';
  }
};

// Single-pass reader over one line-delimited source. Detects the encoding
// from the first non-blank line: a comma-separated header naming `id` and
// `ts` selects the tabular form, anything else the key/value form.
class RecordReader {
 public:
  RecordReader(std::istream& in, const IngestConfig& config) : in_(&in), config_(&config) {}

  RecordReader(const std::string& path, const IngestConfig& config)
      : owned_(std::make_unique<std::ifstream>(text::open_input(path))), in_(owned_.get()), config_(&config) {}

  // Advances to the next accepted record; false at end of input.
  bool next(Record& out) {
    while (std::getline(*in_, line_)) {
      if (text::is_blank(line_)) {
        ++stats_.blank_lines;
        continue;
      }
      if (!format_) {
        detect_format();
        if (*format_ == Format::Csv) continue;
      }
      ++stats_.lines_read;
      auto raw = *format_ == Format::Csv ? parse_csv_row(line_) : parse_kv_line(line_);
      if (!raw) {
        ++stats_.count(RejectReason::MalformedLine);
        continue;
      }
      auto result = validate(*raw, *config_);
      if (auto* rej = std::get_if<Rejection>(&result)) {
        ++stats_.count(rej->reason);
        continue;
      }
      out = std::move(std::get<Record>(result));
      ++stats_.accepted;
      return true;
    }
    if (in_->bad()) stats_.complete = false;
    return false;
  }

  const IngestStats& stats() const { return stats_; }

 private:
  enum class Format { KeyValue, Csv };

  void detect_format() {
    format_ = Format::KeyValue;
    if (line_.find('=') != std::string::npos) return;
    auto fields = text::split_csv(line_);
    if (!fields) return;
    std::map<std::string, std::size_t, std::less<>> cols;
    for (std::size_t i = 0; i < fields->size(); ++i) cols.emplace(std::string(text::trim((*fields)[i])), i);
    if (!cols.count("id") || !cols.count("ts")) return;
    format_ = Format::Csv;
    header_.clear();
    for (const auto& f : *fields) header_.emplace_back(text::trim(f));
  }

  std::optional<RawRecord> parse_csv_row(std::string_view line) const {
    auto fields = text::split_csv(line);
    if (!fields || fields->size() != header_.size()) return std::nullopt;
    RawRecord raw;
    for (std::size_t i = 0; i < header_.size(); ++i) {
      if (auto* slot = detail::raw_slot(raw, header_[i])) {
        // an empty optional column (rt, text, chars) is treated as absent
        if ((*fields)[i].empty() && (header_[i] == "rt" || header_[i] == "text" || header_[i] == "chars")) continue;
        *slot = std::move((*fields)[i]);
      }
    }
    return raw;
  }

  std::unique_ptr<std::ifstream> owned_;
  std::istream* in_;
  const IngestConfig* config_;
  std::optional<Format> format_;
  std::vector<std::string> header_;
  std::string line_;
  IngestStats stats_;
};

// Streams every accepted record of `path` into `sink`, in file order.
template <typename Sink>
IngestStats stream_records(const std::string& path, const IngestConfig& config, Sink&& sink) {
  RecordReader reader(path, config);
  Record rec;
  while (reader.next(rec)) sink(rec);
  return reader.stats();
}

template <typename Sink>
IngestStats stream_records(std::istream& in, const IngestConfig& config, Sink&& sink) {
  RecordReader reader(in, config);
  Record rec;
  while (reader.next(rec)) sink(rec);
  return reader.stats();
}

}  // namespace lingdiv

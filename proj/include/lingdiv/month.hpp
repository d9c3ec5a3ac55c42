#pragma once

#include <charconv>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include "lingdiv/error.hpp"

namespace lingdiv {

// A calendar month in UTC, ordered chronologically.
class YearMonth {
 public:
  constexpr YearMonth() = default;
  constexpr YearMonth(int year, int month) : year_(year), month_(month) {}

  constexpr int year() const { return year_; }
  constexpr int month() const { return month_; }

  // Months since year 0; convenient for arithmetic and hashing.
  constexpr int index() const { return year_ * 12 + (month_ - 1); }
  static constexpr YearMonth from_index(int idx) {
    int y = idx >= 0 ? idx / 12 : -((-idx + 11) / 12);
    return YearMonth(y, idx - y * 12 + 1);
  }

  constexpr YearMonth operator+(int months) const { return from_index(index() + months); }
  constexpr YearMonth operator-(int months) const { return from_index(index() - months); }
  constexpr YearMonth& operator++() { return *this = *this + 1; }

  constexpr bool valid() const { return month_ >= 1 && month_ <= 12; }

  constexpr auto operator<=>(const YearMonth&) const = default;

  std::string str() const {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02d", year_, month_);
    return buf;
  }

  // Parses "YYYY-MM".
  static std::optional<YearMonth> parse(std::string_view s) {
    if (s.size() != 7 || s[4] != '-') return std::nullopt;
    int y = 0, m = 0;
    auto r1 = std::from_chars(s.data(), s.data() + 4, y);
    auto r2 = std::from_chars(s.data() + 5, s.data() + 7, m);
    if (r1.ec != std::errc{} || r1.ptr != s.data() + 4) return std::nullopt;
    if (r2.ec != std::errc{} || r2.ptr != s.data() + 7) return std::nullopt;
    YearMonth ym(y, m);
    if (!ym.valid()) return std::nullopt;
    return ym;
  }

  static YearMonth parse_or_throw(std::string_view s) {
    auto ym = parse(s);
    if (!ym) throw Error(ErrorCode::MalformedInput, "bad month '" + std::string(s) + "', expected YYYY-MM");
    return *ym;
  }

 private:
  int year_ = 1970;
  int month_ = 1;
};

using MonthSet = std::set<YearMonth>;

// Inclusive interval of months.
struct MonthRange {
  YearMonth first;
  YearMonth last;

  bool contains(YearMonth m) const { return first <= m && m <= last; }
  bool empty() const { return last < first; }
  int size() const { return empty() ? 0 : last.index() - first.index() + 1; }

  MonthSet months() const {
    MonthSet out;
    for (YearMonth m = first; m <= last; ++m) out.insert(m);
    return out;
  }
};

inline MonthSet month_span(YearMonth first, YearMonth last) { return MonthRange{first, last}.months(); }

}  // namespace lingdiv

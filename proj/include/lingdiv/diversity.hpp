#pragma once

#include <cstdint>
#include <map>
#include <numeric>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "lingdiv/count_table.hpp"
#include "lingdiv/error.hpp"
#include "lingdiv/month.hpp"
#include "lingdiv/text.hpp"

namespace lingdiv {

// Herfindahl-Hirschman index on the [0,1] scale.
struct HhiValue {
  double value = 0.0;
  std::uint64_t support_count = 0;
};

namespace detail {

inline unsigned __int128 gcd128(unsigned __int128 a, unsigned __int128 b) {
  while (b != 0) {
    auto t = a % b;
    a = b;
    b = t;
  }
  return a;
}

// sum(c^2) / N^2 reduced to lowest terms first, so a uniform distribution over
// k languages yields exactly the double nearest 1/k.
inline double hhi_from_counts(const LanguageCounts& counts) {
  unsigned __int128 sum_sq = 0, total = 0;
  for (const auto& [_, n] : counts) {
    sum_sq += static_cast<unsigned __int128>(n) * n;
    total += n;
  }
  unsigned __int128 denom = total * total;
  auto g = gcd128(sum_sq, denom);
  sum_sq /= g;
  denom /= g;
  constexpr unsigned __int128 exact = static_cast<unsigned __int128>(1) << 53;
  if (sum_sq <= exact && denom <= exact) return static_cast<double>(sum_sq) / static_cast<double>(denom);
  return static_cast<double>(static_cast<long double>(sum_sq) / static_cast<long double>(denom));
}

}  // namespace detail

inline HhiValue hhi(const LanguageDistribution& dist) {
  if (dist.empty()) throw Error(ErrorCode::EmptyDistribution, "HHI of an empty distribution");
  if (dist.has_counts()) return {detail::hhi_from_counts(dist.counts()), dist.support_count()};
  double sum = 0.0;
  for (const auto& [_, s] : dist.shares()) sum += s * s;
  return {sum, dist.support_count()};
}

struct HhiPoint {
  HhiValue hhi;
  bool thin = false;  // support below the configured minimum
};

struct HhiSeries {
  std::string country;
  std::map<YearMonth, HhiPoint> points;

  // Values for the requested months, skipping absent months and (unless
  // asked) thin ones. Order follows the months.
  std::vector<double> values(const MonthSet& months, bool include_thin = false) const {
    std::vector<double> out;
    for (YearMonth m : months) {
      auto it = points.find(m);
      if (it == points.end() || (it->second.thin && !include_thin)) continue;
      out.push_back(it->second.hhi.value);
    }
    return out;
  }

  MonthSet usable_months(const MonthSet& months) const {
    MonthSet out;
    for (YearMonth m : months) {
      auto it = points.find(m);
      if (it != points.end() && !it->second.thin) out.insert(m);
    }
    return out;
  }

  MonthSet all_months() const {
    MonthSet out;
    for (const auto& [m, _] : points) out.insert(m);
    return out;
  }
};

// One point per non-empty month; cells with fewer than `min_support` records
// are kept but flagged thin.
inline HhiSeries hhi_series(const CountTable& table, std::string_view country, std::uint64_t min_support = 0) {
  const auto* cells = table.country_cells(country);
  if (!cells || cells->empty()) throw Error(ErrorCode::NoData, "no data for " + std::string(country));
  HhiSeries series{std::string(country), {}};
  for (const auto& [m, cell] : *cells) {
    if (cell.total == 0) continue;
    auto dist = LanguageDistribution::from_counts(cell.counts);
    series.points.emplace(m, HhiPoint{hhi(dist), cell.total < min_support});
  }
  return series;
}

// HHI of the count-pooled distribution over `period`.
inline HhiValue hhi_baseline(const CountTable& table, std::string_view country, const MonthSet& period) {
  if (period.empty()) throw Error(ErrorCode::NoData, "empty period");
  auto pooled = pooled_counts(table, country, period);
  if (pooled.empty()) throw Error(ErrorCode::NoData, "no data for " + std::string(country) + " in period");
  return hhi(LanguageDistribution::from_counts(pooled));
}

// Arithmetic mean of the monthly HHI values over `period` (non-thin months).
// Distinct from hhi_baseline, which pools counts first.
inline double mean_monthly_hhi(const CountTable& table, std::string_view country, const MonthSet& period,
                               std::uint64_t min_support = 0) {
  auto values = hhi_series(table, country, min_support).values(period);
  if (values.empty()) throw Error(ErrorCode::NoData, "no usable months for " + std::string(country));
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

inline void write_hhi_series_header(std::ostream& out) { out << "country,month,hhi,support\n"; }

inline void write_hhi_series(std::ostream& out, const HhiSeries& s) {
  for (const auto& [m, p] : s.points)
    out << s.country << ',' << m.str() << ',' << text::fmt_double(p.hhi.value) << ',' << p.hhi.support_count << '\n';
}

}  // namespace lingdiv

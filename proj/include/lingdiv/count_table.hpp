#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lingdiv/corpus.hpp"
#include "lingdiv/error.hpp"
#include "lingdiv/month.hpp"
#include "lingdiv/registry.hpp"
#include "lingdiv/text.hpp"

namespace lingdiv {

using LanguageCounts = std::map<std::string, std::uint64_t, std::less<>>;

// Language counts of one (country, month) bin.
struct Cell {
  LanguageCounts counts;
  std::uint64_t total = 0;

  void add(std::string_view language, std::uint64_t n) {
    if (n == 0) return;
    auto it = counts.find(language);
    if (it == counts.end()) it = counts.emplace(std::string(language), 0).first;
    it->second += n;
    total += n;
  }

  bool operator==(const Cell&) const = default;
};

// Mergeable counts keyed by (country, month, language). A pure value:
// shards can be built independently and combined with merge().
class CountTable {
 public:
  using MonthCells = std::map<YearMonth, Cell>;
  using CountryMap = std::map<std::string, MonthCells, std::less<>>;

  void add(std::string_view country, YearMonth month, std::string_view language, std::uint64_t n = 1) {
    if (n == 0) return;
    auto it = data_.find(country);
    if (it == data_.end()) it = data_.emplace(std::string(country), MonthCells{}).first;
    it->second[month].add(language, n);
    grand_total_ += n;
  }

  void add(const Record& r) { add(r.country, r.month, r.language, 1); }

  CountTable& merge(const CountTable& other) {
    for (const auto& [country, months] : other.data_)
      for (const auto& [month, cell] : months)
        for (const auto& [lang, n] : cell.counts) add(country, month, lang, n);
    return *this;
  }

  const Cell* find(std::string_view country, YearMonth month) const {
    auto it = data_.find(country);
    if (it == data_.end()) return nullptr;
    auto jt = it->second.find(month);
    return jt == it->second.end() ? nullptr : &jt->second;
  }

  std::uint64_t total(std::string_view country, YearMonth month) const {
    const Cell* c = find(country, month);
    return c ? c->total : 0;
  }

  bool has_country(std::string_view country) const { return data_.find(country) != data_.end(); }

  const MonthCells* country_cells(std::string_view country) const {
    auto it = data_.find(country);
    return it == data_.end() ? nullptr : &it->second;
  }

  std::vector<std::string> countries() const {
    std::vector<std::string> out;
    out.reserve(data_.size());
    for (const auto& [c, _] : data_) out.push_back(c);
    return out;
  }

  // Every month with data for any country.
  MonthSet months() const {
    MonthSet out;
    for (const auto& [_, months] : data_)
      for (const auto& [m, cell] : months) out.insert(m);
    return out;
  }

  MonthSet months(std::string_view country) const {
    MonthSet out;
    if (const auto* cells = country_cells(country))
      for (const auto& [m, _] : *cells) out.insert(m);
    return out;
  }

  // Global record volume per month.
  std::map<YearMonth, std::uint64_t> monthly_totals() const {
    std::map<YearMonth, std::uint64_t> out;
    for (const auto& [_, months] : data_)
      for (const auto& [m, cell] : months) out[m] += cell.total;
    return out;
  }

  const CountryMap& data() const { return data_; }
  std::uint64_t grand_total() const { return grand_total_; }
  bool empty() const { return data_.empty(); }

  bool operator==(const CountTable& o) const { return data_ == o.data_; }

  // `country,month,language,count`, rows sorted by country, month, language.
  void write(std::ostream& out) const {
    out << "country,month,language,count\n";
    for (const auto& [country, months] : data_)
      for (const auto& [month, cell] : months)
        for (const auto& [lang, n] : cell.counts) out << country << ',' << month.str() << ',' << lang << ',' << n << '\n';
  }

  static CountTable read(std::istream& in) {
    CountTable t;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (text::is_blank(line)) continue;
      if (lineno == 1 && line.rfind("country,", 0) == 0) continue;
      auto fields = text::split_csv(line);
      auto fail = [&] {
        throw Error(ErrorCode::MalformedInput, "count table line " + std::to_string(lineno) + ": '" + line + "'");
      };
      if (!fields || fields->size() != 4) fail();
      auto month = YearMonth::parse(text::trim((*fields)[1]));
      auto n = text::parse_number<std::uint64_t>((*fields)[3]);
      if (!month || !n) fail();
      t.add(text::trim((*fields)[0]), *month, text::trim((*fields)[2]), *n);
    }
    return t;
  }

  static CountTable load(const std::string& path) {
    auto in = text::open_input(path);
    return read(in);
  }

 private:
  CountryMap data_;
  std::uint64_t grand_total_ = 0;
};

inline void accumulate(CountTable& table, const Record& record) { table.add(record); }

inline CountTable merge(CountTable a, const CountTable& b) {
  a.merge(b);
  return a;
}

// Maximum-likelihood share vector. Zero-count languages never appear. When
// built from counts the counts are kept so downstream measures can be exact.
class LanguageDistribution {
 public:
  LanguageDistribution() = default;

  static LanguageDistribution from_counts(const LanguageCounts& counts) {
    LanguageDistribution d;
    for (const auto& [lang, n] : counts) {
      if (n == 0) continue;
      d.counts_.emplace(lang, n);
      d.support_ += n;
    }
    for (const auto& [lang, n] : d.counts_)
      d.shares_.emplace(lang, static_cast<double>(n) / static_cast<double>(d.support_));
    return d;
  }

  // Shares must be positive and sum to 1 within 1e-9 (zero shares are dropped).
  static LanguageDistribution from_shares(std::map<std::string, double, std::less<>> shares, std::uint64_t support = 0) {
    LanguageDistribution d;
    double sum = 0.0;
    for (const auto& [lang, s] : shares) {
      if (!(s >= 0.0) || s > 1.0) throw Error(ErrorCode::MalformedInput, "share of '" + lang + "' outside [0,1]");
      if (s > 0.0) {
        d.shares_.emplace(lang, s);
        sum += s;
      }
    }
    if (!d.shares_.empty() && std::abs(sum - 1.0) > 1e-9)
      throw Error(ErrorCode::MalformedInput, "shares sum to " + text::fmt_double(sum, 17) + ", not 1");
    d.support_ = support;
    return d;
  }

  const std::map<std::string, double, std::less<>>& shares() const { return shares_; }
  const LanguageCounts& counts() const { return counts_; }
  bool has_counts() const { return !counts_.empty(); }
  std::uint64_t support_count() const { return support_; }
  bool empty() const { return shares_.empty(); }
  std::size_t size() const { return shares_.size(); }

  double share(std::string_view lang) const {
    auto it = shares_.find(lang);
    return it == shares_.end() ? 0.0 : it->second;
  }

  // Languages ordered by descending share, ties by code.
  std::vector<std::pair<std::string, double>> ranked() const {
    std::vector<std::pair<std::string, double>> out(shares_.begin(), shares_.end());
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    return out;
  }

 private:
  std::map<std::string, double, std::less<>> shares_;
  LanguageCounts counts_;
  std::uint64_t support_ = 0;
};

inline LanguageCounts pooled_counts(const CountTable& table, std::string_view country, const MonthSet& months) {
  LanguageCounts pooled;
  const auto* cells = table.country_cells(country);
  if (!cells) return pooled;
  for (YearMonth m : months) {
    auto it = cells->find(m);
    if (it == cells->end()) continue;
    for (const auto& [lang, n] : it->second.counts) pooled[lang] += n;
  }
  return pooled;
}

// Count-weighted pooled distribution of `country` over `months`.
inline LanguageDistribution distribution(const CountTable& table, std::string_view country, const MonthSet& months) {
  auto pooled = pooled_counts(table, country, months);
  if (pooled.empty())
    throw Error(ErrorCode::EmptyCell, "no data for " + std::string(country) + " in the requested months");
  return LanguageDistribution::from_counts(pooled);
}

inline LanguageDistribution distribution(const CountTable& table, std::string_view country, YearMonth month) {
  return distribution(table, country, MonthSet{month});
}

// Per-month share of global volume by region.
struct RegionRollup {
  std::map<YearMonth, std::map<std::string, double>> shares;

  double share(YearMonth m, const std::string& region) const {
    auto it = shares.find(m);
    if (it == shares.end()) return 0.0;
    auto jt = it->second.find(region);
    return jt == it->second.end() ? 0.0 : jt->second;
  }

  // Share of the whole table's volume, pooled over months.
  std::map<std::string, double> overall;
};

inline RegionRollup region_shares(const CountTable& table, const CountryRegistry& registry) {
  std::map<YearMonth, std::map<std::string, std::uint64_t>> counts;
  std::map<std::string, std::uint64_t> overall;
  const auto regions = registry.regions();
  for (const auto& [country, months] : table.data()) {
    const std::string& region = registry.region_or_throw(country);
    for (const auto& [m, cell] : months) {
      counts[m][region] += cell.total;
      overall[region] += cell.total;
    }
  }
  RegionRollup out;
  for (const auto& [m, by_region] : counts) {
    std::uint64_t total = 0;
    for (const auto& [_, n] : by_region) total += n;
    auto& row = out.shares[m];
    for (const auto& r : regions) row[r] = 0.0;
    for (const auto& [r, n] : by_region) row[r] = static_cast<double>(n) / static_cast<double>(total);
  }
  for (const auto& r : regions) out.overall[r] = 0.0;
  if (table.grand_total() > 0)
    for (const auto& [r, n] : overall) out.overall[r] = static_cast<double>(n) / static_cast<double>(table.grand_total());
  return out;
}

}  // namespace lingdiv

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lingdiv/count_table.hpp"
#include "lingdiv/diversity.hpp"
#include "lingdiv/error.hpp"
#include "lingdiv/month.hpp"
#include "lingdiv/registry.hpp"
#include "lingdiv/stats.hpp"
#include "lingdiv/text.hpp"

namespace lingdiv {

struct AnalysisOptions {
  std::uint64_t min_support = 500;  // cells below this are thin
  TestVariant variant = TestVariant::Welch;
  double attribution_threshold = 0.01;
  // Explicit (first, second) grouping for the stability tests; default is
  // a midpoint split of the full period.
  std::optional<std::pair<MonthSet, MonthSet>> stability_split;
};

inline std::vector<int> month_of_year_multiset(const MonthSet& months) {
  std::vector<int> out;
  for (YearMonth m : months) out.push_back(m.month());
  std::sort(out.begin(), out.end());
  return out;
}

// Treatment and baseline windows aligned by calendar month.
struct WindowPair {
  MonthSet treatment;
  MonthSet baseline;

  static WindowPair pandemic_default() {
    return {month_span(YearMonth(2020, 3), YearMonth(2020, 8)), month_span(YearMonth(2019, 3), YearMonth(2019, 8))};
  }

  WindowPair swapped() const { return {baseline, treatment}; }

  void validate() const {
    if (treatment.empty() || baseline.empty()) throw Error(ErrorCode::ConfigError, "empty window");
    for (YearMonth m : treatment)
      if (baseline.count(m)) throw Error(ErrorCode::ConfigError, "windows overlap at " + m.str());
    if (treatment.size() != baseline.size()) throw Error(ErrorCode::ConfigError, "windows differ in size");
    if (month_of_year_multiset(treatment) != month_of_year_multiset(baseline))
      throw Error(ErrorCode::ConfigError, "windows are not aligned by calendar month");
  }
};

enum class Direction { MoreConcentrated, MoreDiverse };

inline std::string_view to_string(Direction d) {
  return d == Direction::MoreConcentrated ? "more_concentrated" : "more_diverse";
}

struct ShiftEntry {
  std::string country;
  TestResult test;  // treatment vs baseline, on monthly HHI
  Direction direction = Direction::MoreDiverse;
  bool tie = false;
  double hhi_baseline = 0.0;   // mean monthly HHI
  double hhi_treatment = 0.0;  // mean monthly HHI
  MonthSet baseline_used;
  MonthSet treatment_used;
  MonthSet thin_excluded;
};

struct AttributionEntry {
  std::string country;
  std::string language;
  double baseline_share = 0.0;
  double treatment_share = 0.0;
  double delta = 0.0;  // treatment - baseline
  TestResult test;
};

struct StabilityEntry {
  std::string unit;
  TestResult test;
  double mean_first = 0.0;
  double mean_second = 0.0;
};

struct StabilityReport {
  MonthSet first_half;
  MonthSet second_half;
  std::vector<StabilityEntry> regions;
  std::vector<StabilityEntry> countries;
};

namespace detail {

inline std::pair<MonthSet, MonthSet> split_period(const MonthSet& months, const AnalysisOptions& options) {
  if (options.stability_split) {
    MonthSet a, b;
    for (YearMonth m : months) {
      if (options.stability_split->first.count(m)) a.insert(m);
      if (options.stability_split->second.count(m)) b.insert(m);
    }
    return {a, b};
  }
  std::vector<YearMonth> v(months.begin(), months.end());
  const std::size_t half = v.size() / 2;
  return {MonthSet(v.begin(), v.begin() + half), MonthSet(v.begin() + half, v.end())};
}

inline double mean(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline StabilityEntry stability_entry(std::string unit, const std::vector<double>& first,
                                      const std::vector<double>& second, TestVariant variant) {
  return {std::move(unit), t_test(first, second, variant), mean(first), mean(second)};
}

}  // namespace detail

// Tests whether each region's and each country's monthly share of global
// volume differs between the two halves of the period.
inline StabilityReport stability_screen(const CountTable& table, const CountryRegistry& registry,
                                        const AnalysisOptions& options = {}) {
  const MonthSet months = table.months();
  if (months.size() < 4) throw Error(ErrorCode::InsufficientMonths, "stability screen needs at least 4 months");
  auto [first, second] = detail::split_period(months, options);
  if (first.size() < 2 || second.size() < 2)
    throw Error(ErrorCode::InsufficientMonths, "each half of the split needs at least 2 months");

  const auto rollup = region_shares(table, registry);
  const auto totals = table.monthly_totals();
  StabilityReport report{first, second, {}, {}};

  std::set<std::string> present;
  for (const auto& c : table.countries()) present.insert(registry.region_or_throw(c));
  for (const auto& region : present) {
    std::vector<double> a, b;
    for (YearMonth m : first) a.push_back(rollup.share(m, region));
    for (YearMonth m : second) b.push_back(rollup.share(m, region));
    report.regions.push_back(detail::stability_entry(region, a, b, options.variant));
  }
  for (const auto& country : table.countries()) {
    auto share = [&](YearMonth m) {
      return static_cast<double>(table.total(country, m)) / static_cast<double>(totals.at(m));
    };
    std::vector<double> a, b;
    for (YearMonth m : first) a.push_back(share(m));
    for (YearMonth m : second) b.push_back(share(m));
    report.countries.push_back(detail::stability_entry(country, a, b, options.variant));
  }
  return report;
}

// Is the country's monthly HHI a single group across the period?
inline TestResult diversity_stability(const CountTable& table, std::string_view country,
                                      const AnalysisOptions& options = {}) {
  const auto series = hhi_series(table, country, options.min_support);
  const MonthSet usable = series.usable_months(series.all_months());
  if (usable.size() < 4) throw Error(ErrorCode::InsufficientMonths, std::string(country) + ": fewer than 4 usable months");
  auto [first, second] = detail::split_period(usable, options);
  auto a = series.values(first), b = series.values(second);
  if (a.size() < 2 || b.size() < 2) throw Error(ErrorCode::InsufficientMonths, std::string(country) + ": split too small");
  return t_test(a, b, options.variant);
}

inline ShiftEntry detect_shift(const CountTable& table, std::string_view country, const WindowPair& windows,
                               const AnalysisOptions& options = {}) {
  windows.validate();
  const auto series = hhi_series(table, country, options.min_support);
  ShiftEntry entry;
  entry.country = std::string(country);
  entry.treatment_used = series.usable_months(windows.treatment);
  entry.baseline_used = series.usable_months(windows.baseline);
  for (const MonthSet* w : {&windows.treatment, &windows.baseline})
    for (YearMonth m : *w) {
      auto it = series.points.find(m);
      if (it != series.points.end() && it->second.thin) entry.thin_excluded.insert(m);
    }
  if (entry.treatment_used.size() < 2 || entry.baseline_used.size() < 2)
    throw Error(ErrorCode::InsufficientData, entry.country + ": fewer than 2 usable months in a window");

  const auto treatment = series.values(entry.treatment_used);
  const auto baseline = series.values(entry.baseline_used);
  entry.test = t_test(treatment, baseline, options.variant);
  entry.hhi_treatment = detail::mean(treatment);
  entry.hhi_baseline = detail::mean(baseline);
  entry.tie = entry.hhi_treatment == entry.hhi_baseline;
  entry.direction = entry.hhi_treatment > entry.hhi_baseline ? Direction::MoreConcentrated : Direction::MoreDiverse;
  return entry;
}

// Per-language comparison of monthly shares between windows, for languages
// whose pooled baseline share is at least `threshold`. Sorted by |delta|.
inline std::vector<AttributionEntry> attribute_languages(const CountTable& table, std::string_view country,
                                                         const WindowPair& windows, double threshold,
                                                         const AnalysisOptions& options = {}) {
  windows.validate();
  const auto* cells = table.country_cells(country);
  if (!cells) throw Error(ErrorCode::InsufficientData, std::string(country) + ": no data");
  auto usable = [&](const MonthSet& w) {
    MonthSet out;
    for (YearMonth m : w) {
      auto it = cells->find(m);
      if (it != cells->end() && it->second.total > 0 && it->second.total >= options.min_support) out.insert(m);
    }
    return out;
  };
  const MonthSet treat = usable(windows.treatment), base = usable(windows.baseline);
  if (treat.size() < 2 || base.size() < 2)
    throw Error(ErrorCode::InsufficientData, std::string(country) + ": fewer than 2 usable months in a window");

  const auto base_dist = LanguageDistribution::from_counts(pooled_counts(table, country, base));
  const auto treat_dist = LanguageDistribution::from_counts(pooled_counts(table, country, treat));

  std::set<std::string> languages;
  for (const auto& [lang, _] : base_dist.shares()) languages.insert(lang);
  for (const auto& [lang, _] : treat_dist.shares()) languages.insert(lang);

  auto monthly_shares = [&](const MonthSet& months, const std::string& lang) {
    std::vector<double> out;
    for (YearMonth m : months) {
      const Cell& cell = cells->at(m);
      auto it = cell.counts.find(lang);
      const double n = it == cell.counts.end() ? 0.0 : static_cast<double>(it->second);
      out.push_back(n / static_cast<double>(cell.total));
    }
    return out;
  };

  std::vector<AttributionEntry> out;
  for (const auto& lang : languages) {
    const double b = base_dist.share(lang);
    if (b < threshold) continue;
    AttributionEntry e;
    e.country = std::string(country);
    e.language = lang;
    e.baseline_share = b;
    e.treatment_share = treat_dist.share(lang);
    e.delta = e.treatment_share - e.baseline_share;
    e.test = t_test(monthly_shares(treat, lang), monthly_shares(base, lang), options.variant);
    out.push_back(std::move(e));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return std::abs(a.delta) > std::abs(b.delta); });
  return out;
}

inline void write_shift_report(std::ostream& out, std::span<const ShiftEntry> entries) {
  out << "country,p,class,direction,hhi_baseline,hhi_treatment\n";
  for (const auto& e : entries)
    out << e.country << ',' << text::fmt_double(e.test.p_value) << ',' << to_string(e.test.significance) << ','
        << to_string(e.direction) << ',' << text::fmt_double(e.hhi_baseline) << ','
        << text::fmt_double(e.hhi_treatment) << '\n';
}

inline void write_shift_choropleth(std::ostream& out, std::span<const ShiftEntry> entries) {
  out << "country,class\n";
  for (const auto& e : entries) out << e.country << ',' << to_string(e.test.significance) << '\n';
}

inline void write_attribution(std::ostream& out, std::span<const AttributionEntry> entries, bool header = true) {
  if (header) out << "country,language,normal_share,covid_share,p\n";
  for (const auto& e : entries)
    out << e.country << ',' << e.language << ',' << text::fmt_double(e.baseline_share) << ','
        << text::fmt_double(e.treatment_share) << ',' << text::fmt_double(e.test.p_value) << '\n';
}

inline void write_stability(std::ostream& out, std::span<const StabilityEntry> entries, std::string_view unit_name) {
  out << unit_name << ",p,class,t,df,mean_first,mean_second\n";
  for (const auto& e : entries)
    out << text::csv_field(e.unit) << ',' << text::fmt_double(e.test.p_value) << ',' << to_string(e.test.significance)
        << ',' << text::fmt_double(e.test.t_statistic) << ',' << text::fmt_double(e.test.degrees_of_freedom) << ','
        << text::fmt_double(e.mean_first) << ',' << text::fmt_double(e.mean_second) << '\n';
}

}  // namespace lingdiv

#pragma once

#include <algorithm>
#include <cstddef>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lingdiv/count_table.hpp"
#include "lingdiv/diversity.hpp"
#include "lingdiv/error.hpp"
#include "lingdiv/shift.hpp"
#include "lingdiv/stats.hpp"
#include "lingdiv/text.hpp"

namespace lingdiv {

// The same calendar months in three consecutive comparison years.
struct DidWindows {
  std::vector<int> months_of_year{7, 8, 9};
  int year_pre = 2018;
  int year_mid = 2019;
  int year_post = 2020;

  MonthSet window(int year) const {
    MonthSet out;
    for (int m : months_of_year) out.insert(YearMonth(year, m));
    return out;
  }

  void validate() const {
    if (months_of_year.empty()) throw Error(ErrorCode::ConfigError, "DiD: no months of year");
    std::set<int> uniq(months_of_year.begin(), months_of_year.end());
    if (uniq.size() != months_of_year.size()) throw Error(ErrorCode::ConfigError, "DiD: repeated month of year");
    for (int m : months_of_year)
      if (m < 1 || m > 12) throw Error(ErrorCode::ConfigError, "DiD: month of year out of range");
    if (!(year_pre < year_mid && year_mid < year_post))
      throw Error(ErrorCode::ConfigError, "DiD: years must be strictly increasing");
  }

  // Keeps only months of year present in `available` for all three years.
  DidWindows narrowed_to(const MonthSet& available) const {
    DidWindows out = *this;
    out.months_of_year.clear();
    for (int m : months_of_year)
      if (available.count(YearMonth(year_pre, m)) && available.count(YearMonth(year_mid, m)) &&
          available.count(YearMonth(year_post, m)))
        out.months_of_year.push_back(m);
    return out;
  }
};

enum class DidClass { CovidCreated, CovidAmplified, PreExisting, NotSignificant };

inline std::string_view to_string(DidClass c) {
  switch (c) {
    case DidClass::CovidCreated: return "covid_created";
    case DidClass::CovidAmplified: return "covid_amplified";
    case DidClass::PreExisting: return "pre_existing";
    case DidClass::NotSignificant: return "not_significant";
  }
  return "not_significant";
}

struct DidOptions {
  double amplification_ratio = 5.0;
  double alpha = 0.05;
};

constexpr DidClass classify_did(double p_baseline, double p_covid, const DidOptions& options = {}) {
  if (p_covid >= options.alpha) return DidClass::NotSignificant;
  if (p_baseline >= options.alpha) return DidClass::CovidCreated;
  if (p_covid < p_baseline / options.amplification_ratio) return DidClass::CovidAmplified;
  return DidClass::PreExisting;
}

struct DidEntry {
  std::string country;
  TestResult baseline_test;  // year_pre vs year_mid
  TestResult covid_test;     // year_mid vs year_post
  DidClass classification = DidClass::NotSignificant;
  std::vector<int> months_used;
  bool narrowed = false;  // requested months were missing from the corpus
};

inline DidEntry did_analyze(const CountTable& table, std::string_view country, const DidWindows& windows,
                            const AnalysisOptions& analysis = {}, const DidOptions& options = {}) {
  windows.validate();
  const DidWindows effective = windows.narrowed_to(table.months());
  DidEntry entry;
  entry.country = std::string(country);
  entry.months_used = effective.months_of_year;
  entry.narrowed = effective.months_of_year.size() != windows.months_of_year.size();
  if (effective.months_of_year.empty())
    throw Error(ErrorCode::InsufficientData, "no month of year is present in all three DiD years");

  const auto series = hhi_series(table, country, analysis.min_support);
  const auto pre = series.values(effective.window(effective.year_pre));
  const auto mid = series.values(effective.window(effective.year_mid));
  const auto post = series.values(effective.window(effective.year_post));
  if (pre.size() < 2 || mid.size() < 2 || post.size() < 2)
    throw Error(ErrorCode::InsufficientData, entry.country + ": fewer than 2 usable months in a DiD year window");

  entry.baseline_test = t_test(mid, pre, analysis.variant);
  entry.covid_test = t_test(post, mid, analysis.variant);
  entry.classification = classify_did(entry.baseline_test.p_value, entry.covid_test.p_value, options);
  return entry;
}

struct DidSummary {
  std::size_t created = 0;
  std::size_t amplified = 0;
  std::size_t pre_existing = 0;
  std::size_t not_significant = 0;
  double attributed_fraction = 0.0;  // (created + amplified) / significant

  std::size_t significant() const { return created + amplified + pre_existing; }
};

inline DidSummary did_summary(std::span<const DidClass> classes) {
  DidSummary s;
  for (DidClass c : classes) {
    switch (c) {
      case DidClass::CovidCreated: ++s.created; break;
      case DidClass::CovidAmplified: ++s.amplified; break;
      case DidClass::PreExisting: ++s.pre_existing; break;
      case DidClass::NotSignificant: ++s.not_significant; break;
    }
  }
  if (s.significant() == 0) throw Error(ErrorCode::NoSignificantCountries, "no country changed in the covid comparison");
  s.attributed_fraction = static_cast<double>(s.created + s.amplified) / static_cast<double>(s.significant());
  return s;
}

inline DidSummary did_summary(std::span<const DidEntry> entries) {
  std::vector<DidClass> classes;
  classes.reserve(entries.size());
  for (const auto& e : entries) classes.push_back(e.classification);
  return did_summary(classes);
}

inline void write_did_report(std::ostream& out, std::span<const DidEntry> entries) {
  out << "country,p_baseline,p_covid,class\n";
  for (const auto& e : entries)
    out << e.country << ',' << text::fmt_double(e.baseline_test.p_value) << ','
        << text::fmt_double(e.covid_test.p_value) << ',' << to_string(e.classification) << '\n';
}

inline void write_did_summary(std::ostream& out, const DidSummary& s) {
  out << "created=" << s.created << "\tamplified=" << s.amplified << "\tpre_existing=" << s.pre_existing
      << "\tnot_significant=" << s.not_significant << "\tfraction=" << text::fmt_double(s.attributed_fraction) << '\n';
}

}  // namespace lingdiv

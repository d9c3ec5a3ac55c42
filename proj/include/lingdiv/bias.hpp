#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lingdiv/count_table.hpp"
#include "lingdiv/error.hpp"
#include "lingdiv/stats.hpp"
#include "lingdiv/text.hpp"

namespace lingdiv {

struct DemographicProfile {
  std::string country;
  double population = 0.0;
  double internet_population = 0.0;
  double gdp = 0.0;
};

enum class Covariate { Population, InternetPopulation, Gdp };
inline constexpr std::array<Covariate, 3> kCovariates = {Covariate::Population, Covariate::InternetPopulation,
                                                         Covariate::Gdp};

inline std::string_view to_string(Covariate c) {
  switch (c) {
    case Covariate::Population: return "population";
    case Covariate::InternetPopulation: return "internet_population";
    case Covariate::Gdp: return "gdp";
  }
  return "population";
}

inline Covariate parse_covariate(std::string_view s) {
  for (Covariate c : kCovariates)
    if (to_string(c) == s) return c;
  throw Error(ErrorCode::ConfigError, "unknown covariate '" + std::string(s) + "'");
}

inline double covariate_value(const DemographicProfile& p, Covariate c) {
  switch (c) {
    case Covariate::Population: return p.population;
    case Covariate::InternetPopulation: return p.internet_population;
    case Covariate::Gdp: return p.gdp;
  }
  return 0.0;
}

using Profiles = std::map<std::string, DemographicProfile, std::less<>>;

// `country,population,internet_population,gdp` with header.
inline Profiles read_demographics(std::istream& in) {
  Profiles out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::is_blank(line) || line[0] == '#') continue;
    if (lineno == 1 && line.rfind("country,", 0) == 0) continue;
    auto fail = [&](const std::string& why) {
      throw Error(ErrorCode::MalformedInput, "demographics line " + std::to_string(lineno) + ": " + why);
    };
    auto f = text::split_csv(line);
    if (!f || f->size() != 4) fail("expected 4 columns");
    DemographicProfile p;
    p.country = std::string(text::trim((*f)[0]));
    auto pop = text::parse_number<double>((*f)[1]);
    auto net = text::parse_number<double>((*f)[2]);
    auto gdp = text::parse_number<double>((*f)[3]);
    if (!pop || !net || !gdp) fail("non-numeric value");
    p.population = *pop;
    p.internet_population = *net;
    p.gdp = *gdp;
    if (p.population < 0 || p.internet_population < 0 || p.gdp < 0) fail("negative value");
    if (p.internet_population > p.population) fail("internet_population exceeds population");
    if (!out.emplace(p.country, p).second) fail("duplicate country " + p.country);
  }
  return out;
}

inline Profiles load_demographics(const std::string& path) {
  auto in = text::open_input(path);
  return read_demographics(in);
}

// Mean monthly record count per country, over the months where it has data.
inline std::map<std::string, double> volume_vector(const CountTable& table) {
  std::map<std::string, double> out;
  for (const auto& [country, months] : table.data()) {
    if (months.empty()) continue;
    double sum = 0.0;
    for (const auto& [_, cell] : months) sum += static_cast<double>(cell.total);
    out[country] = sum / static_cast<double>(months.size());
  }
  return out;
}

struct BiasOptions {
  std::vector<std::string> exclusions;  // removed before correlating
  bool log_transform = false;           // log1p on both axes
  bool detect_outliers = false;         // report |studentized residual| > 3, never applied
};

struct MonthlyCorrelation {
  Covariate covariate = Covariate::Population;
  std::map<YearMonth, double> r;
  TestResult stability;
};

struct BiasReport {
  std::map<Covariate, CorrelationResult> correlations;
  std::vector<std::string> excluded_countries;
  std::map<Covariate, std::vector<std::string>> suggested_outliers;
  std::map<Covariate, MonthlyCorrelation> monthly;
};

namespace detail {

struct Paired {
  std::vector<std::string> labels;
  std::vector<double> x;  // volume
  std::vector<double> y;  // covariate
};

inline Paired pair_up(const std::map<std::string, double>& volumes, const Profiles& profiles, Covariate c,
                      const std::set<std::string, std::less<>>& excluded, bool log_transform) {
  Paired p;
  for (const auto& [country, volume] : volumes) {
    if (excluded.count(country)) continue;
    auto it = profiles.find(country);
    if (it == profiles.end()) continue;
    double x = volume, y = covariate_value(it->second, c);
    if (log_transform) {
      x = std::log1p(x);
      y = std::log1p(y);
    }
    p.labels.push_back(country);
    p.x.push_back(x);
    p.y.push_back(y);
  }
  return p;
}

// Internally studentized residuals of the OLS fit x ~ a + b*y.
inline std::vector<std::string> studentized_outliers(const Paired& p, double cutoff = 3.0) {
  const std::size_t n = p.x.size();
  if (n < 4) return {};
  const double my = std::accumulate(p.y.begin(), p.y.end(), 0.0) / n;
  const double mx = std::accumulate(p.x.begin(), p.x.end(), 0.0) / n;
  double syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    syy += (p.y[i] - my) * (p.y[i] - my);
    sxy += (p.y[i] - my) * (p.x[i] - mx);
  }
  if (syy == 0.0) return {};
  const double slope = sxy / syy, intercept = mx - slope * my;
  std::vector<double> resid(n);
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    resid[i] = p.x[i] - (intercept + slope * p.y[i]);
    sse += resid[i] * resid[i];
  }
  const double s2 = sse / static_cast<double>(n - 2);
  if (s2 == 0.0) return {};
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) {
    const double leverage = 1.0 / n + (p.y[i] - my) * (p.y[i] - my) / syy;
    const double denom = std::sqrt(s2 * std::max(1.0 - leverage, 1e-12));
    if (std::abs(resid[i] / denom) > cutoff) out.push_back(p.labels[i]);
  }
  return out;
}

}  // namespace detail

inline BiasReport correlate_demographics(const std::map<std::string, double>& volumes, const Profiles& profiles,
                                         const BiasOptions& options = {}) {
  std::set<std::string, std::less<>> excluded(options.exclusions.begin(), options.exclusions.end());
  BiasReport report;
  report.excluded_countries.assign(excluded.begin(), excluded.end());
  for (Covariate c : kCovariates) {
    auto paired = detail::pair_up(volumes, profiles, c, excluded, options.log_transform);
    if (paired.x.size() < 3)
      throw Error(ErrorCode::InsufficientOverlap,
                  "only " + std::to_string(paired.x.size()) + " countries with both volume and demographics");
    auto result = pearson(paired.x, paired.y);
    result.excluded = report.excluded_countries;
    report.correlations.emplace(c, std::move(result));
    if (options.detect_outliers) report.suggested_outliers[c] = detail::studentized_outliers(paired);
  }
  return report;
}

// Per-month correlation between monthly volume and a covariate, with a
// two-sample test between the first and second half of the r series.
inline MonthlyCorrelation monthly_correlation_stability(const CountTable& table, const Profiles& profiles,
                                                        Covariate covariate, const BiasOptions& options = {},
                                                        TestVariant variant = TestVariant::Welch) {
  const MonthSet months = table.months();
  if (months.size() < 4) throw Error(ErrorCode::InsufficientMonths, "need at least 4 months");
  std::set<std::string, std::less<>> excluded(options.exclusions.begin(), options.exclusions.end());
  MonthlyCorrelation out;
  out.covariate = covariate;
  for (YearMonth m : months) {
    std::map<std::string, double> volumes;
    for (const auto& [country, cells] : table.data()) {
      auto it = cells.find(m);
      if (it != cells.end() && it->second.total > 0) volumes[country] = static_cast<double>(it->second.total);
    }
    auto paired = detail::pair_up(volumes, profiles, covariate, excluded, options.log_transform);
    if (paired.x.size() < 3) continue;
    try {
      out.r[m] = pearson(paired.x, paired.y).r;
    } catch (const Error&) {
      // zero variance this month; no r
    }
  }
  if (out.r.size() < 4) throw Error(ErrorCode::InsufficientMonths, "fewer than 4 months with a defined correlation");
  std::vector<double> series;
  for (const auto& [_, r] : out.r) series.push_back(r);
  const std::size_t half = series.size() / 2;
  std::span<const double> all(series);
  out.stability = t_test(all.first(half), all.subspan(half), variant);
  return out;
}

inline void write_bias_report_text(std::ostream& out, const BiasReport& report) {
  out << "excluded=";
  for (std::size_t i = 0; i < report.excluded_countries.size(); ++i)
    out << (i ? " " : "") << report.excluded_countries[i];
  out << '\n';
  for (const auto& [c, res] : report.correlations) {
    out << to_string(c) << ".r=" << text::fmt_double(res.r) << '\n';
    out << to_string(c) << ".n=" << res.n << '\n';
  }
  for (const auto& [c, list] : report.suggested_outliers) {
    out << to_string(c) << ".suggested_outliers=";
    for (std::size_t i = 0; i < list.size(); ++i) out << (i ? " " : "") << list[i];
    out << '\n';
  }
  for (const auto& [c, mc] : report.monthly) {
    out << to_string(c) << ".monthly_p=" << text::fmt_double(mc.stability.p_value) << '\n';
    out << to_string(c) << ".monthly_class=" << to_string(mc.stability.significance) << '\n';
  }
}

inline void write_bias_report_csv(std::ostream& out, const BiasReport& report) {
  out << "covariate,r,n,excluded\n";
  std::string excluded;
  for (std::size_t i = 0; i < report.excluded_countries.size(); ++i)
    excluded += (i ? " " : "") + report.excluded_countries[i];
  for (const auto& [c, res] : report.correlations)
    out << to_string(c) << ',' << text::fmt_double(res.r) << ',' << res.n << ',' << excluded << '\n';
}

inline void write_monthly_correlation_csv(std::ostream& out, const BiasReport& report) {
  out << "covariate,month,r\n";
  for (const auto& [c, mc] : report.monthly)
    for (const auto& [m, r] : mc.r) out << to_string(c) << ',' << m.str() << ',' << text::fmt_double(r) << '\n';
}

}  // namespace lingdiv

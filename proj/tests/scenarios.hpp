#pragma once

// Synthetic scenario builders shared by the unit and acceptance tests.

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "lingdiv/diversity.hpp"
#include "lingdiv/shift.hpp"
#include "lingdiv/synth.hpp"

namespace scenarios {

using namespace lingdiv;

inline MonthSet restriction_window() { return month_span(YearMonth(2020, 3), YearMonth(2020, 8)); }

// Independent month-to-month volume noise of roughly +/- `spread`.
inline void jitter_volumes(PopulationGroup& g, const MonthRange& range, std::mt19937_64& rng, double spread) {
  std::uniform_real_distribution<double> u(1.0 - spread, 1.0 + spread);
  for (YearMonth m : range.months()) g.volume_overrides[m] = g.volume_at(m) * u(rng);
}

struct ShiftCase {
  Scenario scenario;
  std::string country;
  double expected_change = 0.0;  // expected treatment HHI minus baseline HHI
};

inline double expected_window_hhi(const Scenario& s, const PopulationSpec& spec, const MonthSet& window) {
  double sum = 0.0;
  for (YearMonth m : window) sum += hhi(s.expected(spec, m)).value;
  return sum / static_cast<double>(window.size());
}

// One country of ~`volume` records/month: a local group plus a non-local
// group that disappears during restrictions. Parameters are redrawn until
// the expected HHI change is at least `min_change`.
inline ShiftCase shift_case(std::uint64_t seed, double volume = 50000.0, double min_change = 0.05,
                            double restriction_factor = 0.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::vector<std::string> pool = {"eng", "spa", "fra", "deu", "ara", "hin", "por", "rus", "jpn", "tur"};
  for (;;) {
    Scenario s;
    s.seed = seed;
    s.restriction_months = restriction_window();
    s.restriction_factor = restriction_factor;

    PopulationSpec spec;
    spec.country = "SYN";
    PopulationGroup locals{.label = "locals"};
    PopulationGroup visitors{.label = "visitors", .nonlocal = true};
    // locals: a dominant language plus 2-4 others
    std::vector<std::string> langs = pool;
    std::shuffle(langs.begin(), langs.end(), rng);
    const std::size_t k = 3 + rng() % 3;
    std::vector<double> w(k);
    for (auto& x : w) x = 0.05 + u(rng);
    w[0] += 2.0 * u(rng);
    double total = 0.0;
    for (double x : w) total += x;
    for (std::size_t i = 0; i < k; ++i) locals.languages[langs[i]] = w[i] / total;
    // visitors: one or two languages, possibly overlapping the locals
    const std::size_t j = 1 + rng() % 2;
    std::vector<std::string> vis = pool;
    std::shuffle(vis.begin(), vis.end(), rng);
    if (j == 1) {
      visitors.languages[vis[0]] = 1.0;
    } else {
      const double a = 0.5 + 0.4 * u(rng);
      visitors.languages[vis[0]] = a;
      visitors.languages[vis[1]] = 1.0 - a;
    }
    const double visitor_fraction = 0.15 + 0.35 * u(rng);
    locals.volume = volume * (1.0 - visitor_fraction);
    visitors.volume = volume * visitor_fraction;
    // visitor seasonality, identical in both years
    for (auto& f : visitors.seasonal) f = 0.7 + 0.6 * u(rng);
    jitter_volumes(locals, s.date_range, rng, 0.05);
    jitter_volumes(visitors, s.date_range, rng, 0.10);
    spec.groups = {locals, visitors};
    s.populations = {spec};

    const auto windows = WindowPair::pandemic_default();
    const double change =
        expected_window_hhi(s, spec, windows.treatment) - expected_window_hhi(s, spec, windows.baseline);
    if (std::abs(change) >= min_change) return {s, spec.country, change};
  }
}

// `countries` independent countries with no restriction effect.
inline Scenario null_scenario(std::uint64_t seed, int countries = 5, double volume = 50000.0) {
  Scenario s;
  s.seed = seed;
  s.restriction_months = restriction_window();
  s.restriction_factor = 1.0;
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int c = 0; c < countries; ++c) {
    PopulationSpec spec;
    spec.country = std::string("N") + static_cast<char>('A' + c / 26) + static_cast<char>('A' + c % 26);
    PopulationGroup locals{.label = "locals", .languages = {{"eng", 0.3 + 0.4 * u(rng)}}, .volume = volume * 0.7};
    locals.languages["spa"] = 1.0 - locals.languages["eng"];
    PopulationGroup visitors{.label = "visitors", .languages = {{"fra", 1.0}}, .volume = volume * 0.3, .nonlocal = true};
    for (auto& f : visitors.seasonal) f = 0.7 + 0.6 * u(rng);
    jitter_volumes(locals, s.date_range, rng, 0.05);
    jitter_volumes(visitors, s.date_range, rng, 0.10);
    spec.groups = {locals, visitors};
    s.populations.push_back(spec);
  }
  return s;
}

// English share 63.16% in ordinary months and 41.94% once visitors leave.
inline Scenario eritrea_scenario(std::uint64_t seed = 2020) {
  Scenario s;
  s.seed = seed;
  s.restriction_months = restriction_window();
  s.restriction_factor = 0.0;
  PopulationSpec spec;
  spec.country = "ERI";
  PopulationGroup locals{.label = "locals",
                         .languages = {{"eng", 0.4194}, {"tir", 0.40}, {"ara", 0.1656}, {"ita", 0.0075}, {"amh", 0.0075}},
                         .volume = 40000.0};
  // visitors / locals = (0.6316 - 0.4194) / (1 - 0.6316)
  PopulationGroup visitors{
      .label = "visitors", .languages = {{"eng", 1.0}}, .volume = 40000.0 * 0.2122 / 0.3684, .nonlocal = true};
  spec.groups = {locals, visitors};
  s.populations = {spec};
  return s;
}

}  // namespace scenarios

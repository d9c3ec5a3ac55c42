#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "lingdiv/corpus.hpp"
#include "lingdiv/count_table.hpp"
#include "lingdiv/diversity.hpp"
#include "lingdiv/error.hpp"
#include "lingdiv/month.hpp"
#include "lingdiv/parallel.hpp"
#include "lingdiv/text.hpp"

namespace lingdiv {

// SplitMix64 (Steele, Lea & Flood): used only to expand seeds.
constexpr std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

// xoshiro256** 1.0 (Blackman & Vigna), state filled from SplitMix64.
class Xoshiro256 {
 public:
  explicit Xoshiro256(std::uint64_t seed) {
    for (auto& s : s_) s = splitmix64(seed);
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Standard normal (Box-Muller, one value per call).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::array<std::uint64_t, 4> s_{};
};

// Seed for one (country, month) cell. Independent of generation order, so
// cells can be drawn in parallel.
inline std::uint64_t cell_seed(std::uint64_t scenario_seed, std::string_view country, YearMonth month,
                               std::uint64_t spec_seed = 0) {
  std::uint64_t s = scenario_seed;
  std::uint64_t h = splitmix64(s);
  s = h ^ fnv1a64(country);
  h = splitmix64(s);
  s = h ^ static_cast<std::uint64_t>(month.index());
  h = splitmix64(s);
  s = h ^ spec_seed;
  return splitmix64(s);
}

struct PopulationGroup {
  std::string label;
  std::map<std::string, double> languages{};  // sums to 1
  double volume = 0.0;                      // expected records per month
  std::array<double, 12> seasonal{1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1};  // multiplier by month of year
  std::map<YearMonth, double> volume_overrides{};
  bool nonlocal = false;  // scaled by the restriction factor in restricted months

  double volume_at(YearMonth m) const {
    auto it = volume_overrides.find(m);
    if (it != volume_overrides.end()) return it->second;
    return volume * seasonal[static_cast<std::size_t>(m.month() - 1)];
  }
};

struct PopulationSpec {
  std::string country;
  std::vector<PopulationGroup> groups;
  std::uint64_t seed = 0;

  void validate() const {
    if (!is_alpha3_country(country)) throw Error(ErrorCode::ConfigError, "scenario: bad country '" + country + "'");
    if (groups.empty()) throw Error(ErrorCode::ConfigError, "scenario: " + country + " has no groups");
    for (const auto& g : groups) {
      double sum = 0.0;
      for (const auto& [lang, s] : g.languages) {
        if (!is_iso639_3(lang)) throw Error(ErrorCode::ConfigError, "scenario: bad language '" + lang + "'");
        if (!(s >= 0.0)) throw Error(ErrorCode::ConfigError, "scenario: negative share in group " + g.label);
        sum += s;
      }
      if (std::abs(sum - 1.0) > 1e-9)
        throw Error(ErrorCode::ConfigError, "scenario: group " + g.label + " of " + country + " does not sum to 1");
      if (!(g.volume >= 0.0)) throw Error(ErrorCode::ConfigError, "scenario: negative volume in group " + g.label);
      for (double f : g.seasonal)
        if (!(f >= 0.0)) throw Error(ErrorCode::ConfigError, "scenario: negative seasonal factor in " + g.label);
      for (const auto& [m, v] : g.volume_overrides)
        if (!(v >= 0.0)) throw Error(ErrorCode::ConfigError, "scenario: negative volume override in " + g.label);
    }
  }
};

// Exact volume-weighted mixture; non-local groups are scaled by `nonlocal_scale`.
inline LanguageDistribution expected_distribution(const PopulationSpec& spec, YearMonth month,
                                                  double nonlocal_scale = 1.0) {
  double total = 0.0;
  std::map<std::string, double, std::less<>> mix;
  for (const auto& g : spec.groups) {
    const double w = g.volume_at(month) * (g.nonlocal ? nonlocal_scale : 1.0);
    if (w <= 0.0) continue;
    total += w;
    for (const auto& [lang, s] : g.languages) mix[lang] += w * s;
  }
  if (!(total > 0.0)) throw Error(ErrorCode::ZeroVolume, spec.country + " has zero expected volume in " + month.str());
  for (auto& [_, v] : mix) v /= total;
  return LanguageDistribution::from_shares(std::move(mix));
}

struct Scenario {
  std::vector<PopulationSpec> populations;
  MonthRange date_range{YearMonth(2018, 7), YearMonth(2020, 8)};
  MonthSet restriction_months;
  double restriction_factor = 0.0;
  std::uint64_t seed = 0;

  double nonlocal_scale(YearMonth m) const { return restriction_months.count(m) ? restriction_factor : 1.0; }

  double expected_volume(const PopulationSpec& spec, YearMonth m) const {
    double v = 0.0;
    for (const auto& g : spec.groups) v += g.volume_at(m) * (g.nonlocal ? nonlocal_scale(m) : 1.0);
    return v;
  }

  LanguageDistribution expected(const PopulationSpec& spec, YearMonth m) const {
    return expected_distribution(spec, m, nonlocal_scale(m));
  }

  void validate() const {
    if (date_range.empty()) throw Error(ErrorCode::ConfigError, "scenario: empty date range");
    if (!(restriction_factor >= 0.0 && restriction_factor <= 1.0))
      throw Error(ErrorCode::ConfigError, "scenario: restriction factor outside [0,1]");
    for (YearMonth m : restriction_months)
      if (!date_range.contains(m)) throw Error(ErrorCode::ConfigError, "scenario: restriction month " + m.str() + " outside range");
    std::set<std::string> seen;
    for (const auto& p : populations) {
      p.validate();
      if (!seen.insert(p.country).second) throw Error(ErrorCode::ConfigError, "scenario: duplicate country " + p.country);
    }
  }
};

// Draws one (country, month) cell: volume is the rounded expected volume and
// each record's language is an independent categorical draw. `visit(index,
// language)` is called once per record in draw order.
template <typename Visit>
void draw_cell(const Scenario& scenario, const PopulationSpec& spec, YearMonth month, Visit&& visit) {
  const auto volume = static_cast<std::uint64_t>(std::llround(scenario.expected_volume(spec, month)));
  if (volume == 0) return;
  const auto dist = scenario.expected(spec, month);
  std::vector<std::string> langs;
  std::vector<double> cumulative;
  double acc = 0.0;
  for (const auto& [lang, s] : dist.shares()) {
    acc += s;
    langs.push_back(lang);
    cumulative.push_back(acc);
  }
  Xoshiro256 rng(cell_seed(scenario.seed, spec.country, month, spec.seed));
  for (std::uint64_t i = 0; i < volume; ++i) {
    const double u = rng.uniform() * acc;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), langs.size() - 1);
    visit(i, langs[k]);
  }
}

// Draws the whole scenario straight into a count table.
inline CountTable generate_table(const Scenario& scenario, unsigned threads = 1) {
  scenario.validate();
  struct Job {
    const PopulationSpec* spec;
    YearMonth month;
  };
  std::vector<Job> jobs;
  for (const auto& spec : scenario.populations)
    for (YearMonth m = scenario.date_range.first; m <= scenario.date_range.last; ++m) jobs.push_back({&spec, m});
  std::vector<CountTable> parts(jobs.size());
  parallel_for(jobs.size(), threads, [&](std::size_t i) {
    std::map<std::string, std::uint64_t> counts;
    draw_cell(scenario, *jobs[i].spec, jobs[i].month, [&](std::uint64_t, const std::string& lang) { ++counts[lang]; });
    for (const auto& [lang, n] : counts) parts[i].add(jobs[i].spec->country, jobs[i].month, lang, n);
  });
  CountTable out;
  for (const auto& p : parts) out.merge(p);
  return out;
}

inline Record synthetic_record(const PopulationSpec& spec, YearMonth month, std::uint64_t index, const std::string& lang) {
  Record r;
  char id[64];
  std::snprintf(id, sizeof id, "%s-%04d%02d-%llu", spec.country.c_str(), month.year(), month.month(),
                static_cast<unsigned long long>(index));
  r.id = id;
  const std::int64_t start =
      detail::days_from_civil(month.year(), static_cast<unsigned>(month.month()), 1) * 86400;
  const std::int64_t span = static_cast<std::int64_t>(detail::days_in_month(month.year(), month.month())) * 86400;
  r.timestamp = start + static_cast<std::int64_t>((index * 2654435761ULL) % static_cast<std::uint64_t>(span));
  r.month = month;
  r.country = spec.country;
  r.language = lang;
  r.char_count = static_cast<std::uint32_t>(40 + (index * 37) % 200);
  r.is_retweet = false;
  return r;
}

// Writes the scenario as a key/value record file plus the ground-truth
// manifest `country,month,language,expected_share,expected_hhi,expected_volume`.
// Output is a pure function of the scenario.
inline void generate(const Scenario& scenario, std::ostream& records, std::ostream& manifest) {
  scenario.validate();
  manifest << "country,month,language,expected_share,expected_hhi,expected_volume\n";
  std::vector<const PopulationSpec*> specs;
  for (const auto& p : scenario.populations) specs.push_back(&p);
  std::sort(specs.begin(), specs.end(), [](auto* a, auto* b) { return a->country < b->country; });
  for (const auto* spec : specs) {
    for (YearMonth m = scenario.date_range.first; m <= scenario.date_range.last; ++m) {
      const double volume = scenario.expected_volume(*spec, m);
      if (volume <= 0.0) continue;
      const auto dist = scenario.expected(*spec, m);
      const double expected_hhi = hhi(dist).value;
      for (const auto& [lang, s] : dist.shares())
        manifest << spec->country << ',' << m.str() << ',' << lang << ',' << text::fmt_double(s, 17) << ','
                 << text::fmt_double(expected_hhi, 17) << ',' << text::fmt_double(volume, 17) << '\n';
      draw_cell(scenario, *spec, m,
                [&](std::uint64_t i, const std::string& lang) { write_kv_record(records, synthetic_record(*spec, m, i, lang)); });
    }
  }
}

}  // namespace lingdiv

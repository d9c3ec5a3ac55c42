#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "lingdiv/bias.hpp"
#include "lingdiv/config.hpp"
#include "lingdiv/count_table.hpp"
#include "lingdiv/corpus.hpp"
#include "lingdiv/did.hpp"
#include "lingdiv/diversity.hpp"
#include "lingdiv/parallel.hpp"
#include "lingdiv/shift.hpp"
#include "lingdiv/stats.hpp"
#include "lingdiv/synth.hpp"
#include "lingdiv/text.hpp"

// Orchestration behind the command-line tool: ingest -> aggregate ->
// analyze -> report. Every output goes under the configured output directory.
namespace lingdiv {

struct IngestOutcome {
  CountTable table;
  IngestStats stats;
};

// Ingests each file as an independent stream and merges the shards in file order.
inline IngestOutcome ingest_files(const std::vector<std::string>& files, const IngestConfig& config,
                                  unsigned threads = 1) {
  config.validate();
  std::vector<IngestOutcome> shards(files.size());
  parallel_for(files.size(), threads, [&](std::size_t i) {
    auto& shard = shards[i];
    shard.stats = stream_records(files[i], config, [&](const Record& r) { accumulate(shard.table, r); });
  });
  IngestOutcome out;
  for (const auto& s : shards) {
    out.table.merge(s.table);
    out.stats.merge(s.stats);
  }
  return out;
}

struct Failure {
  std::string stage;
  std::string country;
  ErrorCode code;
  std::string message;
};

enum Section : unsigned {
  kBias = 1u << 0,
  kStability = 1u << 1,
  kDiversity = 1u << 2,
  kShift = 1u << 3,
  kAttribution = 1u << 4,
  kDid = 1u << 5,
  kAllSections = 0x3Fu,
};

struct AnalysisBundle {
  unsigned sections = 0;
  std::optional<BiasReport> bias;
  std::optional<StabilityReport> stability;
  std::vector<std::pair<std::string, TestResult>> diversity_stability;
  std::vector<HhiSeries> series;
  std::vector<std::pair<std::string, double>> hhi_choropleth;
  std::vector<ShiftEntry> shifts;
  std::vector<AttributionEntry> attribution;
  std::vector<DidEntry> did;
  std::optional<DidSummary> did_summary;
  std::vector<Failure> failures;
};

namespace detail {

// Runs fn per country in parallel; successes and failures come back in
// country order regardless of scheduling.
template <typename T, typename Fn>
std::vector<T> per_country(const std::vector<std::string>& countries, unsigned threads, const std::string& stage,
                           std::vector<Failure>& failures, Fn&& fn) {
  std::vector<std::optional<T>> results(countries.size());
  std::vector<std::optional<Failure>> errors(countries.size());
  parallel_for(countries.size(), threads, [&](std::size_t i) {
    try {
      results[i] = fn(countries[i]);
    } catch (const Error& e) {
      errors[i] = Failure{stage, countries[i], e.code(), e.what()};
    }
  });
  std::vector<T> out;
  for (std::size_t i = 0; i < countries.size(); ++i) {
    if (results[i]) out.push_back(std::move(*results[i]));
    if (errors[i]) failures.push_back(std::move(*errors[i]));
  }
  return out;
}

}  // namespace detail

inline AnalysisBundle analyze(const CountTable& table, const RunConfig& cfg, unsigned sections = kAllSections) {
  AnalysisBundle b;
  b.sections = sections;
  const auto countries = table.countries();
  const unsigned threads = cfg.threads;

  if ((sections & kBias) && !cfg.paths.demographics.empty()) {
    try {
      const auto profiles = load_demographics(cfg.paths.demographics);
      b.bias = correlate_demographics(volume_vector(table), profiles, cfg.bias);
      for (Covariate c : kCovariates) {
        try {
          b.bias->monthly[c] = monthly_correlation_stability(table, profiles, c, cfg.bias, cfg.analysis.variant);
        } catch (const Error& e) {
          b.failures.push_back({"bias_monthly", std::string(to_string(c)), e.code(), e.what()});
        }
      }
    } catch (const Error& e) {
      b.failures.push_back({"bias", "", e.code(), e.what()});
    }
  }

  if (sections & kStability) {
    try {
      b.stability = stability_screen(table, cfg.ingest.registry, cfg.analysis);
    } catch (const Error& e) {
      b.failures.push_back({"stability", "", e.code(), e.what()});
    }
    b.diversity_stability = detail::per_country<std::pair<std::string, TestResult>>(
        countries, threads, "diversity_stability", b.failures,
        [&](const std::string& c) { return std::make_pair(c, diversity_stability(table, c, cfg.analysis)); });
  }

  if (sections & kDiversity) {
    b.series = detail::per_country<HhiSeries>(countries, threads, "hhi_series", b.failures, [&](const std::string& c) {
      return hhi_series(table, c, cfg.analysis.min_support);
    });
    b.hhi_choropleth = detail::per_country<std::pair<std::string, double>>(
        countries, threads, "hhi_baseline", b.failures,
        [&](const std::string& c) { return std::make_pair(c, hhi_baseline(table, c, table.months(c)).value); });
  }

  if (sections & (kShift | kAttribution)) {
    b.shifts = detail::per_country<ShiftEntry>(countries, threads, "shift", b.failures, [&](const std::string& c) {
      return detect_shift(table, c, cfg.windows, cfg.analysis);
    });
    if (cfg.multiple_comparison == MultipleComparison::BenjaminiHochberg && !b.shifts.empty()) {
      std::vector<double> p;
      for (const auto& e : b.shifts) p.push_back(e.test.p_value);
      const auto adjusted = benjamini_hochberg(p);
      for (std::size_t i = 0; i < b.shifts.size(); ++i) {
        b.shifts[i].test.p_value = adjusted[i];
        b.shifts[i].test.significance = classify(adjusted[i]);
      }
    }
  }

  if (sections & kAttribution) {
    std::vector<std::string> significant;
    for (const auto& e : b.shifts)
      if (e.test.significant_at(cfg.alpha())) significant.push_back(e.country);
    auto lists = detail::per_country<std::vector<AttributionEntry>>(
        significant, threads, "attribution", b.failures, [&](const std::string& c) {
          return attribute_languages(table, c, cfg.windows, cfg.analysis.attribution_threshold, cfg.analysis);
        });
    for (auto& l : lists) b.attribution.insert(b.attribution.end(), l.begin(), l.end());
  }

  if (sections & kDid) {
    b.did = detail::per_country<DidEntry>(countries, threads, "did", b.failures, [&](const std::string& c) {
      return did_analyze(table, c, cfg.did, cfg.analysis, cfg.did_options);
    });
    try {
      if (!b.did.empty()) b.did_summary = did_summary(std::span<const DidEntry>(b.did));
    } catch (const Error& e) {
      b.failures.push_back({"did_summary", "", e.code(), e.what()});
    }
  }
  // failures are grouped by stage in execution order, countries sorted within a stage
  return b;
}

// Plain-text summary tables for reading at a terminal.
inline std::string render_report(const CountTable& table, const RunConfig& cfg, const AnalysisBundle& b) {
  std::ostringstream out;
  char line[256];
  if (!cfg.ingest.registry.empty()) {
    try {
      const auto rollup = region_shares(table, cfg.ingest.registry);
      std::map<std::string, std::uint64_t> n;
      for (const auto& [country, months] : table.data())
        for (const auto& [_, cell] : months) n[cfg.ingest.registry.region_or_throw(country)] += cell.total;
      out << "Distribution of data by region\n";
      std::snprintf(line, sizeof line, "%-24s %14s %8s\n", "Region", "N.", "Data");
      out << line;
      for (const auto& [region, share] : rollup.overall) {
        std::snprintf(line, sizeof line, "%-24s %14llu %8s\n", region.c_str(),
                      static_cast<unsigned long long>(n[region]), text::fmt_percent(share, 1).c_str());
        out << line;
      }
      std::snprintf(line, sizeof line, "%-24s %14llu %8s\n\n", "Total",
                    static_cast<unsigned long long>(table.grand_total()), "100%");
      out << line;
    } catch (const Error&) {
      out << "(region table unavailable: unmapped countries)\n\n";
    }
  }

  out << "Language distributions by country (pooled over all months)\n";
  std::snprintf(line, sizeof line, "%-8s %7s  %s\n", "Country", "HHI", "L1 .. L5");
  out << line;
  for (const auto& country : table.countries()) {
    const auto dist = distribution(table, country, table.months(country));
    std::snprintf(line, sizeof line, "%-8s %7.3f ", country.c_str(), hhi(dist).value);
    out << line;
    const auto ranked = dist.ranked();
    for (std::size_t i = 0; i < std::min<std::size_t>(5, ranked.size()); ++i)
      out << ' ' << ranked[i].first << ' ' << text::fmt_percent(ranked[i].second, 1);
    out << '\n';
  }
  out << '\n';

  if (!b.shifts.empty()) {
    out << "Change in diversity, treatment vs baseline\n";
    std::snprintf(line, sizeof line, "%-8s %12s %-20s %-18s %9s %9s\n", "Country", "p", "Class", "Direction",
                  "HHI base", "HHI trt");
    out << line;
    for (const auto& e : b.shifts) {
      std::snprintf(line, sizeof line, "%-8s %12.4g %-20s %-18s %9.4f %9.4f\n", e.country.c_str(), e.test.p_value,
                    std::string(to_string(e.test.significance)).c_str(), std::string(to_string(e.direction)).c_str(),
                    e.hhi_baseline, e.hhi_treatment);
      out << line;
    }
    out << '\n';
  }
  if (!b.attribution.empty()) {
    out << "Language shares, normal vs restricted\n";
    std::snprintf(line, sizeof line, "%-8s %-9s %9s %9s %12s\n", "Country", "Language", "Normal", "COVID", "p");
    out << line;
    for (const auto& e : b.attribution) {
      std::snprintf(line, sizeof line, "%-8s %-9s %9s %9s %12.4g\n", e.country.c_str(), e.language.c_str(),
                    text::fmt_percent(e.baseline_share).c_str(), text::fmt_percent(e.treatment_share).c_str(),
                    e.test.p_value);
      out << line;
    }
    out << '\n';
  }
  if (!b.did.empty()) {
    out << "Difference-in-differences\n";
    for (const auto& e : b.did) {
      std::snprintf(line, sizeof line, "%-8s p_baseline=%-12.4g p_covid=%-12.4g %s%s\n", e.country.c_str(),
                    e.baseline_test.p_value, e.covid_test.p_value, std::string(to_string(e.classification)).c_str(),
                    e.narrowed ? " (narrowed)" : "");
      out << line;
    }
    if (b.did_summary)
      out << "attributed to the restriction period: " << text::fmt_percent(b.did_summary->attributed_fraction, 1)
          << " of " << b.did_summary->significant() << " changed countries\n";
  }
  return out.str();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
  auto out = text::open_output(path.string());
  out << content;
  if (!out) throw Error(ErrorCode::IoFailure, "failed writing '" + path.string() + "'");
}

template <typename Writer>
void write_file(const std::filesystem::path& path, Writer&& writer) {
  auto out = text::open_output(path.string());
  writer(out);
  if (!out) throw Error(ErrorCode::IoFailure, "failed writing '" + path.string() + "'");
}

inline void write_bundle(const CountTable& table, const RunConfig& cfg, const AnalysisBundle& b,
                         const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  if (b.bias) {
    write_file(dir / "bias_report.txt", [&](std::ostream& o) { write_bias_report_text(o, *b.bias); });
    write_file(dir / "bias_report.csv", [&](std::ostream& o) { write_bias_report_csv(o, *b.bias); });
    write_file(dir / "bias_monthly.csv", [&](std::ostream& o) { write_monthly_correlation_csv(o, *b.bias); });
  }
  if (b.sections & kStability) {
    if (b.stability) {
      write_file(dir / "stability_regions.csv", [&](std::ostream& o) { write_stability(o, b.stability->regions, "region"); });
      write_file(dir / "stability_countries.csv",
                 [&](std::ostream& o) { write_stability(o, b.stability->countries, "country"); });
    }
    write_file(dir / "diversity_stability.csv", [&](std::ostream& o) {
      o << "country,p,class,t,df\n";
      for (const auto& [c, t] : b.diversity_stability)
        o << c << ',' << text::fmt_double(t.p_value) << ',' << to_string(t.significance) << ','
          << text::fmt_double(t.t_statistic) << ',' << text::fmt_double(t.degrees_of_freedom) << '\n';
    });
  }
  if (b.sections & kDiversity) {
    write_file(dir / "hhi_series.csv", [&](std::ostream& o) {
      write_hhi_series_header(o);
      for (const auto& s : b.series) write_hhi_series(o, s);
    });
    write_file(dir / "hhi_choropleth.csv", [&](std::ostream& o) {
      o << "country,value\n";
      for (const auto& [c, v] : b.hhi_choropleth) o << c << ',' << text::fmt_double(v) << '\n';
    });
  }
  if (b.sections & kShift) {
    write_file(dir / "shift_report.csv", [&](std::ostream& o) { write_shift_report(o, b.shifts); });
    write_file(dir / "shift_choropleth.csv", [&](std::ostream& o) { write_shift_choropleth(o, b.shifts); });
  }
  if (b.sections & kAttribution)
    write_file(dir / "attribution.csv", [&](std::ostream& o) { write_attribution(o, b.attribution); });
  if (b.sections & kDid) {
    write_file(dir / "did_report.csv", [&](std::ostream& o) { write_did_report(o, b.did); });
    if (b.did_summary) write_file(dir / "did_summary.txt", [&](std::ostream& o) { write_did_summary(o, *b.did_summary); });
  }
  write_file(dir / "failures.csv", [&](std::ostream& o) {
    o << "stage,country,error,message\n";
    for (const auto& f : b.failures)
      o << f.stage << ',' << f.country << ',' << to_string(f.code) << ',' << text::csv_field(f.message) << '\n';
  });
  write_text_file(dir / "report.txt", render_report(table, cfg, b));
}

// ---- command entry points -------------------------------------------------

inline IngestOutcome cmd_ingest(const RunConfig& cfg) {
  if (cfg.paths.corpus.empty()) throw Error(ErrorCode::ConfigError, "no corpus files configured");
  for (const auto& f : cfg.paths.corpus)
    if (!std::filesystem::exists(f)) throw Error(ErrorCode::PathNotFound, "corpus file '" + f + "' does not exist");
  if (cfg.ingest.registry.empty()) throw Error(ErrorCode::ConfigError, "no country registry configured");
  auto outcome = ingest_files(cfg.paths.corpus, cfg.ingest, cfg.threads);
  const std::filesystem::path dir(cfg.output_dir);
  std::filesystem::create_directories(dir);
  write_file(dir / "count_table.csv", [&](std::ostream& o) { outcome.table.write(o); });
  write_file(dir / "ingest_stats.txt", [&](std::ostream& o) { outcome.stats.write(o); });
  return outcome;
}

inline CountTable load_count_table(const RunConfig& cfg) {
  const auto path = cfg.count_table_path();
  if (!std::filesystem::exists(path)) throw Error(ErrorCode::PathNotFound, "count table '" + path + "' does not exist");
  return CountTable::load(path);
}

inline AnalysisBundle cmd_analyze(const RunConfig& cfg, unsigned sections = kAllSections) {
  const auto table = load_count_table(cfg);
  auto bundle = analyze(table, cfg, sections);
  write_bundle(table, cfg, bundle, cfg.output_dir);
  return bundle;
}

inline void cmd_report(const RunConfig& cfg) {
  const auto table = load_count_table(cfg);
  const auto bundle = analyze(table, cfg, kAllSections);
  std::filesystem::create_directories(cfg.output_dir);
  write_text_file(std::filesystem::path(cfg.output_dir) / "report.txt", render_report(table, cfg, bundle));
}

inline void cmd_synth(const Scenario& scenario, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto records = text::open_output((dir / "corpus.txt").string());
  auto manifest = text::open_output((dir / "manifest.csv").string());
  generate(scenario, records, manifest);
  if (!records || !manifest) throw Error(ErrorCode::IoFailure, "failed writing synthetic corpus");
}

}  // namespace lingdiv

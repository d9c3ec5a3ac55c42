#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "lingdiv/bias.hpp"
#include "lingdiv/corpus.hpp"
#include "lingdiv/did.hpp"
#include "lingdiv/error.hpp"
#include "lingdiv/month.hpp"
#include "lingdiv/shift.hpp"
#include "lingdiv/synth.hpp"

namespace lingdiv {

enum class MultipleComparison { None, BenjaminiHochberg };

struct RunPaths {
  std::vector<std::string> corpus;
  std::string registry;
  std::string demographics;
  std::string languages;
  std::string count_table;
};

struct RunConfig {
  RunPaths paths;
  std::string output_dir = "out";
  IngestConfig ingest;
  WindowPair windows = WindowPair::pandemic_default();
  DidWindows did;
  AnalysisOptions analysis;
  DidOptions did_options;
  BiasOptions bias{{"USA", "CHN", "IND"}, false, false};
  MultipleComparison multiple_comparison = MultipleComparison::None;
  unsigned threads = 1;

  double alpha() const { return did_options.alpha; }

  // Where analysis commands read the count table from.
  std::string count_table_path() const {
    if (!paths.count_table.empty()) return paths.count_table;
    return (std::filesystem::path(output_dir) / "count_table.csv").string();
  }
};

namespace detail {

using json = nlohmann::json;

[[noreturn]] inline void config_error(const std::string& what) { throw Error(ErrorCode::ConfigError, what); }

// A month set is either an inclusive {"from": "YYYY-MM", "to": "YYYY-MM"}
// object or an explicit array of "YYYY-MM" strings.
inline MonthSet parse_month_set(const json& j, const std::string& what) {
  if (j.is_object()) {
    if (!j.contains("from") || !j.contains("to")) config_error(what + ": expected {\"from\", \"to\"}");
    return month_span(YearMonth::parse_or_throw(j.at("from").get<std::string>()),
                      YearMonth::parse_or_throw(j.at("to").get<std::string>()));
  }
  if (j.is_array()) {
    MonthSet out;
    for (const auto& m : j) out.insert(YearMonth::parse_or_throw(m.get<std::string>()));
    return out;
  }
  config_error(what + ": expected a month range object or a month list");
}

inline MonthRange parse_month_range(const json& j, const std::string& what) {
  if (!j.is_object() || !j.contains("from") || !j.contains("to")) config_error(what + ": expected {\"from\", \"to\"}");
  return {YearMonth::parse_or_throw(j.at("from").get<std::string>()),
          YearMonth::parse_or_throw(j.at("to").get<std::string>())};
}

inline std::string resolve(const std::filesystem::path& base, const std::string& p) {
  if (p.empty()) return p;
  std::filesystem::path path(p);
  return path.is_absolute() ? p : (base / path).lexically_normal().string();
}

inline void require_exists(const std::string& path, const std::string& what) {
  if (!path.empty() && !std::filesystem::exists(path))
    throw Error(ErrorCode::PathNotFound, what + " '" + path + "' does not exist");
}

inline json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::PathNotFound, "cannot open '" + path + "'");
  try {
    return json::parse(in, nullptr, true, true);
  } catch (const json::exception& e) {
    config_error(path + ": " + e.what());
  }
}

}  // namespace detail

// Parses a run configuration. Relative paths resolve against `base_dir`;
// every referenced input must exist, except the count table, which the
// ingest command produces.
inline RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  using detail::config_error;
  RunConfig cfg;
  try {
    if (j.contains("paths")) {
      const auto& p = j.at("paths");
      if (p.contains("corpus")) {
        if (p.at("corpus").is_string())
          cfg.paths.corpus.push_back(detail::resolve(base_dir, p.at("corpus").get<std::string>()));
        else
          for (const auto& c : p.at("corpus")) cfg.paths.corpus.push_back(detail::resolve(base_dir, c.get<std::string>()));
      }
      cfg.paths.registry = detail::resolve(base_dir, p.value("registry", ""));
      cfg.paths.demographics = detail::resolve(base_dir, p.value("demographics", ""));
      cfg.paths.languages = detail::resolve(base_dir, p.value("languages", ""));
      cfg.paths.count_table = detail::resolve(base_dir, p.value("count_table", ""));
    }
    if (j.contains("output")) cfg.output_dir = detail::resolve(base_dir, j.at("output").get<std::string>());
    if (j.contains("threads")) cfg.threads = j.at("threads").get<unsigned>();

    if (j.contains("ingest")) {
      const auto& in = j.at("ingest");
      cfg.ingest.min_chars = in.value("min_chars", cfg.ingest.min_chars);
      cfg.ingest.drop_retweets = in.value("drop_retweets", cfg.ingest.drop_retweets);
      if (in.contains("date_range")) cfg.ingest.date_range = detail::parse_month_range(in.at("date_range"), "ingest.date_range");
    }
    if (j.contains("windows")) {
      const auto& w = j.at("windows");
      if (w.contains("treatment")) cfg.windows.treatment = detail::parse_month_set(w.at("treatment"), "windows.treatment");
      if (w.contains("baseline")) cfg.windows.baseline = detail::parse_month_set(w.at("baseline"), "windows.baseline");
    }
    if (j.contains("did")) {
      const auto& d = j.at("did");
      if (d.contains("months_of_year")) cfg.did.months_of_year = d.at("months_of_year").get<std::vector<int>>();
      if (d.contains("years")) {
        auto years = d.at("years").get<std::vector<int>>();
        if (years.size() != 3) config_error("did.years must list three years");
        cfg.did.year_pre = years[0];
        cfg.did.year_mid = years[1];
        cfg.did.year_post = years[2];
      }
    }
    if (j.contains("thresholds")) {
      const auto& t = j.at("thresholds");
      cfg.analysis.min_support = t.value("min_support", cfg.analysis.min_support);
      cfg.analysis.attribution_threshold = t.value("attribution", cfg.analysis.attribution_threshold);
      cfg.did_options.amplification_ratio = t.value("amplification_ratio", cfg.did_options.amplification_ratio);
      cfg.did_options.alpha = t.value("alpha", cfg.did_options.alpha);
    }
    if (j.contains("flags")) {
      const auto& f = j.at("flags");
      const auto test = f.value("test", std::string("welch"));
      if (test == "welch") cfg.analysis.variant = TestVariant::Welch;
      else if (test == "student") cfg.analysis.variant = TestVariant::Student;
      else config_error("flags.test must be 'welch' or 'student'");
      cfg.bias.log_transform = f.value("log_transform", false);
      cfg.bias.detect_outliers = f.value("auto_outliers", false);
      const auto mc = f.value("multiple_comparison", std::string("none"));
      if (mc == "none") cfg.multiple_comparison = MultipleComparison::None;
      else if (mc == "bh") cfg.multiple_comparison = MultipleComparison::BenjaminiHochberg;
      else config_error("flags.multiple_comparison must be 'none' or 'bh'");
    }
    if (j.contains("bias") && j.at("bias").contains("exclusions"))
      cfg.bias.exclusions = j.at("bias").at("exclusions").get<std::vector<std::string>>();
    if (j.contains("stability_split")) {
      const auto& s = j.at("stability_split");
      cfg.analysis.stability_split = std::make_pair(detail::parse_month_set(s.at("first"), "stability_split.first"),
                                                    detail::parse_month_set(s.at("second"), "stability_split.second"));
    }
  } catch (const nlohmann::json::exception& e) {
    config_error(std::string("run config: ") + e.what());
  }

  if (cfg.analysis.attribution_threshold < 0.0 || cfg.analysis.attribution_threshold > 1.0)
    config_error("thresholds.attribution must lie in [0,1]");
  if (cfg.did_options.amplification_ratio < 1.0) config_error("thresholds.amplification_ratio must be >= 1");
  if (!(cfg.did_options.alpha > 0.0 && cfg.did_options.alpha < 1.0)) config_error("thresholds.alpha must lie in (0,1)");
  if (cfg.threads == 0) cfg.threads = 1;
  cfg.ingest.validate();
  cfg.windows.validate();
  cfg.did.validate();

  for (const auto& c : cfg.paths.corpus) detail::require_exists(c, "corpus file");
  detail::require_exists(cfg.paths.registry, "registry");
  detail::require_exists(cfg.paths.demographics, "demographics");
  detail::require_exists(cfg.paths.languages, "language list");
  if (!cfg.paths.registry.empty()) cfg.ingest.registry = CountryRegistry::load(cfg.paths.registry);
  if (!cfg.paths.languages.empty()) cfg.ingest.languages = LanguageSet::load(cfg.paths.languages);
  return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
  return parse_run_config(detail::read_json(path), std::filesystem::path(path).parent_path());
}

// Scenario schema: see README ("Scenario files").
inline Scenario parse_scenario(const nlohmann::json& j) {
  using detail::config_error;
  Scenario s;
  try {
    s.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("date_range")) s.date_range = detail::parse_month_range(j.at("date_range"), "date_range");
    if (j.contains("restriction_months"))
      s.restriction_months = detail::parse_month_set(j.at("restriction_months"), "restriction_months");
    s.restriction_factor = j.value("restriction_factor", 0.0);
    for (const auto& c : j.at("countries")) {
      PopulationSpec spec;
      spec.country = c.at("country").get<std::string>();
      spec.seed = c.value("seed", std::uint64_t{0});
      for (const auto& g : c.at("groups")) {
        PopulationGroup group;
        group.label = g.value("label", std::string("group"));
        group.nonlocal = g.value("nonlocal", false);
        group.volume = g.at("volume").get<double>();
        group.languages = g.at("languages").get<std::map<std::string, double>>();
        if (g.contains("seasonal")) {
          auto f = g.at("seasonal").get<std::vector<double>>();
          if (f.size() != 12) config_error("seasonal must list 12 factors");
          std::copy(f.begin(), f.end(), group.seasonal.begin());
        }
        if (g.contains("volume_by_month"))
          for (const auto& [m, v] : g.at("volume_by_month").items())
            group.volume_overrides[YearMonth::parse_or_throw(m)] = v.get<double>();
        spec.groups.push_back(std::move(group));
      }
      s.populations.push_back(std::move(spec));
    }
  } catch (const nlohmann::json::exception& e) {
    config_error(std::string("scenario: ") + e.what());
  }
  s.validate();
  return s;
}

inline Scenario load_scenario(const std::string& path) { return parse_scenario(detail::read_json(path)); }

}  // namespace lingdiv

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lingdiv/config.hpp"
#include "lingdiv/pipeline.hpp"

namespace {

void print_error(std::string_view code, std::string_view message) {
  std::cerr << "error=" << code << "\tmessage=" << lingdiv::escape_kv_value(message) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Geographic linguistic diversity and shift detection"};
  app.require_subcommand(1);

  std::string config_path, output_dir, scenario_path;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::vector<std::string> inputs;
  std::string table_path;

  app.add_option("--config", config_path, "Run configuration (JSON)");
  app.add_option("--output", output_dir, "Output directory");
  app.add_option("--seed", seed, "Seed override for synth");
  app.add_option("--threads", threads, "Worker threads");

  auto* ingest = app.add_subcommand("ingest", "Validate record files and build the count table");
  ingest->add_option("inputs", inputs, "Record files (override paths.corpus)");
  struct AnalysisCommand {
    const char* name;
    const char* help;
    unsigned sections;
  };
  const std::vector<AnalysisCommand> analysis_commands = {
      {"analyze", "Run every analysis and write the full report bundle", lingdiv::kAllSections},
      {"shift", "Treatment vs baseline diversity shift per country", lingdiv::kShift},
      {"attribute", "Per-language attribution for countries with a significant shift",
       lingdiv::kShift | lingdiv::kAttribution},
      {"did", "Difference-in-differences classification", lingdiv::kDid},
      {"bias", "Volume vs demographic correlations", lingdiv::kBias},
      {"stability", "Volume-share and diversity stability screens", lingdiv::kStability | lingdiv::kDiversity},
  };
  std::vector<std::pair<CLI::App*, unsigned>> analysis_subs;
  for (const auto& c : analysis_commands) {
    auto* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--table", table_path, "Count table (overrides paths.count_table)");
    analysis_subs.emplace_back(sub, c.sections);
  }
  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus and ground-truth manifest");
  synth->add_option("--scenario", scenario_path, "Scenario file (JSON); defaults to --config");
  auto* report = app.add_subcommand("report", "Write the human-readable report");
  report->add_option("--table", table_path, "Count table (overrides paths.count_table)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      const std::string path = scenario_path.empty() ? config_path : scenario_path;
      if (path.empty()) throw lingdiv::Error(lingdiv::ErrorCode::ConfigError, "synth needs --scenario or --config");
      auto scenario = lingdiv::load_scenario(path);
      if (seed) scenario.seed = *seed;
      lingdiv::cmd_synth(scenario, output_dir.empty() ? "out" : output_dir);
      return EXIT_SUCCESS;
    }

    lingdiv::RunConfig cfg = config_path.empty() ? lingdiv::parse_run_config(nlohmann::json::object(), ".")
                                                 : lingdiv::load_run_config(config_path);
    if (!output_dir.empty()) cfg.output_dir = output_dir;
    if (threads) cfg.threads = std::max(1u, *threads);
    if (!table_path.empty()) cfg.paths.count_table = table_path;

    if (ingest->parsed()) {
      if (!inputs.empty()) cfg.paths.corpus = inputs;
      const auto outcome = lingdiv::cmd_ingest(cfg);
      outcome.stats.write(std::cout);
      return outcome.stats.complete ? EXIT_SUCCESS : 3;
    }
    if (report->parsed()) {
      lingdiv::cmd_report(cfg);
      return EXIT_SUCCESS;
    }
    for (const auto& [sub, sections] : analysis_subs) {
      if (!sub->parsed()) continue;
      if ((sections & lingdiv::kBias) && sections != lingdiv::kAllSections && cfg.paths.demographics.empty())
        throw lingdiv::Error(lingdiv::ErrorCode::ConfigError, "bias needs paths.demographics");
      const auto bundle = lingdiv::cmd_analyze(cfg, sections);
      std::cout << "countries_failed=" << bundle.failures.size() << '\n';
      return EXIT_SUCCESS;
    }
  } catch (const lingdiv::Error& e) {
    print_error(lingdiv::to_string(e.code()), e.what());
    return 2;
  } catch (const std::exception& e) {
    print_error("Internal", e.what());
    return 2;
  }
  return EXIT_FAILURE;
}

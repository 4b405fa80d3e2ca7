#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "rtlmut/campaign.hpp"
#include "rtlmut/errors.hpp"
#include "rtlmut/text.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitBaseline = 2;
constexpr int kExitRuntime = 3;

struct RunArgs {
  std::string config_path;
  std::string mode;
  std::string parallelism;
  std::optional<int> scenarios;
  std::optional<int> max_retries;
  std::string endpoint;
  bool dry_run = false;
};

int cmd_run(const RunArgs& args) {
  rtlmut::CliOverrides overrides;
  if (!args.mode.empty()) overrides.mode = rtlmut::mode_from_string(args.mode);
  if (!args.parallelism.empty())
    overrides.parallelism = rtlmut::parallelism_from_string(args.parallelism);
  overrides.scenarios_target = args.scenarios;
  overrides.max_retries = args.max_retries;
  if (!args.endpoint.empty()) overrides.backend_endpoint = args.endpoint;

  rtlmut::CampaignConfig config = rtlmut::load_config(args.config_path, overrides);

  if (args.dry_run) {
    auto plan = rtlmut::plan_workers(config);
    std::cout << "mode: " << rtlmut::mode_to_string(config.mode) << "\n";
    std::cout << "parallelism: " << rtlmut::parallelism_to_string(config.parallelism) << " ("
              << plan.size() << " worker" << (plan.size() == 1 ? "" : "s") << ")\n";
    std::cout << "backend: " << config.backend.kind << "\n";
    std::cout << "scenario quota per module: " << config.scenarios_target << "\n";
    std::cout << "mutations per scenario: " << config.mutations_per_scenario
              << ", retries: " << config.max_retries << "\n";
    std::cout << "output: " << config.output_dir << "\n";
    for (const auto& design : config.designs) {
      std::cout << "design " << design.design_id << "\n";
      for (const auto& module : design.modules)
        std::cout << "  module " << module.module_id << " <- " << module.path
                  << (module.explicit_regions.empty() ? "" : " (engineer regions)") << "\n";
    }
    return kExitOk;
  }

  rtlmut::CampaignOutcome outcome = rtlmut::run_campaign(config);
  std::cout << rtlmut::render_report_text(outcome.report);
  std::cout << "\nreport: " << outcome.report_text_path << "\n";
  return outcome.any_worker_aborted ? kExitRuntime : kExitOk;
}

int cmd_split(const std::string& file, const std::string& id, const rtlmut::SplitterConfig& splitter,
              const std::string& out_path) {
  std::string source = rtlmut::read_file(file);
  auto backend = rtlmut::make_mock_backend();
  rtlmut::PromptLibrary prompts;
  rtlmut::ModulePartition partition =
      rtlmut::partition_module(source, id.empty() ? file : id, splitter, *backend, prompts);
  std::string doc = rtlmut::partition_to_json(partition).dump(2) + "\n";
  if (out_path.empty())
    std::cout << doc;
  else
    rtlmut::write_file(out_path, doc);
  return kExitOk;
}

int cmd_validate(const std::string& file, const std::string& partition_path) {
  std::string source = rtlmut::read_file(file);
  rtlmut::ModulePartition partition = rtlmut::partition_from_json(
      nlohmann::json::parse(rtlmut::read_file(partition_path)));
  auto defects = rtlmut::validate_partition(partition, source);
  if (defects.empty()) {
    std::cout << "partition covers all " << partition.total_lines << " lines exactly\n";
    return kExitOk;
  }
  for (const auto& defect : defects) std::cout << defect.detail << "\n";
  return kExitConfig;
}

int cmd_cache(const std::string& cache_path, const std::string& module_filter, bool as_json) {
  auto entries = rtlmut::MutationCache::load_entries(cache_path);
  rtlmut::OutcomeCounts counts;
  std::map<std::string, rtlmut::OutcomeCounts> by_module;
  for (const auto& entry : entries) {
    if (!module_filter.empty() && entry.module_id != module_filter) continue;
    counts.add(entry.outcome);
    by_module[entry.module_id].add(entry.outcome);
  }
  if (as_json) {
    nlohmann::json doc;
    doc["entries"] = nlohmann::json::array();
    for (const auto& entry : entries) {
      if (!module_filter.empty() && entry.module_id != module_filter) continue;
      doc["entries"].push_back(rtlmut::entry_to_json(entry));
    }
    std::cout << doc.dump(2) << "\n";
    return kExitOk;
  }
  std::cout << "entries: " << counts.total() << " (" << counts.detected << " detected, "
            << counts.syntax_failure << " syntax failure, " << counts.undetected
            << " undetected, " << counts.pending << " pending)\n";
  for (const auto& [module_id, c] : by_module)
    std::cout << "  " << module_id << ": " << c.total() << " (" << c.detected << "/"
              << c.syntax_failure << "/" << c.undetected << "/" << c.pending << ")\n";
  return kExitOk;
}

int cmd_report(const std::string& config_path, std::string cache_path, std::string scenarios_path,
               bool as_json, bool as_csv) {
  std::map<std::string, std::vector<rtlmut::MtrRange>> mtrs;
  int max_retries = 2;
  int window = 25;
  if (!config_path.empty()) {
    rtlmut::CampaignConfig config = rtlmut::load_config(config_path);
    if (cache_path.empty()) cache_path = config.cache_path;
    if (scenarios_path.empty()) scenarios_path = config.scenario_log_path;
    max_retries = config.max_retries;
    window = config.evolution_window;
    for (const auto& design : config.designs)
      for (const auto& module : design.modules)
        for (const auto& range : module.metric_mtrs)
          mtrs[design.design_id].push_back({module.module_id, range});
  }
  if (cache_path.empty()) throw rtlmut::ConfigError("report needs --cache or --config");

  auto entries = rtlmut::MutationCache::load_entries(cache_path);
  std::vector<rtlmut::BugScenarioRecord> scenarios;
  if (!scenarios_path.empty()) scenarios = rtlmut::ScenarioLog::load(scenarios_path);

  rtlmut::CampaignReport report =
      rtlmut::build_report(entries, scenarios, mtrs, max_retries, window, 0.0);
  if (as_csv)
    std::cout << rtlmut::evolution_csv(report);
  else if (as_json)
    std::cout << rtlmut::report_to_json(report).dump(2) << "\n";
  else
    std::cout << rtlmut::render_report_text(report);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"closed-loop RTL mutation campaigns"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "run a mutation campaign from a config file");
  run->add_option("--config", run_args.config_path, "campaign config JSON")->required();
  run->add_option("--mode", run_args.mode, "generation | coverage_assessment");
  run->add_option("--parallelism", run_args.parallelism,
                  "sequential | inter_design | intra_design");
  int scenarios_opt = -1;
  run->add_option("--scenarios", scenarios_opt, "successful-scenario quota per module");
  int retries_opt = -1;
  run->add_option("--max-retries", retries_opt, "scenario retry budget");
  run->add_option("--endpoint", run_args.endpoint, "override the backend endpoint");
  run->add_flag("--dry-run", run_args.dry_run, "print the campaign plan and exit");

  std::string split_file, split_id, split_out;
  rtlmut::SplitterConfig splitter;
  auto* split = app.add_subcommand("split", "partition one source file into regions");
  split->add_option("--file", split_file, "source file")->required();
  split->add_option("--id", split_id, "module id (defaults to the file path)");
  split->add_option("--chunk-size", splitter.chunk_size_lines, "lines per splitter chunk");
  split->add_option("--aux-lines", splitter.auxiliary_lines, "look-ahead lines per chunk");
  split->add_option("--context-window", splitter.context_window_lines,
                    "largest file split in one piece");
  split->add_option("--out", split_out, "write the partition JSON here instead of stdout");

  std::string validate_file, validate_partition;
  auto* validate = app.add_subcommand("validate", "check a partition against its source");
  validate->add_option("--file", validate_file, "source file")->required();
  validate->add_option("--partition", validate_partition, "partition JSON")->required();

  std::string cache_path, cache_module;
  bool cache_json = false;
  auto* cache = app.add_subcommand("cache", "inspect a mutation cache log");
  cache->add_option("--cache", cache_path, "cache JSONL file")->required();
  cache->add_option("--module", cache_module, "only this module");
  cache->add_flag("--json", cache_json, "dump entries as JSON");

  std::string report_config, report_cache, report_scenarios;
  bool report_json = false, report_csv = false;
  auto* report = app.add_subcommand("report", "rebuild the metrics report from logs");
  report->add_option("--config", report_config, "campaign config (for paths and tagged regions)");
  report->add_option("--cache", report_cache, "cache JSONL file");
  report->add_option("--scenarios", report_scenarios, "scenario JSONL file");
  report->add_flag("--json", report_json, "emit JSON");
  report->add_flag("--csv", report_csv, "emit the accuracy evolution as CSV");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      if (scenarios_opt >= 0) run_args.scenarios = scenarios_opt;
      if (retries_opt >= 0) run_args.max_retries = retries_opt;
      return cmd_run(run_args);
    }
    if (split->parsed()) return cmd_split(split_file, split_id, splitter, split_out);
    if (validate->parsed()) return cmd_validate(validate_file, validate_partition);
    if (cache->parsed()) return cmd_cache(cache_path, cache_module, cache_json);
    if (report->parsed())
      return cmd_report(report_config, report_cache, report_scenarios, report_json, report_csv);
  } catch (const rtlmut::BaselineGateFailed& e) {
    std::cerr << "baseline gate: " << e.what() << "\n";
    return kExitBaseline;
  } catch (const rtlmut::ConfigError& e) {
    std::cerr << "config: " << e.what() << "\n";
    return kExitConfig;
  } catch (const rtlmut::IndexMalformed& e) {
    std::cerr << "catalog: " << e.what() << "\n";
    return kExitConfig;
  } catch (const rtlmut::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

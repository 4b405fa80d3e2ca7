#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rtlmut/metrics.hpp"
#include "rtlmut/partition.hpp"

namespace rtlmut {

enum class CampaignMode { Generation, CoverageAssessment };
enum class Parallelism { Sequential, InterDesign, IntraDesign };

std::string mode_to_string(CampaignMode mode);
CampaignMode mode_from_string(const std::string& s);
std::string parallelism_to_string(Parallelism p);
Parallelism parallelism_from_string(const std::string& s);

struct ModuleFileConfig {
  std::string module_id;
  std::string path;  // relative to the config file unless absolute
  // Engineer-provided mutation target regions. When present, partitioning is
  // skipped and these ranges become the partition.
  std::vector<ExplicitRegion> explicit_regions;
  // Engineer-tagged regions used only for the spread / hit-rate metrics.
  std::vector<LineRange> metric_mtrs;
};

struct DesignUnitConfig {
  std::string design_id;
  std::vector<ModuleFileConfig> modules;
  nlohmann::json evaluator;  // passed to make_evaluator, one instance per module
};

struct BackendSettings {
  std::string kind = "mock";  // "mock" | "remote"
  std::string endpoint = "https://api.openai.com/v1";
  std::string model = "gpt-4o-mini";
  double temperature = 0.7;
  double timeout_seconds = 60.0;
  std::string api_key_env = "RTLMUT_API_KEY";
  int max_retries_on_malformed = 2;
  std::string prompt_dir;  // optional template override directory
  bool corrupt_injections = false;  // mock only
};

struct CatalogSettings {
  std::string default_path;
  std::map<std::string, std::string> by_design;
  std::map<std::string, std::string> by_module;  // key "design/module"
};

struct CampaignConfig {
  CampaignMode mode = CampaignMode::Generation;
  Parallelism parallelism = Parallelism::Sequential;
  int mutations_per_scenario = 2;
  int max_retries = 2;
  // Successful-scenario quota per module (completed scenarios in
  // coverage-assessment mode).
  int scenarios_target = 1;
  int consecutive_abandonment_limit = 10;
  int duplicate_regeneration_limit = 5;
  int evolution_window = 25;
  std::string output_dir = "rtlmut-out";
  std::string cache_path;  // defaults to <output_dir>/cache.jsonl
  std::string scenario_log_path;  // defaults to <output_dir>/scenarios.jsonl
  SplitterConfig splitter;
  BackendSettings backend;
  CatalogSettings catalog;
  std::vector<DesignUnitConfig> designs;

  std::string base_dir;   // directory of the config file; resolves relative paths
  nlohmann::json raw;     // verbatim document, archived into the output dir

  std::string resolve_path(const std::string& path) const;
};

struct CliOverrides {
  std::optional<CampaignMode> mode;
  std::optional<Parallelism> parallelism;
  std::optional<int> scenarios_target;
  std::optional<int> max_retries;
  std::optional<std::string> backend_endpoint;
};

// Parses, defaults, applies overrides, and validates. Diagnostics carry the
// offending field path. Referenced files (module sources, catalogs, prompt
// templates) must exist.
CampaignConfig load_config(const std::string& path, const CliOverrides& overrides = {});
CampaignConfig config_from_json(const nlohmann::json& doc, const std::string& base_dir,
                                const CliOverrides& overrides = {});

}  // namespace rtlmut

#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "rtlmut/agents.hpp"
#include "rtlmut/cache.hpp"
#include "rtlmut/catalog.hpp"
#include "rtlmut/config.hpp"
#include "rtlmut/evaluator.hpp"
#include "rtlmut/metrics.hpp"
#include "rtlmut/patch.hpp"

namespace rtlmut {

// Everything one worker needs to run scenarios against one module.
struct ModuleRun {
  std::string design_id;
  std::string module_id;
  std::string file;  // path relative to the workspace root
  ModulePartition partition;
  const MutationIndex* index = nullptr;
  bool coverage_mode = false;
};

struct ScenarioSettings {
  int mutations_per_scenario = 2;
  int max_retries = 2;
  int duplicate_regeneration_limit = 5;
  bool short_circuit = true;
  std::string archive_dir;  // successful snapshots land here when non-empty
};

// Drives Steps 1-5 for one bug scenario: generate N mutations (re-generating
// whole rounds on cache duplicates), record them Pending, evaluate, finalize
// every member entry with the scenario outcome, and leave the workspace
// byte-pristine whatever happens. Retries until success or the retry budget
// is spent; an exhausted budget returns an abandoned record.
BugScenarioRecord run_scenario(ModuleRun& run, const ScenarioSettings& settings,
                               MutationCache& cache, const AgentContext& agent_ctx,
                               Evaluator& evaluator, Workspace& ws,
                               const std::string& scenario_id);

struct WorkerReport {
  std::vector<BugScenarioRecord> scenarios;
  bool aborted = false;
  std::string abort_reason;
  double wall_seconds = 0.0;
  std::vector<std::string> design_ids;
};

struct CampaignOutcome {
  CampaignReport report;
  std::vector<BugScenarioRecord> scenarios;
  bool any_worker_aborted = false;
  std::string report_text_path;
  std::string report_json_path;
};

// Runs a full campaign per the config: per-design baseline gates, worker
// dispatch per the parallelism mode (workers share only the cache), report
// assembly, and output/archive files under config.output_dir.
CampaignOutcome run_campaign(const CampaignConfig& config);

// Work items are (design, module) pairs; Sequential runs them in one worker,
// InterDesign one worker per design, IntraDesign one worker per module.
std::vector<std::vector<std::size_t>> plan_workers(const CampaignConfig& config);

}  // namespace rtlmut

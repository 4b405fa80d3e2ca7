#include "rtlmut/campaign.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "rtlmut/errors.hpp"
#include "rtlmut/text.hpp"

namespace fs = std::filesystem;

namespace rtlmut {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string sanitize_id(std::string id) {
  for (char& c : id)
    if (c == '/' || c == '#' || c == ' ') c = '_';
  return id;
}

void refresh_counts(ModulePartition& partition, const MutationCache& cache,
                    const std::string& module_id) {
  auto stats = cache.region_stats(module_id);
  for (auto& region : partition.regions) {
    auto it = stats.find(region.index);
    region.mutation_count = it == stats.end() ? 0 : it->second.recorded;
  }
}

struct Candidate {
  MutationEntry entry;
  PatchRecord patch;
};

}  // namespace

BugScenarioRecord run_scenario(ModuleRun& run, const ScenarioSettings& settings,
                               MutationCache& cache, const AgentContext& agent_ctx,
                               Evaluator& evaluator, Workspace& ws,
                               const std::string& scenario_id) {
  BugScenarioRecord rec;
  rec.scenario_id = scenario_id;
  rec.design_id = run.design_id;
  rec.module_id = run.module_id;

  const int max_attempts = settings.max_retries + 1;
  // Rolled-back duplicate rounds land here so later rounds and attempts see
  // them as prior attempts and steer toward fresh regions, classes, and
  // targets instead of replaying the same choice.
  std::vector<MutationEntry> burned;
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    rec.attempt_number = attempt;

    // -- generation: N structurally new mutations, applied incrementally ----
    std::vector<Candidate> candidates;
    auto rollback_candidates = [&]() {
      std::vector<PatchRecord> patches;
      for (const auto& c : candidates) patches.push_back(c.patch);
      ws.rollback(patches);
      candidates.clear();
    };

    auto gen_start = Clock::now();
    bool generated = false;
    try {
      int dup_rounds = 0;
      for (;;) {
        refresh_counts(run.partition, cache, run.module_id);
        for (const auto& b : burned)
          for (auto& r : run.partition.regions)
            if (r.index == b.region_index) ++r.mutation_count;
        std::string file_text = ws.read(run.file);

        for (int k = 0; k < settings.mutations_per_scenario; ++k) {
          auto stats = cache.region_stats(run.module_id);
          for (const auto& c : candidates) ++stats[c.entry.region_index].recorded;
          for (const auto& b : burned) ++stats[b.region_index].recorded;

          RegionChoice region_choice =
              select_region(run.partition, stats, *run.index, run.coverage_mode, agent_ctx);
          const Region* region = run.partition.find_region(region_choice.region_index);

          file_text = ws.read(run.file);
          std::string region_source =
              slice_lines(file_text, region->start_line, region->end_line);

          RegionHistory history =
              cache.region_history(run.module_id, region->index, run.coverage_mode);
          for (const auto& c : candidates)
            if (c.entry.region_index == region->index) history.failed.push_back(c.entry);
          for (const auto& b : burned)
            if (b.region_index == region->index) history.failed.push_back(b);

          MutationChoice choice = select_mutation(region_source, *region, *run.index,
                                                  history, agent_ctx);
          const MutationSpec& spec = resolve_spec(*run.index, choice.class_id);
          InjectedMutation injected =
              inject_mutation(choice, region_source, *region, spec, agent_ctx);

          std::string target_text =
              slice_lines(file_text, choice.target_start_line, choice.target_end_line);

          Candidate candidate;
          candidate.entry.design_id = run.design_id;
          candidate.entry.module_id = run.module_id;
          candidate.entry.file = run.file;
          candidate.entry.region_index = region->index;
          candidate.entry.region_start_line = region->start_line;
          candidate.entry.region_end_line = region->end_line;
          candidate.entry.class_id = choice.class_id;
          candidate.entry.target_block = {choice.target_start_line, choice.target_end_line,
                                          target_text};
          candidate.entry.mutated_text = injected.mutated_text;
          candidate.entry.summary = injected.summary;
          candidate.entry.scenario_id = scenario_id;
          candidate.entry.attempt_number = attempt;

          candidate.patch =
              ws.apply_patch(run.file, choice.target_start_line, choice.target_end_line,
                             injected.mutated_text, target_text);
          // The next selection sees the file with this mutation applied, so
          // related mutations build on each other.
          candidates.push_back(std::move(candidate));

          for (auto& r : run.partition.regions)
            if (r.index == region->index) ++r.mutation_count;
        }

        int duplicates = 0;
        std::set<std::string> round_keys;
        for (const auto& c : candidates) {
          std::string fp = StructuralKey::from_entry(c.entry).fingerprint();
          if (cache.is_duplicate(StructuralKey::from_entry(c.entry)) || !round_keys.insert(fp).second)
            ++duplicates;
        }
        if (duplicates == 0) {
          generated = true;
          break;
        }

        rec.duplicates_regenerated += duplicates;
        for (const auto& c : candidates) burned.push_back(c.entry);
        rollback_candidates();
        if (++dup_rounds > settings.duplicate_regeneration_limit) break;
      }
    } catch (const SchemaViolation&) {
      rollback_candidates();
    } catch (const InvalidChoice&) {
      rollback_candidates();
    } catch (const UnknownClass&) {
      rollback_candidates();
    } catch (const NoOpMutation&) {
      rollback_candidates();
    } catch (const NoMutableRegion&) {
      rollback_candidates();
    }
    rec.generation_seconds += seconds_since(gen_start);

    if (!generated) {
      ws.verify_pristine();
      if (attempt == max_attempts) break;
      continue;
    }

    std::vector<MutationEntry> recorded;
    rec.mutation_entry_ids.clear();
    for (auto& c : candidates) {
      std::int64_t id = cache.record_attempt(c.entry);
      c.entry.entry_id = id;
      rec.mutation_entry_ids.push_back(id);
      recorded.push_back(c.entry);
    }

    // -- evaluation: compile + regression, with the infra-retry budget ------
    auto val_start = Clock::now();
    evaluator.begin_scenario(recorded);
    EvaluationOutcome outcome;
    bool evaluated = false;
    std::string infra_reason;
    for (int eval_try = 0; eval_try < 3 && !evaluated; ++eval_try) {
      try {
        CompileResult compiled = evaluator.compile(ws);
        std::vector<RegressionRecord> regression;
        if (compiled.ok) regression = evaluator.run_regression(ws, settings.short_circuit);
        outcome = classify(compiled, regression);
        evaluated = true;
      } catch (const InfraError& e) {
        infra_reason = e.what();
      }
    }
    rec.validation_seconds += seconds_since(val_start);

    if (!evaluated) {
      // Persistent infrastructure failure: the entries stay pending, the
      // workspace goes back to pristine, and the worker aborts.
      rollback_candidates();
      ws.verify_pristine();
      throw InfraError("evaluation of " + scenario_id + " kept failing: " + infra_reason);
    }

    Outcome entry_outcome = entry_outcome_for(outcome.outcome);
    for (std::int64_t id : rec.mutation_entry_ids) cache.update_outcome(id, entry_outcome);
    rec.final_outcome = entry_outcome;

    bool completed = entry_outcome == Outcome::Success ||
                     (run.coverage_mode && entry_outcome == Outcome::Undetected);
    if (completed && !settings.archive_dir.empty()) {
      nlohmann::json manifest;
      manifest["scenario"] = scenario_to_json(rec);
      manifest["entries"] = nlohmann::json::array();
      for (const auto& e : recorded) manifest["entries"].push_back(entry_to_json(e));
      manifest["evidence"] = outcome.evidence;
      ws.archive_snapshot(settings.archive_dir + "/" + sanitize_id(scenario_id), manifest);
    }

    rollback_candidates();
    ws.verify_pristine();

    if (completed) return rec;
    if (attempt == max_attempts) break;
  }

  rec.abandoned = true;
  return rec;
}

std::vector<std::vector<std::size_t>> plan_workers(const CampaignConfig& config) {
  std::vector<std::vector<std::size_t>> plan;
  std::size_t item = 0;
  switch (config.parallelism) {
    case Parallelism::Sequential: {
      std::vector<std::size_t> all;
      for (const auto& design : config.designs)
        for (std::size_t m = 0; m < design.modules.size(); ++m) all.push_back(item++);
      plan.push_back(std::move(all));
      break;
    }
    case Parallelism::InterDesign: {
      for (const auto& design : config.designs) {
        std::vector<std::size_t> group;
        for (std::size_t m = 0; m < design.modules.size(); ++m) group.push_back(item++);
        plan.push_back(std::move(group));
      }
      break;
    }
    case Parallelism::IntraDesign: {
      for (const auto& design : config.designs)
        for (std::size_t m = 0; m < design.modules.size(); ++m) plan.push_back({item++});
      break;
    }
  }
  return plan;
}

namespace {

struct WorkItem {
  const DesignUnitConfig* design = nullptr;
  const ModuleFileConfig* module = nullptr;
};

std::vector<WorkItem> flatten(const CampaignConfig& config) {
  std::vector<WorkItem> items;
  for (const auto& design : config.designs)
    for (const auto& module : design.modules) items.push_back({&design, &module});
  return items;
}

// Copies every module file of `design` into its own directory and adopts it
// as a workspace. Files are keyed <module_id>/<filename>.
Workspace design_workspace(const DesignUnitConfig& design, const std::string& root) {
  std::vector<std::string> files;
  for (const auto& module : design.modules) {
    std::string rel =
        (fs::path(module.module_id) / fs::path(module.path).filename()).string();
    fs::path dest = fs::path(root) / rel;
    std::error_code ec;
    fs::create_directories(dest.parent_path(), ec);
    write_file(dest.string(), read_file(module.path));
    files.push_back(rel);
  }
  return Workspace::adopt(root, files);
}

std::string module_rel_file(const ModuleFileConfig& module) {
  return (fs::path(module.module_id) / fs::path(module.path).filename()).string();
}

std::string scenario_id_for(const std::string& design_id, const std::string& module_id,
                            int sequence) {
  std::ostringstream id;
  id << design_id << "/" << module_id << "#" << std::setfill('0') << std::setw(3) << sequence;
  return id.str();
}

}  // namespace

CampaignOutcome run_campaign(const CampaignConfig& config) {
  auto campaign_start = Clock::now();

  fs::create_directories(config.output_dir);
  write_file((fs::path(config.output_dir) / "campaign_config.json").string(),
             config.raw.dump(2) + "\n");

  MutationCache cache(config.cache_path);
  ScenarioLog scenario_log(config.scenario_log_path);

  PromptLibrary prompts = config.backend.prompt_dir.empty()
                              ? PromptLibrary()
                              : PromptLibrary(config.backend.prompt_dir);

  std::unique_ptr<AgentBackend> backend;
  if (config.backend.kind == "mock") {
    MockOptions options;
    options.corrupt_injections = config.backend.corrupt_injections;
    backend = make_mock_backend(options);
  } else {
    RemoteBackendConfig remote;
    remote.endpoint = config.backend.endpoint;
    remote.model = config.backend.model;
    remote.temperature = config.backend.temperature;
    remote.timeout_seconds = config.backend.timeout_seconds;
    const char* key = std::getenv(config.backend.api_key_env.c_str());
    if (!key || !*key)
      throw ConfigError("backend.api_key_env: environment variable " +
                        config.backend.api_key_env + " is not set");
    remote.api_key = key;
    backend = make_remote_backend(remote);
  }

  CatalogSelector selector(config.catalog.default_path, config.catalog.by_design,
                           config.catalog.by_module);
  std::map<std::string, const MutationIndex*> index_by_module;
  for (const auto& design : config.designs)
    for (const auto& module : design.modules)
      index_by_module[CatalogSelector::module_key(design.design_id, module.module_id)] =
          &selector.select(design.design_id, module.module_id);

  std::vector<WorkItem> items = flatten(config);
  auto plan = plan_workers(config);

  std::vector<std::string> failures;
  std::mutex failures_mu;
  std::atomic<bool> any_aborted{false};

  if (config.scenarios_target > 0) {
    // Baseline gate, once per design on a pristine copy with its own
    // evaluator instance.
    for (const auto& design : config.designs) {
      std::string root =
          (fs::path(config.output_dir) / "workspaces" / (sanitize_id(design.design_id) + "__baseline"))
              .string();
      Workspace ws = design_workspace(design, root);
      auto evaluator = make_evaluator(design.evaluator);
      evaluator->baseline_gate(ws);
    }

    auto run_worker = [&](const std::vector<std::size_t>& worker_items) {
      for (std::size_t item_index : worker_items) {
        const DesignUnitConfig& design = *items[item_index].design;
        const ModuleFileConfig& module = *items[item_index].module;
        std::string label = design.design_id + "/" + module.module_id;
        try {
          std::string root = (fs::path(config.output_dir) / "workspaces" /
                              (sanitize_id(label)))
                                 .string();
          Workspace ws = design_workspace(design, root);
          auto evaluator = make_evaluator(design.evaluator);

          std::string source = read_file(module.path);
          ModulePartition partition;
          if (!module.explicit_regions.empty()) {
            partition = partition_from_explicit_regions(source, module.module_id,
                                                        module.explicit_regions);
          } else {
            partition = partition_module(source, module.module_id, config.splitter, *backend,
                                         prompts);
          }
          {
            fs::path dir = fs::path(config.output_dir) / "partitions";
            std::error_code ec;
            fs::create_directories(dir, ec);
            write_file((dir / (sanitize_id(label) + ".json")).string(),
                       partition_to_json(partition).dump(2) + "\n");
          }

          ModuleRun run;
          run.design_id = design.design_id;
          run.module_id = module.module_id;
          run.file = module_rel_file(module);
          run.partition = partition;
          run.index = index_by_module.at(
              CatalogSelector::module_key(design.design_id, module.module_id));
          run.coverage_mode = config.mode == CampaignMode::CoverageAssessment;

          ScenarioSettings settings;
          settings.mutations_per_scenario = config.mutations_per_scenario;
          settings.max_retries = config.max_retries;
          settings.duplicate_regeneration_limit = config.duplicate_regeneration_limit;
          settings.short_circuit =
              design.evaluator.value("short_circuit", config.mode == CampaignMode::Generation);
          settings.archive_dir = (fs::path(config.output_dir) / "archive").string();

          AgentContext agent_ctx{*backend, prompts, config.backend.max_retries_on_malformed};

          int sequence = 0;
          for (const auto& prior : scenario_log.snapshot())
            if (prior.design_id == design.design_id && prior.module_id == module.module_id)
              ++sequence;

          int completed = 0;
          int consecutive_abandoned = 0;
          while (completed < config.scenarios_target) {
            std::string scenario_id =
                scenario_id_for(design.design_id, module.module_id, ++sequence);
            BugScenarioRecord rec =
                run_scenario(run, settings, cache, agent_ctx, *evaluator, ws, scenario_id);
            scenario_log.record(rec);
            if (!rec.abandoned) {
              ++completed;
              consecutive_abandoned = 0;
            } else if (++consecutive_abandoned >= config.consecutive_abandonment_limit) {
              std::lock_guard<std::mutex> lock(failures_mu);
              failures.push_back(label + ": halted after " +
                                 std::to_string(consecutive_abandoned) +
                                 " consecutive abandoned scenarios");
              break;
            }
          }
        } catch (const Error& e) {
          any_aborted.store(true);
          std::lock_guard<std::mutex> lock(failures_mu);
          failures.push_back(label + ": worker aborted: " + e.what());
          return;
        }
      }
    };

    if (plan.size() <= 1) {
      for (const auto& group : plan) run_worker(group);
    } else {
      std::vector<std::thread> threads;
      threads.reserve(plan.size());
      for (const auto& group : plan) threads.emplace_back(run_worker, std::cref(group));
      for (auto& t : threads) t.join();
    }
  }

  std::map<std::string, std::vector<MtrRange>> mtrs_by_design;
  for (const auto& design : config.designs)
    for (const auto& module : design.modules)
      for (const auto& range : module.metric_mtrs)
        mtrs_by_design[design.design_id].push_back({module.module_id, range});

  double campaign_wall = seconds_since(campaign_start);
  std::vector<BugScenarioRecord> scenarios = scenario_log.snapshot();

  CampaignOutcome outcome;
  outcome.report = build_report(cache.snapshot(), scenarios, mtrs_by_design, config.max_retries,
                                config.evolution_window, campaign_wall);
  outcome.report.worker_failures = failures;
  outcome.scenarios = std::move(scenarios);
  outcome.any_worker_aborted = any_aborted.load();

  outcome.report_text_path = (fs::path(config.output_dir) / "report.txt").string();
  outcome.report_json_path = (fs::path(config.output_dir) / "report.json").string();
  write_file(outcome.report_text_path, render_report_text(outcome.report));
  write_file(outcome.report_json_path, report_to_json(outcome.report).dump(2) + "\n");
  write_file((fs::path(config.output_dir) / "evolution.csv").string(),
             evolution_csv(outcome.report));

  return outcome;
}

}  // namespace rtlmut

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "rtlmut/campaign.hpp"
#include "rtlmut/digest.hpp"
#include "rtlmut/errors.hpp"
#include "rtlmut/evaluator.hpp"
#include "rtlmut/metrics.hpp"
#include "rtlmut/partition.hpp"
#include "rtlmut/patch.hpp"
#include "rtlmut/text.hpp"

using namespace rtlmut;

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw std::runtime_error(message);
}

void require_close(double got, double want, double tolerance, const std::string& label) {
  if (!(std::abs(got - want) <= tolerance)) {
    std::ostringstream msg;
    msg.precision(15);
    msg << label << ": got " << got << ", want " << want << " within " << tolerance;
    throw std::runtime_error(msg.str());
  }
}

// Criterion 1. Independent brute-force evaluation of the normalized-entropy
// spread formula, compared against the library on random distributions.
void spread_oracle() {
  auto concentrated = spread_from_counts({7, 0, 0, 0}, {25, 25, 25, 25});
  require(concentrated.has_data, "concentrated distribution reported no data");
  require_close(concentrated.entropy_normalized, 0.0, 1e-12, "single-region concentration");

  auto uniform = spread_from_counts({4, 4, 4, 4, 4}, {30, 30, 30, 30, 30});
  require_close(uniform.entropy_normalized, 1.0, 1e-12, "uniform distribution");

  auto density_uniform = spread_from_counts({10, 5, 1}, {200, 100, 20});
  require_close(density_uniform.entropy_normalized, 1.0, 1e-12, "density-normalized uniform");

  std::mt19937 rng(20260822u);
  std::uniform_int_distribution<int> pick_n(2, 20);
  std::uniform_int_distribution<long> pick_count(0, 30);
  std::uniform_int_distribution<long> pick_lines(1, 400);

  for (int iter = 0; iter < 1000; ++iter) {
    int n = pick_n(rng);
    std::vector<long> counts(static_cast<std::size_t>(n));
    std::vector<long> lines(static_cast<std::size_t>(n));
    long total_counts = 0;
    for (int i = 0; i < n; ++i) {
      counts[static_cast<std::size_t>(i)] = pick_count(rng);
      lines[static_cast<std::size_t>(i)] = pick_lines(rng);
      total_counts += counts[static_cast<std::size_t>(i)];
    }
    if (total_counts == 0) counts[0] = 1;

    double density_sum = 0.0;
    std::vector<double> density(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      density[static_cast<std::size_t>(i)] =
          static_cast<double>(counts[static_cast<std::size_t>(i)]) /
          static_cast<double>(lines[static_cast<std::size_t>(i)]);
      density_sum += density[static_cast<std::size_t>(i)];
    }
    double entropy = 0.0;
    for (double d : density) {
      double p = d / density_sum;
      if (p > 0.0) entropy -= p * std::log(p);
    }
    double want = entropy / std::log(static_cast<double>(n));

    auto got = spread_from_counts(counts, lines);
    require(got.has_data, "random distribution " + std::to_string(iter) + " reported no data");
    require_close(got.entropy_normalized, want, 1e-9,
                  "random distribution " + std::to_string(iter));
  }
}

// Criterion 2.
void syntactic_accuracy_arithmetic() {
  auto accuracy = syntactic_accuracy_from_counts(538, 358, 104);
  require(accuracy.has_value(), "counts (538, 358, 104) yielded no accuracy");
  require_close(*accuracy, 0.642, 1e-12, "syntactic accuracy of (538, 358, 104)");
}

// Criterion 3.
void throughput_arithmetic() {
  double bugs_per_hour = throughput_bugs_per_hour(1, 7.795 * 60.0);
  require_close(bugs_per_hour, 7.697, 0.01, "one success in 7.795 minutes");
}

// Criterion 4. Every corpus partition validates defect-free under both
// splitters, and the chunk-straddle fixture matches its hand-built reference.
void partition_coverage() {
  auto backend = make_mock_backend();
  PromptLibrary prompts;

  int in_range = 0;
  for (const auto& [id, text] : fixtures::synth_corpus()) {
    long line_count = static_cast<long>(split_lines_keep_ends(text).size());
    if (line_count < 100 || line_count > 2000) continue;
    ++in_range;

    auto fallback = fallback_partition(text, id);
    require(fallback.fallback_derived, id + ": fallback partition not marked as such");
    require(validate_partition(fallback, text).empty(),
            id + ": fallback partition has defects");

    SplitterConfig config;
    auto agent = partition_module(text, id, config, *backend, prompts);
    require(validate_partition(agent, text).empty(),
            id + ": agent partition has defects");
  }
  require(in_range >= 20, "corpus holds only " + std::to_string(in_range) +
                              " files between 100 and 2000 lines");

  auto fx = fixtures::straddle_fixture();
  SplitterConfig config;
  config.chunk_size_lines = fx.chunk_size;
  config.auxiliary_lines = fx.auxiliary_lines;
  config.context_window_lines = fx.context_window;
  auto partition = partition_module(fx.text, "straddle", config, *backend, prompts);
  require(validate_partition(partition, fx.text).empty(), "straddle partition has defects");
  require(partition.regions.size() == fx.expected.size(),
          "straddle partition has " + std::to_string(partition.regions.size()) +
              " regions, the reference has " + std::to_string(fx.expected.size()));
  for (std::size_t i = 0; i < fx.expected.size(); ++i) {
    const auto& got = partition.regions[i];
    const auto& want = fx.expected[i];
    require(got.index == want.index && got.start_line == want.start_line &&
                got.end_line == want.end_line && got.synopsis == want.synopsis,
            "straddle region " + std::to_string(i) + " differs from the reference");
  }
}

// Criterion 5. 500 rounds of random patch stacks, each rolled back to
// byte-identical pristine files.
void rollback_byte_exactness() {
  fixtures::TempDir dir("acc-rollback");
  std::map<std::string, std::string> pristine = {
      {"a.v", fixtures::synth_module("rolla", 4, 7)},
      {"b.v", fixtures::synth_module("rollb", 6, 9)},
  };
  std::vector<std::string> files;
  std::map<std::string, std::string> pristine_digests;
  for (const auto& [file, text] : pristine) {
    fixtures::write_text(dir.file("ws/" + file), text);
    files.push_back(file);
    pristine_digests[file] = sha256_hex(text);
  }
  auto ws = Workspace::adopt(dir.file("ws"), files);

  std::mt19937 rng(4242u);
  const std::vector<std::string> replacements = {
      "// replaced\n",
      "wire scratch_q;\n",
      "assign t0 = 1'b0;\nassign t1 = 1'b1;\n",
      "  acc_q <= acc_q + 8'd1;\n",
  };

  for (int iter = 0; iter < 500; ++iter) {
    std::vector<PatchRecord> records;
    int patch_count = 1 + static_cast<int>(rng() % 10);
    for (int p = 0; p < patch_count; ++p) {
      const std::string& file = files[rng() % files.size()];
      std::string current = ws.read(file);
      int line_count = static_cast<int>(split_lines_keep_ends(current).size());
      int start = 1 + static_cast<int>(rng() % static_cast<unsigned>(line_count));
      int end = std::min(line_count, start + static_cast<int>(rng() % 3));
      std::string expected = slice_lines(current, start, end);
      const std::string& replacement = replacements[rng() % replacements.size()];
      records.push_back(ws.apply_patch(file, start, end, replacement, expected));
    }
    ws.rollback(records);
    for (const auto& file : files)
      require(sha256_hex(ws.read(file)) == pristine_digests[file],
              "iteration " + std::to_string(iter) + " left " + file + " altered");
  }
  ws.verify_pristine();
}

// Criterion 6. A scripted two-design campaign must land exactly on the
// outcome table the script encodes, and a 94/100 success table must score
// functional accuracy 0.94.
void closed_loop_oracle() {
  fixtures::TempDir dir("acc-loop");
  auto doc = fixtures::campaign_config(dir, 2, 1, 3);
  doc["designs"][0]["evaluator"] = {
      {"kind", "mock"},
      {"default_outcome", "detected"},
      {"sequence", {"detected", "syntax_failure", "detected", "undetected", "undetected",
                    "detected"}}};
  doc["designs"][1]["evaluator"] = {
      {"kind", "mock"},
      {"default_outcome", "detected"},
      {"sequence", {"syntax_failure", "syntax_failure", "syntax_failure", "detected"}}};
  auto config = config_from_json(doc, dir.path());

  auto outcome = run_campaign(config);
  require(!outcome.any_worker_aborted, "a worker aborted");

  struct Row {
    Outcome final_outcome;
    int attempts;
    bool abandoned;
  };
  std::map<std::string, std::vector<Row>> expected = {
      {"design0", {{Outcome::Success, 1, false},
                   {Outcome::Success, 2, false},
                   {Outcome::Success, 3, false}}},
      {"design1", {{Outcome::SyntaxFailure, 3, true},
                   {Outcome::Success, 1, false},
                   {Outcome::Success, 1, false},
                   {Outcome::Success, 1, false}}},
  };

  std::map<std::string, std::vector<BugScenarioRecord>> by_design;
  for (const auto& s : outcome.scenarios) by_design[s.design_id].push_back(s);
  for (auto& [design_id, rows] : by_design)
    std::sort(rows.begin(), rows.end(),
              [](const auto& a, const auto& b) { return a.scenario_id < b.scenario_id; });

  long total_attempts = 0;
  for (const auto& [design_id, want_rows] : expected) {
    const auto& got_rows = by_design[design_id];
    require(got_rows.size() == want_rows.size(),
            design_id + " ran " + std::to_string(got_rows.size()) + " scenarios, expected " +
                std::to_string(want_rows.size()));
    for (std::size_t i = 0; i < want_rows.size(); ++i) {
      const auto& got = got_rows[i];
      const auto& want = want_rows[i];
      require(got.final_outcome == want.final_outcome && got.attempt_number == want.attempts &&
                  got.abandoned == want.abandoned,
              design_id + " scenario " + std::to_string(i + 1) + " is " +
                  outcome_to_string(got.final_outcome) + " after " +
                  std::to_string(got.attempt_number) + " attempts, expected " +
                  outcome_to_string(want.final_outcome) + " after " +
                  std::to_string(want.attempts));
      total_attempts += got.attempt_number;
    }
  }

  auto entries = MutationCache::load_entries(config.cache_path);
  require(static_cast<long>(entries.size()) == total_attempts * 2,
          "cache holds " + std::to_string(entries.size()) + " entries, expected " +
              std::to_string(total_attempts * 2));
  std::map<std::string, OutcomeCounts> per_design;
  for (const auto& e : entries) per_design[e.design_id].add(e.outcome);
  require(per_design["design0"].detected == 6 && per_design["design0"].syntax_failure == 2 &&
              per_design["design0"].undetected == 4,
          "design0 entry outcomes do not match the script");
  require(per_design["design1"].detected == 6 && per_design["design1"].syntax_failure == 6 &&
              per_design["design1"].undetected == 0,
          "design1 entry outcomes do not match the script");

  std::vector<BugScenarioRecord> table;
  for (int i = 0; i < 100; ++i) {
    BugScenarioRecord r;
    r.scenario_id = "tab/mod#" + std::to_string(i);
    r.design_id = "tab";
    r.module_id = "mod";
    if (i < 94) {
      r.final_outcome = Outcome::Success;
      r.attempt_number = (i % 3) + 1;
    } else {
      r.final_outcome = Outcome::Undetected;
      r.attempt_number = 3;
      r.abandoned = true;
    }
    table.push_back(r);
  }
  auto accuracy = functional_accuracy(table, 2);
  require(accuracy.has_value(), "94/100 table yielded no accuracy");
  require_close(*accuracy, 0.94, 1e-12, "functional accuracy of the 94/100 table");
}

// Criterion 7. A forced duplicate triggers regeneration with zero evaluator
// involvement, and the duplicate never re-enters the cache.
void duplicate_suppression() {
  fixtures::TempDir dir("acc-dup");
  std::string text = fixtures::synth_module("unit", 4, 21);
  fixtures::write_text(dir.file("ws/unit.v"), text);
  auto ws = Workspace::adopt(dir.file("ws"), {"unit.v"});

  ModuleRun run;
  run.design_id = "des";
  run.module_id = "unit";
  run.file = "unit.v";
  run.partition = fallback_partition(text, "unit");
  MutationIndex index = fixtures::test_index();
  run.index = &index;

  auto lines = split_lines_keep_ends(text);
  int target_line = 0;
  std::string target_text;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].find("assign probe0_o") != std::string::npos) {
      target_line = static_cast<int>(i) + 1;
      target_text = std::string(lines[i]);
      break;
    }
  }
  require(target_line > 0, "fixture module lost its probe assignment");
  const Region* region = nullptr;
  for (const auto& r : run.partition.regions)
    if (r.start_line <= target_line && target_line <= r.end_line) region = &r;
  require(region != nullptr, "no region covers the probe assignment");
  std::string mutated = "  // " + trim(strip_eol(target_text));

  MutationCache cache;
  MutationEntry seeded;
  seeded.design_id = "des";
  seeded.module_id = "unit";
  seeded.file = "unit.v";
  seeded.region_index = region->index;
  seeded.region_start_line = region->start_line;
  seeded.region_end_line = region->end_line;
  seeded.class_id = "missing_assignment";
  seeded.target_block = {target_line, target_line, target_text};
  seeded.mutated_text = mutated;
  seeded.summary = "seeded";
  seeded.scenario_id = "des/unit#000";
  cache.update_outcome(cache.record_attempt(seeded), Outcome::Success);
  std::string seeded_fp = StructuralKey::from_entry(seeded).fingerprint();

  fixtures::QueueBackend backend;
  backend.push({{"region_index", region->index}});
  backend.push({{"class_id", "missing_assignment"},
                {"target_start_line", target_line},
                {"target_end_line", target_line},
                {"plan", "forced"}});
  backend.push({{"mutated_block", mutated}, {"summary", "forced duplicate"}});

  PromptLibrary prompts;
  AgentContext ctx{backend, prompts};
  ScriptedEvaluator evaluator({EvalOutcome::Detected, {}, {}});
  ScenarioSettings settings;
  settings.mutations_per_scenario = 1;

  auto rec = run_scenario(run, settings, cache, ctx, evaluator, ws, "des/unit#001");
  require(rec.duplicates_regenerated >= 1, "no regeneration was recorded");
  require(rec.final_outcome == Outcome::Success, "scenario did not succeed after regeneration");
  require(evaluator.scenarios_begun() == 1,
          "evaluator saw " + std::to_string(evaluator.scenarios_begun()) +
              " scenario starts, expected 1");
  require(evaluator.compiles_run() == 1 && evaluator.regressions_run() == 1,
          "the duplicate round reached the evaluator");

  int seeded_copies = 0;
  std::set<std::string> fingerprints;
  for (const auto& e : cache.snapshot()) {
    std::string fp = StructuralKey::from_entry(e).fingerprint();
    if (fp == seeded_fp) ++seeded_copies;
    require(fingerprints.insert(fp).second, "cache holds a duplicate fingerprint");
  }
  require(seeded_copies == 1, "the forced duplicate entered the cache");
  ws.verify_pristine();
}

// Criterion 8. The canned rewriters reproduce the three reference diffs
// byte for byte.
void rewriter_conformance() {
  auto backend = make_mock_backend();
  auto rewrite = [&](const std::string& class_id, const std::string& target, int target_start,
                     const std::string& region, int region_start) {
    AgentRequest request;
    request.schema = ResponseSchema::Injection;
    request.payload = {{"class_id", class_id},
                       {"target_text", target},
                       {"target_start", target_start},
                       {"target_end", target_start},
                       {"region_source", region},
                       {"region_start", region_start},
                       {"plan", "acceptance"}};
    auto reply = backend->complete(request);
    require(!reply.at("summary").get<std::string>().empty(), class_id + ": empty summary");
    return reply.at("mutated_block").get<std::string>();
  };

  require(rewrite("missing_assignment", "assign a = b;", 1, "assign a = b;", 1) ==
              "// assign a = b;",
          "missing_assignment rewrite differs from the reference");

  std::string port_region =
      "assign addr_incr = (state_q == Checking) && (addr_q != LastAddr);\n"
      ".incr_en_i(addr_incr),\n"
      ".decr_en_i(1'b0),\n";
  require(rewrite("wrong_assignment", ".decr_en_i(1'b0),", 3, port_region, 1) ==
              ".incr_en_i(1'b0),",
          "wrong_assignment rewrite differs from the reference");

  std::string loop =
      "for (i = 0; i < SIZE; i++) begin\n"
      "  sum = sum + data[i];";
  require(rewrite("loop_modification", loop, 1, loop, 1) ==
              "for (i = 1; i < SIZE; i++) begin\n"
              "  sum = sum + data[i-1];",
          "loop_modification rewrite differs from the reference");
}

// Criterion 9. All three parallelism modes land on the same per-design
// success counts and the same structural cache contents.
void parallel_equivalence() {
  std::map<std::string, std::map<std::string, long>> successes;
  std::map<std::string, std::multiset<std::string>> cache_shapes;

  for (const std::string mode : {"sequential", "inter_design", "intra_design"}) {
    fixtures::TempDir dir("acc-mode-" + mode);
    auto doc = fixtures::campaign_config(dir, 2, 2, 2);
    doc["parallelism"] = mode;
    auto config = config_from_json(doc, dir.path());
    auto outcome = run_campaign(config);
    require(!outcome.any_worker_aborted, mode + ": a worker aborted");

    for (const auto& s : outcome.scenarios)
      if (s.final_outcome == Outcome::Success) ++successes[mode][s.design_id];
    std::multiset<std::string> shape;
    for (const auto& e : MutationCache::load_entries(config.cache_path))
      shape.insert(e.design_id + "|" + e.module_id + "|" + e.class_id + "|" +
                   std::to_string(e.target_block.start_line) + "|" +
                   normalize_block(e.target_block.text) + "|" + normalize_block(e.mutated_text) +
                   "|" + outcome_to_string(e.outcome) + "|" + std::to_string(e.attempt_number));
    cache_shapes[mode] = std::move(shape);
  }

  require(successes["inter_design"] == successes["sequential"],
          "inter-design success counts differ from sequential");
  require(successes["intra_design"] == successes["sequential"],
          "intra-design success counts differ from sequential");
  require(cache_shapes["inter_design"] == cache_shapes["sequential"],
          "inter-design cache contents differ from sequential");
  require(cache_shapes["intra_design"] == cache_shapes["sequential"],
          "intra-design cache contents differ from sequential");
}

// Criterion 10. classify covers {compile ok, fail} x {0, 1, many failures}
// with exactly three reachable outcomes; infra-only runs are annulled.
void classification_taxonomy() {
  CompileResult ok{true, "clean"};
  CompileResult bad{false, "syntax error near always"};
  auto rec = [](bool passed, bool infra = false) {
    RegressionRecord r;
    r.test = "t";
    r.seed = 1;
    r.passed = passed;
    r.infra_error = infra;
    return r;
  };
  auto fails = [&](int n) {
    std::vector<RegressionRecord> rs;
    for (int i = 0; i < n; ++i) rs.push_back(rec(false));
    rs.push_back(rec(true));
    return rs;
  };

  require(classify(bad, {}).outcome == EvalOutcome::SyntaxFailure, "fail x none");
  require(classify(bad, fails(1)).outcome == EvalOutcome::SyntaxFailure, "fail x one");
  require(classify(bad, fails(5)).outcome == EvalOutcome::SyntaxFailure, "fail x many");
  require(classify(ok, {rec(true), rec(true)}).outcome == EvalOutcome::Undetected, "ok x none");
  require(classify(ok, fails(1)).outcome == EvalOutcome::Detected, "ok x one");
  require(classify(ok, fails(5)).outcome == EvalOutcome::Detected, "ok x many");
  require(classify(ok, {rec(false, true), rec(false)}).outcome == EvalOutcome::Detected,
          "an infra-skipped pair must not mask a real failure");

  bool annulled = false;
  try {
    classify(ok, {rec(false, true), rec(true)});
  } catch (const InfraError&) {
    annulled = true;
  }
  require(annulled, "infra-only failure produced an outcome instead of annulment");

  for (const auto& result :
       {classify(bad, {}), classify(ok, fails(1)), classify(ok, {rec(true)})}) {
    bool known = result.outcome == EvalOutcome::Detected ||
                 result.outcome == EvalOutcome::SyntaxFailure ||
                 result.outcome == EvalOutcome::Undetected;
    require(known, "classification produced an unknown outcome");
  }
}

struct Criterion {
  int id;
  const char* label;
  double budget_seconds;
  void (*body)();
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "spread score matches a brute-force entropy oracle", 1.0, spread_oracle},
      {2, "syntactic accuracy of (538, 358, 104) is 0.642", 0.0, syntactic_accuracy_arithmetic},
      {3, "one success in 7.795 minutes is 7.697 bugs/hour", 0.0, throughput_arithmetic},
      {4, "corpus partitions validate under both splitters", 10.0, partition_coverage},
      {5, "random patch stacks roll back byte-exact, 500 rounds", 10.0, rollback_byte_exactness},
      {6, "a scripted campaign reproduces its outcome table", 30.0, closed_loop_oracle},
      {7, "duplicates regenerate without evaluator calls", 0.0, duplicate_suppression},
      {8, "canned rewriters reproduce the reference diffs", 0.0, rewriter_conformance},
      {9, "parallel modes match sequential results", 60.0, parallel_equivalence},
      {10, "classification covers exactly three outcomes", 0.0, classification_taxonomy},
  };

  int failures = 0;
  for (const auto& criterion : criteria) {
    auto t0 = std::chrono::steady_clock::now();
    std::string failure;
    try {
      criterion.body();
    } catch (const std::exception& e) {
      failure = e.what();
    }
    double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (failure.empty() && criterion.budget_seconds > 0.0 &&
        seconds > criterion.budget_seconds) {
      std::ostringstream msg;
      msg << "took " << seconds << " s, budget " << criterion.budget_seconds << " s";
      failure = msg.str();
    }
    if (failure.empty()) {
      std::printf("PASS criterion %d: %s (%.2f s)\n", criterion.id, criterion.label, seconds);
    } else {
      std::printf("FAIL criterion %d: %s: %s\n", criterion.id, criterion.label, failure.c_str());
      ++failures;
    }
  }
  return failures == 0 ? 0 : 1;
}

#pragma once

#include <functional>
#include <map>
#include <string>
#include <string_view>

#include <json.hpp>

#include "rtlmut/backend.hpp"
#include "rtlmut/cache.hpp"
#include "rtlmut/catalog.hpp"
#include "rtlmut/partition.hpp"
#include "rtlmut/prompts.hpp"

namespace rtlmut {

struct RegionChoice {
  int region_index = 0;
  std::string rationale;
  std::string proposed_class_id;  // advisory only, may be empty
};

struct MutationChoice {
  std::string class_id;
  int target_start_line = 0;  // absolute 1-based lines within the region
  int target_end_line = 0;
  std::string plan;
};

struct InjectedMutation {
  std::string mutated_text;  // replacement lines, '\n'-joined, no trailing newline
  std::string summary;
};

struct AgentContext {
  AgentBackend& backend;
  const PromptLibrary& prompts;
  int max_retries_on_malformed = 2;
};

// Validation outcome for one structured response. Shape problems (missing or
// mistyped fields) end in SchemaViolation after retries; semantic problems
// (nonexistent class, out-of-range target, no-op mutation) end in the
// error type the caller supplies.
struct ValidationResult {
  bool ok = true;
  bool semantic = false;
  std::string error;

  static ValidationResult valid() { return {}; }
  static ValidationResult shape(std::string msg) { return {false, false, std::move(msg)}; }
  static ValidationResult invalid(std::string msg) { return {false, true, std::move(msg)}; }
};

using ResponseValidator = std::function<ValidationResult(const nlohmann::json&)>;

// Runs the request through the backend, re-prompting with the validation
// error appended until the response validates or retries are exhausted.
// `on_semantic_failure` converts the terminal semantic error into the
// op-specific exception; shape failures raise SchemaViolation.
nlohmann::json complete_structured(const AgentContext& ctx, AgentRequest request,
                                   const ResponseValidator& validator,
                                   const std::function<void(const std::string&)>& on_semantic_failure = nullptr);

// Step 1: pick a region. The prompt carries the partition (synopses and
// mutation counts), the per-region attempt history with success rates
// (omitted in coverage-assessment mode), and the mutation index.
RegionChoice select_region(const ModulePartition& partition,
                           const std::map<int, RegionStats>& stats, const MutationIndex& index,
                           bool coverage_mode, const AgentContext& ctx);

// Step 2: pick a class and target block within the chosen region.
MutationChoice select_mutation(std::string_view region_source, const Region& region,
                               const MutationIndex& index, const RegionHistory& history,
                               const AgentContext& ctx);

// Step 3: mutate the target block per the class spec. The replacement must
// keep the target's line count and differ after whitespace normalization.
InjectedMutation inject_mutation(const MutationChoice& choice, std::string_view region_source,
                                 const Region& region, const MutationSpec& spec,
                                 const AgentContext& ctx);

}  // namespace rtlmut

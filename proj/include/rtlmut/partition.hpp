#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rtlmut/backend.hpp"
#include "rtlmut/prompts.hpp"

namespace rtlmut {

// One mutation target region of a module. Line numbers are 1-based and
// inclusive. Regions that hold only comments and blank lines are kept for
// coverage but tagged non-mutable so the selector never targets them.
struct Region {
  int index = 0;
  int start_line = 0;
  int end_line = 0;
  std::string synopsis;
  int mutation_count = 0;
  bool is_mutable = true;

  int line_count() const { return end_line - start_line + 1; }
};

// Ordered, gap-free decomposition of one HDL file.
struct ModulePartition {
  std::string source_id;
  int total_lines = 0;
  std::vector<Region> regions;
  bool fallback_derived = false;

  const Region* find_region(int index) const;
};

struct SplitterConfig {
  int chunk_size_lines = 200;
  int auxiliary_lines = 5;
  // Files at or below this line count are split in a single call.
  int context_window_lines = 400;
  // Free-text rulebook injected into the splitter prompt.
  std::string guidelines;
};

struct PartitionDefect {
  enum class Kind { Gap, Overlap, OutOfRange };
  Kind kind;
  int start_line = 0;
  int end_line = 0;
  std::string detail;
};

// Empty result iff the regions are sorted, pairwise disjoint, and cover every
// line of the source exactly once.
std::vector<PartitionDefect> validate_partition(const ModulePartition& partition,
                                                std::string_view source);

// Agent-driven partitioning: whole-file below the context window, otherwise
// iterative chunking with auxiliary-line continuity checks. Falls back to the
// syntactic splitter when the agent cannot produce a covering partition.
ModulePartition partition_module(std::string_view source, const std::string& source_id,
                                 const SplitterConfig& config, AgentBackend& backend,
                                 const PromptLibrary& prompts);

// True when the auxiliary lines logically continue the final region, in which
// case the caller reprocesses that region with the next chunk. Always false
// for empty auxiliary lines.
bool detect_boundary_dependency(std::string_view tail_region_text,
                                std::string_view auxiliary_lines, AgentBackend& backend,
                                const PromptLibrary& prompts);

// Keyword-and-balance splitter used as the repair fallback; also the policy
// behind the deterministic mock splitter.
ModulePartition fallback_partition(std::string_view source, const std::string& source_id);

struct ScannedRegion {
  int start_line = 0;
  int end_line = 0;
  std::string synopsis;
};

// Scans a text that begins at absolute line `first_line` and returns region
// boundaries at top-level construct starts.
std::vector<ScannedRegion> scan_regions(std::string_view text, int first_line);

// Opens minus closes over begin/end-style pairs and parentheses; positive
// means the text is structurally unterminated.
int balance_score(std::string_view text);

// Wraps engineer-provided target regions as a partition over the source,
// padding untouched lines into non-mutable filler regions so the coverage
// invariant still holds. Labels become the synopses.
struct ExplicitRegion {
  int start_line = 0;
  int end_line = 0;
  std::string label;
};
ModulePartition partition_from_explicit_regions(std::string_view source,
                                                const std::string& source_id,
                                                const std::vector<ExplicitRegion>& regions);

nlohmann::json partition_to_json(const ModulePartition& partition);
ModulePartition partition_from_json(const nlohmann::json& doc);

// Recomputes the is_mutable tag of every region from the source text.
void tag_mutability(ModulePartition& partition, std::string_view source);

}  // namespace rtlmut

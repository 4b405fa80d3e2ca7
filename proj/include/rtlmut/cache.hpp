#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

namespace rtlmut {

enum class Outcome { Pending, Success, SyntaxFailure, Undetected };

std::string outcome_to_string(Outcome outcome);
Outcome outcome_from_string(const std::string& s);

struct LineBlock {
  int start_line = 0;  // 1-based inclusive
  int end_line = 0;
  std::string text;  // raw bytes of the block, terminators included
};

// One attempted mutation. Immutable once recorded except for the single
// Pending -> {Success, SyntaxFailure, Undetected} outcome transition.
struct MutationEntry {
  std::int64_t entry_id = 0;
  std::string design_id;
  std::string module_id;
  std::string file;  // path relative to the design root
  int region_index = 0;
  int region_start_line = 0;
  int region_end_line = 0;
  std::string class_id;
  LineBlock target_block;
  std::string mutated_text;
  std::string summary;
  std::string scenario_id;
  int attempt_number = 1;
  Outcome outcome = Outcome::Pending;
  double timestamp = 0.0;  // unix seconds
};

// Whitespace-normalized identity of a mutation, the unit of structural
// uniqueness: same module, same class, same target text, same mutated text.
struct StructuralKey {
  std::string module_id;
  std::string class_id;
  std::string target_norm;
  std::string mutated_norm;

  static StructuralKey make(const std::string& module_id, const std::string& class_id,
                            std::string_view target_text, std::string_view mutated_text);
  static StructuralKey from_entry(const MutationEntry& entry);

  std::string fingerprint() const;
};

struct RegionHistory {
  std::vector<MutationEntry> succeeded;
  std::vector<MutationEntry> failed;
};

struct RegionStats {
  int recorded = 0;   // all entries, Pending included
  int finalized = 0;  // Success + SyntaxFailure + Undetected
  int successes = 0;
  std::map<std::string, int> class_histogram;  // finalized attempts per class

  bool has_data() const { return finalized > 0; }
  // Undefined (no-data) with zero finalized attempts.
  std::optional<double> success_rate() const;
};

// One bug scenario: a group of related mutations evaluated as a unit, plus
// the attempt and timing bookkeeping the report needs.
struct BugScenarioRecord {
  std::string scenario_id;
  std::string design_id;
  std::string module_id;
  std::vector<std::int64_t> mutation_entry_ids;  // final attempt's entries
  int attempt_number = 1;                        // attempts consumed
  Outcome final_outcome = Outcome::Pending;
  bool abandoned = false;
  double generation_seconds = 0.0;
  double validation_seconds = 0.0;
  int duplicates_regenerated = 0;
};

struct OutcomeCounts {
  long detected = 0;
  long syntax_failure = 0;
  long undetected = 0;
  long pending = 0;

  long total() const { return detected + syntax_failure + undetected + pending; }
  void add(Outcome outcome);
};

// The shared, design-agnostic mutation memory. Appends every attempt and
// outcome to a newline-delimited JSON log and replays it on open; record and
// update calls are serialized so parallel workers observe a consistent
// prefix.
class MutationCache {
 public:
  // In-memory only (tests).
  MutationCache();
  // Opens or creates the log at `path`, replaying any existing events.
  explicit MutationCache(const std::string& path);

  std::int64_t record_attempt(MutationEntry entry);
  void update_outcome(std::int64_t entry_id, Outcome outcome);

  bool is_duplicate(const StructuralKey& key) const;

  RegionHistory region_history(const std::string& module_id, int region_index,
                               bool coverage_mode = false) const;
  std::map<int, RegionStats> region_stats(const std::string& module_id) const;

  std::vector<MutationEntry> snapshot() const;
  std::optional<MutationEntry> find(std::int64_t entry_id) const;
  std::size_t size() const;
  OutcomeCounts outcome_counts() const;

  static std::vector<MutationEntry> load_entries(const std::string& path);

 private:
  void append_event(const nlohmann::json& event);
  void index_entry_locked(const MutationEntry& entry, std::size_t pos);
  void replay(const std::string& path);

  mutable std::mutex mu_;
  std::string path_;
  bool persistent_ = false;
  std::vector<MutationEntry> entries_;
  std::unordered_map<std::int64_t, std::size_t> by_id_;
  std::unordered_set<std::string> fingerprints_;
  std::int64_t next_id_ = 1;
};

// Append-only log of scenario records (the timing log); one JSON object per
// line, independent of the mutation cache file.
class ScenarioLog {
 public:
  ScenarioLog() = default;
  explicit ScenarioLog(const std::string& path);

  void record(const BugScenarioRecord& record);
  std::vector<BugScenarioRecord> snapshot() const;

  static std::vector<BugScenarioRecord> load(const std::string& path);

 private:
  mutable std::mutex mu_;
  std::string path_;
  bool persistent_ = false;
  std::vector<BugScenarioRecord> records_;
};

nlohmann::json entry_to_json(const MutationEntry& entry);
MutationEntry entry_from_json(const nlohmann::json& doc);
nlohmann::json scenario_to_json(const BugScenarioRecord& record);
BugScenarioRecord scenario_from_json(const nlohmann::json& doc);

}  // namespace rtlmut

#include "rtlmut/cache.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>

#include "rtlmut/digest.hpp"
#include "rtlmut/errors.hpp"
#include "rtlmut/text.hpp"

namespace rtlmut {

namespace {

double now_unix_seconds() {
  auto now = std::chrono::system_clock::now().time_since_epoch();
  return std::chrono::duration<double>(now).count();
}

std::vector<nlohmann::json> read_jsonl(const std::string& path) {
  std::vector<nlohmann::json> events;
  std::ifstream in(path);
  if (!in) return events;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      events.push_back(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw StorageError(path + ":" + std::to_string(line_no) + ": bad log line: " + e.what());
    }
  }
  return events;
}

void append_jsonl(const std::string& path, const nlohmann::json& event) {
  std::ofstream out(path, std::ios::app | std::ios::binary);
  if (!out) throw StorageError("cannot append to log " + path);
  out << event.dump() << "\n";
  if (!out) throw StorageError("write to log " + path + " failed");
}

void ensure_parent_dir(const std::string& path) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
  }
}

}  // namespace

std::string outcome_to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::Pending:
      return "pending";
    case Outcome::Success:
      return "success";
    case Outcome::SyntaxFailure:
      return "syntax_failure";
    case Outcome::Undetected:
      return "undetected";
  }
  return "pending";
}

Outcome outcome_from_string(const std::string& s) {
  if (s == "pending") return Outcome::Pending;
  if (s == "success") return Outcome::Success;
  if (s == "syntax_failure") return Outcome::SyntaxFailure;
  if (s == "undetected") return Outcome::Undetected;
  throw StorageError("unknown outcome: " + s);
}

StructuralKey StructuralKey::make(const std::string& module_id, const std::string& class_id,
                                  std::string_view target_text, std::string_view mutated_text) {
  StructuralKey key;
  key.module_id = module_id;
  key.class_id = class_id;
  key.target_norm = normalize_block(target_text);
  key.mutated_norm = normalize_block(mutated_text);
  return key;
}

StructuralKey StructuralKey::from_entry(const MutationEntry& entry) {
  return make(entry.module_id, entry.class_id, entry.target_block.text, entry.mutated_text);
}

std::string StructuralKey::fingerprint() const {
  std::string joined;
  joined += module_id;
  joined += '\x1f';
  joined += class_id;
  joined += '\x1f';
  joined += target_norm;
  joined += '\x1f';
  joined += mutated_norm;
  return sha256_hex(joined);
}

std::optional<double> RegionStats::success_rate() const {
  if (finalized == 0) return std::nullopt;
  return static_cast<double>(successes) / static_cast<double>(finalized);
}

void OutcomeCounts::add(Outcome outcome) {
  switch (outcome) {
    case Outcome::Success:
      ++detected;
      break;
    case Outcome::SyntaxFailure:
      ++syntax_failure;
      break;
    case Outcome::Undetected:
      ++undetected;
      break;
    case Outcome::Pending:
      ++pending;
      break;
  }
}

nlohmann::json entry_to_json(const MutationEntry& entry) {
  return nlohmann::json{{"entry_id", entry.entry_id},
                        {"design_id", entry.design_id},
                        {"module_id", entry.module_id},
                        {"file", entry.file},
                        {"region_index", entry.region_index},
                        {"region_start_line", entry.region_start_line},
                        {"region_end_line", entry.region_end_line},
                        {"class_id", entry.class_id},
                        {"target_start_line", entry.target_block.start_line},
                        {"target_end_line", entry.target_block.end_line},
                        {"target_text", entry.target_block.text},
                        {"mutated_text", entry.mutated_text},
                        {"summary", entry.summary},
                        {"scenario_id", entry.scenario_id},
                        {"attempt_number", entry.attempt_number},
                        {"outcome", outcome_to_string(entry.outcome)},
                        {"timestamp", entry.timestamp}};
}

MutationEntry entry_from_json(const nlohmann::json& doc) {
  MutationEntry entry;
  try {
    entry.entry_id = doc.at("entry_id").get<std::int64_t>();
    entry.design_id = doc.at("design_id").get<std::string>();
    entry.module_id = doc.at("module_id").get<std::string>();
    entry.file = doc.at("file").get<std::string>();
    entry.region_index = doc.at("region_index").get<int>();
    entry.region_start_line = doc.at("region_start_line").get<int>();
    entry.region_end_line = doc.at("region_end_line").get<int>();
    entry.class_id = doc.at("class_id").get<std::string>();
    entry.target_block.start_line = doc.at("target_start_line").get<int>();
    entry.target_block.end_line = doc.at("target_end_line").get<int>();
    entry.target_block.text = doc.at("target_text").get<std::string>();
    entry.mutated_text = doc.at("mutated_text").get<std::string>();
    entry.summary = doc.at("summary").get<std::string>();
    entry.scenario_id = doc.at("scenario_id").get<std::string>();
    entry.attempt_number = doc.at("attempt_number").get<int>();
    entry.outcome = outcome_from_string(doc.at("outcome").get<std::string>());
    entry.timestamp = doc.at("timestamp").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw StorageError(std::string("malformed mutation entry: ") + e.what());
  }
  return entry;
}

nlohmann::json scenario_to_json(const BugScenarioRecord& record) {
  return nlohmann::json{{"scenario_id", record.scenario_id},
                        {"design_id", record.design_id},
                        {"module_id", record.module_id},
                        {"mutation_entry_ids", record.mutation_entry_ids},
                        {"attempt_number", record.attempt_number},
                        {"final_outcome", outcome_to_string(record.final_outcome)},
                        {"abandoned", record.abandoned},
                        {"generation_seconds", record.generation_seconds},
                        {"validation_seconds", record.validation_seconds},
                        {"duplicates_regenerated", record.duplicates_regenerated}};
}

BugScenarioRecord scenario_from_json(const nlohmann::json& doc) {
  BugScenarioRecord record;
  try {
    record.scenario_id = doc.at("scenario_id").get<std::string>();
    record.design_id = doc.at("design_id").get<std::string>();
    record.module_id = doc.at("module_id").get<std::string>();
    record.mutation_entry_ids = doc.at("mutation_entry_ids").get<std::vector<std::int64_t>>();
    record.attempt_number = doc.at("attempt_number").get<int>();
    record.final_outcome = outcome_from_string(doc.at("final_outcome").get<std::string>());
    record.abandoned = doc.at("abandoned").get<bool>();
    record.generation_seconds = doc.at("generation_seconds").get<double>();
    record.validation_seconds = doc.at("validation_seconds").get<double>();
    record.duplicates_regenerated = doc.value("duplicates_regenerated", 0);
  } catch (const nlohmann::json::exception& e) {
    throw StorageError(std::string("malformed scenario record: ") + e.what());
  }
  return record;
}

MutationCache::MutationCache() = default;

MutationCache::MutationCache(const std::string& path) : path_(path), persistent_(true) {
  ensure_parent_dir(path_);
  replay(path_);
}

void MutationCache::replay(const std::string& path) {
  for (const auto& event : read_jsonl(path)) {
    std::string kind = event.value("event", "");
    if (kind == "attempt") {
      MutationEntry entry = entry_from_json(event.at("entry"));
      if (by_id_.count(entry.entry_id))
        throw StorageError("duplicate entry id " + std::to_string(entry.entry_id) + " in " + path);
      entries_.push_back(std::move(entry));
      index_entry_locked(entries_.back(), entries_.size() - 1);
      next_id_ = std::max(next_id_, entries_.back().entry_id + 1);
    } else if (kind == "outcome") {
      std::int64_t id = event.at("entry_id").get<std::int64_t>();
      auto it = by_id_.find(id);
      if (it == by_id_.end())
        throw StorageError("outcome for unknown entry " + std::to_string(id) + " in " + path);
      entries_[it->second].outcome = outcome_from_string(event.at("outcome").get<std::string>());
    } else {
      throw StorageError("unknown event kind '" + kind + "' in " + path);
    }
  }
}

void MutationCache::append_event(const nlohmann::json& event) {
  if (persistent_) append_jsonl(path_, event);
}

void MutationCache::index_entry_locked(const MutationEntry& entry, std::size_t pos) {
  by_id_[entry.entry_id] = pos;
  fingerprints_.insert(StructuralKey::from_entry(entry).fingerprint());
}

std::int64_t MutationCache::record_attempt(MutationEntry entry) {
  if (entry.outcome != Outcome::Pending)
    throw StorageError("attempts are recorded with a pending outcome");
  if (entry.target_block.start_line < entry.region_start_line ||
      entry.target_block.end_line > entry.region_end_line ||
      entry.target_block.start_line > entry.target_block.end_line)
    throw StorageError("target lines " + std::to_string(entry.target_block.start_line) + "-" +
                       std::to_string(entry.target_block.end_line) + " fall outside region " +
                       std::to_string(entry.region_start_line) + "-" +
                       std::to_string(entry.region_end_line));
  std::lock_guard<std::mutex> lock(mu_);
  entry.entry_id = next_id_++;
  if (entry.timestamp == 0.0) entry.timestamp = now_unix_seconds();
  append_event({{"event", "attempt"}, {"entry", entry_to_json(entry)}});
  entries_.push_back(std::move(entry));
  index_entry_locked(entries_.back(), entries_.size() - 1);
  return entries_.back().entry_id;
}

void MutationCache::update_outcome(std::int64_t entry_id, Outcome outcome) {
  if (outcome == Outcome::Pending) throw StorageError("cannot finalize an entry back to pending");
  std::lock_guard<std::mutex> lock(mu_);
  auto it = by_id_.find(entry_id);
  if (it == by_id_.end()) throw UnknownEntry("no cache entry " + std::to_string(entry_id));
  MutationEntry& entry = entries_[it->second];
  if (entry.outcome != Outcome::Pending)
    throw AlreadyFinalized("entry " + std::to_string(entry_id) + " already finalized as " +
                           outcome_to_string(entry.outcome));
  append_event({{"event", "outcome"},
                {"entry_id", entry_id},
                {"outcome", outcome_to_string(outcome)}});
  entry.outcome = outcome;
}

bool MutationCache::is_duplicate(const StructuralKey& key) const {
  std::lock_guard<std::mutex> lock(mu_);
  return fingerprints_.count(key.fingerprint()) > 0;
}

RegionHistory MutationCache::region_history(const std::string& module_id, int region_index,
                                            bool coverage_mode) const {
  std::lock_guard<std::mutex> lock(mu_);
  RegionHistory history;
  for (const auto& entry : entries_) {
    if (entry.module_id != module_id || entry.region_index != region_index) continue;
    switch (entry.outcome) {
      case Outcome::Success:
        history.succeeded.push_back(entry);
        break;
      case Outcome::SyntaxFailure:
        history.failed.push_back(entry);
        break;
      case Outcome::Undetected:
        if (!coverage_mode) history.failed.push_back(entry);
        break;
      case Outcome::Pending:
        break;
    }
  }
  return history;
}

std::map<int, RegionStats> MutationCache::region_stats(const std::string& module_id) const {
  std::lock_guard<std::mutex> lock(mu_);
  std::map<int, RegionStats> stats;
  for (const auto& entry : entries_) {
    if (entry.module_id != module_id) continue;
    RegionStats& s = stats[entry.region_index];
    ++s.recorded;
    if (entry.outcome != Outcome::Pending) {
      ++s.finalized;
      ++s.class_histogram[entry.class_id];
      if (entry.outcome == Outcome::Success) ++s.successes;
    }
  }
  return stats;
}

std::vector<MutationEntry> MutationCache::snapshot() const {
  std::lock_guard<std::mutex> lock(mu_);
  return entries_;
}

std::optional<MutationEntry> MutationCache::find(std::int64_t entry_id) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = by_id_.find(entry_id);
  if (it == by_id_.end()) return std::nullopt;
  return entries_[it->second];
}

std::size_t MutationCache::size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return entries_.size();
}

OutcomeCounts MutationCache::outcome_counts() const {
  std::lock_guard<std::mutex> lock(mu_);
  OutcomeCounts counts;
  for (const auto& entry : entries_) counts.add(entry.outcome);
  return counts;
}

std::vector<MutationEntry> MutationCache::load_entries(const std::string& path) {
  MutationCache cache(path);
  return cache.snapshot();
}

ScenarioLog::ScenarioLog(const std::string& path) : path_(path), persistent_(true) {
  ensure_parent_dir(path_);
  records_ = load(path_);
}

void ScenarioLog::record(const BugScenarioRecord& record) {
  std::lock_guard<std::mutex> lock(mu_);
  if (persistent_) append_jsonl(path_, scenario_to_json(record));
  records_.push_back(record);
}

std::vector<BugScenarioRecord> ScenarioLog::snapshot() const {
  std::lock_guard<std::mutex> lock(mu_);
  return records_;
}

std::vector<BugScenarioRecord> ScenarioLog::load(const std::string& path) {
  std::vector<BugScenarioRecord> records;
  for (const auto& event : read_jsonl(path)) records.push_back(scenario_from_json(event));
  return records;
}

}  // namespace rtlmut

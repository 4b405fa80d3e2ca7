#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace rtlmut {

// Reversible record of one applied block replacement. Byte strings keep
// their original terminators so reverting is exact.
struct PatchRecord {
  std::string file;  // path relative to workspace root
  int start_line = 0;
  int end_line = 0;           // original range, 1-based inclusive
  std::string original_text;  // raw bytes replaced
  std::string applied_text;   // raw bytes written in their place
  std::int64_t entry_id = 0;

  int applied_line_count() const;
};

// A worker's private copy of one design's RTL files, pinned by per-file
// content digests taken before any patch.
class Workspace {
 public:
  // Copies `files` (relative paths) from `source_root` into `root` and
  // records pristine digests.
  static Workspace create(const std::string& source_root, const std::string& root,
                          const std::vector<std::string>& files);

  // Adopts files already in place under `root`.
  static Workspace adopt(const std::string& root, const std::vector<std::string>& files);

  const std::string& root() const { return root_; }
  const std::vector<std::string>& files() const { return files_; }
  const std::map<std::string, std::string>& pristine_digests() const { return digests_; }

  std::string absolute_path(const std::string& file) const;
  std::string read(const std::string& file) const;

  // Replaces lines [start_line, end_line] with `replacement`. The current
  // content of the range must equal `expected_original` byte for byte
  // (StaleContent otherwise). The replacement adopts the original last
  // line's terminator so no bytes outside the range change.
  PatchRecord apply_patch(const std::string& file, int start_line, int end_line,
                          std::string_view replacement, std::string_view expected_original,
                          std::int64_t entry_id = 0);

  // Reverts records in reverse application order, then verifies every
  // touched file's digest equals its pristine digest.
  void rollback(const std::vector<PatchRecord>& records);

  // DigestMismatch unless every file matches its pristine digest.
  void verify_pristine() const;

  // Copies the current (possibly mutated) files plus a manifest into
  // `dest_dir`.
  void archive_snapshot(const std::string& dest_dir, const nlohmann::json& manifest) const;

 private:
  Workspace() = default;

  std::string root_;
  std::vector<std::string> files_;
  std::map<std::string, std::string> digests_;
};

}  // namespace rtlmut

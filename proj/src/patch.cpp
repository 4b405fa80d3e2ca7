#include "rtlmut/patch.hpp"

#include <filesystem>

#include "rtlmut/digest.hpp"
#include "rtlmut/errors.hpp"
#include "rtlmut/text.hpp"

namespace fs = std::filesystem;

namespace rtlmut {

namespace {

void copy_into(const std::string& src, const std::string& dst) {
  fs::path target(dst);
  if (target.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
  }
  write_file(dst, read_file(src));
}

// Splits `text` into [before, range, after] around 1-based inclusive lines.
struct RangeSplit {
  std::string before;
  std::string range;
  std::string after;
};

RangeSplit split_range(std::string_view text, int start_line, int end_line) {
  auto lines = split_lines_keep_ends(text);
  int total = static_cast<int>(lines.size());
  if (start_line < 1 || end_line > total || start_line > end_line)
    throw StaleContent("patch range " + std::to_string(start_line) + "-" +
                       std::to_string(end_line) + " is outside a " + std::to_string(total) +
                       "-line file");
  RangeSplit split;
  for (int i = 0; i < total; ++i) {
    int line = i + 1;
    std::string_view l = lines[static_cast<std::size_t>(i)];
    if (line < start_line)
      split.before += l;
    else if (line <= end_line)
      split.range += l;
    else
      split.after += l;
  }
  return split;
}

// Returns `replacement` carrying the same trailing terminator as `original`.
std::string adopt_terminator(std::string_view replacement, std::string_view original) {
  std::string_view body = replacement;
  std::string_view eol;
  if (body.size() >= 2 && body.substr(body.size() - 2) == "\r\n")
    body.remove_suffix(2);
  else if (!body.empty() && (body.back() == '\n' || body.back() == '\r'))
    body.remove_suffix(1);

  std::string_view orig_body = original;
  if (orig_body.size() >= 2 && orig_body.substr(orig_body.size() - 2) == "\r\n")
    eol = orig_body.substr(orig_body.size() - 2);
  else if (!orig_body.empty() && (orig_body.back() == '\n' || orig_body.back() == '\r'))
    eol = orig_body.substr(orig_body.size() - 1);

  return std::string(body) + std::string(eol);
}

}  // namespace

int PatchRecord::applied_line_count() const {
  return count_lines(applied_text);
}

Workspace Workspace::create(const std::string& source_root, const std::string& root,
                            const std::vector<std::string>& files) {
  if (files.empty()) throw IoError("workspace needs at least one file");
  Workspace ws;
  ws.root_ = root;
  ws.files_ = files;
  std::error_code ec;
  fs::create_directories(root, ec);
  for (const auto& file : files) {
    std::string src = (fs::path(source_root) / file).string();
    std::string dst = ws.absolute_path(file);
    copy_into(src, dst);
    ws.digests_[file] = sha256_file(dst);
  }
  return ws;
}

Workspace Workspace::adopt(const std::string& root, const std::vector<std::string>& files) {
  if (files.empty()) throw IoError("workspace needs at least one file");
  Workspace ws;
  ws.root_ = root;
  ws.files_ = files;
  for (const auto& file : files) ws.digests_[file] = sha256_file(ws.absolute_path(file));
  return ws;
}

std::string Workspace::absolute_path(const std::string& file) const {
  return (fs::path(root_) / file).string();
}

std::string Workspace::read(const std::string& file) const {
  return read_file(absolute_path(file));
}

PatchRecord Workspace::apply_patch(const std::string& file, int start_line, int end_line,
                                   std::string_view replacement,
                                   std::string_view expected_original, std::int64_t entry_id) {
  if (!digests_.count(file)) throw IoError("file " + file + " is not part of the workspace");
  std::string content = read(file);
  RangeSplit split = split_range(content, start_line, end_line);
  if (split.range != expected_original)
    throw StaleContent("lines " + std::to_string(start_line) + "-" + std::to_string(end_line) +
                       " of " + file + " no longer hold the expected content");

  PatchRecord record;
  record.file = file;
  record.start_line = start_line;
  record.end_line = end_line;
  record.original_text = split.range;
  record.applied_text = adopt_terminator(replacement, split.range);
  record.entry_id = entry_id;

  write_file(absolute_path(file), split.before + record.applied_text + split.after);
  return record;
}

void Workspace::rollback(const std::vector<PatchRecord>& records) {
  for (auto it = records.rbegin(); it != records.rend(); ++it) {
    const PatchRecord& record = *it;
    std::string content = read(record.file);
    int applied_lines = count_lines(record.applied_text);
    int end_line = record.start_line + (applied_lines > 0 ? applied_lines - 1 : 0);
    RangeSplit split = split_range(content, record.start_line, end_line);
    if (split.range != record.applied_text)
      throw StaleContent("cannot revert " + record.file + " lines " +
                         std::to_string(record.start_line) + "-" + std::to_string(end_line) +
                         ": content diverged from the applied patch");
    write_file(absolute_path(record.file), split.before + record.original_text + split.after);
  }
  std::map<std::string, bool> touched;
  for (const auto& r : records) touched[r.file] = true;
  for (const auto& [file, _] : touched) {
    std::string digest = sha256_file(absolute_path(file));
    if (digest != digests_.at(file))
      throw DigestMismatch("after rollback, " + file + " does not match its pristine digest");
  }
}

void Workspace::verify_pristine() const {
  for (const auto& [file, digest] : digests_) {
    std::string current = sha256_file(absolute_path(file));
    if (current != digest)
      throw DigestMismatch("workspace file " + file + " differs from its pristine content");
  }
}

void Workspace::archive_snapshot(const std::string& dest_dir, const nlohmann::json& manifest) const {
  std::error_code ec;
  fs::create_directories(dest_dir, ec);
  for (const auto& file : files_)
    copy_into(absolute_path(file), (fs::path(dest_dir) / file).string());
  write_file((fs::path(dest_dir) / "manifest.json").string(), manifest.dump(2) + "\n");
}

}  // namespace rtlmut

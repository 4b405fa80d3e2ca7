#include "rtlmut/partition.hpp"

#include <algorithm>
#include <sstream>

#include "rtlmut/agents.hpp"
#include "rtlmut/errors.hpp"
#include "rtlmut/text.hpp"

namespace rtlmut {

namespace {

enum class LineKind {
  Blank,
  Comment,
  Directive,
  Module,
  Endmodule,
  Always,
  Initial,
  Function,
  Task,
  Generate,
  Assign,
  Decl,
  Other
};

// Grouping class for consecutive-line merging.
enum class Group { None, Directive, Assign, Decl, Other, Construct, Comment };

struct LineScan {
  LineKind kind = LineKind::Blank;
  bool has_code = false;
  int block_delta = 0;  // begin/end-style pairs
  int paren_delta = 0;
  int openers = 0;          // begin-style opener tokens on this line
  bool ends_semicolon = false;
  std::string first_word;
};

const char* kAlwaysKeywords[] = {"always", "always_ff", "always_comb", "always_latch"};
const char* kDeclKeywords[] = {"input",  "output",   "inout",   "wire",    "logic",
                               "reg",    "localparam", "parameter", "typedef", "genvar",
                               "integer", "real",    "time",    "signed",  "struct",
                               "enum",   "bit",      "byte",    "int",     "shortint",
                               "longint", "var",     "const",   "import",  "export"};

bool is_one_of(const std::string& w, const char* const* list, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    if (w == list[i]) return true;
  return false;
}

int block_token_delta(const std::string& tok, bool count_module) {
  if (tok == "begin" || tok == "case" || tok == "casex" || tok == "casez" ||
      tok == "function" || tok == "task" || tok == "generate" || tok == "fork")
    return 1;
  if (tok == "end" || tok == "endcase" || tok == "endfunction" || tok == "endtask" ||
      tok == "endgenerate" || tok == "join" || tok == "join_any" || tok == "join_none")
    return -1;
  if (count_module) {
    if (tok == "module" || tok == "macromodule" || tok == "interface" || tok == "package")
      return 1;
    if (tok == "endmodule" || tok == "endinterface" || tok == "endpackage") return -1;
  }
  return 0;
}

bool is_opener_token(const std::string& tok) {
  return tok == "begin" || tok == "case" || tok == "casex" || tok == "casez" ||
         tok == "function" || tok == "task" || tok == "generate" || tok == "fork";
}

// Strips comments and string literals, leaving only code characters.
// `in_block_comment` carries /* ... */ state across lines.
std::string code_view(std::string_view raw, bool& in_block_comment) {
  std::string code;
  bool in_string = false;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    char c = raw[i];
    if (in_block_comment) {
      if (c == '*' && i + 1 < raw.size() && raw[i + 1] == '/') {
        in_block_comment = false;
        ++i;
      }
      continue;
    }
    if (in_string) {
      if (c == '\\' && i + 1 < raw.size()) {
        ++i;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '/' && i + 1 < raw.size() && raw[i + 1] == '/') break;
    if (c == '/' && i + 1 < raw.size() && raw[i + 1] == '*') {
      in_block_comment = true;
      ++i;
      continue;
    }
    if (c == '"') {
      in_string = true;
      code += ' ';
      continue;
    }
    code += c;
  }
  return code;
}

LineScan analyze_line(std::string_view raw, bool& in_block_comment, bool count_module) {
  LineScan scan;
  std::string_view line = strip_eol(raw);
  bool had_comment_state = in_block_comment;
  std::string code = code_view(line, in_block_comment);
  std::string trimmed = trim(code);

  if (trimmed.empty()) {
    bool raw_blank = trim(line).empty();
    scan.kind = (raw_blank && !had_comment_state) ? LineKind::Blank : LineKind::Comment;
    return scan;
  }
  scan.has_code = true;
  scan.ends_semicolon = trimmed.back() == ';';

  for (char c : code) {
    if (c == '(') ++scan.paren_delta;
    if (c == ')') --scan.paren_delta;
  }
  auto tokens = identifier_tokens(code);
  if (!tokens.empty()) scan.first_word = tokens.front();
  for (const auto& tok : tokens) {
    scan.block_delta += block_token_delta(tok, count_module);
    if (is_opener_token(tok)) ++scan.openers;
  }

  const std::string& w = scan.first_word;
  if (trimmed.front() == '`') {
    scan.kind = LineKind::Directive;
  } else if (w == "module" || w == "macromodule") {
    scan.kind = LineKind::Module;
  } else if (w == "endmodule") {
    scan.kind = LineKind::Endmodule;
  } else if (is_one_of(w, kAlwaysKeywords, std::size(kAlwaysKeywords))) {
    scan.kind = LineKind::Always;
  } else if (w == "initial" || w == "final") {
    scan.kind = LineKind::Initial;
  } else if (w == "function") {
    scan.kind = LineKind::Function;
  } else if (w == "task") {
    scan.kind = LineKind::Task;
  } else if (w == "generate") {
    scan.kind = LineKind::Generate;
  } else if (w == "assign") {
    scan.kind = LineKind::Assign;
  } else if (is_one_of(w, kDeclKeywords, std::size(kDeclKeywords))) {
    scan.kind = LineKind::Decl;
  } else {
    scan.kind = LineKind::Other;
  }
  return scan;
}

bool is_big_construct(LineKind kind) {
  return kind == LineKind::Module || kind == LineKind::Always || kind == LineKind::Initial ||
         kind == LineKind::Function || kind == LineKind::Task || kind == LineKind::Generate;
}

Group group_of(LineKind kind) {
  switch (kind) {
    case LineKind::Directive:
      return Group::Directive;
    case LineKind::Assign:
      return Group::Assign;
    case LineKind::Decl:
      return Group::Decl;
    case LineKind::Module:
    case LineKind::Always:
    case LineKind::Initial:
    case LineKind::Function:
    case LineKind::Task:
    case LineKind::Generate:
      return Group::Construct;
    default:
      return Group::Other;
  }
}

std::string synopsis_for(LineKind kind, const std::string& first_word) {
  switch (kind) {
    case LineKind::Module:
      return "module declaration and port list";
    case LineKind::Always:
      return first_word + " block";
    case LineKind::Initial:
      return first_word + " block";
    case LineKind::Function:
      return "function definition";
    case LineKind::Task:
      return "task definition";
    case LineKind::Generate:
      return "generate block";
    case LineKind::Assign:
      return "continuous assignments";
    case LineKind::Decl:
      return "signal and parameter declarations";
    case LineKind::Directive:
      return "preprocessor directives";
    case LineKind::Comment:
      return "comments and whitespace";
    default:
      return "module instantiations and statements";
  }
}

struct AgentRegion {
  int start_line = 0;
  int end_line = 0;
  std::string synopsis;
};

std::string format_defects(const std::vector<PartitionDefect>& defects) {
  std::ostringstream out;
  for (const auto& d : defects) {
    out << d.detail << "; ";
  }
  return out.str();
}

std::vector<PartitionDefect> validate_cover(const std::vector<AgentRegion>& regions,
                                            int first_line, int last_line) {
  std::vector<PartitionDefect> defects;
  std::vector<AgentRegion> sorted = regions;
  std::sort(sorted.begin(), sorted.end(),
            [](const AgentRegion& a, const AgentRegion& b) { return a.start_line < b.start_line; });
  int expected = first_line;
  for (const auto& r : sorted) {
    if (r.start_line > r.end_line || r.start_line < first_line || r.end_line > last_line) {
      std::ostringstream ss;
      ss << "region " << r.start_line << "-" << r.end_line << " outside lines " << first_line
         << "-" << last_line;
      defects.push_back({PartitionDefect::Kind::OutOfRange, r.start_line, r.end_line, ss.str()});
      continue;
    }
    if (r.start_line > expected) {
      std::ostringstream ss;
      ss << "gap at lines " << expected << "-" << (r.start_line - 1);
      defects.push_back({PartitionDefect::Kind::Gap, expected, r.start_line - 1, ss.str()});
    } else if (r.start_line < expected) {
      std::ostringstream ss;
      ss << "overlap at lines " << r.start_line << "-" << std::min(r.end_line, expected - 1);
      defects.push_back(
          {PartitionDefect::Kind::Overlap, r.start_line, std::min(r.end_line, expected - 1), ss.str()});
    }
    expected = std::max(expected, r.end_line + 1);
  }
  if (expected <= last_line) {
    std::ostringstream ss;
    ss << "gap at lines " << expected << "-" << last_line;
    defects.push_back({PartitionDefect::Kind::Gap, expected, last_line, ss.str()});
  }
  return defects;
}

std::string numbered(std::string_view text, int first_line) {
  std::ostringstream out;
  int line = first_line;
  for (const auto& l : split_lines_keep_ends(text)) {
    out << line << "| " << strip_eol(l) << "\n";
    ++line;
  }
  return out.str();
}

// One splitter call covering [first_line, last_line]; the response must
// partition that range exactly. Coverage defects are fed back as re-prompts.
std::vector<AgentRegion> split_range(std::string_view source, int first_line, int last_line,
                                     const SplitterConfig& config, AgentBackend& backend,
                                     const PromptLibrary& prompts, bool whole_file) {
  std::string chunk = slice_lines(source, first_line, last_line);
  std::ostringstream scope;
  if (whole_file)
    scope << "the entire module (" << last_line << " lines)";
  else
    scope << "lines " << first_line << " through " << last_line << " of the module";

  AgentRequest request;
  request.schema = ResponseSchema::SplitChunk;
  request.prompt = prompts.render("module_splitter", {
                                                         {"guidelines", config.guidelines},
                                                         {"scope", scope.str()},
                                                         {"first_line", std::to_string(first_line)},
                                                         {"last_line", std::to_string(last_line)},
                                                         {"chunk", numbered(chunk, first_line)},
                                                     });
  request.payload = {{"text", chunk}, {"first_line", first_line}, {"last_line", last_line}};

  auto validator = [first_line, last_line](const nlohmann::json& reply) {
    if (!reply.is_object() || !reply.contains("regions") || !reply["regions"].is_array() ||
        reply["regions"].empty())
      return ValidationResult::shape("response must be an object with a non-empty \"regions\" array");
    std::vector<AgentRegion> regions;
    for (const auto& r : reply["regions"]) {
      if (!r.is_object() || !r.contains("start_line") || !r.contains("end_line") ||
          !r["start_line"].is_number_integer() || !r["end_line"].is_number_integer())
        return ValidationResult::shape("each region needs integer start_line and end_line");
      if (!r.contains("synopsis") || !r["synopsis"].is_string() ||
          r["synopsis"].get<std::string>().empty())
        return ValidationResult::shape("each region needs a non-empty synopsis");
      regions.push_back({r["start_line"].get<int>(), r["end_line"].get<int>(),
                         r["synopsis"].get<std::string>()});
    }
    auto defects = validate_cover(regions, first_line, last_line);
    if (!defects.empty())
      return ValidationResult::invalid("regions do not partition the given lines: " +
                                       format_defects(defects));
    return ValidationResult::valid();
  };

  AgentContext ctx{backend, prompts};
  nlohmann::json reply = complete_structured(ctx, request, validator,
                                             [](const std::string& err) {
                                               throw PartitionInvalid(err);
                                             });
  std::vector<AgentRegion> regions;
  for (const auto& r : reply["regions"])
    regions.push_back(
        {r["start_line"].get<int>(), r["end_line"].get<int>(), r["synopsis"].get<std::string>()});
  std::sort(regions.begin(), regions.end(),
            [](const AgentRegion& a, const AgentRegion& b) { return a.start_line < b.start_line; });
  return regions;
}

ModulePartition assemble(const std::string& source_id, int total_lines,
                         const std::vector<AgentRegion>& regions) {
  ModulePartition partition;
  partition.source_id = source_id;
  partition.total_lines = total_lines;
  int index = 0;
  for (const auto& r : regions) {
    Region region;
    region.index = index++;
    region.start_line = r.start_line;
    region.end_line = r.end_line;
    region.synopsis = r.synopsis;
    partition.regions.push_back(std::move(region));
  }
  return partition;
}

}  // namespace

const Region* ModulePartition::find_region(int index) const {
  for (const auto& r : regions)
    if (r.index == index) return &r;
  return nullptr;
}

std::vector<PartitionDefect> validate_partition(const ModulePartition& partition,
                                                std::string_view source) {
  std::vector<AgentRegion> regions;
  regions.reserve(partition.regions.size());
  for (const auto& r : partition.regions) regions.push_back({r.start_line, r.end_line, r.synopsis});
  int total = count_lines(source);
  auto defects = validate_cover(regions, 1, total);
  if (partition.total_lines != total) {
    std::ostringstream ss;
    ss << "partition declares " << partition.total_lines << " lines but source has " << total;
    defects.push_back({PartitionDefect::Kind::OutOfRange, 1, total, ss.str()});
  }
  return defects;
}

int balance_score(std::string_view text) {
  bool in_block_comment = false;
  int score = 0;
  for (const auto& line : split_lines_keep_ends(text)) {
    LineScan scan = analyze_line(line, in_block_comment, /*count_module=*/true);
    score += scan.block_delta + scan.paren_delta;
  }
  return score;
}

std::vector<ScannedRegion> scan_regions(std::string_view text, int first_line) {
  auto lines = split_lines_keep_ends(text);
  std::vector<ScannedRegion> regions;

  bool in_block_comment = false;
  int depth = 0;
  int pending_start = -1;
  bool have_current = false;
  Group current_group = Group::None;
  bool construct_open = false;
  bool construct_entered = false;

  auto current = [&]() -> ScannedRegion& { return regions.back(); };

  for (std::size_t i = 0; i < lines.size(); ++i) {
    int abs = first_line + static_cast<int>(i);
    LineScan scan = analyze_line(lines[i], in_block_comment, /*count_module=*/false);

    if (!scan.has_code) {
      if (have_current && construct_open) {
        current().end_line = abs;
      } else if (pending_start < 0) {
        pending_start = abs;
      }
      continue;
    }

    bool open_new = false;
    if (depth == 0 && !construct_open) {
      if (!have_current)
        open_new = true;
      else if (scan.kind == LineKind::Endmodule)
        open_new = false;
      else if (is_big_construct(scan.kind))
        open_new = true;
      else if (group_of(scan.kind) != current_group)
        open_new = true;
    }

    if (open_new) {
      ScannedRegion region;
      region.start_line = pending_start >= 0 ? pending_start : abs;
      region.end_line = abs;
      region.synopsis = synopsis_for(scan.kind, scan.first_word);
      regions.push_back(std::move(region));
      have_current = true;
      current_group = group_of(scan.kind);
      construct_open = is_big_construct(scan.kind);
      construct_entered = false;
    }
    pending_start = -1;

    depth += scan.block_delta + scan.paren_delta;
    if (depth < 0) depth = 0;
    if (construct_open) {
      if (scan.openers > 0 || depth > 0) construct_entered = true;
      if (depth == 0 && (scan.ends_semicolon || construct_entered)) construct_open = false;
    }
    if (have_current) current().end_line = abs;
  }

  int last_abs = first_line + static_cast<int>(lines.size()) - 1;
  if (pending_start >= 0) {
    if (have_current) {
      current().end_line = last_abs;
    } else if (!lines.empty()) {
      ScannedRegion region;
      region.start_line = pending_start;
      region.end_line = last_abs;
      region.synopsis = synopsis_for(LineKind::Comment, "");
      regions.push_back(std::move(region));
    }
  }
  return regions;
}

namespace {

bool range_has_code(std::string_view source, int start_line, int end_line) {
  bool in_block_comment = false;
  int line = 1;
  for (const auto& l : split_lines_keep_ends(source)) {
    LineScan scan = analyze_line(l, in_block_comment, false);
    if (line >= start_line && line <= end_line && scan.has_code) return true;
    if (line > end_line) break;
    ++line;
  }
  return false;
}

}  // namespace

void tag_mutability(ModulePartition& partition, std::string_view source) {
  bool in_block_comment = false;
  std::vector<bool> has_code;
  for (const auto& l : split_lines_keep_ends(source))
    has_code.push_back(analyze_line(l, in_block_comment, false).has_code);

  for (auto& region : partition.regions) {
    bool mutable_region = false;
    int last = std::min(region.end_line, static_cast<int>(has_code.size()));
    for (int line = std::max(region.start_line, 1); line <= last && !mutable_region; ++line)
      mutable_region = has_code[static_cast<std::size_t>(line - 1)];
    region.is_mutable = mutable_region;
  }
}

ModulePartition fallback_partition(std::string_view source, const std::string& source_id) {
  if (source.empty()) throw PartitionInvalid("cannot partition empty source: " + source_id);
  auto scanned = scan_regions(source, 1);
  std::vector<AgentRegion> regions;
  for (const auto& r : scanned) regions.push_back({r.start_line, r.end_line, r.synopsis});
  ModulePartition partition = assemble(source_id, count_lines(source), regions);
  partition.fallback_derived = true;
  tag_mutability(partition, source);
  return partition;
}

bool detect_boundary_dependency(std::string_view tail_region_text,
                                std::string_view auxiliary_lines, AgentBackend& backend,
                                const PromptLibrary& prompts) {
  if (auxiliary_lines.empty()) return false;
  if (tail_region_text.empty()) throw PartitionInvalid("boundary check on empty tail region");

  AgentRequest request;
  request.schema = ResponseSchema::BoundaryCheck;
  request.prompt = prompts.render("boundary_check", {
                                                        {"tail_region", std::string(tail_region_text)},
                                                        {"auxiliary_lines", std::string(auxiliary_lines)},
                                                    });
  request.payload = {{"tail", std::string(tail_region_text)},
                     {"aux", std::string(auxiliary_lines)}};

  auto validator = [](const nlohmann::json& reply) {
    if (!reply.is_object() || !reply.contains("continues") || !reply["continues"].is_boolean())
      return ValidationResult::shape("response must be an object with a boolean \"continues\"");
    return ValidationResult::valid();
  };

  AgentContext ctx{backend, prompts};
  nlohmann::json reply = complete_structured(ctx, request, validator);
  return reply["continues"].get<bool>();
}

ModulePartition partition_module(std::string_view source, const std::string& source_id,
                                 const SplitterConfig& config, AgentBackend& backend,
                                 const PromptLibrary& prompts) {
  if (source.empty()) throw PartitionInvalid("cannot partition empty source: " + source_id);
  if (config.auxiliary_lines >= config.chunk_size_lines)
    throw ConfigError("splitter auxiliary_lines must be smaller than chunk_size_lines");

  int total = count_lines(source);
  ModulePartition partition;
  try {
    std::vector<AgentRegion> accepted;
    if (total <= config.context_window_lines) {
      accepted = split_range(source, 1, total, config, backend, prompts, /*whole_file=*/true);
    } else {
      int start = 1;
      int window = config.chunk_size_lines;
      while (start <= total) {
        int end = std::min(start + window - 1, total);
        auto regions = split_range(source, start, end, config, backend, prompts, false);
        std::string aux = slice_lines(source, end + 1, std::min(end + config.auxiliary_lines, total));
        bool continues = false;
        if (end < total && !aux.empty()) {
          const auto& last = regions.back();
          std::string tail = slice_lines(source, last.start_line, last.end_line);
          continues = detect_boundary_dependency(tail, aux, backend, prompts);
        }
        if (continues) {
          if (regions.size() >= 2) {
            accepted.insert(accepted.end(), regions.begin(), regions.end() - 1);
            start = regions.back().start_line;
            window = config.chunk_size_lines;
          } else {
            // The whole chunk is one unterminated region; widen and retry.
            window += config.chunk_size_lines;
          }
        } else {
          accepted.insert(accepted.end(), regions.begin(), regions.end());
          start = end + 1;
          window = config.chunk_size_lines;
        }
      }
    }
    partition = assemble(source_id, total, accepted);
    auto defects = validate_partition(partition, source);
    if (!defects.empty())
      throw PartitionInvalid("assembled partition fails coverage: " + format_defects(defects));
  } catch (const PartitionInvalid&) {
    partition = fallback_partition(source, source_id);
    return partition;
  } catch (const SchemaViolation&) {
    partition = fallback_partition(source, source_id);
    return partition;
  }
  tag_mutability(partition, source);
  return partition;
}

ModulePartition partition_from_explicit_regions(std::string_view source,
                                                const std::string& source_id,
                                                const std::vector<ExplicitRegion>& explicit_regions) {
  if (explicit_regions.empty())
    throw ConfigError("explicit region list for " + source_id + " is empty");
  int total = count_lines(source);
  std::vector<ExplicitRegion> sorted = explicit_regions;
  std::sort(sorted.begin(), sorted.end(),
            [](const ExplicitRegion& a, const ExplicitRegion& b) { return a.start_line < b.start_line; });

  ModulePartition partition;
  partition.source_id = source_id;
  partition.total_lines = total;
  int expected = 1;
  int index = 0;
  auto add_filler = [&](int from, int to) {
    Region filler;
    filler.index = index++;
    filler.start_line = from;
    filler.end_line = to;
    filler.synopsis = "outside engineer-specified target regions";
    filler.is_mutable = false;
    partition.regions.push_back(std::move(filler));
  };
  for (const auto& r : sorted) {
    if (r.start_line > r.end_line || r.start_line < 1 || r.end_line > total)
      throw ConfigError("explicit region " + std::to_string(r.start_line) + "-" +
                        std::to_string(r.end_line) + " is outside " + source_id);
    if (r.start_line < expected)
      throw ConfigError("explicit regions overlap at line " + std::to_string(r.start_line) +
                        " in " + source_id);
    if (r.start_line > expected) add_filler(expected, r.start_line - 1);
    Region region;
    region.index = index++;
    region.start_line = r.start_line;
    region.end_line = r.end_line;
    region.synopsis = r.label.empty() ? "engineer-specified target region" : r.label;
    region.is_mutable = range_has_code(source, r.start_line, r.end_line);
    partition.regions.push_back(std::move(region));
    expected = r.end_line + 1;
  }
  if (expected <= total) add_filler(expected, total);
  return partition;
}

nlohmann::json partition_to_json(const ModulePartition& partition) {
  nlohmann::ordered_json doc;
  doc["source_id"] = partition.source_id;
  doc["total_lines"] = partition.total_lines;
  doc["fallback_derived"] = partition.fallback_derived;
  doc["regions"] = nlohmann::ordered_json::array();
  for (const auto& r : partition.regions) {
    nlohmann::ordered_json region;
    region["index"] = r.index;
    region["start_line"] = r.start_line;
    region["end_line"] = r.end_line;
    region["synopsis"] = r.synopsis;
    region["mutation_count"] = r.mutation_count;
    region["mutable"] = r.is_mutable;
    doc["regions"].push_back(std::move(region));
  }
  return doc;
}

ModulePartition partition_from_json(const nlohmann::json& doc) {
  ModulePartition partition;
  try {
    partition.source_id = doc.at("source_id").get<std::string>();
    partition.total_lines = doc.at("total_lines").get<int>();
    partition.fallback_derived = doc.value("fallback_derived", false);
    for (const auto& r : doc.at("regions")) {
      Region region;
      region.index = r.at("index").get<int>();
      region.start_line = r.at("start_line").get<int>();
      region.end_line = r.at("end_line").get<int>();
      region.synopsis = r.at("synopsis").get<std::string>();
      region.mutation_count = r.value("mutation_count", 0);
      region.is_mutable = r.value("mutable", true);
      partition.regions.push_back(std::move(region));
    }
  } catch (const nlohmann::json::exception& e) {
    throw PartitionInvalid(std::string("malformed partition document: ") + e.what());
  }
  return partition;
}

}  // namespace rtlmut

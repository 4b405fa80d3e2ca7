#include <algorithm>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "rtlmut/backend.hpp"
#include "rtlmut/errors.hpp"
#include "rtlmut/partition.hpp"
#include "rtlmut/text.hpp"

namespace rtlmut {

std::string schema_name(ResponseSchema schema) {
  switch (schema) {
    case ResponseSchema::SplitChunk:
      return "split_chunk";
    case ResponseSchema::BoundaryCheck:
      return "boundary_check";
    case ResponseSchema::RegionChoice:
      return "region_choice";
    case ResponseSchema::MutationChoice:
      return "mutation_choice";
    case ResponseSchema::Injection:
      return "injection";
  }
  return "unknown";
}

namespace {

struct Site {
  int start_line = 0;
  int end_line = 0;
};

std::vector<std::string> to_lines(std::string_view text) {
  std::vector<std::string> lines;
  for (const auto& l : split_lines_keep_ends(text)) lines.emplace_back(strip_eol(l));
  return lines;
}

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i) out += '\n';
    out += lines[i];
  }
  return out;
}

bool is_code_line(const std::string& line) {
  std::string t = trim(line);
  if (t.empty()) return false;
  if (t.rfind("//", 0) == 0) return false;
  if (t.rfind("/*", 0) == 0) return false;
  if (t.rfind("*", 0) == 0) return false;
  return true;
}

const std::regex kAssignStmt(R"(^\s*assign\s+[^;]+;)");
const std::regex kNonblocking(R"(^\s*[A-Za-z_][\w\.\[\]]*\s*<=\s*[^;]+;)");
const std::regex kPortConn(R"(^\s*\.([A-Za-z_]\w*)\s*\()");
const std::regex kSimpleAssign(R"(^\s*([A-Za-z_][\w\.\[\]]*)\s*(<=|=)(?!=)\s*([^;]+);)");
const std::regex kForZero(R"(\bfor\b\s*\(\s*(?:int\s+|integer\s+)?([A-Za-z_]\w*)\s*=\s*0\b)");
const std::regex kBitwise(
    R"(^(\s*(?:assign\s+)?[A-Za-z_][\w\.\[\]]*\s*(?:<=|=)(?!=)\s*)(~?[A-Za-z_][\w\.\[\]]*)\s*([&|^])(?![&|=])\s*([^;]+);)");
const std::regex kDataSize(R"(\[(\d+):0\])");
const std::regex kConcatPair(R"(\{\s*([A-Za-z_][\w\.\[\]]*)\s*,\s*([A-Za-z_][\w\.\[\]]*)\s*\})");
const std::regex kIfHead(R"(\bif\s*\()");
const std::regex kStateAssign(R"(^\s*([A-Za-z_][\w\.\[\]]*)\s*(?:<=|=)(?!=)\s*([A-Z][A-Za-z0-9_]*)\s*;)");

bool matches(const std::string& line, const std::regex& re) {
  return std::regex_search(line, re);
}

// ---- per-class site scanners over a region's lines --------------------------

std::vector<Site> scan_missing_assignment(const std::vector<std::string>& lines, int first) {
  std::vector<Site> sites;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (!is_code_line(lines[i])) continue;
    if (matches(lines[i], kAssignStmt) || matches(lines[i], kNonblocking))
      sites.push_back({first + static_cast<int>(i), first + static_cast<int>(i)});
  }
  return sites;
}

std::vector<Site> scan_wrong_assignment(const std::vector<std::string>& lines, int first) {
  std::vector<Site> sites;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (!is_code_line(lines[i])) continue;
    std::smatch m, prev;
    if (i > 0 && std::regex_search(lines[i], m, kPortConn) &&
        std::regex_search(lines[i - 1], prev, kPortConn) && m[1] != prev[1]) {
      sites.push_back({first + static_cast<int>(i), first + static_cast<int>(i)});
      continue;
    }
    if (std::regex_search(lines[i], m, kSimpleAssign)) {
      for (int d : {-1, 1}) {
        std::size_t j = i + d;
        if (j >= lines.size()) continue;
        std::smatch adj;
        if (std::regex_search(lines[j], adj, kSimpleAssign) && adj[1] != m[1]) {
          sites.push_back({first + static_cast<int>(i), first + static_cast<int>(i)});
          break;
        }
      }
    }
  }
  return sites;
}

std::vector<Site> scan_loop_modification(const std::vector<std::string>& lines, int first) {
  std::vector<Site> sites;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::smatch m;
    if (!is_code_line(lines[i]) || !std::regex_search(lines[i], m, kForZero)) continue;
    std::string var = m[1];
    std::string index = "[" + var + "]";
    for (std::size_t j = i + 1; j < lines.size() && j <= i + 3; ++j) {
      if (lines[j].find(index) != std::string::npos) {
        sites.push_back({first + static_cast<int>(i), first + static_cast<int>(j)});
        break;
      }
    }
  }
  return sites;
}

std::vector<Site> scan_logic_bug(const std::vector<std::string>& lines, int first) {
  std::vector<Site> sites;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (!is_code_line(lines[i])) continue;
    const std::string& l = lines[i];
    if (l.find("&&") != std::string::npos || l.find("||") != std::string::npos ||
        l.find("==") != std::string::npos || l.find("!=") != std::string::npos ||
        matches(l, kIfHead))
      sites.push_back({first + static_cast<int>(i), first + static_cast<int>(i)});
  }
  return sites;
}

std::vector<Site> scan_bitwise_corruption(const std::vector<std::string>& lines, int first) {
  std::vector<Site> sites;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (is_code_line(lines[i]) && matches(lines[i], kBitwise))
      sites.push_back({first + static_cast<int>(i), first + static_cast<int>(i)});
  }
  return sites;
}

std::vector<Site> scan_incorrect_data_size(const std::vector<std::string>& lines, int first) {
  std::vector<Site> sites;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::smatch m;
    if (is_code_line(lines[i]) && std::regex_search(lines[i], m, kDataSize) &&
        std::stoi(m[1]) >= 1)
      sites.push_back({first + static_cast<int>(i), first + static_cast<int>(i)});
  }
  return sites;
}

std::vector<Site> scan_adjacent_field_swap(const std::vector<std::string>& lines, int first) {
  std::vector<Site> sites;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::smatch m;
    if (is_code_line(lines[i]) && std::regex_search(lines[i], m, kConcatPair) && m[1] != m[2])
      sites.push_back({first + static_cast<int>(i), first + static_cast<int>(i)});
  }
  return sites;
}

std::vector<std::string> region_states(const std::vector<std::string>& lines) {
  std::vector<std::string> states;
  for (const auto& line : lines) {
    std::smatch m;
    if (!is_code_line(line) || !std::regex_search(line, m, kStateAssign)) continue;
    if (std::find(states.begin(), states.end(), m[2]) == states.end()) states.push_back(m[2]);
  }
  return states;
}

std::vector<Site> scan_fsm_transition_error(const std::vector<std::string>& lines, int first) {
  std::vector<Site> sites;
  if (region_states(lines).size() < 2) return sites;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (!is_code_line(lines[i]) || !matches(lines[i], kStateAssign)) continue;
    std::size_t end = i;
    if (i + 1 < lines.size() && is_code_line(lines[i + 1]) && matches(lines[i + 1], kStateAssign))
      end = i + 1;
    sites.push_back({first + static_cast<int>(i), first + static_cast<int>(end)});
    i = end;
  }
  return sites;
}

std::vector<Site> scan_any_code(const std::vector<std::string>& lines, int first) {
  std::vector<Site> sites;
  for (std::size_t i = 0; i < lines.size(); ++i)
    if (is_code_line(lines[i]))
      sites.push_back({first + static_cast<int>(i), first + static_cast<int>(i)});
  return sites;
}

using Scanner = std::vector<Site> (*)(const std::vector<std::string>&, int);

Scanner scanner_for(const std::string& class_id) {
  if (class_id == "missing_assignment") return scan_missing_assignment;
  if (class_id == "wrong_assignment") return scan_wrong_assignment;
  if (class_id == "loop_modification") return scan_loop_modification;
  if (class_id == "logic_bug") return scan_logic_bug;
  if (class_id == "bitwise_corruption") return scan_bitwise_corruption;
  if (class_id == "incorrect_data_size") return scan_incorrect_data_size;
  if (class_id == "adjacent_field_swap") return scan_adjacent_field_swap;
  if (class_id == "fsm_transition_error") return scan_fsm_transition_error;
  return scan_any_code;
}

// ---- per-class rewriters ----------------------------------------------------
// Each takes the target block plus the enclosing region for context and
// returns the rewritten block, or nothing when the pattern is absent.

struct RewriteInput {
  std::vector<std::string> block;  // target lines, no terminators
  int block_start = 0;             // absolute line of block[0]
  std::vector<std::string> region;
  int region_start = 0;

  const std::string* region_line(int abs) const {
    int idx = abs - region_start;
    if (idx < 0 || idx >= static_cast<int>(region.size())) return nullptr;
    return &region[static_cast<std::size_t>(idx)];
  }
};

std::optional<std::pair<std::vector<std::string>, std::string>> rewrite_missing_assignment(
    const RewriteInput& in) {
  auto out = in.block;
  for (auto& line : out) {
    if (!is_code_line(line)) continue;
    if (matches(line, kAssignStmt) || matches(line, kNonblocking)) {
      std::size_t indent = line.find_first_not_of(" \t");
      if (indent == std::string::npos) indent = 0;
      std::string lhs = "assignment";
      std::smatch m;
      if (std::regex_search(line, m, kSimpleAssign)) lhs = m[1];
      line = line.substr(0, indent) + "// " + line.substr(indent);
      return std::make_pair(out, "removed the assignment to " + lhs);
    }
  }
  return std::nullopt;
}

std::optional<std::pair<std::vector<std::string>, std::string>> rewrite_wrong_assignment(
    const RewriteInput& in) {
  auto out = in.block;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!is_code_line(out[i])) continue;
    std::smatch m;
    int abs = in.block_start + static_cast<int>(i);
    const std::string* prev = in.region_line(abs - 1);
    if (std::regex_search(out[i], m, kPortConn) && prev) {
      std::smatch pm;
      if (std::regex_search(*prev, pm, kPortConn) && pm[1] != m[1]) {
        std::string old_port = m[1].str();
        std::string new_port = pm[1].str();
        out[i] = replace_all(out[i], "." + old_port, "." + new_port);
        return std::make_pair(out, "connected port ." + new_port + " in place of ." + old_port);
      }
    }
    if (std::regex_search(out[i], m, kSimpleAssign)) {
      for (int d : {-1, 1}) {
        const std::string* adj = in.region_line(abs + d);
        if (!adj) continue;
        std::smatch am;
        if (std::regex_search(*adj, am, kSimpleAssign) && am[1] != m[1]) {
          std::size_t pos = out[i].find(m[1].str());
          if (pos == std::string::npos) break;
          out[i] = out[i].substr(0, pos) + am[1].str() + out[i].substr(pos + m[1].length());
          return std::make_pair(out, "redirected the assignment to " + am[1].str());
        }
      }
    }
  }
  return std::nullopt;
}

std::optional<std::pair<std::vector<std::string>, std::string>> rewrite_loop_modification(
    const RewriteInput& in) {
  auto out = in.block;
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::smatch m;
    if (!is_code_line(out[i]) || !std::regex_search(out[i], m, kForZero)) continue;
    std::string var = m[1];
    std::string index = "[" + var + "]";
    for (std::size_t j = out.size(); j-- > i + 1;) {
      std::size_t pos = out[j].find(index);
      if (pos == std::string::npos) continue;
      std::size_t zero = out[i].find("= 0");
      if (zero == std::string::npos) {
        zero = out[i].find("=0");
        if (zero == std::string::npos) break;
        out[i] = out[i].substr(0, zero) + "=1" + out[i].substr(zero + 2);
      } else {
        out[i] = out[i].substr(0, zero) + "= 1" + out[i].substr(zero + 3);
      }
      out[j] = out[j].substr(0, pos) + "[" + var + "-1]" + out[j].substr(pos + index.size());
      return std::make_pair(out, "shifted the loop over " + var + " off by one");
    }
  }
  return std::nullopt;
}

std::optional<std::pair<std::vector<std::string>, std::string>> rewrite_logic_bug(
    const RewriteInput& in) {
  auto out = in.block;
  for (auto& line : out) {
    if (!is_code_line(line)) continue;
    std::size_t pos;
    if ((pos = line.find("&&")) != std::string::npos) {
      line = line.substr(0, pos) + "||" + line.substr(pos + 2);
      return std::make_pair(out, "weakened a conjunction to a disjunction");
    }
    if ((pos = line.find("||")) != std::string::npos) {
      line = line.substr(0, pos) + "&&" + line.substr(pos + 2);
      return std::make_pair(out, "tightened a disjunction to a conjunction");
    }
    if ((pos = line.find("==")) != std::string::npos) {
      line = line.substr(0, pos) + "!=" + line.substr(pos + 2);
      return std::make_pair(out, "inverted an equality comparison");
    }
    if ((pos = line.find("!=")) != std::string::npos) {
      line = line.substr(0, pos) + "==" + line.substr(pos + 2);
      return std::make_pair(out, "inverted an inequality comparison");
    }
    std::smatch m;
    if (std::regex_search(line, m, kIfHead)) {
      pos = static_cast<std::size_t>(m.position(0));
      std::size_t open = line.find('(', pos);
      int depth = 0;
      std::size_t close = std::string::npos;
      for (std::size_t i = open; i < line.size(); ++i) {
        if (line[i] == '(') ++depth;
        if (line[i] == ')' && --depth == 0) {
          close = i;
          break;
        }
      }
      if (close == std::string::npos) continue;
      std::string cond = line.substr(open + 1, close - open - 1);
      line = line.substr(0, open + 1) + "!(" + cond + ")" + line.substr(close);
      return std::make_pair(out, "negated a branch condition");
    }
  }
  return std::nullopt;
}

std::optional<std::pair<std::vector<std::string>, std::string>> rewrite_bitwise_corruption(
    const RewriteInput& in) {
  auto out = in.block;
  for (auto& line : out) {
    std::smatch m;
    if (!is_code_line(line) || !std::regex_search(line, m, kBitwise)) continue;
    line = m.prefix().str() + m[1].str() + m[2].str() + ";" + m.suffix().str();
    return std::make_pair(out, "dropped the second operand of a bitwise expression");
  }
  return std::nullopt;
}

std::optional<std::pair<std::vector<std::string>, std::string>> rewrite_incorrect_data_size(
    const RewriteInput& in) {
  auto out = in.block;
  for (auto& line : out) {
    std::smatch m;
    if (!is_code_line(line) || !std::regex_search(line, m, kDataSize)) continue;
    int width = std::stoi(m[1]);
    if (width < 1) continue;
    std::string original = "[" + m[1].str() + ":0]";
    std::string narrowed = "[" + std::to_string(width - 1) + ":0]";
    line = m.prefix().str() + narrowed + m.suffix().str();
    return std::make_pair(out, "narrowed a vector from " + original + " to " + narrowed);
  }
  return std::nullopt;
}

std::optional<std::pair<std::vector<std::string>, std::string>> rewrite_adjacent_field_swap(
    const RewriteInput& in) {
  auto out = in.block;
  for (auto& line : out) {
    std::smatch m;
    if (!is_code_line(line) || !std::regex_search(line, m, kConcatPair) || m[1] == m[2]) continue;
    std::string first = m[1].str();
    std::string second = m[2].str();
    line = m.prefix().str() + "{" + second + ", " + first + "}" + m.suffix().str();
    return std::make_pair(out, "swapped the adjacent fields " + first + " and " + second);
  }
  return std::nullopt;
}

std::optional<std::pair<std::vector<std::string>, std::string>> rewrite_fsm_transition_error(
    const RewriteInput& in) {
  auto states = region_states(in.region);
  if (states.size() < 2) return std::nullopt;
  auto out = in.block;
  bool changed = false;
  std::string from, to;
  for (auto& line : out) {
    std::smatch m;
    if (!is_code_line(line) || !std::regex_search(line, m, kStateAssign)) continue;
    std::string current = m[2].str();
    auto it = std::find(states.begin(), states.end(), current);
    std::size_t idx = static_cast<std::size_t>(it - states.begin());
    std::string next = states[(idx + 1) % states.size()];
    if (next == current) continue;
    std::size_t pos = static_cast<std::size_t>(m.position(2));
    line = line.substr(0, pos) + next + line.substr(pos + current.size());
    if (!changed) {
      from = current;
      to = next;
    }
    changed = true;
  }
  if (!changed) return std::nullopt;
  return std::make_pair(out, "redirected a state transition from " + from + " to " + to);
}

using Rewriter =
    std::optional<std::pair<std::vector<std::string>, std::string>> (*)(const RewriteInput&);

Rewriter rewriter_for(const std::string& class_id) {
  if (class_id == "missing_assignment") return rewrite_missing_assignment;
  if (class_id == "wrong_assignment") return rewrite_wrong_assignment;
  if (class_id == "loop_modification") return rewrite_loop_modification;
  if (class_id == "logic_bug") return rewrite_logic_bug;
  if (class_id == "bitwise_corruption") return rewrite_bitwise_corruption;
  if (class_id == "incorrect_data_size") return rewrite_incorrect_data_size;
  if (class_id == "adjacent_field_swap") return rewrite_adjacent_field_swap;
  if (class_id == "fsm_transition_error") return rewrite_fsm_transition_error;
  return nullptr;
}

std::pair<std::vector<std::string>, std::string> rewrite_fallback(const RewriteInput& in) {
  static const Rewriter chain[] = {rewrite_logic_bug,        rewrite_bitwise_corruption,
                                   rewrite_incorrect_data_size, rewrite_adjacent_field_swap,
                                   rewrite_wrong_assignment,  rewrite_missing_assignment,
                                   rewrite_loop_modification, rewrite_fsm_transition_error};
  for (Rewriter r : chain) {
    auto result = r(in);
    if (result) return *result;
  }
  auto out = in.block;
  for (auto& line : out) {
    if (trim(line).empty()) continue;
    std::size_t indent = line.find_first_not_of(" \t");
    if (indent == std::string::npos) indent = 0;
    line = line.substr(0, indent) + "// " + line.substr(indent);
    return {out, "disabled a line of the block"};
  }
  return {out, "no rewrite applied"};
}

// ---- the backend ------------------------------------------------------------

class MockBackend : public AgentBackend {
 public:
  explicit MockBackend(MockOptions options) : options_(options) {}

  std::string name() const override { return "mock"; }

  nlohmann::json complete(const AgentRequest& request) override {
    switch (request.schema) {
      case ResponseSchema::SplitChunk:
        return split_chunk(request.payload);
      case ResponseSchema::BoundaryCheck:
        return boundary_check(request.payload);
      case ResponseSchema::RegionChoice:
        return region_choice(request.payload);
      case ResponseSchema::MutationChoice:
        return mutation_choice(request.payload);
      case ResponseSchema::Injection:
        return injection(request.payload);
    }
    throw BackendError("mock backend: unknown response schema");
  }

 private:
  static nlohmann::json split_chunk(const nlohmann::json& payload) {
    std::string text = payload.at("text").get<std::string>();
    int first_line = payload.at("first_line").get<int>();
    nlohmann::json regions = nlohmann::json::array();
    for (const auto& r : scan_regions(text, first_line))
      regions.push_back({{"start_line", r.start_line},
                         {"end_line", r.end_line},
                         {"synopsis", r.synopsis}});
    return {{"regions", regions}};
  }

  static nlohmann::json boundary_check(const nlohmann::json& payload) {
    std::string tail = payload.at("tail").get<std::string>();
    std::string aux = payload.at("aux").get<std::string>();
    bool continues = !aux.empty() && balance_score(tail) > 0;
    return {{"continues", continues}};
  }

  static nlohmann::json region_choice(const nlohmann::json& payload) {
    int best_index = -1;
    int best_count = 0;
    for (const auto& r : payload.at("regions")) {
      if (!r.at("mutable").get<bool>()) continue;
      int count = r.at("mutation_count").get<int>();
      int index = r.at("index").get<int>();
      if (best_index < 0 || count < best_count || (count == best_count && index < best_index)) {
        best_index = index;
        best_count = count;
      }
    }
    std::string proposed;
    if (payload.contains("classes") && !payload.at("classes").empty())
      proposed = payload.at("classes").front().get<std::string>();
    if (best_index < 0)
      return {{"region_index", -1},
              {"proposed_class_id", proposed},
              {"rationale", "no mutable region available"}};
    return {{"region_index", best_index},
            {"proposed_class_id", proposed},
            {"rationale", "least-mutated mutable region"}};
  }

  static nlohmann::json mutation_choice(const nlohmann::json& payload) {
    std::string source = payload.at("region_source").get<std::string>();
    int region_start = payload.at("region_start").get<int>();
    auto lines = to_lines(source);

    struct Candidate {
      std::string class_id;
      int attempts = 0;
      std::size_t order = 0;
    };
    std::vector<Candidate> candidates;
    std::size_t order = 0;
    for (const auto& c : payload.at("classes")) {
      Candidate cand;
      cand.class_id = c.at("id").get<std::string>();
      cand.order = order++;
      if (payload.contains("class_attempts"))
        cand.attempts = payload.at("class_attempts").value(cand.class_id, 0);
      candidates.push_back(std::move(cand));
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& a, const Candidate& b) {
                       if (a.attempts != b.attempts) return a.attempts < b.attempts;
                       return a.order < b.order;
                     });
    for (const auto& cand : candidates) {
      auto sites = scanner_for(cand.class_id)(lines, region_start);
      if (sites.empty()) continue;
      const Site& site = sites[static_cast<std::size_t>(cand.attempts) % sites.size()];
      return {{"class_id", cand.class_id},
              {"target_start_line", site.start_line},
              {"target_end_line", site.end_line},
              {"plan", "apply " + cand.class_id + " at lines " + std::to_string(site.start_line) +
                           "-" + std::to_string(site.end_line)}};
    }
    auto any_sites = scan_any_code(lines, region_start);
    if (!candidates.empty() && !any_sites.empty()) {
      const Candidate& cand = candidates.front();
      const Site& site = any_sites[static_cast<std::size_t>(cand.attempts) % any_sites.size()];
      return {{"class_id", cand.class_id},
              {"target_start_line", site.start_line},
              {"target_end_line", site.end_line},
              {"plan", "apply " + cand.class_id + " to the nearest code line"}};
    }
    return {{"class_id", candidates.empty() ? "" : candidates.front().class_id},
            {"target_start_line", region_start},
            {"target_end_line", region_start},
            {"plan", "no applicable site found"}};
  }

  nlohmann::json injection(const nlohmann::json& payload) const {
    RewriteInput in;
    in.block = to_lines(payload.at("target_text").get<std::string>());
    in.block_start = payload.at("target_start").get<int>();
    in.region = to_lines(payload.at("region_source").get<std::string>());
    in.region_start = payload.at("region_start").get<int>();
    std::string class_id = payload.at("class_id").get<std::string>();

    std::pair<std::vector<std::string>, std::string> result;
    Rewriter rewriter = rewriter_for(class_id);
    if (rewriter) {
      auto rewritten = rewriter(in);
      result = rewritten ? *rewritten : rewrite_fallback(in);
    } else {
      result = rewrite_fallback(in);
    }
    if (options_.corrupt_injections && !result.first.empty()) result.first.back() += " (";
    return {{"mutated_block", join_lines(result.first)}, {"summary", result.second}};
  }

  MockOptions options_;
};

}  // namespace

std::unique_ptr<AgentBackend> make_mock_backend(const MockOptions& options) {
  return std::make_unique<MockBackend>(options);
}

}  // namespace rtlmut

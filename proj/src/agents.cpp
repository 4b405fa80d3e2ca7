#include "rtlmut/agents.hpp"

#include <sstream>

#include "rtlmut/errors.hpp"
#include "rtlmut/text.hpp"

namespace rtlmut {

namespace {

bool line_has_code(std::string_view line) {
  std::string t = trim(strip_eol(line));
  if (t.empty()) return false;
  if (t.rfind("//", 0) == 0 || t.rfind("/*", 0) == 0 || t.rfind("*", 0) == 0) return false;
  return true;
}

bool block_has_code(std::string_view block) {
  for (const auto& line : split_lines_keep_ends(block))
    if (line_has_code(line)) return true;
  return false;
}

enum class SemanticKind { Generic, UnknownClassId, NoOp };

}  // namespace

nlohmann::json complete_structured(const AgentContext& ctx, AgentRequest request,
                                   const ResponseValidator& validator,
                                   const std::function<void(const std::string&)>& on_semantic_failure) {
  const std::string base_prompt = request.prompt;
  ValidationResult last = ValidationResult::shape("no reply");
  for (int attempt = 0; attempt <= ctx.max_retries_on_malformed; ++attempt) {
    if (attempt > 0)
      request.prompt = base_prompt + "\n\nYour previous reply was rejected: " + last.error +
                       "\nReply again, with corrected JSON only.";
    nlohmann::json reply;
    try {
      reply = ctx.backend.complete(request);
    } catch (const SchemaViolation& e) {
      last = ValidationResult::shape(e.what());
      continue;
    }
    last = validator(reply);
    if (last.ok) return reply;
  }
  if (last.semantic && on_semantic_failure) on_semantic_failure(last.error);
  throw SchemaViolation("agent reply failed validation after retries: " + last.error);
}

RegionChoice select_region(const ModulePartition& partition,
                           const std::map<int, RegionStats>& stats, const MutationIndex& index,
                           bool coverage_mode, const AgentContext& ctx) {
  bool any_mutable = false;
  for (const auto& r : partition.regions) any_mutable = any_mutable || r.is_mutable;
  if (!any_mutable)
    throw NoMutableRegion("module " + partition.source_id + " has no mutable region");

  std::ostringstream region_table;
  nlohmann::json regions = nlohmann::json::array();
  for (const auto& r : partition.regions) {
    region_table << "  region " << r.index << " | lines " << r.start_line << "-" << r.end_line
                 << " | " << r.mutation_count << " mutations | "
                 << (r.is_mutable ? "" : "not mutable | ") << r.synopsis << "\n";
    regions.push_back({{"index", r.index},
                       {"start_line", r.start_line},
                       {"end_line", r.end_line},
                       {"synopsis", r.synopsis},
                       {"mutation_count", r.mutation_count},
                       {"mutable", r.is_mutable}});
  }

  std::ostringstream class_table;
  nlohmann::json classes = nlohmann::json::array();
  for (const auto& c : index.classes) {
    class_table << "  " << c.id << ": " << c.description << "\n";
    classes.push_back(c.id);
  }

  std::ostringstream history_section;
  if (!coverage_mode && !stats.empty()) {
    history_section << "Detection rate of prior mutations per region:\n";
    for (const auto& [region_index, s] : stats) {
      history_section << "  region " << region_index << ": ";
      auto rate = s.success_rate();
      if (rate)
        history_section << static_cast<int>(*rate * 100.0 + 0.5) << "% of " << s.finalized
                        << " attempts detected\n";
      else
        history_section << "no finished attempts\n";
    }
    history_section << "\n";
  }

  AgentRequest request;
  request.schema = ResponseSchema::RegionChoice;
  request.prompt = ctx.prompts.render("region_selector",
                                      {{"module_id", partition.source_id},
                                       {"region_table", region_table.str()},
                                       {"class_table", class_table.str()},
                                       {"history_section", history_section.str()}});
  request.payload = {{"module_id", partition.source_id}, {"regions", regions}, {"classes", classes}};

  auto validator = [&partition](const nlohmann::json& reply) {
    if (!reply.is_object() || !reply.contains("region_index") ||
        !reply["region_index"].is_number_integer())
      return ValidationResult::shape("response must be an object with an integer \"region_index\"");
    int idx = reply["region_index"].get<int>();
    const Region* region = partition.find_region(idx);
    if (!region)
      return ValidationResult::invalid("region " + std::to_string(idx) + " does not exist");
    if (!region->is_mutable)
      return ValidationResult::invalid("region " + std::to_string(idx) +
                                       " holds no mutable code, pick another region");
    return ValidationResult::valid();
  };

  nlohmann::json reply = complete_structured(ctx, request, validator, [](const std::string& err) {
    throw InvalidChoice("region selection: " + err);
  });

  RegionChoice choice;
  choice.region_index = reply["region_index"].get<int>();
  choice.rationale = reply.value("rationale", "");
  choice.proposed_class_id = reply.value("proposed_class_id", "");
  return choice;
}

MutationChoice select_mutation(std::string_view region_source, const Region& region,
                               const MutationIndex& index, const RegionHistory& history,
                               const AgentContext& ctx) {
  std::map<std::string, int> attempts;
  for (const auto& e : history.succeeded) ++attempts[e.class_id];
  for (const auto& e : history.failed) ++attempts[e.class_id];

  std::ostringstream class_table;
  nlohmann::json classes = nlohmann::json::array();
  nlohmann::json class_attempts = nlohmann::json::object();
  for (const auto& c : index.classes) {
    class_table << "  " << c.id << " (up to " << c.max_target_lines() << " line"
                << (c.max_target_lines() == 1 ? "" : "s") << "): " << c.description << "\n";
    classes.push_back({{"id", c.id}, {"max_lines", c.max_target_lines()}});
    class_attempts[c.id] = attempts.count(c.id) ? attempts[c.id] : 0;
  }

  std::ostringstream history_text;
  auto describe = [&history_text](const MutationEntry& e, const char* verdict) {
    history_text << "  " << e.class_id << " at lines " << e.target_block.start_line << "-"
                 << e.target_block.end_line << " (" << verdict << "): " << e.summary << "\n";
  };
  for (const auto& e : history.succeeded) describe(e, "detected");
  for (const auto& e : history.failed) describe(e, "not detected");
  if (history.succeeded.empty() && history.failed.empty()) history_text << "  none\n";

  int max_lines = 1;
  for (const auto& c : index.classes) max_lines = std::max(max_lines, c.max_target_lines());

  AgentRequest request;
  request.schema = ResponseSchema::MutationChoice;
  request.prompt = ctx.prompts.render(
      "mutation_selector",
      {{"module_id", region.synopsis},
       {"region_index", std::to_string(region.index)},
       {"synopsis", region.synopsis},
       {"region_start", std::to_string(region.start_line)},
       {"region_end", std::to_string(region.end_line)},
       {"region_source", std::string(region_source)},
       {"class_table", class_table.str()},
       {"history", history_text.str()},
       {"max_lines", std::to_string(max_lines)}});
  request.payload = {{"region_source", std::string(region_source)},
                     {"region_start", region.start_line},
                     {"region_end", region.end_line},
                     {"classes", classes},
                     {"class_attempts", class_attempts}};

  SemanticKind kind = SemanticKind::Generic;
  auto validator = [&](const nlohmann::json& reply) {
    kind = SemanticKind::Generic;
    if (!reply.is_object() || !reply.contains("class_id") || !reply["class_id"].is_string() ||
        !reply.contains("target_start_line") || !reply["target_start_line"].is_number_integer() ||
        !reply.contains("target_end_line") || !reply["target_end_line"].is_number_integer())
      return ValidationResult::shape(
          "response needs a string \"class_id\" and integer \"target_start_line\" and \"target_end_line\"");
    std::string class_id = reply["class_id"].get<std::string>();
    const MutationClass* cls = index.find_class(class_id);
    if (!cls) {
      kind = SemanticKind::UnknownClassId;
      return ValidationResult::invalid("mutation class " + class_id + " is not in the index");
    }
    int start = reply["target_start_line"].get<int>();
    int end = reply["target_end_line"].get<int>();
    if (start > end || start < region.start_line || end > region.end_line)
      return ValidationResult::invalid("target lines " + std::to_string(start) + "-" +
                                       std::to_string(end) + " fall outside region lines " +
                                       std::to_string(region.start_line) + "-" +
                                       std::to_string(region.end_line));
    if (end - start + 1 > cls->max_target_lines())
      return ValidationResult::invalid("target spans " + std::to_string(end - start + 1) +
                                       " lines but " + class_id + " allows at most " +
                                       std::to_string(cls->max_target_lines()));
    std::string block = slice_lines(region_source, start - region.start_line + 1,
                                    end - region.start_line + 1);
    if (!block_has_code(block))
      return ValidationResult::invalid("target lines " + std::to_string(start) + "-" +
                                       std::to_string(end) + " contain no code");
    return ValidationResult::valid();
  };

  nlohmann::json reply =
      complete_structured(ctx, request, validator, [&kind](const std::string& err) {
        if (kind == SemanticKind::UnknownClassId) throw UnknownClass(err);
        throw InvalidChoice("mutation selection: " + err);
      });

  MutationChoice choice;
  choice.class_id = reply["class_id"].get<std::string>();
  choice.target_start_line = reply["target_start_line"].get<int>();
  choice.target_end_line = reply["target_end_line"].get<int>();
  choice.plan = reply.value("plan", "");
  return choice;
}

InjectedMutation inject_mutation(const MutationChoice& choice, std::string_view region_source,
                                 const Region& region, const MutationSpec& spec,
                                 const AgentContext& ctx) {
  int rel_start = choice.target_start_line - region.start_line + 1;
  int rel_end = choice.target_end_line - region.start_line + 1;
  std::string target_text = slice_lines(region_source, rel_start, rel_end);
  int target_lines = choice.target_end_line - choice.target_start_line + 1;

  AgentRequest request;
  request.schema = ResponseSchema::Injection;
  request.prompt = ctx.prompts.render(
      "mutation_injector",
      {{"class_id", spec.class_id},
       {"spec_body", spec.body},
       {"region_start", std::to_string(region.start_line)},
       {"region_end", std::to_string(region.end_line)},
       {"region_source", std::string(region_source)},
       {"target_start", std::to_string(choice.target_start_line)},
       {"target_end", std::to_string(choice.target_end_line)},
       {"target_block", target_text},
       {"plan", choice.plan}});
  request.payload = {{"class_id", spec.class_id},
                     {"target_text", target_text},
                     {"target_start", choice.target_start_line},
                     {"target_end", choice.target_end_line},
                     {"region_source", std::string(region_source)},
                     {"region_start", region.start_line},
                     {"plan", choice.plan}};

  SemanticKind kind = SemanticKind::Generic;
  auto validator = [&](const nlohmann::json& reply) {
    kind = SemanticKind::Generic;
    if (!reply.is_object() || !reply.contains("mutated_block") ||
        !reply["mutated_block"].is_string() || !reply.contains("summary") ||
        !reply["summary"].is_string() || reply["summary"].get<std::string>().empty())
      return ValidationResult::shape(
          "response needs a string \"mutated_block\" and a non-empty \"summary\"");
    std::string mutated = reply["mutated_block"].get<std::string>();
    int got = count_lines(mutated);
    if (got != target_lines)
      return ValidationResult::invalid("rewritten block has " + std::to_string(got) +
                                       " lines, the target has " + std::to_string(target_lines));
    if (normalize_block(mutated) == normalize_block(target_text)) {
      kind = SemanticKind::NoOp;
      return ValidationResult::invalid("rewritten block is identical to the original");
    }
    return ValidationResult::valid();
  };

  nlohmann::json reply =
      complete_structured(ctx, request, validator, [&kind](const std::string& err) {
        if (kind == SemanticKind::NoOp) throw NoOpMutation(err);
        throw InvalidChoice("mutation injection: " + err);
      });

  InjectedMutation injected;
  injected.mutated_text = reply["mutated_block"].get<std::string>();
  injected.summary = reply["summary"].get<std::string>();
  return injected;
}

}  // namespace rtlmut

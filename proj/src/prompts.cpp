#include "rtlmut/prompts.hpp"

#include <filesystem>

#include "rtlmut/errors.hpp"
#include "rtlmut/text.hpp"

namespace rtlmut {

namespace {

const char* kModuleSplitter = R"(You partition hardware description source into contiguous regions.

Guidelines:
{guidelines}

You are given {scope}, lines {first_line} through {last_line}, numbered:

{chunk}

Divide these lines into contiguous, non-overlapping regions that together
cover lines {first_line}-{last_line} exactly. Keep each syntactic construct
(an always block, a function, a module header) inside a single region. Give
every region a one-line synopsis of what it contains.

Reply with JSON only:
{"regions": [{"start_line": <int>, "end_line": <int>, "synopsis": "<text>"}, ...]}
)";

const char* kBoundaryCheck = R"(The last region produced for a source chunk is:

{tail_region}

The lines that immediately follow the chunk are:

{auxiliary_lines}

Does the region continue into the following lines, meaning the construct it
contains is not finished at the chunk boundary (an unclosed block, an open
parenthesis list, a statement without its terminator)?

Reply with JSON only: {"continues": true} or {"continues": false}
)";

const char* kRegionSelector = R"(You pick where the next synthetic bug goes in module {module_id}.

Regions of the module, with how many mutations each already received:

{region_table}

Mutation classes available:

{class_table}

{history_section}Prefer regions with few prior mutations so bugs spread across the whole
module, and prefer classes that fit the region's content. Pick one mutable
region and propose one class.

Reply with JSON only:
{"region_index": <int>, "proposed_class_id": "<id>", "rationale": "<text>"}
)";

const char* kMutationSelector = R"(You choose the exact lines to mutate inside one region of module {module_id}.

Region {region_index} ({synopsis}), lines {region_start}-{region_end}:

{region_source}

Mutation classes applicable here:

{class_table}

Previous attempts in this region:

{history}

Choose a class and a target of at most {max_lines} consecutive lines inside
the region. The target must contain real code, not only comments or blank
lines. Use absolute line numbers.

Reply with JSON only:
{"class_id": "<id>", "target_start_line": <int>, "target_end_line": <int>, "plan": "<text>"}
)";

const char* kMutationInjector = R"(You rewrite a block of hardware description code to contain one subtle bug.

Mutation class {class_id}:
{spec_body}

Region context, lines {region_start}-{region_end}:

{region_source}

Target block, lines {target_start}-{target_end}:

{target_block}

Rewrite the target block applying the mutation plan: {plan}

Keep exactly the same number of lines. The rewritten block must differ from
the original. Do not change anything outside the target block.

Reply with JSON only:
{"mutated_block": "<the rewritten lines>", "summary": "<one sentence describing the bug>"}
)";

std::map<std::string, std::string> built_in_templates() {
  return {{"module_splitter", kModuleSplitter},
          {"boundary_check", kBoundaryCheck},
          {"region_selector", kRegionSelector},
          {"mutation_selector", kMutationSelector},
          {"mutation_injector", kMutationInjector}};
}

}  // namespace

PromptLibrary::PromptLibrary() : templates_(built_in_templates()) {}

PromptLibrary::PromptLibrary(const std::string& override_dir) : templates_(built_in_templates()) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(override_dir))
    throw ConfigError("prompt override directory not found: " + override_dir);
  for (const auto& entry : fs::directory_iterator(override_dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    templates_[entry.path().stem().string()] = read_file(entry.path().string());
  }
}

bool PromptLibrary::has_template(const std::string& template_name) const {
  return templates_.count(template_name) > 0;
}

std::string PromptLibrary::render(const std::string& template_name,
                                  const std::map<std::string, std::string>& vars) const {
  auto it = templates_.find(template_name);
  if (it == templates_.end()) throw ConfigError("unknown prompt template: " + template_name);
  std::string text = it->second;
  for (const auto& [key, value] : vars) text = replace_all(text, "{" + key + "}", value);
  return text;
}

}  // namespace rtlmut

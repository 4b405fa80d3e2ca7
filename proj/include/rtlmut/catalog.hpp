#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace rtlmut {

enum class Arity { SingleLine, MultiLine };

std::string arity_to_string(Arity arity);
Arity arity_from_string(const std::string& s);

struct MutationClass {
  std::string id;
  std::string description;
  Arity arity = Arity::SingleLine;
  std::string applicability_notes;

  // Upper bound on target block size: 1 line for single-line classes,
  // 1 to 4 lines for multi-line classes.
  int max_target_lines() const { return arity == Arity::SingleLine ? 1 : 4; }
};

// Detailed, example-bearing instructions for one class, handed verbatim to
// the injector agent.
struct MutationSpec {
  std::string class_id;
  std::string body;
  std::string authored_by;
};

struct MutationIndex {
  std::string name;
  std::vector<MutationClass> classes;
  std::map<std::string, MutationSpec> specs;

  const MutationClass* find_class(const std::string& class_id) const;
  bool has_class(const std::string& class_id) const { return find_class(class_id) != nullptr; }
};

// Parses and validates a catalog file. Duplicate ids, a class without a
// spec, or an unknown arity raise IndexMalformed.
MutationIndex load_index(const std::string& path);
MutationIndex index_from_json(const nlohmann::json& doc);

// Canonical byte form; load_index followed by serialize_index round-trips a
// canonical catalog file byte-identically.
std::string serialize_index(const MutationIndex& index);

// Returns the spec verbatim as authored; UnknownClass if absent.
const MutationSpec& resolve_spec(const MutationIndex& index, const std::string& class_id);

// Maps (design, module) to a catalog file with most-specific-wins precedence:
// module over design over default. Loaded indexes are cached.
class CatalogSelector {
 public:
  CatalogSelector() = default;
  CatalogSelector(std::string default_path, std::map<std::string, std::string> by_design,
                  std::map<std::string, std::string> by_module);

  const MutationIndex& select(const std::string& design_id, const std::string& module_id);

  static std::string module_key(const std::string& design_id, const std::string& module_id) {
    return design_id + "/" + module_id;
  }

 private:
  const MutationIndex& load_cached(const std::string& path);

  std::string default_path_;
  std::map<std::string, std::string> by_design_;
  std::map<std::string, std::string> by_module_;
  std::map<std::string, MutationIndex> loaded_;
};

}  // namespace rtlmut

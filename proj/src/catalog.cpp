#include "rtlmut/catalog.hpp"

#include <algorithm>

#include "rtlmut/errors.hpp"
#include "rtlmut/text.hpp"

namespace rtlmut {

std::string arity_to_string(Arity arity) {
  return arity == Arity::SingleLine ? "single_line" : "multi_line";
}

Arity arity_from_string(const std::string& s) {
  if (s == "single_line") return Arity::SingleLine;
  if (s == "multi_line") return Arity::MultiLine;
  throw IndexMalformed("unknown mutation arity: " + s);
}

const MutationClass* MutationIndex::find_class(const std::string& class_id) const {
  for (const auto& c : classes)
    if (c.id == class_id) return &c;
  return nullptr;
}

MutationIndex index_from_json(const nlohmann::json& doc) {
  MutationIndex index;
  try {
    index.name = doc.at("name").get<std::string>();
    for (const auto& c : doc.at("classes")) {
      MutationClass cls;
      cls.id = c.at("id").get<std::string>();
      cls.description = c.at("description").get<std::string>();
      cls.arity = arity_from_string(c.at("arity").get<std::string>());
      cls.applicability_notes = c.value("applicability_notes", "");
      if (cls.id.empty()) throw IndexMalformed("mutation class with empty id");
      if (index.has_class(cls.id)) throw IndexMalformed("duplicate mutation class id: " + cls.id);
      index.classes.push_back(std::move(cls));
    }
    for (const auto& [class_id, spec] : doc.at("specs").items()) {
      if (!index.has_class(class_id))
        throw IndexMalformed("spec refers to unknown mutation class: " + class_id);
      MutationSpec s;
      s.class_id = class_id;
      s.body = spec.at("body").get<std::string>();
      s.authored_by = spec.value("authored_by", "");
      if (s.body.empty()) throw IndexMalformed("empty spec body for class " + class_id);
      index.specs.emplace(class_id, std::move(s));
    }
  } catch (const nlohmann::json::exception& e) {
    throw IndexMalformed(std::string("malformed mutation index: ") + e.what());
  }
  if (index.classes.empty()) throw IndexMalformed("mutation index has no classes");
  for (const auto& c : index.classes)
    if (!index.specs.count(c.id))
      throw IndexMalformed("mutation class " + c.id + " has no spec");
  return index;
}

MutationIndex load_index(const std::string& path) {
  std::string raw = read_file(path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(raw);
  } catch (const nlohmann::json::exception& e) {
    throw IndexMalformed("mutation index " + path + " is not valid JSON: " + e.what());
  }
  return index_from_json(doc);
}

std::string serialize_index(const MutationIndex& index) {
  nlohmann::ordered_json doc;
  doc["name"] = index.name;
  doc["classes"] = nlohmann::ordered_json::array();
  for (const auto& c : index.classes) {
    nlohmann::ordered_json cls;
    cls["id"] = c.id;
    cls["description"] = c.description;
    cls["arity"] = arity_to_string(c.arity);
    cls["applicability_notes"] = c.applicability_notes;
    doc["classes"].push_back(std::move(cls));
  }
  nlohmann::ordered_json specs = nlohmann::ordered_json::object();
  for (const auto& [id, spec] : index.specs) {
    nlohmann::ordered_json s;
    s["body"] = spec.body;
    s["authored_by"] = spec.authored_by;
    specs[id] = std::move(s);
  }
  doc["specs"] = std::move(specs);
  return doc.dump(2) + "\n";
}

const MutationSpec& resolve_spec(const MutationIndex& index, const std::string& class_id) {
  auto it = index.specs.find(class_id);
  if (it == index.specs.end())
    throw UnknownClass("no mutation spec for class " + class_id + " in index " + index.name);
  return it->second;
}

CatalogSelector::CatalogSelector(std::string default_path,
                                 std::map<std::string, std::string> by_design,
                                 std::map<std::string, std::string> by_module)
    : default_path_(std::move(default_path)),
      by_design_(std::move(by_design)),
      by_module_(std::move(by_module)) {
  if (default_path_.empty()) throw ConfigError("catalog selector needs a default index path");
}

const MutationIndex& CatalogSelector::select(const std::string& design_id,
                                             const std::string& module_id) {
  auto module_it = by_module_.find(module_key(design_id, module_id));
  if (module_it != by_module_.end()) return load_cached(module_it->second);
  auto design_it = by_design_.find(design_id);
  if (design_it != by_design_.end()) return load_cached(design_it->second);
  if (default_path_.empty()) throw ConfigError("catalog selector has no default index");
  return load_cached(default_path_);
}

const MutationIndex& CatalogSelector::load_cached(const std::string& path) {
  auto it = loaded_.find(path);
  if (it != loaded_.end()) return it->second;
  auto [inserted, ok] = loaded_.emplace(path, load_index(path));
  return inserted->second;
}

}  // namespace rtlmut

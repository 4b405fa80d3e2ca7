#include "rtlmut/config.hpp"

#include <filesystem>
#include <set>

#include "rtlmut/errors.hpp"
#include "rtlmut/text.hpp"

namespace fs = std::filesystem;

namespace rtlmut {

std::string mode_to_string(CampaignMode mode) {
  return mode == CampaignMode::Generation ? "generation" : "coverage_assessment";
}

CampaignMode mode_from_string(const std::string& s) {
  if (s == "generation") return CampaignMode::Generation;
  if (s == "coverage_assessment") return CampaignMode::CoverageAssessment;
  throw ConfigError("unknown campaign mode: " + s +
                    " (expected \"generation\" or \"coverage_assessment\")");
}

std::string parallelism_to_string(Parallelism p) {
  switch (p) {
    case Parallelism::Sequential:
      return "sequential";
    case Parallelism::InterDesign:
      return "inter_design";
    case Parallelism::IntraDesign:
      return "intra_design";
  }
  return "sequential";
}

Parallelism parallelism_from_string(const std::string& s) {
  if (s == "sequential") return Parallelism::Sequential;
  if (s == "inter_design") return Parallelism::InterDesign;
  if (s == "intra_design") return Parallelism::IntraDesign;
  throw ConfigError("unknown parallelism: " + s +
                    " (expected \"sequential\", \"inter_design\", or \"intra_design\")");
}

std::string CampaignConfig::resolve_path(const std::string& path) const {
  fs::path p(path);
  if (p.is_absolute() || base_dir.empty()) return path;
  return (fs::path(base_dir) / p).lexically_normal().string();
}

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& message) {
  throw ConfigError(field + ": " + message);
}

template <typename T>
T get_field(const nlohmann::json& doc, const std::string& field, const char* type_name) {
  if (!doc.contains(field)) fail(field, "missing required field");
  try {
    return doc.at(field).get<T>();
  } catch (const nlohmann::json::exception&) {
    fail(field, std::string("expected ") + type_name);
  }
}

template <typename T>
T get_optional(const nlohmann::json& doc, const std::string& field, T fallback,
               const char* type_name) {
  if (!doc.contains(field)) return fallback;
  try {
    return doc.at(field).get<T>();
  } catch (const nlohmann::json::exception&) {
    fail(field, std::string("expected ") + type_name);
  }
}

void require_positive(int value, const std::string& field) {
  if (value < 1) fail(field, "must be at least 1");
}

void require_file(const std::string& path, const std::string& field) {
  if (!fs::is_regular_file(path)) fail(field, "file not found: " + path);
}

std::vector<ExplicitRegion> parse_explicit_regions(const nlohmann::json& doc,
                                                   const std::string& field) {
  std::vector<ExplicitRegion> regions;
  if (!doc.is_array()) fail(field, "expected an array");
  int i = 0;
  for (const auto& r : doc) {
    std::string item = field + "[" + std::to_string(i++) + "]";
    ExplicitRegion region;
    region.start_line = get_field<int>(r, "start_line", "an integer");
    region.end_line = get_field<int>(r, "end_line", "an integer");
    region.label = get_optional<std::string>(r, "label", "", "a string");
    if (region.start_line < 1 || region.end_line < region.start_line)
      fail(item, "needs 1 <= start_line <= end_line");
    regions.push_back(std::move(region));
  }
  return regions;
}

std::vector<LineRange> parse_metric_mtrs(const nlohmann::json& doc, const std::string& field) {
  std::vector<LineRange> ranges;
  if (!doc.is_array()) fail(field, "expected an array");
  int i = 0;
  for (const auto& r : doc) {
    std::string item = field + "[" + std::to_string(i++) + "]";
    LineRange range;
    range.start_line = get_field<int>(r, "start_line", "an integer");
    range.end_line = get_field<int>(r, "end_line", "an integer");
    range.label = get_optional<std::string>(r, "label", "", "a string");
    if (range.start_line < 1 || range.end_line < range.start_line)
      fail(item, "needs 1 <= start_line <= end_line");
    ranges.push_back(std::move(range));
  }
  return ranges;
}

}  // namespace

CampaignConfig config_from_json(const nlohmann::json& doc, const std::string& base_dir,
                                const CliOverrides& overrides) {
  if (!doc.is_object()) throw ConfigError("config root must be a JSON object");

  CampaignConfig config;
  config.base_dir = base_dir;
  config.raw = doc;

  config.mode = mode_from_string(get_optional<std::string>(doc, "mode", "generation", "a string"));
  config.parallelism = parallelism_from_string(
      get_optional<std::string>(doc, "parallelism", "sequential", "a string"));
  config.mutations_per_scenario =
      get_optional<int>(doc, "mutations_per_scenario", 2, "an integer");
  config.max_retries = get_optional<int>(doc, "max_retries", 2, "an integer");
  config.scenarios_target = get_optional<int>(doc, "scenarios_target", 1, "an integer");
  config.consecutive_abandonment_limit =
      get_optional<int>(doc, "consecutive_abandonment_limit", 10, "an integer");
  config.duplicate_regeneration_limit =
      get_optional<int>(doc, "duplicate_regeneration_limit", 5, "an integer");
  config.evolution_window = get_optional<int>(doc, "evolution_window", 25, "an integer");
  config.output_dir =
      config.resolve_path(get_optional<std::string>(doc, "output_dir", "rtlmut-out", "a string"));

  if (overrides.mode) config.mode = *overrides.mode;
  if (overrides.parallelism) config.parallelism = *overrides.parallelism;
  if (overrides.scenarios_target) config.scenarios_target = *overrides.scenarios_target;
  if (overrides.max_retries) config.max_retries = *overrides.max_retries;

  require_positive(config.mutations_per_scenario, "mutations_per_scenario");
  if (config.max_retries < 0) fail("max_retries", "must be at least 0");
  if (config.scenarios_target < 0) fail("scenarios_target", "must be at least 0");
  require_positive(config.consecutive_abandonment_limit, "consecutive_abandonment_limit");
  require_positive(config.duplicate_regeneration_limit, "duplicate_regeneration_limit");
  require_positive(config.evolution_window, "evolution_window");

  std::string cache = get_optional<std::string>(doc, "cache_path", "", "a string");
  config.cache_path = cache.empty() ? (fs::path(config.output_dir) / "cache.jsonl").string()
                                    : config.resolve_path(cache);
  std::string scenario_log = get_optional<std::string>(doc, "scenario_log_path", "", "a string");
  config.scenario_log_path = scenario_log.empty()
                                 ? (fs::path(config.output_dir) / "scenarios.jsonl").string()
                                 : config.resolve_path(scenario_log);

  if (doc.contains("splitter")) {
    const auto& s = doc.at("splitter");
    if (!s.is_object()) fail("splitter", "expected an object");
    config.splitter.chunk_size_lines =
        get_optional<int>(s, "chunk_size_lines", config.splitter.chunk_size_lines, "an integer");
    config.splitter.auxiliary_lines =
        get_optional<int>(s, "auxiliary_lines", config.splitter.auxiliary_lines, "an integer");
    config.splitter.context_window_lines = get_optional<int>(
        s, "context_window_lines", config.splitter.context_window_lines, "an integer");
    config.splitter.guidelines =
        get_optional<std::string>(s, "guidelines", config.splitter.guidelines, "a string");
    require_positive(config.splitter.chunk_size_lines, "splitter.chunk_size_lines");
    if (config.splitter.auxiliary_lines < 0) fail("splitter.auxiliary_lines", "must be at least 0");
    if (config.splitter.auxiliary_lines >= config.splitter.chunk_size_lines)
      fail("splitter.auxiliary_lines", "must be smaller than chunk_size_lines");
    if (config.splitter.context_window_lines < config.splitter.chunk_size_lines)
      fail("splitter.context_window_lines", "must be at least chunk_size_lines");
  }

  if (doc.contains("backend")) {
    const auto& b = doc.at("backend");
    if (!b.is_object()) fail("backend", "expected an object");
    config.backend.kind = get_optional<std::string>(b, "kind", "mock", "a string");
    if (config.backend.kind != "mock" && config.backend.kind != "remote")
      fail("backend.kind", "expected \"mock\" or \"remote\"");
    config.backend.endpoint =
        get_optional<std::string>(b, "endpoint", config.backend.endpoint, "a string");
    config.backend.model = get_optional<std::string>(b, "model", config.backend.model, "a string");
    config.backend.temperature =
        get_optional<double>(b, "temperature", config.backend.temperature, "a number");
    config.backend.timeout_seconds =
        get_optional<double>(b, "timeout_seconds", config.backend.timeout_seconds, "a number");
    config.backend.api_key_env =
        get_optional<std::string>(b, "api_key_env", config.backend.api_key_env, "a string");
    config.backend.max_retries_on_malformed = get_optional<int>(
        b, "max_retries_on_malformed", config.backend.max_retries_on_malformed, "an integer");
    if (config.backend.max_retries_on_malformed < 0)
      fail("backend.max_retries_on_malformed", "must be at least 0");
    config.backend.prompt_dir = get_optional<std::string>(b, "prompt_dir", "", "a string");
    if (!config.backend.prompt_dir.empty()) {
      config.backend.prompt_dir = config.resolve_path(config.backend.prompt_dir);
      if (!fs::is_directory(config.backend.prompt_dir))
        fail("backend.prompt_dir", "directory not found: " + config.backend.prompt_dir);
    }
    config.backend.corrupt_injections =
        get_optional<bool>(b, "corrupt_injections", false, "a boolean");
  }
  if (overrides.backend_endpoint) config.backend.endpoint = *overrides.backend_endpoint;

  if (!doc.contains("catalog")) fail("catalog", "missing required field");
  {
    const auto& c = doc.at("catalog");
    if (!c.is_object()) fail("catalog", "expected an object");
    config.catalog.default_path =
        config.resolve_path(get_field<std::string>(c, "default_path", "a string"));
    require_file(config.catalog.default_path, "catalog.default_path");
    if (c.contains("by_design")) {
      if (!c.at("by_design").is_object()) fail("catalog.by_design", "expected an object");
      for (const auto& [design, path] : c.at("by_design").items()) {
        if (!path.is_string()) fail("catalog.by_design." + design, "expected a string");
        std::string resolved = config.resolve_path(path.get<std::string>());
        require_file(resolved, "catalog.by_design." + design);
        config.catalog.by_design[design] = resolved;
      }
    }
    if (c.contains("by_module")) {
      if (!c.at("by_module").is_object()) fail("catalog.by_module", "expected an object");
      for (const auto& [key, path] : c.at("by_module").items()) {
        if (!path.is_string()) fail("catalog.by_module." + key, "expected a string");
        if (key.find('/') == std::string::npos)
          fail("catalog.by_module." + key, "key must be \"design/module\"");
        std::string resolved = config.resolve_path(path.get<std::string>());
        require_file(resolved, "catalog.by_module." + key);
        config.catalog.by_module[key] = resolved;
      }
    }
  }

  if (!doc.contains("designs")) fail("designs", "missing required field");
  if (!doc.at("designs").is_array() || doc.at("designs").empty())
    fail("designs", "expected a non-empty array");
  std::set<std::string> design_ids;
  int design_index = 0;
  for (const auto& d : doc.at("designs")) {
    std::string dfield = "designs[" + std::to_string(design_index++) + "]";
    DesignUnitConfig design;
    design.design_id = get_field<std::string>(d, "design_id", "a string");
    if (design.design_id.empty()) fail(dfield + ".design_id", "must be non-empty");
    if (!design_ids.insert(design.design_id).second)
      fail(dfield + ".design_id", "duplicate design id " + design.design_id);

    if (!d.contains("evaluator") || !d.at("evaluator").is_object())
      fail(dfield + ".evaluator", "expected an object");
    design.evaluator = d.at("evaluator");

    if (!d.contains("modules") || !d.at("modules").is_array() || d.at("modules").empty())
      fail(dfield + ".modules", "expected a non-empty array");
    std::set<std::string> module_ids;
    int module_index = 0;
    for (const auto& m : d.at("modules")) {
      std::string mfield = dfield + ".modules[" + std::to_string(module_index++) + "]";
      ModuleFileConfig module;
      module.module_id = get_field<std::string>(m, "module_id", "a string");
      if (module.module_id.empty()) fail(mfield + ".module_id", "must be non-empty");
      if (!module_ids.insert(module.module_id).second)
        fail(mfield + ".module_id", "duplicate module id " + module.module_id);
      module.path = config.resolve_path(get_field<std::string>(m, "path", "a string"));
      require_file(module.path, mfield + ".path");
      if (m.contains("explicit_regions"))
        module.explicit_regions =
            parse_explicit_regions(m.at("explicit_regions"), mfield + ".explicit_regions");
      if (m.contains("metric_mtrs"))
        module.metric_mtrs = parse_metric_mtrs(m.at("metric_mtrs"), mfield + ".metric_mtrs");
      design.modules.push_back(std::move(module));
    }
    config.designs.push_back(std::move(design));
  }

  return config;
}

CampaignConfig load_config(const std::string& path, const CliOverrides& overrides) {
  std::string raw;
  try {
    raw = read_file(path);
  } catch (const IoError& e) {
    throw ConfigError(std::string("cannot read config: ") + e.what());
  }
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(raw);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config " + path + " is not valid JSON: " + e.what());
  }
  std::string base_dir = fs::path(path).has_parent_path()
                             ? fs::path(path).parent_path().string()
                             : std::string(".");
  return config_from_json(doc, base_dir, overrides);
}

}  // namespace rtlmut

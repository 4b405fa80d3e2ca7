#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "rtlmut/campaign.hpp"
#include "rtlmut/catalog.hpp"
#include "rtlmut/digest.hpp"
#include "rtlmut/errors.hpp"
#include "rtlmut/metrics.hpp"
#include "rtlmut/partition.hpp"
#include "rtlmut/text.hpp"

namespace py = pybind11;

namespace {

// Functions exchange JSON as strings; the package wrapper turns them into
// dicts so the extension stays free of custom type casters.

std::string split_text(const std::string& text, const std::string& source_id, int chunk_size,
                       int aux_lines, int context_window) {
  rtlmut::SplitterConfig config;
  config.chunk_size_lines = chunk_size;
  config.auxiliary_lines = aux_lines;
  config.context_window_lines = context_window;
  auto backend = rtlmut::make_mock_backend();
  rtlmut::PromptLibrary prompts;
  auto partition = rtlmut::partition_module(text, source_id, config, *backend, prompts);
  return rtlmut::partition_to_json(partition).dump();
}

std::string validate_partition_text(const std::string& text, const std::string& partition_json) {
  auto partition = rtlmut::partition_from_json(nlohmann::json::parse(partition_json));
  auto defects = rtlmut::validate_partition(partition, text);
  nlohmann::json out = nlohmann::json::array();
  for (const auto& d : defects)
    out.push_back({{"start_line", d.start_line}, {"end_line", d.end_line}, {"detail", d.detail}});
  return out.dump();
}

std::string load_catalog(const std::string& path) {
  return rtlmut::serialize_index(rtlmut::load_index(path));
}

std::string cache_entries(const std::string& path) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& entry : rtlmut::MutationCache::load_entries(path))
    out.push_back(rtlmut::entry_to_json(entry));
  return out.dump();
}

double spread_entropy(const std::vector<long>& mutation_counts,
                      const std::vector<long>& mtr_line_counts) {
  return rtlmut::spread_from_counts(mutation_counts, mtr_line_counts).entropy_normalized;
}

std::string run_campaign_path(const std::string& config_path, const std::string& mode,
                              const std::string& parallelism, int scenarios, int max_retries) {
  rtlmut::CliOverrides overrides;
  if (!mode.empty()) overrides.mode = rtlmut::mode_from_string(mode);
  if (!parallelism.empty()) overrides.parallelism = rtlmut::parallelism_from_string(parallelism);
  if (scenarios >= 0) overrides.scenarios_target = scenarios;
  if (max_retries >= 0) overrides.max_retries = max_retries;
  auto config = rtlmut::load_config(config_path, overrides);
  auto outcome = rtlmut::run_campaign(config);
  nlohmann::json out;
  out["report"] = rtlmut::report_to_json(outcome.report);
  out["aborted"] = outcome.any_worker_aborted;
  out["report_text"] = outcome.report_text_path;
  out["report_json"] = outcome.report_json_path;
  out["scenario_count"] = outcome.scenarios.size();
  return out.dump();
}

std::string report_from_logs(const std::string& cache_path, const std::string& scenarios_path,
                             const std::string& mtrs_json, int max_retries, int window) {
  auto entries = rtlmut::MutationCache::load_entries(cache_path);
  std::vector<rtlmut::BugScenarioRecord> scenarios;
  if (!scenarios_path.empty()) scenarios = rtlmut::ScenarioLog::load(scenarios_path);
  std::map<std::string, std::vector<rtlmut::MtrRange>> mtrs;
  if (!mtrs_json.empty()) {
    auto doc = nlohmann::json::parse(mtrs_json);
    for (auto it = doc.begin(); it != doc.end(); ++it)
      for (const auto& item : it.value()) {
        rtlmut::MtrRange range;
        range.module_id = item.at("module_id").get<std::string>();
        range.range.start_line = item.at("start_line").get<int>();
        range.range.end_line = item.at("end_line").get<int>();
        mtrs[it.key()].push_back(range);
      }
  }
  auto report = rtlmut::build_report(entries, scenarios, mtrs, max_retries, window, 0.0);
  return rtlmut::report_to_json(report).dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "native core for closed-loop RTL mutation campaigns";

  auto base = py::register_exception<rtlmut::Error>(m, "Error");
  py::register_exception<rtlmut::ConfigError>(m, "ConfigError", base);
  py::register_exception<rtlmut::IndexMalformed>(m, "IndexMalformed", base);
  py::register_exception<rtlmut::PartitionInvalid>(m, "PartitionInvalid", base);
  py::register_exception<rtlmut::BaselineGateFailed>(m, "BaselineGateFailed", base);
  py::register_exception<rtlmut::StorageError>(m, "StorageError", base);

  m.def("split_text", &split_text, py::arg("text"), py::arg("source_id"),
        py::arg("chunk_size") = 200, py::arg("aux_lines") = 5, py::arg("context_window") = 400,
        "Partition HDL text into regions; returns the partition as a JSON string.");
  m.def("validate_partition", &validate_partition_text, py::arg("text"),
        py::arg("partition_json"),
        "Check a partition against its source; returns defects as a JSON string.");
  m.def("load_catalog", &load_catalog, py::arg("path"),
        "Load and validate a mutation catalog; returns its canonical serialized form.");
  m.def("cache_entries", &cache_entries, py::arg("path"),
        "Replay a mutation cache log; returns its entries as a JSON string.");
  m.def("spread_entropy", &spread_entropy, py::arg("mutation_counts"),
        py::arg("mtr_line_counts"),
        "Normalized entropy of the density-normalized mutation distribution.");
  m.def("normalize_block", [](const std::string& text) { return rtlmut::normalize_block(text); },
        py::arg("text"), "Whitespace-normalized form used for structural uniqueness.");
  m.def("sha256_hex", [](const std::string& data) { return rtlmut::sha256_hex(data); },
        py::arg("data"));
  m.def("run_campaign", &run_campaign_path, py::arg("config_path"), py::arg("mode") = "",
        py::arg("parallelism") = "", py::arg("scenarios") = -1, py::arg("max_retries") = -1,
        "Run a campaign from a config file; returns a JSON string with the report.");
  m.def("report_from_logs", &report_from_logs, py::arg("cache_path"),
        py::arg("scenarios_path") = "", py::arg("mtrs_json") = "", py::arg("max_retries") = 2,
        py::arg("window") = 25, "Rebuild the metrics report from log files.");

  m.attr("__version__") = "0.1.0";
}

#include "rtlmut/evaluator.hpp"

#include <filesystem>
#include <sstream>

#include "rtlmut/errors.hpp"
#include "rtlmut/subprocess.hpp"
#include "rtlmut/text.hpp"

namespace rtlmut {

std::string eval_outcome_to_string(EvalOutcome outcome) {
  switch (outcome) {
    case EvalOutcome::Detected:
      return "detected";
    case EvalOutcome::SyntaxFailure:
      return "syntax_failure";
    case EvalOutcome::Undetected:
      return "undetected";
  }
  return "undetected";
}

EvalOutcome eval_outcome_from_string(const std::string& s) {
  if (s == "detected") return EvalOutcome::Detected;
  if (s == "syntax_failure") return EvalOutcome::SyntaxFailure;
  if (s == "undetected") return EvalOutcome::Undetected;
  throw ConfigError("unknown evaluation outcome: " + s);
}

Outcome entry_outcome_for(EvalOutcome outcome) {
  switch (outcome) {
    case EvalOutcome::Detected:
      return Outcome::Success;
    case EvalOutcome::SyntaxFailure:
      return Outcome::SyntaxFailure;
    case EvalOutcome::Undetected:
      return Outcome::Undetected;
  }
  return Outcome::Undetected;
}

EvaluationOutcome classify(const CompileResult& compile_result,
                           const std::vector<RegressionRecord>& regression_results) {
  if (!compile_result.ok) {
    EvaluationOutcome out;
    out.outcome = EvalOutcome::SyntaxFailure;
    std::string log = compile_result.log;
    if (log.size() > 2000) log = log.substr(log.size() - 2000);
    out.evidence = log;
    return out;
  }
  int infra = 0;
  for (const auto& record : regression_results) {
    if (record.infra_error) {
      ++infra;
      continue;
    }
    if (!record.passed) {
      EvaluationOutcome out;
      out.outcome = EvalOutcome::Detected;
      out.evidence = "test " + record.test + " seed " + std::to_string(record.seed) + " failed";
      return out;
    }
  }
  if (infra > 0)
    throw InfraError(std::to_string(infra) +
                     " regression run(s) hit infrastructure errors and no real failure was seen");
  EvaluationOutcome out;
  out.outcome = EvalOutcome::Undetected;
  out.evidence = std::to_string(regression_results.size()) + " regression run(s) passed";
  return out;
}

void Evaluator::begin_scenario(const std::vector<MutationEntry>& candidates) {
  (void)candidates;
  scenarios_begun_.fetch_add(1);
}

void Evaluator::baseline_gate(Workspace& ws) {
  CompileResult compiled = compile(ws);
  if (!compiled.ok)
    throw BaselineGateFailed("pristine design does not compile: " + compiled.log);
  auto records = run_regression(ws, /*short_circuit=*/false);
  for (const auto& record : records) {
    if (record.infra_error)
      throw BaselineGateFailed("baseline regression hit an infrastructure error on test " +
                               record.test + " seed " + std::to_string(record.seed));
    if (!record.passed)
      throw BaselineGateFailed("pristine design fails test " + record.test + " seed " +
                               std::to_string(record.seed));
  }
}

namespace {

std::string substitute(std::string text, const std::map<std::string, std::string>& vars) {
  for (const auto& [key, value] : vars) text = replace_all(text, "{" + key + "}", value);
  return text;
}

}  // namespace

CommandEvaluator::CommandEvaluator(EvaluatorConfig config) : config_(std::move(config)) {
  if (config_.compile_command.empty()) throw ConfigError("evaluator needs a compile_command");
  if (config_.test_command.empty()) throw ConfigError("evaluator needs a test_command");
  if (config_.tests.empty()) throw ConfigError("evaluator needs at least one test");
  if (config_.seeds.empty()) config_.seeds = {0};
}

CompileResult CommandEvaluator::compile(Workspace& ws) {
  compiles_run_.fetch_add(1);
  std::string command = substitute(config_.compile_command, {{"workspace", ws.root()}});
  CommandResult run = run_shell(command, config_.per_command_timeout_seconds);
  if (run.timed_out) throw InfraError("compile command timed out: " + command);

  CompileResult result;
  result.ok = run.exit_code == 0;
  result.log = run.output;
  if (!log_dir_.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(log_dir_, ec);
    std::string path = log_dir_ + "/compile_" + std::to_string(++invocation_) + ".log";
    write_file(path, command + "\n---\n" + run.output);
  }
  return result;
}

std::vector<RegressionRecord> CommandEvaluator::run_regression(Workspace& ws, bool short_circuit) {
  regressions_run_.fetch_add(1);
  std::vector<RegressionRecord> records;
  for (const auto& test : config_.tests) {
    for (long seed : config_.seeds) {
      std::string command = substitute(config_.test_command, {{"workspace", ws.root()},
                                                              {"test", test},
                                                              {"seed", std::to_string(seed)}});
      CommandResult run = run_shell(command, config_.per_command_timeout_seconds);

      RegressionRecord record;
      record.test = test;
      record.seed = seed;
      if (run.timed_out) {
        record.infra_error = true;
      } else {
        bool failed = run.exit_code != 0;
        if (!failed && !config_.failure_pattern.empty())
          failed = run.output.find(config_.failure_pattern) != std::string::npos;
        record.passed = !failed;
      }
      if (!log_dir_.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(log_dir_, ec);
        std::string path = log_dir_ + "/test_" + std::to_string(++invocation_) + ".log";
        write_file(path, command + "\n---\n" + run.output);
        record.log_ref = path;
      }
      records.push_back(std::move(record));
      if (short_circuit && !records.back().infra_error && !records.back().passed) return records;
    }
  }
  return records;
}

ScriptedEvaluator::ScriptedEvaluator(Options options) : options_(std::move(options)) {}

void ScriptedEvaluator::begin_scenario(const std::vector<MutationEntry>& candidates) {
  Evaluator::begin_scenario(candidates);
  scripted_.reset();
  if (sequence_pos_ < options_.sequence.size()) {
    scripted_ = options_.sequence[sequence_pos_++];
    return;
  }
  for (const auto& rule : options_.rules) {
    for (const auto& entry : candidates) {
      if (entry.class_id == rule.class_id &&
          (rule.region_index < 0 || rule.region_index == entry.region_index)) {
        scripted_ = rule.outcome;
        return;
      }
    }
  }
  scripted_ = options_.default_outcome;
}

EvalOutcome ScriptedEvaluator::current_outcome() const {
  if (!scripted_)
    throw InfraError("scripted evaluator used without begin_scenario");
  return *scripted_;
}

CompileResult ScriptedEvaluator::compile(Workspace& ws) {
  (void)ws;
  compiles_run_.fetch_add(1);
  CompileResult result;
  if (!scripted_) {
    // Baseline gate runs before any scenario; the pristine design passes.
    result.ok = true;
    result.log = "scripted: baseline ok";
    return result;
  }
  result.ok = current_outcome() != EvalOutcome::SyntaxFailure;
  result.log = result.ok ? "scripted: compile ok" : "scripted: syntax error injected";
  return result;
}

std::vector<RegressionRecord> ScriptedEvaluator::run_regression(Workspace& ws, bool short_circuit) {
  (void)ws;
  (void)short_circuit;
  regressions_run_.fetch_add(1);
  RegressionRecord record;
  record.test = "scripted";
  record.seed = 0;
  record.passed = !scripted_ || current_outcome() != EvalOutcome::Detected;
  record.log_ref = "scripted";
  return {record};
}

std::unique_ptr<Evaluator> make_evaluator(const nlohmann::json& config) {
  std::string kind = config.value("kind", "");
  if (kind == "command") {
    EvaluatorConfig cfg;
    try {
      cfg.compile_command = config.at("compile_command").get<std::string>();
      cfg.test_command = config.at("test_command").get<std::string>();
      cfg.tests = config.at("tests").get<std::vector<std::string>>();
      if (config.contains("seeds")) cfg.seeds = config.at("seeds").get<std::vector<long>>();
      cfg.failure_pattern = config.value("failure_pattern", "");
      cfg.per_command_timeout_seconds =
          config.value("per_command_timeout_seconds", cfg.per_command_timeout_seconds);
      if (config.contains("short_circuit")) cfg.short_circuit = config.at("short_circuit").get<bool>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("bad command evaluator config: ") + e.what());
    }
    return std::make_unique<CommandEvaluator>(std::move(cfg));
  }
  if (kind == "mock") {
    ScriptedEvaluator::Options options;
    try {
      if (config.contains("default_outcome"))
        options.default_outcome =
            eval_outcome_from_string(config.at("default_outcome").get<std::string>());
      for (const auto& r : config.value("rules", nlohmann::json::array())) {
        ScriptedEvaluator::Rule rule;
        rule.class_id = r.at("class_id").get<std::string>();
        rule.region_index = r.value("region_index", -1);
        rule.outcome = eval_outcome_from_string(r.at("outcome").get<std::string>());
        options.rules.push_back(std::move(rule));
      }
      for (const auto& s : config.value("sequence", nlohmann::json::array()))
        options.sequence.push_back(eval_outcome_from_string(s.get<std::string>()));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("bad mock evaluator config: ") + e.what());
    }
    return std::make_unique<ScriptedEvaluator>(std::move(options));
  }
  throw ConfigError("evaluator config needs \"kind\": \"command\" or \"mock\"");
}

}  // namespace rtlmut

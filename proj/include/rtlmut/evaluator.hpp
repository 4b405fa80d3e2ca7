#pragma once

#include <atomic>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rtlmut/cache.hpp"
#include "rtlmut/patch.hpp"

namespace rtlmut {

struct CompileResult {
  bool ok = false;
  std::string log;
};

struct RegressionRecord {
  std::string test;
  long seed = 0;
  bool passed = false;
  bool infra_error = false;  // timeout on this (test, seed); excluded from detection
  std::string log_ref;
};

enum class EvalOutcome { Detected, SyntaxFailure, Undetected };

std::string eval_outcome_to_string(EvalOutcome outcome);
EvalOutcome eval_outcome_from_string(const std::string& s);

Outcome entry_outcome_for(EvalOutcome outcome);

struct EvaluationOutcome {
  EvalOutcome outcome = EvalOutcome::Undetected;
  std::string evidence;  // compile log excerpt or first failing (test, seed)
};

// Pure three-way classification: compile failed => SyntaxFailure; any failed
// (test, seed) => Detected; otherwise Undetected. A run with no real failure
// but at least one infra-errored pair cannot be called Undetected and raises
// InfraError so the attempt is annulled rather than mislabeled.
EvaluationOutcome classify(const CompileResult& compile_result,
                           const std::vector<RegressionRecord>& regression_results);

struct EvaluatorConfig {
  std::string compile_command;  // template with {workspace}
  std::string test_command;     // template with {workspace}, {test}, {seed}
  std::vector<std::string> tests;
  std::vector<long> seeds;
  // Identifies a failing run in the output when the exit code is unreliable.
  std::string failure_pattern;
  double per_command_timeout_seconds = 300.0;
  std::optional<bool> short_circuit;  // defaulted by campaign mode when unset
};

class Evaluator {
 public:
  virtual ~Evaluator() = default;

  // Called once per scenario attempt before compile; gives scripted
  // evaluators the candidate entries to key their outcome on.
  virtual void begin_scenario(const std::vector<MutationEntry>& candidates);

  virtual CompileResult compile(Workspace& ws) = 0;
  virtual std::vector<RegressionRecord> run_regression(Workspace& ws, bool short_circuit) = 0;

  // Pristine design must compile and pass the full suite before any mutation
  // is attempted; BaselineGateFailed otherwise.
  void baseline_gate(Workspace& ws);

  int scenarios_begun() const { return scenarios_begun_.load(); }
  int compiles_run() const { return compiles_run_.load(); }
  int regressions_run() const { return regressions_run_.load(); }

 protected:
  std::atomic<int> scenarios_begun_{0};
  std::atomic<int> compiles_run_{0};
  std::atomic<int> regressions_run_{0};
};

// Runs the configured external commands. Log output goes under `log_dir`
// when set (one file per command invocation).
class CommandEvaluator : public Evaluator {
 public:
  explicit CommandEvaluator(EvaluatorConfig config);

  CompileResult compile(Workspace& ws) override;
  std::vector<RegressionRecord> run_regression(Workspace& ws, bool short_circuit) override;

  void set_log_dir(const std::string& dir) { log_dir_ = dir; }

 private:
  EvaluatorConfig config_;
  std::string log_dir_;
  int invocation_ = 0;
};

// Desk-scale evaluator scripted from config: a per-call outcome sequence, a
// rule table keyed on (class_id, region_index), and a default. No HDL
// toolchain involved.
class ScriptedEvaluator : public Evaluator {
 public:
  struct Rule {
    std::string class_id;
    int region_index = -1;  // -1 matches any region
    EvalOutcome outcome = EvalOutcome::Detected;
  };

  struct Options {
    EvalOutcome default_outcome = EvalOutcome::Detected;
    std::vector<Rule> rules;
    std::vector<EvalOutcome> sequence;  // consumed once per scenario attempt
  };

  explicit ScriptedEvaluator(Options options);

  void begin_scenario(const std::vector<MutationEntry>& candidates) override;
  CompileResult compile(Workspace& ws) override;
  std::vector<RegressionRecord> run_regression(Workspace& ws, bool short_circuit) override;

 private:
  EvalOutcome current_outcome() const;

  Options options_;
  std::size_t sequence_pos_ = 0;
  std::optional<EvalOutcome> scripted_;  // outcome for the current scenario
};

// Factory over the evaluator section of a design config:
// {"kind":"command", ...EvaluatorConfig fields} or
// {"kind":"mock","default_outcome":...,"rules":[...],"sequence":[...]}.
std::unique_ptr<Evaluator> make_evaluator(const nlohmann::json& config);

}  // namespace rtlmut

#pragma once

#include <deque>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rtlmut/backend.hpp"
#include "rtlmut/catalog.hpp"
#include "rtlmut/partition.hpp"

namespace fixtures {

// Backend with a scripted reply queue. An empty queue delegates to the
// deterministic mock, so tests can override just the calls they care about.
class QueueBackend : public rtlmut::AgentBackend {
 public:
  QueueBackend() : mock_(rtlmut::make_mock_backend()) {}

  void push(nlohmann::json reply) { replies_.push_back(std::move(reply)); }

  nlohmann::json complete(const rtlmut::AgentRequest& request) override {
    seen.push_back({request.schema, request.prompt, request.payload});
    if (!replies_.empty()) {
      nlohmann::json reply = std::move(replies_.front());
      replies_.pop_front();
      return reply;
    }
    return mock_->complete(request);
  }

  std::string name() const override { return "queue"; }

  std::vector<rtlmut::AgentRequest> seen;

 private:
  std::deque<nlohmann::json> replies_;
  std::unique_ptr<rtlmut::AgentBackend> mock_;
};

// Scratch directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& label);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::string& path() const { return path_; }
  // Joins and creates parent directories.
  std::string file(const std::string& rel) const;

 private:
  std::string path_;
};

void write_text(const std::string& path, const std::string& text);

// Deterministic synthetic Verilog. `stanzas` repeated logic groups of ~30
// lines each; `seed` varies declarations and block mix.
std::string synth_module(const std::string& name, int stanzas, unsigned seed);

// 24 files between roughly 100 and 2,000 lines.
std::vector<std::pair<std::string, std::string>> synth_corpus();

// A file whose main always block straddles a 40-line chunk boundary, with
// the hand-derived partition it must produce.
struct StraddleFixture {
  std::string text;
  int chunk_size = 40;
  int auxiliary_lines = 5;
  int context_window = 40;
  std::vector<rtlmut::Region> expected;
};
StraddleFixture straddle_fixture();

// The eight-class catalog, built in code.
nlohmann::json test_index_json();
rtlmut::MutationIndex test_index();

// Writes the catalog to dir and returns its path.
std::string write_catalog(const TempDir& dir, const std::string& rel = "catalog.json");

// Campaign config document over synthetic designs written under `dir`:
// `designs` x `modules_per_design` modules, mock backend, mock evaluator.
nlohmann::json campaign_config(const TempDir& dir, int designs, int modules_per_design,
                               int scenarios_target);
std::string write_campaign_config(const TempDir& dir, const nlohmann::json& doc,
                                  const std::string& rel = "campaign.json");

}  // namespace fixtures

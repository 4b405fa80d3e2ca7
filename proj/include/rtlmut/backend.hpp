#pragma once

#include <memory>
#include <string>

#include <json.hpp>

namespace rtlmut {

// Every structured exchange with an agent names one of these response
// schemas. The remote backend embeds the schema's instructions in the prompt;
// the deterministic mock dispatches on it.
enum class ResponseSchema {
  SplitChunk,      // {"regions":[{"start_line","end_line","synopsis"}]}
  BoundaryCheck,   // {"continues": bool}
  RegionChoice,    // {"region_index","rationale","proposed_class_id"}
  MutationChoice,  // {"class_id","target_start_line","target_end_line","plan"}
  Injection        // {"mutated_block","summary"}
};

std::string schema_name(ResponseSchema schema);

// One agent call. `prompt` is the fully rendered text sent to a remote chat
// model. `payload` carries the same inputs in structured form; the
// deterministic mock backend works from it so that tests never depend on
// prompt wording.
struct AgentRequest {
  ResponseSchema schema;
  std::string prompt;
  nlohmann::json payload;
};

class AgentBackend {
 public:
  virtual ~AgentBackend() = default;

  // Returns the parsed JSON object for the request. Transport problems raise
  // BackendError; a reply without a parseable fenced JSON block raises
  // SchemaViolation (the caller's retry loop re-prompts on those).
  virtual nlohmann::json complete(const AgentRequest& request) = 0;

  virtual std::string name() const = 0;
};

struct MockOptions {
  // When set, injected mutations carry an unbalanced parenthesis so a real
  // compile step can be exercised without an HDL toolchain.
  bool corrupt_injections = false;
};

std::unique_ptr<AgentBackend> make_mock_backend(const MockOptions& options = {});

struct RemoteBackendConfig {
  std::string endpoint = "https://api.openai.com/v1";
  std::string model = "gpt-4o-mini";
  double temperature = 0.7;
  double timeout_seconds = 60.0;
  std::string api_key;
};

std::unique_ptr<AgentBackend> make_remote_backend(const RemoteBackendConfig& config);

}  // namespace rtlmut

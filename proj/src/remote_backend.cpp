#include <cmath>
#include <memory>
#include <optional>
#include <string>

#include <httplib.h>

#include "rtlmut/backend.hpp"
#include "rtlmut/errors.hpp"

namespace rtlmut {

namespace {

// Splits "https://host:port/prefix" into the client base and the path prefix.
void split_endpoint(const std::string& endpoint, std::string& base, std::string& prefix) {
  auto scheme_end = endpoint.find("://");
  if (scheme_end == std::string::npos)
    throw ConfigError("backend endpoint needs a scheme: " + endpoint);
  auto path_start = endpoint.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    base = endpoint;
    prefix.clear();
    return;
  }
  base = endpoint.substr(0, path_start);
  prefix = endpoint.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
}

// Pulls the first JSON object out of a chat reply: the whole body, a fenced
// block, or the first balanced {...} span.
nlohmann::json extract_json(const std::string& content) {
  auto try_parse = [](const std::string& text) -> std::optional<nlohmann::json> {
    try {
      nlohmann::json parsed = nlohmann::json::parse(text);
      if (parsed.is_object()) return parsed;
    } catch (const nlohmann::json::exception&) {
    }
    return std::nullopt;
  };

  if (auto parsed = try_parse(content)) return *parsed;

  auto fence = content.find("```");
  while (fence != std::string::npos) {
    auto body_start = content.find('\n', fence);
    auto fence_end = body_start == std::string::npos
                         ? std::string::npos
                         : content.find("```", body_start);
    if (body_start == std::string::npos || fence_end == std::string::npos) break;
    if (auto parsed = try_parse(content.substr(body_start + 1, fence_end - body_start - 1)))
      return *parsed;
    fence = content.find("```", fence_end + 3);
  }

  auto open = content.find('{');
  while (open != std::string::npos) {
    int depth = 0;
    bool in_string = false;
    for (std::size_t i = open; i < content.size(); ++i) {
      char c = content[i];
      if (in_string) {
        if (c == '\\')
          ++i;
        else if (c == '"')
          in_string = false;
        continue;
      }
      if (c == '"') in_string = true;
      if (c == '{') ++depth;
      if (c == '}' && --depth == 0) {
        if (auto parsed = try_parse(content.substr(open, i - open + 1))) return *parsed;
        break;
      }
    }
    open = content.find('{', open + 1);
  }
  throw SchemaViolation("reply contains no parseable JSON object");
}

class RemoteBackend : public AgentBackend {
 public:
  explicit RemoteBackend(RemoteBackendConfig config) : config_(std::move(config)) {
    split_endpoint(config_.endpoint, base_, prefix_);
  }

  std::string name() const override { return "remote:" + config_.model; }

  nlohmann::json complete(const AgentRequest& request) override {
    httplib::Client client(base_);
    client.set_connection_timeout(std::chrono::milliseconds(
        static_cast<int>(config_.timeout_seconds * 1000.0)));
    client.set_read_timeout(std::chrono::milliseconds(
        static_cast<int>(config_.timeout_seconds * 1000.0)));
    if (!config_.api_key.empty()) client.set_bearer_token_auth(config_.api_key);

    nlohmann::json body = {
        {"model", config_.model},
        {"temperature", config_.temperature},
        {"messages",
         {{{"role", "system"},
           {"content", "You respond with a single JSON object of kind \"" +
                           schema_name(request.schema) + "\" and nothing else."}},
          {{"role", "user"}, {"content", request.prompt}}}}};

    auto result = client.Post(prefix_ + "/chat/completions", body.dump(), "application/json");
    if (!result)
      throw BackendError("request to " + config_.endpoint +
                         " failed: " + httplib::to_string(result.error()));
    if (result->status < 200 || result->status >= 300) {
      std::string excerpt = result->body.substr(0, 300);
      throw BackendError("endpoint returned HTTP " + std::to_string(result->status) + ": " +
                         excerpt);
    }

    nlohmann::json reply;
    try {
      reply = nlohmann::json::parse(result->body);
    } catch (const nlohmann::json::exception& e) {
      throw BackendError(std::string("endpoint body is not JSON: ") + e.what());
    }
    std::string content;
    try {
      content = reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw BackendError(std::string("endpoint body is not a chat completion: ") + e.what());
    }
    return extract_json(content);
  }

 private:
  RemoteBackendConfig config_;
  std::string base_;
  std::string prefix_;
};

}  // namespace

std::unique_ptr<AgentBackend> make_remote_backend(const RemoteBackendConfig& config) {
  return std::make_unique<RemoteBackend>(config);
}

}  // namespace rtlmut

#include <doctest.h>

#include <mutex>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "rtlmut/backend.hpp"
#include "rtlmut/errors.hpp"

using namespace rtlmut;

namespace {

std::string chat_reply(const std::string& content) {
  nlohmann::json body = {{"choices", {{{"message", {{"content", content}}}}}}};
  return body.dump();
}

// Loopback chat-completions endpoint that records the last request and
// answers with whatever `content`/`status` are set to.
struct FakeEndpoint {
  httplib::Server server;
  std::thread thread;
  int port = 0;

  std::mutex mu;
  std::string content = "{}";
  int status = 200;
  std::string raw_body;  // when non-empty, sent verbatim instead of a chat reply
  std::string last_path;
  std::string last_auth;
  nlohmann::json last_request;

  FakeEndpoint() {
    auto handler = [this](const httplib::Request& req, httplib::Response& res) {
      std::lock_guard<std::mutex> lock(mu);
      last_path = req.path;
      last_auth = req.get_header_value("Authorization");
      last_request = nlohmann::json::parse(req.body, nullptr, false);
      res.status = status;
      res.set_content(raw_body.empty() ? chat_reply(content) : raw_body, "application/json");
    };
    server.Post("/v1/chat/completions", handler);
    server.Post("/chat/completions", handler);
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }

  ~FakeEndpoint() {
    server.stop();
    if (thread.joinable()) thread.join();
  }

  std::string url(const std::string& prefix = "/v1") {
    return "http://127.0.0.1:" + std::to_string(port) + prefix;
  }
};

AgentRequest ping(const std::string& prompt = "Does the block continue?") {
  AgentRequest request;
  request.schema = ResponseSchema::BoundaryCheck;
  request.prompt = prompt;
  return request;
}

}  // namespace

TEST_CASE("the remote backend sends an authenticated chat completion") {
  FakeEndpoint fake;
  fake.content = "{\"continues\": true}";

  RemoteBackendConfig config;
  config.endpoint = fake.url();
  config.model = "test-model";
  config.temperature = 0.25;
  config.api_key = "sk-test";
  auto backend = make_remote_backend(config);
  CHECK(backend->name() == "remote:test-model");

  auto reply = backend->complete(ping("check this tail"));
  CHECK(reply == nlohmann::json{{"continues", true}});

  std::lock_guard<std::mutex> lock(fake.mu);
  CHECK(fake.last_path == "/v1/chat/completions");
  CHECK(fake.last_auth == "Bearer sk-test");
  CHECK(fake.last_request["model"] == "test-model");
  CHECK(fake.last_request["temperature"].get<double>() == doctest::Approx(0.25));
  REQUIRE(fake.last_request["messages"].size() == 2);
  CHECK(fake.last_request["messages"][0]["role"] == "system");
  std::string system = fake.last_request["messages"][0]["content"].get<std::string>();
  CHECK(system.find(schema_name(ResponseSchema::BoundaryCheck)) != std::string::npos);
  CHECK(fake.last_request["messages"][1]["role"] == "user");
  CHECK(fake.last_request["messages"][1]["content"] == "check this tail");
}

TEST_CASE("endpoint paths with and without a prefix both resolve") {
  FakeEndpoint fake;
  fake.content = "{\"continues\": false}";

  RemoteBackendConfig config;
  config.endpoint = fake.url("");
  make_remote_backend(config)->complete(ping());
  {
    std::lock_guard<std::mutex> lock(fake.mu);
    CHECK(fake.last_path == "/chat/completions");
  }

  config.endpoint = fake.url("/v1/");
  make_remote_backend(config)->complete(ping());
  {
    std::lock_guard<std::mutex> lock(fake.mu);
    CHECK(fake.last_path == "/v1/chat/completions");
  }

  config.endpoint = "127.0.0.1:80";
  CHECK_THROWS_AS(make_remote_backend(config), ConfigError);
}

TEST_CASE("replies are accepted bare, fenced, or buried in prose") {
  FakeEndpoint fake;
  RemoteBackendConfig config;
  config.endpoint = fake.url();
  auto backend = make_remote_backend(config);

  auto ask = [&](const std::string& content) {
    {
      std::lock_guard<std::mutex> lock(fake.mu);
      fake.content = content;
    }
    return backend->complete(ping());
  };

  CHECK(ask("{\"continues\": true}") == nlohmann::json{{"continues", true}});
  CHECK(ask("Here you go:\n```json\n{\"continues\": false}\n```\nDone.") ==
        nlohmann::json{{"continues", false}});
  CHECK(ask("I think {\"continues\": true, \"note\": \"brace } in string\"} covers it.") ==
        nlohmann::json{{"continues", true}, {"note", "brace } in string"}});
  CHECK(ask("ignore {broken then {\"continues\": false} fine") ==
        nlohmann::json{{"continues", false}});

  CHECK_THROWS_AS(ask("no structured data here"), SchemaViolation);
  CHECK_THROWS_AS(ask("[1, 2, 3]"), SchemaViolation);
}

TEST_CASE("transport and protocol failures raise BackendError") {
  FakeEndpoint fake;
  RemoteBackendConfig config;
  config.endpoint = fake.url();
  auto backend = make_remote_backend(config);

  {
    std::lock_guard<std::mutex> lock(fake.mu);
    fake.status = 500;
    fake.raw_body = "overloaded";
  }
  try {
    backend->complete(ping());
    FAIL("expected BackendError");
  } catch (const BackendError& e) {
    CHECK(std::string(e.what()).find("HTTP 500") != std::string::npos);
  }

  {
    std::lock_guard<std::mutex> lock(fake.mu);
    fake.status = 200;
    fake.raw_body = "not json at all";
  }
  CHECK_THROWS_AS(backend->complete(ping()), BackendError);

  {
    std::lock_guard<std::mutex> lock(fake.mu);
    fake.raw_body = "{\"usage\": {}}";
  }
  CHECK_THROWS_AS(backend->complete(ping()), BackendError);

  RemoteBackendConfig dead;
  dead.endpoint = "http://127.0.0.1:1";
  dead.timeout_seconds = 2.0;
  CHECK_THROWS_AS(make_remote_backend(dead)->complete(ping()), BackendError);
}

#include <atomic>
#include <cstdlib>
#include <thread>

#include "doctest.h"
#include "geolog/llm_backend.hpp"
#include "httplib.h"
#include "json.hpp"
#include "test_support.hpp"

using namespace geolog;
using geolog::testing::error_code_of;
using nlohmann::json;

namespace {

CompletionRequest request_for(std::string prompt, std::vector<std::string> stops = {}) {
  CompletionRequest r;
  r.prompt = std::move(prompt);
  r.stop_sequences = std::move(stops);
  return r;
}

// Local HTTP endpoint standing in for a model server.
class MockServer {
 public:
  explicit MockServer(std::function<void(const httplib::Request&, httplib::Response&)> handler) {
    server_.Post(".*", [this, handler](const httplib::Request& req, httplib::Response& res) {
      ++hits;
      last_body = req.body;
      last_auth = req.get_header_value("Authorization");
      handler(req, res);
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~MockServer() {
    server_.stop();
    thread_.join();
  }
  std::string url(const std::string& path) const {
    return "http://127.0.0.1:" + std::to_string(port_) + path;
  }

  std::atomic<int> hits{0};
  std::string last_body;
  std::string last_auth;

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

BackendConfig remote(const std::string& endpoint, ApiStyle style, const std::string& cred = "") {
  BackendConfig cfg;
  cfg.kind = BackendKind::kRemote;
  cfg.endpoint = endpoint;
  cfg.api_style = style;
  cfg.credential_ref = cred;
  cfg.model_name = "test-model";
  cfg.retry_backoff = std::chrono::milliseconds(1);
  cfg.timeout = std::chrono::seconds(5);
  return cfg;
}

constexpr const char* kCredVar = "GEOLOG_TEST_API_KEY";
constexpr const char* kSecret = "sk-test-d0n0tl34k";

}  // namespace

TEST_SUITE("llm_backend") {
  TEST_CASE("scripted reply is returned verbatim with finish_reason end") {
    auto cfg = scripted_backend({reply_any("Final Answer: 10")});
    const auto res = complete(request_for("anything"), cfg);
    CHECK(res.text == "Final Answer: 10");
    CHECK(res.finish_reason == FinishReason::kEnd);
  }

  TEST_CASE("stop sequence truncates before the marker") {
    auto cfg = scripted_backend(
        {reply_any("Action: sql_db_query\nAction Input: SELECT 1\nObservation: fake")});
    const auto res = complete(request_for("p", {"Observation:"}), cfg);
    CHECK(res.text == "Action: sql_db_query\nAction Input: SELECT 1\n");
    CHECK(res.finish_reason == FinishReason::kStopSequence);
    CHECK(res.text.find("Observation:") == std::string::npos);
  }

  TEST_CASE("truncate_at_stop uses the earliest match") {
    std::string t = "abc STOP2 def STOP1";
    CHECK(truncate_at_stop(t, {"STOP1", "STOP2"}));
    CHECK(t == "abc ");
    std::string u = "no markers";
    CHECK_FALSE(truncate_at_stop(u, {"X", ""}));
    CHECK(u == "no markers");
  }

  TEST_CASE("predicate match, single consumption and ordering") {
    auto cfg = scripted_backend({reply_if_contains("tesis", "ok")});
    CHECK(complete(request_for("sobre tesis"), cfg).text == "ok");
    CHECK(error_code_of([&] { complete(request_for("sobre tesis"), cfg); }) ==
          ErrorCode::kScriptExhausted);

    auto two = scripted_backend({reply_if_contains("uno", "1"), reply_if_contains("dos", "2")});
    CHECK(complete(request_for("uno"), two).text == "1");
    CHECK(complete(request_for("dos"), two).text == "2");
  }

  TEST_CASE("first matching unconsumed entry wins") {
    auto cfg = scripted_backend({reply_if_contains("dos", "second"), reply_any("first")});
    CHECK(complete(request_for("uno"), cfg).text == "first");
    CHECK(complete(request_for("dos"), cfg).text == "second");
    CHECK(cfg.script->remaining() == 0);
  }

  TEST_CASE("echo entry returns the prompt") {
    auto cfg = scripted_backend({echo_any()});
    CHECK(complete(request_for("SELECT 1;"), cfg).text == "SELECT 1;");
  }

  TEST_CASE("scripted replays are deterministic") {
    auto run = [] {
      auto cfg = scripted_backend({reply_any("a"), reply_if_contains("x", "b"), reply_any("c")});
      std::vector<std::string> out;
      for (const char* p : {"x", "y", "x"}) out.push_back(complete(request_for(p), cfg).text);
      return out;
    };
    CHECK(run() == run());
    CHECK(run() == std::vector<std::string>{"a", "c", "b"});
  }

  TEST_CASE("concurrent consumption hands out each entry once") {
    std::vector<ScriptEntry> entries;
    for (int i = 0; i < 200; ++i) entries.push_back(reply_any(std::to_string(i)));
    auto cfg = scripted_backend(std::move(entries));
    auto backend = make_backend(cfg);
    std::vector<std::vector<std::string>> seen(4);
    std::vector<std::thread> threads;
    for (int t = 0; t < 4; ++t) {
      threads.emplace_back([&, t] {
        for (int i = 0; i < 50; ++i) seen[t].push_back(backend->complete(request_for("p")).text);
      });
    }
    for (auto& th : threads) th.join();
    std::set<std::string> all;
    for (const auto& v : seen) all.insert(v.begin(), v.end());
    CHECK(all.size() == 200);
    CHECK(cfg.script->remaining() == 0);
  }

  TEST_CASE("request invariants") {
    auto cfg = scripted_backend({reply_any("x")});
    CHECK(error_code_of([&] { complete(request_for(""), cfg); }) == ErrorCode::kInvalidRequest);
    auto r = request_for("p");
    r.temperature = 2.5;
    CHECK(error_code_of([&] { validate_request(r); }) == ErrorCode::kInvalidRequest);
    r = request_for("p", {"a", "b", "c", "d", "e"});
    CHECK(error_code_of([&] { validate_request(r); }) == ErrorCode::kInvalidRequest);
    r = request_for("p");
    r.max_tokens = 0;
    CHECK(error_code_of([&] { validate_request(r); }) == ErrorCode::kInvalidRequest);
    CHECK(request_for("p").temperature == doctest::Approx(0.5));
  }

  TEST_CASE("config from JSON") {
    const auto scripted = backend_from_json(json::parse(
        R"({"kind":"scripted","temperature":0.2,"script":[{"contains":"a","response":"A"},{"echo":true},{"response":"Z"}]})"));
    CHECK(scripted.kind == BackendKind::kScripted);
    CHECK(scripted.temperature == doctest::Approx(0.2));
    CHECK(scripted.script->remaining() == 3);

    const auto rem = backend_from_json(json::parse(
        R"({"kind":"remote","endpoint":"https://example.invalid/v1/chat/completions","api_style":"chat","credential_ref":"MY_KEY","model_name":"m"})"));
    CHECK(rem.kind == BackendKind::kRemote);
    CHECK(rem.credential_ref == "MY_KEY");
    CHECK(rem.max_retries == 2);

    CHECK(error_code_of([] {
            backend_from_json(json::parse(R"({"kind":"remote","endpoint":"http://x/","api_key":"sk"})"));
          }) == ErrorCode::kConfigError);
    CHECK(error_code_of([] { backend_from_json(json::parse(R"({"kind":"quantum"})")); }) ==
          ErrorCode::kConfigError);
    CHECK(error_code_of([] { backend_from_json(json::parse(R"({"kind":"scripted","script":[]})")); }) ==
          ErrorCode::kConfigError);
  }

  TEST_CASE("remote chat style round trip") {
    MockServer server([](const httplib::Request& req, httplib::Response& res) {
      const auto body = json::parse(req.body);
      CHECK(body["model"] == "test-model");
      CHECK(body["messages"][0]["content"] == "hola");
      CHECK(body["stop"][0] == "Observation:");
      CHECK(body["temperature"] == doctest::Approx(0.5));
      CHECK(body["max_tokens"] == 1024);
      res.set_content(
          R"({"choices":[{"message":{"content":"Action: sql_db_list_tables\nAction Input: \nObservation: x"},"finish_reason":"stop"}]})",
          "application/json");
    });
    setenv(kCredVar, kSecret, 1);
    auto backend = make_backend(remote(server.url("/v1/chat/completions"), ApiStyle::kChat, kCredVar));
    CHECK(backend->kind() == BackendKind::kRemote);
    const auto res = backend->complete(request_for("hola", {"Observation:"}));
    CHECK(res.text == "Action: sql_db_list_tables\nAction Input: \n");
    CHECK(res.finish_reason == FinishReason::kStopSequence);
    CHECK(server.last_auth == std::string("Bearer ") + kSecret);
    unsetenv(kCredVar);
  }

  TEST_CASE("remote completions and ollama styles") {
    MockServer completions([](const httplib::Request& req, httplib::Response& res) {
      CHECK(json::parse(req.body)["prompt"] == "p");
      res.set_content(R"({"choices":[{"text":"Final Answer: 10","finish_reason":"length"}]})",
                      "application/json");
    });
    const auto c = make_backend(remote(completions.url("/v1/completions"), ApiStyle::kCompletions))
                       ->complete(request_for("p"));
    CHECK(c.text == "Final Answer: 10");
    CHECK(c.finish_reason == FinishReason::kLength);

    MockServer ollama([](const httplib::Request& req, httplib::Response& res) {
      const auto body = json::parse(req.body);
      CHECK(body["stream"] == false);
      CHECK(body["options"]["num_predict"] == 1024);
      res.set_content(R"({"response":"Final Answer: 6","done":true,"done_reason":"stop"})",
                      "application/json");
    });
    const auto o =
        make_backend(remote(ollama.url("/api/generate"), ApiStyle::kOllama))->complete(request_for("p"));
    CHECK(o.text == "Final Answer: 6");
    CHECK(o.finish_reason == FinishReason::kEnd);
  }

  TEST_CASE("invalid credential is BackendUnavailable without retries or key leak") {
    MockServer server([](const httplib::Request&, httplib::Response& res) {
      res.status = 401;
      res.set_content(R"({"error":"bad key"})", "application/json");
    });
    setenv(kCredVar, kSecret, 1);
    auto backend = make_backend(remote(server.url("/v1/chat/completions"), ApiStyle::kChat, kCredVar));
    try {
      backend->complete(request_for("p"));
      FAIL("expected BackendUnavailable");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kBackendUnavailable);
      const std::string msg = e.what();
      CHECK(msg.find("0 retries") != std::string::npos);
      CHECK(msg.find(kSecret) == std::string::npos);
    }
    CHECK(server.hits == 1);
    unsetenv(kCredVar);
  }

  TEST_CASE("missing credential variable is BackendUnavailable") {
    unsetenv(kCredVar);
    auto backend = make_backend(remote("http://127.0.0.1:9/x", ApiStyle::kChat, kCredVar));
    try {
      backend->complete(request_for("p"));
      FAIL("expected BackendUnavailable");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kBackendUnavailable);
      CHECK(std::string(e.what()).find(kCredVar) != std::string::npos);
    }
  }

  TEST_CASE("server errors are retried twice then reported") {
    MockServer server([](const httplib::Request&, httplib::Response& res) { res.status = 503; });
    setenv(kCredVar, kSecret, 1);
    auto backend = make_backend(remote(server.url("/gen"), ApiStyle::kChat, kCredVar));
    try {
      backend->complete(request_for("p"));
      FAIL("expected BackendUnavailable");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kBackendUnavailable);
      CHECK(std::string(e.what()).find("2 retries") != std::string::npos);
      CHECK(std::string(e.what()).find(kSecret) == std::string::npos);
    }
    CHECK(server.hits == 3);
    unsetenv(kCredVar);
  }

  TEST_CASE("transient failure then success") {
    std::atomic<int> calls{0};
    MockServer server([&calls](const httplib::Request&, httplib::Response& res) {
      if (calls++ == 0) {
        res.status = 500;
        return;
      }
      res.set_content(R"({"choices":[{"text":"ok"}]})", "application/json");
    });
    const auto res = make_backend(remote(server.url("/c"), ApiStyle::kCompletions))
                         ->complete(request_for("p"));
    CHECK(res.text == "ok");
    CHECK(server.hits == 2);
  }

  TEST_CASE("unreachable endpoint is BackendUnavailable") {
    auto cfg = remote("http://127.0.0.1:1/v1/completions", ApiStyle::kCompletions);
    CHECK(error_code_of([&] { make_backend(cfg)->complete(request_for("p")); }) ==
          ErrorCode::kBackendUnavailable);
  }

  TEST_CASE("malformed response body is BackendUnavailable") {
    MockServer server([](const httplib::Request&, httplib::Response& res) {
      res.set_content("<html>oops</html>", "text/html");
    });
    CHECK(error_code_of([&] {
            make_backend(remote(server.url("/c"), ApiStyle::kChat))->complete(request_for("p"));
          }) == ErrorCode::kBackendUnavailable);
  }
}

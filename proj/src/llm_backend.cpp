#include "geolog/llm_backend.hpp"

#include <cstdlib>
#include <thread>

#include "geolog/error.hpp"
#include "httplib.h"

namespace geolog {

using nlohmann::json;

std::string_view to_string(FinishReason reason) {
  switch (reason) {
    case FinishReason::kStopSequence: return "stop_sequence";
    case FinishReason::kLength: return "length";
    case FinishReason::kEnd: return "end";
  }
  return "end";
}

std::string_view to_string(BackendKind kind) {
  return kind == BackendKind::kRemote ? "remote" : "scripted";
}

ScriptEntry reply_any(std::string response) {
  return {[](std::string_view) { return true; },
          [r = std::move(response)](std::string_view) { return r; }, "any"};
}

ScriptEntry reply_if_contains(std::string needle, std::string response) {
  std::string label = "contains \"" + needle + "\"";
  return {[n = std::move(needle)](std::string_view p) { return p.find(n) != std::string_view::npos; },
          [r = std::move(response)](std::string_view) { return r; }, std::move(label)};
}

ScriptEntry echo_any() {
  return {[](std::string_view) { return true; },
          [](std::string_view p) { return std::string(p); }, "echo"};
}

ScriptState::ScriptState(std::vector<ScriptEntry> entries)
    : entries_(std::move(entries)), used_(entries_.size(), false) {}

std::string ScriptState::consume(std::string_view prompt) {
  std::lock_guard lock(mu_);
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (used_[i] || !entries_[i].matches(prompt)) continue;
    used_[i] = true;
    return entries_[i].respond(prompt);
  }
  std::size_t left = 0;
  for (const bool u : used_) left += u ? 0 : 1;
  throw Error(ErrorCode::kScriptExhausted,
              "no script entry matches the prompt (" + std::to_string(left) + " of " +
                  std::to_string(entries_.size()) + " entries unconsumed)");
}

std::size_t ScriptState::remaining() const {
  std::lock_guard lock(mu_);
  std::size_t left = 0;
  for (const bool u : used_) left += u ? 0 : 1;
  return left;
}

BackendConfig scripted_backend(std::vector<ScriptEntry> script) {
  BackendConfig cfg;
  cfg.kind = BackendKind::kScripted;
  cfg.script = std::make_shared<ScriptState>(std::move(script));
  return cfg;
}

void validate_request(const CompletionRequest& request) {
  if (request.prompt.empty()) throw Error(ErrorCode::kInvalidRequest, "prompt is empty");
  if (!(request.temperature >= 0.0 && request.temperature <= 2.0)) {
    throw Error(ErrorCode::kInvalidRequest, "temperature must lie in [0, 2]");
  }
  if (request.max_tokens <= 0) throw Error(ErrorCode::kInvalidRequest, "max_tokens must be > 0");
  if (request.stop_sequences.size() > 4) {
    throw Error(ErrorCode::kInvalidRequest, "at most 4 stop sequences are allowed");
  }
}

bool truncate_at_stop(std::string& text, const std::vector<std::string>& stops) {
  std::size_t cut = std::string::npos;
  for (const auto& stop : stops) {
    if (stop.empty()) continue;
    cut = std::min(cut, text.find(stop));
  }
  if (cut == std::string::npos) return false;
  text.resize(cut);
  return true;
}

namespace {

class ScriptedBackend final : public LlmBackend {
 public:
  explicit ScriptedBackend(BackendConfig cfg) : cfg_(std::move(cfg)) {
    if (!cfg_.script) throw Error(ErrorCode::kConfigError, "scripted backend without a script");
  }

  CompletionResponse complete(const CompletionRequest& request) override {
    validate_request(request);
    CompletionResponse out;
    out.text = cfg_.script->consume(request.prompt);
    out.finish_reason = truncate_at_stop(out.text, request.stop_sequences)
                            ? FinishReason::kStopSequence
                            : FinishReason::kEnd;
    return out;
  }

  BackendKind kind() const override { return BackendKind::kScripted; }
  double temperature() const override { return cfg_.temperature; }
  int max_tokens() const override { return cfg_.max_tokens; }

 private:
  BackendConfig cfg_;
};

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

ParsedUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::kConfigError, "endpoint must be an absolute http(s) URL");
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

class RemoteBackend final : public LlmBackend {
 public:
  explicit RemoteBackend(BackendConfig cfg) : cfg_(std::move(cfg)), url_(split_url(cfg_.endpoint)) {}

  CompletionResponse complete(const CompletionRequest& request) override {
    validate_request(request);
    const auto started = std::chrono::steady_clock::now();

    httplib::Headers headers;
    if (!cfg_.credential_ref.empty()) {
      const char* key = std::getenv(cfg_.credential_ref.c_str());
      if (key == nullptr || *key == '\0') {
        throw Error(ErrorCode::kBackendUnavailable,
                    "credential variable '" + cfg_.credential_ref + "' is not set (0 retries)");
      }
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }
    const std::string body = request_body(request).dump();

    httplib::Client client(url_.origin);
    client.set_connection_timeout(std::chrono::seconds(5));
    client.set_read_timeout(cfg_.timeout);
    client.set_write_timeout(std::chrono::seconds(30));

    std::string last_failure;
    int attempt = 0;
    for (;; ++attempt) {
      auto res = client.Post(url_.path, headers, body, "application/json");
      if (!res) {
        last_failure = "transport error: " + httplib::to_string(res.error());
      } else if (res->status >= 500) {
        last_failure = "server error HTTP " + std::to_string(res->status);
      } else if (res->status == 401 || res->status == 403) {
        throw Error(ErrorCode::kBackendUnavailable,
                    "authentication rejected by " + url_.origin + " (HTTP " +
                        std::to_string(res->status) + ", " + std::to_string(attempt) +
                        " retries)");
      } else if (res->status != 200) {
        throw Error(ErrorCode::kBackendUnavailable,
                    "HTTP " + std::to_string(res->status) + " from " + url_.origin + " (" +
                        std::to_string(attempt) + " retries)");
      } else {
        CompletionResponse out = parse_body(res->body, request);
        out.latency = std::chrono::duration_cast<std::chrono::milliseconds>(
            std::chrono::steady_clock::now() - started);
        return out;
      }
      if (attempt >= cfg_.max_retries) break;
      std::this_thread::sleep_for(cfg_.retry_backoff * (1 << attempt));
    }
    throw Error(ErrorCode::kBackendUnavailable, last_failure + " from " + url_.origin + " after " +
                                                    std::to_string(attempt) + " retries");
  }

  BackendKind kind() const override { return BackendKind::kRemote; }
  double temperature() const override { return cfg_.temperature; }
  int max_tokens() const override { return cfg_.max_tokens; }

 private:
  json request_body(const CompletionRequest& request) const {
    json stop = request.stop_sequences;
    switch (cfg_.api_style) {
      case ApiStyle::kChat: {
        json j = {{"model", cfg_.model_name},
                  {"messages", json::array({{{"role", "user"}, {"content", request.prompt}}})},
                  {"temperature", request.temperature},
                  {"max_tokens", request.max_tokens}};
        if (!request.stop_sequences.empty()) j["stop"] = stop;
        return j;
      }
      case ApiStyle::kCompletions: {
        json j = {{"model", cfg_.model_name},
                  {"prompt", request.prompt},
                  {"temperature", request.temperature},
                  {"max_tokens", request.max_tokens}};
        if (!request.stop_sequences.empty()) j["stop"] = stop;
        return j;
      }
      case ApiStyle::kOllama: {
        json options = {{"temperature", request.temperature},
                        {"num_predict", request.max_tokens}};
        if (!request.stop_sequences.empty()) options["stop"] = stop;
        return {{"model", cfg_.model_name},
                {"prompt", request.prompt},
                {"stream", false},
                {"options", options}};
      }
    }
    return {};
  }

  CompletionResponse parse_body(const std::string& body, const CompletionRequest& request) const {
    CompletionResponse out;
    std::string reason;
    try {
      const json j = json::parse(body);
      if (cfg_.api_style == ApiStyle::kOllama) {
        out.text = j.at("response").get<std::string>();
        reason = j.value("done_reason", "stop");
      } else {
        const json& choice = j.at("choices").at(0);
        if (cfg_.api_style == ApiStyle::kChat) {
          out.text = choice.at("message").at("content").get<std::string>();
        } else {
          out.text = choice.at("text").get<std::string>();
        }
        if (choice.contains("finish_reason") && choice["finish_reason"].is_string()) {
          reason = choice["finish_reason"].get<std::string>();
        }
      }
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kBackendUnavailable,
                  std::string("unexpected response body from ") + url_.origin + ": " + e.what());
    }
    if (truncate_at_stop(out.text, request.stop_sequences)) {
      out.finish_reason = FinishReason::kStopSequence;
    } else if (reason == "length") {
      out.finish_reason = FinishReason::kLength;
    } else {
      out.finish_reason = FinishReason::kEnd;
    }
    return out;
  }

  BackendConfig cfg_;
  ParsedUrl url_;
};

ApiStyle api_style_from(const std::string& s) {
  if (s == "chat") return ApiStyle::kChat;
  if (s == "completions") return ApiStyle::kCompletions;
  if (s == "ollama") return ApiStyle::kOllama;
  throw Error(ErrorCode::kConfigError, "unknown api_style '" + s + "'");
}

}  // namespace

std::shared_ptr<LlmBackend> make_backend(const BackendConfig& config) {
  if (config.kind == BackendKind::kScripted) return std::make_shared<ScriptedBackend>(config);
  return std::make_shared<RemoteBackend>(config);
}

CompletionResponse complete(const CompletionRequest& request, const BackendConfig& config) {
  return make_backend(config)->complete(request);
}

BackendConfig backend_from_json(const json& j) {
  try {
    for (const char* forbidden : {"api_key", "key", "token", "credential"}) {
      if (j.contains(forbidden)) {
        throw Error(ErrorCode::kConfigError,
                    std::string("backend config must not carry '") + forbidden +
                        "'; name an environment variable in credential_ref instead");
      }
    }
    const std::string kind = j.value("kind", "scripted");
    BackendConfig cfg;
    cfg.temperature = j.value("temperature", kDefaultTemperature);
    cfg.max_tokens = j.value("max_tokens", kDefaultMaxTokens);
    if (kind == "remote") {
      cfg.kind = BackendKind::kRemote;
      cfg.endpoint = j.at("endpoint").get<std::string>();
      cfg.api_style = api_style_from(j.value("api_style", "chat"));
      cfg.credential_ref = j.value("credential_ref", "");
      cfg.model_name = j.value("model_name", "");
      cfg.max_retries = j.value("max_retries", 2);
      cfg.retry_backoff = std::chrono::milliseconds(j.value("retry_backoff_ms", 250));
      cfg.timeout = std::chrono::seconds(j.value("timeout_s", 120));
      split_url(cfg.endpoint);
      return cfg;
    }
    if (kind != "scripted") throw Error(ErrorCode::kConfigError, "unknown backend kind '" + kind + "'");
    std::vector<ScriptEntry> entries;
    for (const auto& e : j.at("script")) {
      if (e.value("echo", false)) {
        entries.push_back(echo_any());
      } else if (e.contains("contains")) {
        entries.push_back(reply_if_contains(e["contains"].get<std::string>(),
                                            e.at("response").get<std::string>()));
      } else {
        entries.push_back(reply_any(e.at("response").get<std::string>()));
      }
    }
    if (entries.empty()) throw Error(ErrorCode::kConfigError, "scripted backend needs a script");
    BackendConfig scripted = scripted_backend(std::move(entries));
    scripted.temperature = cfg.temperature;
    scripted.max_tokens = cfg.max_tokens;
    return scripted;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfigError, std::string("backend config: ") + e.what());
  }
}

}  // namespace geolog

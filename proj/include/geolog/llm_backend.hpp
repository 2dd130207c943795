#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace geolog {

inline constexpr double kDefaultTemperature = 0.5;
inline constexpr int kDefaultMaxTokens = 1024;

struct CompletionRequest {
  std::string prompt;
  double temperature = kDefaultTemperature;
  int max_tokens = kDefaultMaxTokens;
  std::vector<std::string> stop_sequences;
};

enum class FinishReason { kStopSequence, kLength, kEnd };
std::string_view to_string(FinishReason reason);

struct CompletionResponse {
  std::string text;  // never contains the matched stop sequence
  FinishReason finish_reason = FinishReason::kEnd;
  std::chrono::milliseconds latency{0};
};

enum class BackendKind { kRemote, kScripted };
std::string_view to_string(BackendKind kind);

// Wire format spoken by the remote endpoint.
enum class ApiStyle {
  kChat,         // POST {model, messages, temperature, max_tokens, stop}
  kCompletions,  // POST {model, prompt, temperature, max_tokens, stop}
  kOllama,       // POST {model, prompt, stream:false, options:{...}}
};

struct ScriptEntry {
  std::function<bool(std::string_view prompt)> matches;
  std::function<std::string(std::string_view prompt)> respond;
  std::string label;  // shown in ScriptExhausted diagnostics
};

ScriptEntry reply_any(std::string response);
ScriptEntry reply_if_contains(std::string needle, std::string response);
// Responds with the prompt itself.
ScriptEntry echo_any();

// Cursor over a script. Shared between copies of a BackendConfig so that
// consumption persists across calls.
class ScriptState {
 public:
  explicit ScriptState(std::vector<ScriptEntry> entries);
  // Consumes and returns the first unconsumed entry matching the prompt.
  // Throws ScriptExhausted when none matches.
  std::string consume(std::string_view prompt);
  std::size_t remaining() const;

 private:
  mutable std::mutex mu_;
  std::vector<ScriptEntry> entries_;
  std::vector<bool> used_;
};

struct BackendConfig {
  BackendKind kind = BackendKind::kScripted;

  // remote
  std::string endpoint;        // full URL, e.g. http://127.0.0.1:11434/api/generate
  ApiStyle api_style = ApiStyle::kChat;
  std::string credential_ref;  // name of the env var holding the API key
  std::string model_name;
  int max_retries = 2;
  std::chrono::milliseconds retry_backoff{250};
  std::chrono::seconds timeout{120};

  // scripted
  std::shared_ptr<ScriptState> script;

  // Sampling defaults applied by callers that build requests.
  double temperature = kDefaultTemperature;
  int max_tokens = kDefaultMaxTokens;
};

BackendConfig scripted_backend(std::vector<ScriptEntry> script);

/// Builds a BackendConfig from its JSON form. Scripted entries take
/// {"contains": "...", "response": "..."} or {"echo": true}; an entry without
/// "contains" matches any prompt. Rejects configs carrying a literal key.
BackendConfig backend_from_json(const nlohmann::json& j);

class LlmBackend {
 public:
  virtual ~LlmBackend() = default;
  virtual CompletionResponse complete(const CompletionRequest& request) = 0;
  virtual BackendKind kind() const = 0;
  // Defaults used when building requests for this backend.
  virtual double temperature() const { return kDefaultTemperature; }
  virtual int max_tokens() const { return kDefaultMaxTokens; }
};

std::shared_ptr<LlmBackend> make_backend(const BackendConfig& config);

/// One-shot form of LlmBackend::complete. Scripted configs share their
/// cursor, so repeated calls walk the script.
CompletionResponse complete(const CompletionRequest& request, const BackendConfig& config);

/// Throws InvalidRequest when the request breaks its invariants.
void validate_request(const CompletionRequest& request);

/// Cuts text at the earliest occurrence of any stop sequence. Returns true
/// when a cut happened.
bool truncate_at_stop(std::string& text, const std::vector<std::string>& stops);

}  // namespace geolog

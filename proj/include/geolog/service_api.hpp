#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "geolog/llm_backend.hpp"
#include "geolog/sql_agent.hpp"
#include "json.hpp"

namespace httplib {
class Server;
}

namespace geolog {

struct ServiceConfig {
  std::string db_path;
  BackendConfig backend;
  AgentConfig agent;
  std::string bind_address = "127.0.0.1:8080";
  std::string exchange_log_path = "exchanges.jsonl";
  std::string transcript_log_path;  // optional audit log of agent runs
  std::string static_dir;           // optional chat UI bundle
};

/// Reads a JSON service config. Relative paths are resolved against the
/// directory holding the config file.
ServiceConfig load_service_config(const std::string& path);
ServiceConfig service_config_from_json(const nlohmann::json& j, const std::string& base_dir = "");

struct ChatExchange {
  std::string id;
  std::string question;
  std::string sql;
  std::string sql_result;
  std::string answer;
  std::string outcome;
  bool flagged = false;
  std::optional<std::string> flag_reason;
  std::string timestamp;  // ISO 8601, UTC

  bool operator==(const ChatExchange&) const = default;
};

/// Append-only JSON Lines store of exchanges and flag events. A single
/// mutex serializes writers.
class ExchangeLog {
 public:
  explicit ExchangeLog(std::string path);

  void append_exchange(const ChatExchange& exchange);
  void append_flag(const std::string& id, const std::optional<std::string>& reason,
                   const std::string& timestamp);

  /// Rebuilds every exchange by folding flag records into their exchange.
  static std::map<std::string, ChatExchange> replay(const std::string& path);
  const std::string& path() const noexcept { return path_; }

 private:
  void append_line(const std::string& line);
  std::string path_;
  std::mutex mu_;
};

struct AskResult {
  std::string id;
  std::string answer;
  std::string sql;
  std::string sql_result;
  std::string outcome;
};

struct HealthStatus {
  std::string status;  // "ok" or "degraded"
  bool db_ok = false;
  std::string backend_kind;
};

inline constexpr std::string_view kApologyAnswer =
    "Lo siento, no pude obtener una respuesta para tu pregunta sobre las tesis de Geología. "
    "Intenta reformularla con más detalle.";

/// Question-answering pipeline: agent run, answer composition, exchange
/// persistence and flagging. Safe for concurrent calls.
class Service {
 public:
  /// Throws ConfigError when the database file is missing or unreadable.
  explicit Service(ServiceConfig config);

  /// Throws EmptyQuestion or BackendUnavailable; nothing is persisted on error.
  AskResult handle_ask(const std::string& question);
  /// Throws UnknownExchange. Flagging an already flagged exchange is a no-op.
  void handle_flag(const std::string& id, const std::optional<std::string>& reason);
  HealthStatus handle_health() const;

  std::optional<ChatExchange> find(const std::string& id) const;
  const ServiceConfig& config() const noexcept { return config_; }

 private:
  std::string new_id();

  ServiceConfig config_;
  std::shared_ptr<LlmBackend> backend_;
  ExchangeLog log_;
  mutable std::mutex mu_;
  std::map<std::string, ChatExchange> exchanges_;
  std::mutex transcript_mu_;
};

/// HTTP front end:
///   POST /ask  {question}      -> {id, answer, sql, sql_result, outcome}
///   POST /flag {id, reason?}   -> {ok, id, flagged}
///   GET  /health               -> {status, db_ok, backend_kind}
/// plus static files from ServiceConfig::static_dir at "/".
class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds host:port (port 0 picks a free port) and serves on a background
  /// thread. Returns the bound port.
  int start(const std::string& host, int port);
  /// Blocks serving until stop() is called from another thread.
  void listen(const std::string& host, int port);
  void stop();

 private:
  Service& service_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

/// Splits "host:port"; throws ConfigError.
std::pair<std::string, int> split_bind_address(const std::string& address);

}  // namespace geolog

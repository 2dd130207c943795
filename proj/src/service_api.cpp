#include "geolog/service_api.hpp"

#include <ctime>
#include <filesystem>
#include <fstream>
#include <random>

#include "geolog/answer_composer.hpp"
#include "geolog/error.hpp"
#include "geolog/text.hpp"
#include "httplib.h"

namespace geolog {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  const auto ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[96];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(ms));
  return buf;
}

std::string resolve(const std::string& base_dir, const std::string& p) {
  if (p.empty() || base_dir.empty() || fs::path(p).is_absolute()) return p;
  return (fs::path(base_dir) / p).lexically_normal().string();
}

bool database_readable(const std::string& path) {
  if (!fs::exists(path)) return false;
  try {
    const Database db = Database::open(path, OpenMode::kReadOnly);
    db.query("SELECT count(*) FROM sqlite_master");
    return true;
  } catch (const Error&) {
    return false;
  }
}

json exchange_to_json(const ChatExchange& e) {
  return {{"type", "exchange"},   {"id", e.id},          {"question", e.question},
          {"sql", e.sql},         {"sql_result", e.sql_result}, {"answer", e.answer},
          {"outcome", e.outcome}, {"timestamp", e.timestamp}};
}

json error_body(ErrorCode code, const std::string& message) {
  return {{"error", to_string(code)}, {"message", message}};
}

constexpr const char* kJsonType = "application/json; charset=utf-8";

}  // namespace

ServiceConfig service_config_from_json(const json& j, const std::string& base_dir) {
  try {
    ServiceConfig cfg;
    cfg.db_path = resolve(base_dir, j.at("db_path").get<std::string>());
    cfg.backend = backend_from_json(j.at("backend"));
    if (j.contains("agent")) {
      const auto& a = j["agent"];
      cfg.agent.max_iterations = a.value("max_iterations", cfg.agent.max_iterations);
      cfg.agent.sample_rows = a.value("sample_rows", cfg.agent.sample_rows);
      cfg.agent.read_only = a.value("read_only", cfg.agent.read_only);
      if (cfg.agent.max_iterations < 1) {
        throw Error(ErrorCode::kConfigError, "agent.max_iterations must be >= 1");
      }
      if (cfg.agent.sample_rows < 0) {
        throw Error(ErrorCode::kConfigError, "agent.sample_rows must be >= 0");
      }
    }
    cfg.bind_address = j.value("bind_address", cfg.bind_address);
    cfg.exchange_log_path = resolve(base_dir, j.value("exchange_log_path", cfg.exchange_log_path));
    cfg.transcript_log_path = resolve(base_dir, j.value("transcript_log_path", ""));
    cfg.static_dir = resolve(base_dir, j.value("static_dir", ""));
    return cfg;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfigError, std::string("service config: ") + e.what());
  }
}

ServiceConfig load_service_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfigError, "cannot read config '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfigError, "config '" + path + "' is not valid JSON: " + e.what());
  }
  return service_config_from_json(j, fs::absolute(path).parent_path().string());
}

ExchangeLog::ExchangeLog(std::string path) : path_(std::move(path)) {}

void ExchangeLog::append_line(const std::string& line) {
  std::lock_guard lock(mu_);
  std::ofstream out(path_, std::ios::app | std::ios::binary);
  if (!out) throw Error(ErrorCode::kStorageError, "cannot append to '" + path_ + "'");
  out << line << '\n';
  out.flush();
  if (!out) throw Error(ErrorCode::kStorageError, "write to '" + path_ + "' failed");
}

void ExchangeLog::append_exchange(const ChatExchange& exchange) {
  append_line(exchange_to_json(exchange).dump());
}

void ExchangeLog::append_flag(const std::string& id, const std::optional<std::string>& reason,
                              const std::string& timestamp) {
  append_line(json{{"type", "flag"},
                   {"id", id},
                   {"reason", reason ? json(*reason) : json(nullptr)},
                   {"timestamp", timestamp}}
                  .dump());
}

std::map<std::string, ChatExchange> ExchangeLog::replay(const std::string& path) {
  std::map<std::string, ChatExchange> out;
  std::ifstream in(path, std::ios::binary);
  if (!in) return out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    try {
      const auto j = json::parse(line);
      const auto type = j.at("type").get<std::string>();
      const auto id = j.at("id").get<std::string>();
      if (type == "exchange") {
        ChatExchange e;
        e.id = id;
        e.question = j.at("question").get<std::string>();
        e.sql = j.at("sql").get<std::string>();
        e.sql_result = j.at("sql_result").get<std::string>();
        e.answer = j.at("answer").get<std::string>();
        e.outcome = j.value("outcome", "");
        e.timestamp = j.value("timestamp", "");
        out[id] = std::move(e);
      } else if (type == "flag") {
        auto it = out.find(id);
        if (it == out.end()) continue;
        it->second.flagged = true;
        if (!j.at("reason").is_null()) it->second.flag_reason = j["reason"].get<std::string>();
      }
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kStorageError,
                  path + ":" + std::to_string(lineno) + ": bad record: " + e.what());
    }
  }
  return out;
}

Service::Service(ServiceConfig config)
    : config_(std::move(config)),
      backend_(make_backend(config_.backend)),
      log_(config_.exchange_log_path) {
  if (!database_readable(config_.db_path)) {
    throw Error(ErrorCode::kConfigError,
                "thesis database '" + config_.db_path + "' is missing or unreadable");
  }
  for (const auto& log : {config_.exchange_log_path, config_.transcript_log_path}) {
    const auto parent = fs::path(log).parent_path();
    std::error_code ec;
    if (!log.empty() && !parent.empty()) fs::create_directories(parent, ec);
  }
  exchanges_ = ExchangeLog::replay(config_.exchange_log_path);
}

std::string Service::new_id() {
  static thread_local std::mt19937_64 rng{std::random_device{}()};
  std::uniform_int_distribution<std::uint64_t> dist;
  const std::uint64_t hi = dist(rng);
  const std::uint64_t lo = dist(rng);
  char buf[40];
  std::snprintf(buf, sizeof buf, "%08x-%04x-4%03x-%04x-%012llx",
                static_cast<unsigned>(hi >> 32), static_cast<unsigned>((hi >> 16) & 0xFFFF),
                static_cast<unsigned>(hi & 0x0FFF),
                static_cast<unsigned>(0x8000 | ((lo >> 48) & 0x3FFF)),
                static_cast<unsigned long long>(lo & 0xFFFFFFFFFFFFULL));
  return buf;
}

AskResult Service::handle_ask(const std::string& question) {
  const std::string q = text::trim_copy(question);
  if (q.empty()) throw Error(ErrorCode::kEmptyQuestion, "question must not be empty");

  const Database db = Database::open(config_.db_path, OpenMode::kReadOnly);
  const AgentTranscript transcript = run_agent(q, db, *backend_, config_.agent);

  if (!config_.transcript_log_path.empty()) {
    std::lock_guard lock(transcript_mu_);
    std::ofstream out(config_.transcript_log_path, std::ios::app | std::ios::binary);
    out << transcript_to_json_line(transcript) << '\n';
  }

  if (transcript.outcome == AgentOutcome::kBackendFailure) {
    throw Error(ErrorCode::kBackendUnavailable, transcript.failure_detail);
  }

  AskResult result;
  result.outcome = std::string(to_string(transcript.outcome));
  if (const AgentStep* query = transcript.last_successful_query()) {
    try {
      result.sql = extract_sql(query->action_input).text;
    } catch (const Error&) {
      result.sql = query->action_input;
    }
    result.sql_result = query->observation;
  }

  if (transcript.outcome == AgentOutcome::kAnswered) {
    if (result.sql.empty()) result.sql_result = *transcript.final_answer;
    const ChatAnswer answer = compose_answer(q, result.sql, result.sql_result, *backend_);
    result.answer = answer.answer;
  } else {
    result.answer = std::string(kApologyAnswer);
  }

  ChatExchange exchange;
  exchange.id = new_id();
  exchange.question = q;
  exchange.sql = result.sql;
  exchange.sql_result = result.sql_result;
  exchange.answer = result.answer;
  exchange.outcome = result.outcome;
  exchange.timestamp = utc_timestamp();
  result.id = exchange.id;

  std::lock_guard lock(mu_);
  log_.append_exchange(exchange);
  exchanges_[exchange.id] = std::move(exchange);
  return result;
}

void Service::handle_flag(const std::string& id, const std::optional<std::string>& reason) {
  std::lock_guard lock(mu_);
  auto it = exchanges_.find(id);
  if (it == exchanges_.end()) {
    throw Error(ErrorCode::kUnknownExchange, "no exchange with id '" + id + "'");
  }
  if (it->second.flagged) return;
  log_.append_flag(id, reason, utc_timestamp());
  it->second.flagged = true;
  it->second.flag_reason = reason;
}

HealthStatus Service::handle_health() const {
  HealthStatus h;
  h.db_ok = database_readable(config_.db_path);
  h.status = h.db_ok ? "ok" : "degraded";
  h.backend_kind = std::string(to_string(backend_->kind()));
  return h;
}

std::optional<ChatExchange> Service::find(const std::string& id) const {
  std::lock_guard lock(mu_);
  const auto it = exchanges_.find(id);
  if (it == exchanges_.end()) return std::nullopt;
  return it->second;
}

std::pair<std::string, int> split_bind_address(const std::string& address) {
  const auto colon = address.rfind(':');
  if (colon == std::string::npos || colon == 0) {
    throw Error(ErrorCode::kConfigError, "bind address must be host:port, got '" + address + "'");
  }
  try {
    std::size_t used = 0;
    const std::string port_text = address.substr(colon + 1);
    const int port = std::stoi(port_text, &used);
    if (used != port_text.size() || port < 0 || port > 65535) throw std::out_of_range("port");
    return {address.substr(0, colon), port};
  } catch (const std::exception&) {
    throw Error(ErrorCode::kConfigError, "invalid port in bind address '" + address + "'");
  }
}

HttpServer::HttpServer(Service& service)
    : service_(service), server_(std::make_unique<httplib::Server>()) {
  auto& srv = *server_;

  auto reply = [](httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), kJsonType);
  };

  srv.Post("/ask", [this, reply](const httplib::Request& req, httplib::Response& res) {
    json body;
    try {
      body = json::parse(req.body);
    } catch (const json::exception&) {
      reply(res, 400, error_body(ErrorCode::kInvalidRequest, "request body must be JSON"));
      return;
    }
    if (!body.is_object() || !body.contains("question") || !body["question"].is_string()) {
      reply(res, 400, error_body(ErrorCode::kEmptyQuestion, "field 'question' is required"));
      return;
    }
    try {
      const AskResult r = service_.handle_ask(body["question"].get<std::string>());
      reply(res, 200,
            {{"id", r.id},
             {"answer", r.answer},
             {"sql", r.sql},
             {"sql_result", r.sql_result},
             {"outcome", r.outcome}});
    } catch (const Error& e) {
      switch (e.code()) {
        case ErrorCode::kEmptyQuestion: reply(res, 400, error_body(e.code(), e.detail())); break;
        case ErrorCode::kBackendUnavailable:
        case ErrorCode::kScriptExhausted:
          reply(res, 502, error_body(ErrorCode::kBackendUnavailable, e.detail()));
          break;
        default: reply(res, 500, error_body(e.code(), e.detail())); break;
      }
    }
  });

  srv.Post("/flag", [this, reply](const httplib::Request& req, httplib::Response& res) {
    json body;
    try {
      body = json::parse(req.body);
    } catch (const json::exception&) {
      reply(res, 400, error_body(ErrorCode::kInvalidRequest, "request body must be JSON"));
      return;
    }
    if (!body.is_object() || !body.contains("id") || !body["id"].is_string()) {
      reply(res, 400, error_body(ErrorCode::kInvalidRequest, "field 'id' is required"));
      return;
    }
    std::optional<std::string> reason;
    if (body.contains("reason") && body["reason"].is_string()) {
      reason = body["reason"].get<std::string>();
    }
    const auto id = body["id"].get<std::string>();
    try {
      service_.handle_flag(id, reason);
      reply(res, 200, {{"ok", true}, {"id", id}, {"flagged", true}});
    } catch (const Error& e) {
      const int status = e.code() == ErrorCode::kUnknownExchange ? 404 : 500;
      reply(res, status, error_body(e.code(), e.detail()));
    }
  });

  srv.Get("/health", [this, reply](const httplib::Request&, httplib::Response& res) {
    const HealthStatus h = service_.handle_health();
    reply(res, 200, {{"status", h.status}, {"db_ok", h.db_ok}, {"backend_kind", h.backend_kind}});
  });

  const auto& static_dir = service_.config().static_dir;
  if (!static_dir.empty() && fs::is_directory(static_dir)) srv.set_mount_point("/", static_dir);
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = server_->bind_to_any_port(host);
  } else if (!server_->bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) {
    throw Error(ErrorCode::kConfigError,
                "cannot bind " + host + ":" + std::to_string(port));
  }
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return bound;
}

void HttpServer::listen(const std::string& host, int port) {
  if (!server_->listen(host, port)) {
    throw Error(ErrorCode::kConfigError, "cannot listen on " + host + ":" + std::to_string(port));
  }
}

void HttpServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace geolog

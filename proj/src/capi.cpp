#include "geolog/geolog.h"

#include <atomic>
#include <csignal>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>

#include "geolog/corpus_ingest.hpp"
#include "geolog/error.hpp"
#include "geolog/eval_bleu.hpp"
#include "geolog/service_api.hpp"

struct geolog_service {
  std::unique_ptr<geolog::Service> impl;
};

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
  auto* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out != nullptr) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

geolog_status fail(geolog_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

// Runs fn, translating exceptions into status codes.
template <typename Fn>
geolog_status guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    fn();
    return GEOLOG_OK;
  } catch (const geolog::Error& e) {
    return fail(static_cast<geolog_status>(static_cast<int>(e.code())), e.what());
  } catch (const std::exception& e) {
    return fail(GEOLOG_INTERNAL, e.what());
  } catch (...) {
    return fail(GEOLOG_INTERNAL, "unknown error");
  }
}

std::atomic<geolog::HttpServer*> g_serving{nullptr};

extern "C" void on_signal(int) {
  if (auto* server = g_serving.load()) server->stop();
}

}  // namespace

extern "C" {

const char* geolog_last_error(void) { return g_last_error.c_str(); }

const char* geolog_status_name(geolog_status status) {
  switch (status) {
    case GEOLOG_OK: return "OK";
    case GEOLOG_INVALID_ARGUMENT: return "InvalidArgument";
    case GEOLOG_INTERNAL: return "Internal";
    default: break;
  }
  static thread_local std::string name;
  name = std::string(geolog::to_string(static_cast<geolog::ErrorCode>(status)));
  return name.c_str();
}

void geolog_string_free(char* s) { std::free(s); }

geolog_status geolog_ingest(const char* csv_path, const char* db_path, int replace,
                            char** report_json) {
  if (csv_path == nullptr || db_path == nullptr) {
    return fail(GEOLOG_INVALID_ARGUMENT, "csv_path and db_path are required");
  }
  return guarded([&] {
    const auto report = geolog::ingest_csv_file(csv_path, db_path, replace != 0);
    if (report_json == nullptr) return;
    nlohmann::json rejected = nlohmann::json::array();
    for (const auto& r : report.rejected) {
      rejected.push_back(
          {{"row", r.row}, {"reason", geolog::to_string(r.reason)}, {"message", r.message}});
    }
    *report_json = dup_string(nlohmann::json{{"records_read", report.records_read},
                                             {"records_loaded", report.records_loaded},
                                             {"table_name", report.table_name},
                                             {"rejected", rejected}}
                                  .dump());
  });
}

geolog_status geolog_eval(const char* cases_path, double threshold, char** report_json,
                          char** report_text) {
  if (cases_path == nullptr) return fail(GEOLOG_INVALID_ARGUMENT, "cases_path is required");
  return guarded([&] {
    const auto report = geolog::evaluate_corpus(geolog::load_eval_cases(cases_path), threshold);
    if (report_json != nullptr) *report_json = dup_string(geolog::report_to_json(report).dump(2));
    if (report_text != nullptr) *report_text = dup_string(geolog::format_report_table(report));
  });
}

geolog_status geolog_service_open(const char* config_path, const char* db_path,
                                  geolog_service** out) {
  if (config_path == nullptr || out == nullptr) {
    return fail(GEOLOG_INVALID_ARGUMENT, "config_path and out are required");
  }
  *out = nullptr;
  return guarded([&] {
    auto cfg = geolog::load_service_config(config_path);
    if (db_path != nullptr) cfg.db_path = db_path;
    auto handle = std::make_unique<geolog_service>();
    handle->impl = std::make_unique<geolog::Service>(std::move(cfg));
    *out = handle.release();
  });
}

geolog_status geolog_service_open_json(const char* config_json, geolog_service** out) {
  if (config_json == nullptr || out == nullptr) {
    return fail(GEOLOG_INVALID_ARGUMENT, "config_json and out are required");
  }
  *out = nullptr;
  return guarded([&] {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(config_json);
    } catch (const nlohmann::json::exception& e) {
      throw geolog::Error(geolog::ErrorCode::kConfigError, e.what());
    }
    auto handle = std::make_unique<geolog_service>();
    handle->impl = std::make_unique<geolog::Service>(geolog::service_config_from_json(j));
    *out = handle.release();
  });
}

void geolog_service_close(geolog_service* service) { delete service; }

geolog_status geolog_service_ask(geolog_service* service, const char* question,
                                 char** response_json) {
  if (service == nullptr || question == nullptr || response_json == nullptr) {
    return fail(GEOLOG_INVALID_ARGUMENT, "service, question and response_json are required");
  }
  *response_json = nullptr;
  return guarded([&] {
    const auto r = service->impl->handle_ask(question);
    *response_json = dup_string(nlohmann::json{{"id", r.id},
                                               {"answer", r.answer},
                                               {"sql", r.sql},
                                               {"sql_result", r.sql_result},
                                               {"outcome", r.outcome}}
                                    .dump());
  });
}

geolog_status geolog_service_flag(geolog_service* service, const char* exchange_id,
                                  const char* reason) {
  if (service == nullptr || exchange_id == nullptr) {
    return fail(GEOLOG_INVALID_ARGUMENT, "service and exchange_id are required");
  }
  return guarded([&] {
    service->impl->handle_flag(exchange_id, reason != nullptr
                                                ? std::optional<std::string>(reason)
                                                : std::nullopt);
  });
}

geolog_status geolog_service_health(geolog_service* service, char** health_json) {
  if (service == nullptr || health_json == nullptr) {
    return fail(GEOLOG_INVALID_ARGUMENT, "service and health_json are required");
  }
  return guarded([&] {
    const auto h = service->impl->handle_health();
    *health_json = dup_string(
        nlohmann::json{{"status", h.status}, {"db_ok", h.db_ok}, {"backend_kind", h.backend_kind}}
            .dump());
  });
}

geolog_status geolog_service_serve(geolog_service* service, const char* bind_address) {
  if (service == nullptr) return fail(GEOLOG_INVALID_ARGUMENT, "service is required");
  return guarded([&] {
    const std::string address =
        bind_address != nullptr ? bind_address : service->impl->config().bind_address;
    const auto [host, port] = geolog::split_bind_address(address);
    geolog::HttpServer server(*service->impl);
    g_serving.store(&server);
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    try {
      server.listen(host, port);
    } catch (...) {
      g_serving.store(nullptr);
      throw;
    }
    g_serving.store(nullptr);
  });
}

}  // extern "C"

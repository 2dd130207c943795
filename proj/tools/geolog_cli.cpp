// Command-line front end over the geolog C API.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "geolog/geolog.h"
#include "json.hpp"

namespace {

constexpr int kUsageError = 2;

int report_failure(const char* what, geolog_status status) {
  std::cerr << "geolog " << what << ": " << geolog_status_name(status) << ": "
            << geolog_last_error() << "\n";
  return 1;
}

struct OwnedString {
  char* ptr = nullptr;
  ~OwnedString() { geolog_string_free(ptr); }
  std::string str() const { return ptr != nullptr ? ptr : ""; }
};

struct ServiceHandle {
  geolog_service* ptr = nullptr;
  ~ServiceHandle() { geolog_service_close(ptr); }
};

int run_ingest(const std::string& csv, const std::string& db, bool replace) {
  OwnedString report;
  const auto st = geolog_ingest(csv.c_str(), db.c_str(), replace ? 1 : 0, &report.ptr);
  if (st != GEOLOG_OK) return report_failure("ingest", st);
  const auto j = nlohmann::json::parse(report.str());
  std::cout << "table " << j["table_name"].get<std::string>() << ": loaded "
            << j["records_loaded"] << " of " << j["records_read"] << " records\n";
  for (const auto& r : j["rejected"]) {
    std::cout << "  row " << r["row"] << " rejected: " << r["reason"].get<std::string>() << " ("
              << r["message"].get<std::string>() << ")\n";
  }
  return 0;
}

int run_ask(const std::string& config, const std::string& db, const std::string& question) {
  ServiceHandle service;
  auto st = geolog_service_open(config.c_str(), db.empty() ? nullptr : db.c_str(), &service.ptr);
  if (st != GEOLOG_OK) return report_failure("ask", st);
  OwnedString response;
  st = geolog_service_ask(service.ptr, question.c_str(), &response.ptr);
  if (st != GEOLOG_OK) return report_failure("ask", st);
  const auto j = nlohmann::json::parse(response.str());
  std::cout << "Pregunta: " << question << "\n"
            << "Respuesta Generada: " << j["answer"].get<std::string>() << "\n"
            << "SQL: " << j["sql"].get<std::string>() << "\n"
            << "Resultado SQL: " << j["sql_result"].get<std::string>() << "\n"
            << "Exchange: " << j["id"].get<std::string>() << "\n";
  if (j["outcome"] != "answered") {
    std::cerr << "geolog ask: agent stopped with outcome " << j["outcome"].get<std::string>()
              << "\n";
    return 1;
  }
  return 0;
}

int run_serve(const std::string& config, const std::string& bind) {
  ServiceHandle service;
  auto st = geolog_service_open(config.c_str(), nullptr, &service.ptr);
  if (st != GEOLOG_OK) return report_failure("serve", st);
  std::cerr << "geolog: serving" << (bind.empty() ? "" : " on " + bind) << "\n";
  st = geolog_service_serve(service.ptr, bind.empty() ? nullptr : bind.c_str());
  if (st != GEOLOG_OK) return report_failure("serve", st);
  return 0;
}

int run_eval(const std::string& cases, const std::string& report_path, double threshold) {
  OwnedString json_report;
  OwnedString text_report;
  const auto st = geolog_eval(cases.c_str(), threshold, &json_report.ptr, &text_report.ptr);
  if (st != GEOLOG_OK) return report_failure("eval", st);
  std::cout << text_report.str();
  if (!report_path.empty()) {
    std::ofstream out(report_path);
    if (!out) {
      std::cerr << "geolog eval: cannot write '" << report_path << "'\n";
      return 1;
    }
    out << json_report.str() << "\n";
  }
  return nlohmann::json::parse(json_report.str())["pass"].get<bool>() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"geolog: natural-language questions over a thesis database"};
  app.require_subcommand(1);

  std::string csv_path, db_path, config_path, question, bind, cases_path, report_path;
  bool replace = false;
  double threshold = 0.7;

  auto* ingest = app.add_subcommand("ingest", "Build the SQLite thesis database from a CSV file");
  ingest->add_option("--csv", csv_path, "Thesis CSV (16 columns, UTF-8)")->required();
  ingest->add_option("--db", db_path, "Output database file")->required();
  ingest->add_flag("--replace", replace, "Overwrite an existing database");

  auto* ask = app.add_subcommand("ask", "Answer one question and print answer, SQL and result");
  ask->add_option("--question,-q", question, "Question in natural language")->required();
  ask->add_option("--config", config_path, "Service config (JSON)")
      ->envname("GEOLOG_CONFIG")
      ->required();
  ask->add_option("--db", db_path, "Override the configured database");

  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--config", config_path, "Service config (JSON)")
      ->envname("GEOLOG_CONFIG")
      ->required();
  serve->add_option("--bind", bind, "host:port, overrides the config");

  auto* eval = app.add_subcommand("eval", "Score an evaluation corpus with the adapted BLEU");
  eval->add_option("--cases", cases_path, "Cases file (.csv or .jsonl)")->required();
  eval->add_option("--report", report_path, "Write the JSON report here");
  eval->add_option("--threshold", threshold, "Pass gate (mean must exceed it)")
      ->check(CLI::Range(0.0, 1.0));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return kUsageError;
  }

  if (*ingest) return run_ingest(csv_path, db_path, replace);
  if (*ask) return run_ask(config_path, db_path, question);
  if (*serve) return run_serve(config_path, bind);
  if (*eval) return run_eval(cases_path, report_path, threshold);
  std::cerr << app.help();
  return kUsageError;
}

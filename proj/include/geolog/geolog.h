/*
 * C interface to the geolog thesis question-answering library.
 *
 * Structured results cross the boundary as UTF-8 JSON strings allocated by
 * the library; release them with geolog_string_free. Functions return a
 * geolog_status; on failure geolog_last_error() describes the problem for
 * the calling thread.
 */
#ifndef GEOLOG_GEOLOG_H_
#define GEOLOG_GEOLOG_H_

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define GEOLOG_API __declspec(dllexport)
#else
#define GEOLOG_API __attribute__((visibility("default")))
#endif

typedef enum geolog_status {
  GEOLOG_OK = 0,
  GEOLOG_INVALID_ARGUMENT = 1,
  GEOLOG_INTERNAL = 2,
  GEOLOG_HEADER_MISMATCH = 10,
  GEOLOG_MALFORMED_ROW = 11,
  GEOLOG_INVALID_ENCODING = 12,
  GEOLOG_BAD_NUMERIC = 13,
  GEOLOG_MISSING_ID = 14,
  GEOLOG_DUPLICATE_ID = 15,
  GEOLOG_STORAGE_ERROR = 16,
  GEOLOG_DB_ERROR = 20,
  GEOLOG_UNKNOWN_TABLE = 21,
  GEOLOG_READ_ONLY_VIOLATION = 22,
  GEOLOG_NO_SQL_FOUND = 23,
  GEOLOG_STEP_PARSE_ERROR = 24,
  GEOLOG_BACKEND_UNAVAILABLE = 30,
  GEOLOG_SCRIPT_EXHAUSTED = 31,
  GEOLOG_INVALID_REQUEST = 32,
  GEOLOG_EMPTY_INPUT = 40,
  GEOLOG_EMPTY_CORPUS = 41,
  GEOLOG_EMPTY_QUESTION = 50,
  GEOLOG_UNKNOWN_EXCHANGE = 51,
  GEOLOG_CONFIG_ERROR = 52
} geolog_status;

typedef struct geolog_service geolog_service;

/* Message for the last failed call on this thread; never NULL. */
GEOLOG_API const char* geolog_last_error(void);
GEOLOG_API const char* geolog_status_name(geolog_status status);
GEOLOG_API void geolog_string_free(char* s);

/* Builds the thesis database from a CSV file. On success *report_json holds
 * {records_read, records_loaded, table_name, rejected:[{row, reason, message}]}. */
GEOLOG_API geolog_status geolog_ingest(const char* csv_path, const char* db_path, int replace,
                                       char** report_json);

/* Scores an eval corpus (.csv or JSON Lines). *report_json holds the report
 * {cases, mean, threshold, pass, chart}; *report_text a printable table.
 * Either output pointer may be NULL. */
GEOLOG_API geolog_status geolog_eval(const char* cases_path, double threshold,
                                     char** report_json, char** report_text);

/* Service lifecycle. config_path names a JSON service config. When db_path is
 * not NULL it overrides the configured database. */
GEOLOG_API geolog_status geolog_service_open(const char* config_path, const char* db_path,
                                             geolog_service** out);
GEOLOG_API geolog_status geolog_service_open_json(const char* config_json,
                                                  geolog_service** out);
GEOLOG_API void geolog_service_close(geolog_service* service);

/* *response_json: {id, answer, sql, sql_result, outcome}. */
GEOLOG_API geolog_status geolog_service_ask(geolog_service* service, const char* question,
                                            char** response_json);
/* reason may be NULL. */
GEOLOG_API geolog_status geolog_service_flag(geolog_service* service, const char* exchange_id,
                                             const char* reason);
/* *health_json: {status, db_ok, backend_kind}. */
GEOLOG_API geolog_status geolog_service_health(geolog_service* service, char** health_json);

/* Serves HTTP until the process is interrupted. bind_address "host:port";
 * NULL uses the configured address. */
GEOLOG_API geolog_status geolog_service_serve(geolog_service* service, const char* bind_address);

#ifdef __cplusplus
}
#endif

#endif  // GEOLOG_GEOLOG_H_

#include "geolog/sqlite_db.hpp"

#include <sqlite3.h>

#include "geolog/error.hpp"

namespace geolog {

void Database::Deleter::operator()(sqlite3* db) const noexcept {
  if (db != nullptr) sqlite3_close_v2(db);
}

void Statement::Deleter::operator()(sqlite3_stmt* stmt) const noexcept {
  if (stmt != nullptr) sqlite3_finalize(stmt);
}

Database Database::open(const std::string& path, OpenMode mode) {
  int flags = SQLITE_OPEN_FULLMUTEX;
  flags |= mode == OpenMode::kReadOnly ? SQLITE_OPEN_READONLY
                                       : (SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE);
  sqlite3* handle = nullptr;
  const int rc = sqlite3_open_v2(path.c_str(), &handle, flags, nullptr);
  Database db;
  db.db_.reset(handle);
  db.path_ = path;
  if (rc != SQLITE_OK) {
    const std::string msg = handle != nullptr ? sqlite3_errmsg(handle) : sqlite3_errstr(rc);
    throw Error(ErrorCode::kDbError, "cannot open '" + path + "': " + msg);
  }
  sqlite3_busy_timeout(handle, 2000);
  return db;
}

sqlite3* Database::raw() const {
  if (!db_) throw Error(ErrorCode::kDbError, "database handle is closed");
  return db_.get();
}

void Database::exec(const std::string& sql) {
  char* err = nullptr;
  if (sqlite3_exec(raw(), sql.c_str(), nullptr, nullptr, &err) != SQLITE_OK) {
    std::string msg = err != nullptr ? err : "unknown error";
    sqlite3_free(err);
    throw Error(ErrorCode::kDbError, msg);
  }
}

QueryResult Database::query(const std::string& sql) const {
  Statement stmt(*this, sql);
  QueryResult out;
  sqlite3_stmt* s = stmt.get();
  if (s == nullptr) return out;
  const int ncol = sqlite3_column_count(s);
  for (int c = 0; c < ncol; ++c) out.columns.emplace_back(sqlite3_column_name(s, c));
  for (;;) {
    const int rc = sqlite3_step(s);
    if (rc == SQLITE_DONE) break;
    if (rc != SQLITE_ROW) throw Error(ErrorCode::kDbError, sqlite3_errmsg(raw()));
    Row row;
    row.reserve(static_cast<std::size_t>(ncol));
    for (int c = 0; c < ncol; ++c) {
      if (sqlite3_column_type(s, c) == SQLITE_NULL) {
        row.emplace_back(std::nullopt);
      } else {
        const auto* txt = reinterpret_cast<const char*>(sqlite3_column_text(s, c));
        const int len = sqlite3_column_bytes(s, c);
        row.emplace_back(std::string(txt, static_cast<std::size_t>(len)));
      }
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

Statement::Statement(const Database& db, const std::string& sql) {
  sqlite3_stmt* raw_stmt = nullptr;
  if (sqlite3_prepare_v2(db.raw(), sql.c_str(), static_cast<int>(sql.size()), &raw_stmt,
                         nullptr) != SQLITE_OK) {
    throw Error(ErrorCode::kDbError, sqlite3_errmsg(db.raw()));
  }
  stmt_.reset(raw_stmt);
}

}  // namespace geolog

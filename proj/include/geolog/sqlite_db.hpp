#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

struct sqlite3;
struct sqlite3_stmt;

namespace geolog {

// A cell read back from SQLite. nullopt is SQL NULL; every other value is the
// text rendering SQLite produces for the column.
using Cell = std::optional<std::string>;
using Row = std::vector<Cell>;

struct QueryResult {
  std::vector<std::string> columns;
  std::vector<Row> rows;
};

enum class OpenMode { kReadOnly, kReadWriteCreate };

// RAII owner of one SQLite connection. Opened with the serialized threading
// mode so a single read-only handle can be shared between agent runs.
class Database {
 public:
  Database() = default;
  static Database open(const std::string& path, OpenMode mode);

  bool is_open() const noexcept { return static_cast<bool>(db_); }
  void close() noexcept { db_.reset(); }
  const std::string& path() const noexcept { return path_; }

  // Runs one or more statements that return no rows. Throws DbError.
  void exec(const std::string& sql);

  // Runs a single statement and collects every row. Throws DbError with
  // SQLite's message on failure.
  QueryResult query(const std::string& sql) const;

  sqlite3* raw() const;

 private:
  struct Deleter {
    void operator()(sqlite3* db) const noexcept;
  };
  std::unique_ptr<sqlite3, Deleter> db_;
  std::string path_;
};

// Prepared statement guard.
class Statement {
 public:
  Statement(const Database& db, const std::string& sql);
  sqlite3_stmt* get() const noexcept { return stmt_.get(); }

 private:
  struct Deleter {
    void operator()(sqlite3_stmt* stmt) const noexcept;
  };
  std::unique_ptr<sqlite3_stmt, Deleter> stmt_;
};

}  // namespace geolog

#include "geolog/corpus_ingest.hpp"

#include <sqlite3.h>
#include <unistd.h>

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "geolog/csv.hpp"
#include "geolog/sqlite_db.hpp"
#include "geolog/text.hpp"

namespace geolog {

namespace fs = std::filesystem;

namespace {

constexpr const char* kCreateTable = R"(CREATE TABLE tesis (
  id TEXT PRIMARY KEY NOT NULL,
  titulo TEXT NOT NULL,
  autor TEXT NOT NULL,
  tutor TEXT NOT NULL,
  tematica TEXT NOT NULL,
  graduate_title TEXT NOT NULL,
  thesis_level TEXT NOT NULL,
  carrera TEXT NOT NULL,
  year_approval INTEGER,
  month_approval INTEGER,
  number_pages INTEGER,
  resumen TEXT NOT NULL,
  keywords TEXT NOT NULL,
  citation TEXT NOT NULL,
  location TEXT NOT NULL,
  url TEXT NOT NULL
))";

std::optional<std::string> canonical_column(std::string_view header) {
  std::string folded = text::fold_ascii(text::trim(header));
  if (folded == "abstract") return std::string("resumen");
  for (const auto col : kThesisColumns) {
    if (folded == col) return folded;
  }
  return std::nullopt;
}

std::optional<int> parse_int_field(const std::string& column, std::string_view raw) {
  const auto value = text::trim(raw);
  if (value.empty() || value == kAbsent) return std::nullopt;
  int out = 0;
  const auto* first = value.data();
  const auto* last = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc{} || ptr != last) {
    throw Error(ErrorCode::kBadNumeric,
                column + ": '" + std::string(value) + "' is not an integer");
  }
  return out;
}

std::string text_field(const RawRow& row, std::string_view column) {
  const auto it = row.find(std::string(column));
  if (it == row.end()) {
    throw Error(ErrorCode::kHeaderMismatch, "missing column '" + std::string(column) + "'");
  }
  std::string value = text::trim_copy(it->second);
  return value.empty() ? std::string(kAbsent) : value;
}

void validate(const ThesisRecord& r) {
  if (r.id.empty() || r.id == kAbsent) throw Error(ErrorCode::kMissingId, "record has no id");
  if (r.year_approval && (*r.year_approval < 1900 || *r.year_approval > 2100)) {
    throw Error(ErrorCode::kBadNumeric,
                "year_approval " + std::to_string(*r.year_approval) + " outside [1900, 2100]");
  }
  if (r.month_approval && (*r.month_approval < 1 || *r.month_approval > 12)) {
    throw Error(ErrorCode::kBadNumeric,
                "month_approval " + std::to_string(*r.month_approval) + " outside [1, 12]");
  }
  if (r.number_pages && *r.number_pages <= 0) {
    throw Error(ErrorCode::kBadNumeric, "number_pages must be positive");
  }
}

std::string or_absent(const std::string& s) { return s.empty() ? std::string(kAbsent) : s; }

void bind_text(sqlite3_stmt* stmt, int idx, const std::string& value) {
  const std::string v = or_absent(value);
  sqlite3_bind_text(stmt, idx, v.data(), static_cast<int>(v.size()), SQLITE_TRANSIENT);
}

void bind_int(sqlite3_stmt* stmt, int idx, const std::optional<int>& value) {
  if (value) {
    sqlite3_bind_int(stmt, idx, *value);
  } else {
    sqlite3_bind_null(stmt, idx);
  }
}

IngestReport build_rows(const std::vector<std::pair<std::size_t, ThesisRecord>>& records,
                        const std::string& target) {
  IngestReport report;
  report.records_read = records.size();

  const fs::path final_path(target);
  fs::path tmp_path = final_path;
  tmp_path += ".tmp-" + std::to_string(::getpid());
  std::error_code ec;
  fs::remove(tmp_path, ec);

  try {
    Database db = Database::open(tmp_path.string(), OpenMode::kReadWriteCreate);
    db.exec(kCreateTable);
    db.exec("BEGIN");
    Statement insert(db,
                     "INSERT INTO tesis VALUES (?,?,?,?,?,?,?,?,?,?,?,?,?,?,?,?)");
    sqlite3_stmt* stmt = insert.get();
    std::unordered_set<std::string> seen;
    for (const auto& [row, rec] : records) {
      try {
        validate(rec);
      } catch (const Error& e) {
        report.rejected.push_back({row, e.code(), e.detail()});
        continue;
      }
      if (!seen.insert(rec.id).second) {
        report.rejected.push_back(
            {row, ErrorCode::kDuplicateId, "id '" + rec.id + "' already loaded"});
        continue;
      }
      sqlite3_reset(stmt);
      sqlite3_clear_bindings(stmt);
      bind_text(stmt, 1, rec.id);
      bind_text(stmt, 2, rec.titulo);
      bind_text(stmt, 3, rec.autor);
      bind_text(stmt, 4, rec.tutor);
      bind_text(stmt, 5, rec.tematica);
      bind_text(stmt, 6, rec.graduate_title);
      bind_text(stmt, 7, rec.thesis_level);
      bind_text(stmt, 8, rec.carrera);
      bind_int(stmt, 9, rec.year_approval);
      bind_int(stmt, 10, rec.month_approval);
      bind_int(stmt, 11, rec.number_pages);
      bind_text(stmt, 12, rec.resumen);
      bind_text(stmt, 13, rec.keywords);
      bind_text(stmt, 14, rec.citation);
      bind_text(stmt, 15, rec.location);
      bind_text(stmt, 16, rec.url);
      if (sqlite3_step(stmt) != SQLITE_DONE) {
        throw Error(ErrorCode::kStorageError, sqlite3_errmsg(db.raw()));
      }
      ++report.records_loaded;
    }
    db.exec("COMMIT");
  } catch (const Error& e) {
    fs::remove(tmp_path, ec);
    if (e.code() == ErrorCode::kStorageError) throw;
    throw Error(ErrorCode::kStorageError, "cannot write '" + target + "': " + e.detail());
  }

  fs::rename(tmp_path, final_path, ec);
  if (ec) {
    fs::remove(tmp_path, ec);
    throw Error(ErrorCode::kStorageError, "cannot replace '" + target + "'");
  }
  return report;
}

}  // namespace

bool is_numeric_column(std::string_view column) {
  return column == "year_approval" || column == "month_approval" || column == "number_pages";
}

ParsedCsv parse_thesis_csv(std::string_view input) {
  const auto records = csv::read(input);
  if (records.empty()) throw Error(ErrorCode::kHeaderMismatch, "missing header row");

  const auto& header = records.front().fields;
  std::vector<std::string> columns;
  std::set<std::string> present;
  for (const auto& name : header) {
    auto canonical = canonical_column(name);
    if (!canonical) {
      throw Error(ErrorCode::kHeaderMismatch, "unknown column '" + name + "'");
    }
    if (!present.insert(*canonical).second) {
      throw Error(ErrorCode::kHeaderMismatch, "duplicate column '" + *canonical + "'");
    }
    columns.push_back(*canonical);
  }
  if (columns.size() != kThesisColumns.size()) {
    std::string missing;
    for (const auto col : kThesisColumns) {
      if (!present.contains(std::string(col))) {
        missing += missing.empty() ? "" : ", ";
        missing += col;
      }
    }
    throw Error(ErrorCode::kHeaderMismatch, "expected 16 columns, got " +
                                                std::to_string(columns.size()) +
                                                " (missing: " + missing + ")");
  }

  ParsedCsv out;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& fields = records[r].fields;
    const std::size_t data_row = r;
    ++out.data_rows;
    if (fields.size() != columns.size()) {
      out.bad_rows.push_back({data_row, ErrorCode::kMalformedRow,
                              "expected 16 fields, got " + std::to_string(fields.size()) +
                                  " (line " + std::to_string(records[r].line) + ")"});
      continue;
    }
    RawRow row;
    for (std::size_t c = 0; c < columns.size(); ++c) row[columns[c]] = fields[c];
    out.rows.emplace_back(data_row, std::move(row));
  }
  return out;
}

ThesisRecord normalize_record(const RawRow& row) {
  for (const auto col : kThesisColumns) {
    if (!row.contains(std::string(col))) {
      throw Error(ErrorCode::kHeaderMismatch, "missing column '" + std::string(col) + "'");
    }
  }
  ThesisRecord r;
  r.id = text_field(row, "id");
  r.titulo = text_field(row, "titulo");
  r.autor = text_field(row, "autor");
  r.tutor = text_field(row, "tutor");
  r.tematica = text_field(row, "tematica");
  r.graduate_title = text_field(row, "graduate_title");
  r.thesis_level = text_field(row, "thesis_level");
  r.carrera = text_field(row, "carrera");
  r.year_approval = parse_int_field("year_approval", row.at("year_approval"));
  r.month_approval = parse_int_field("month_approval", row.at("month_approval"));
  r.number_pages = parse_int_field("number_pages", row.at("number_pages"));
  r.resumen = text_field(row, "resumen");
  r.keywords = text_field(row, "keywords");
  r.citation = text_field(row, "citation");
  r.location = text_field(row, "location");
  r.url = text_field(row, "url");
  validate(r);
  return r;
}

IngestReport build_database(const std::vector<ThesisRecord>& records, const std::string& target) {
  std::vector<std::pair<std::size_t, ThesisRecord>> numbered;
  numbered.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) numbered.emplace_back(i + 1, records[i]);
  return build_rows(numbered, target);
}

IngestReport ingest_csv_file(const std::string& csv_path, const std::string& db_path,
                             bool replace) {
  std::ifstream in(csv_path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kStorageError, "cannot read '" + csv_path + "'");
  std::stringstream buf;
  buf << in.rdbuf();

  if (!replace && fs::exists(db_path)) {
    throw Error(ErrorCode::kStorageError,
                "'" + db_path + "' already exists (pass --replace to overwrite)");
  }

  const ParsedCsv parsed = parse_thesis_csv(buf.str());
  std::vector<Rejection> rejected = parsed.bad_rows;
  std::vector<std::pair<std::size_t, ThesisRecord>> valid;
  for (const auto& [row, raw] : parsed.rows) {
    try {
      valid.emplace_back(row, normalize_record(raw));
    } catch (const Error& e) {
      rejected.push_back({row, e.code(), e.detail()});
    }
  }

  IngestReport report = build_rows(valid, db_path);
  report.records_read = parsed.data_rows;
  rejected.insert(rejected.end(), report.rejected.begin(), report.rejected.end());
  std::sort(rejected.begin(), rejected.end(),
            [](const Rejection& a, const Rejection& b) { return a.row < b.row; });
  report.rejected = std::move(rejected);
  return report;
}

std::vector<ThesisRecord> read_all_records(const std::string& db_path) {
  const Database db = Database::open(db_path, OpenMode::kReadOnly);
  const auto result = db.query(
      "SELECT id, titulo, autor, tutor, tematica, graduate_title, thesis_level, carrera, "
      "year_approval, month_approval, number_pages, resumen, keywords, citation, location, url "
      "FROM tesis ORDER BY rowid");
  auto text_of = [](const Cell& c) { return c.value_or(std::string(kAbsent)); };
  auto int_of = [](const Cell& c) -> std::optional<int> {
    if (!c) return std::nullopt;
    return std::stoi(*c);
  };
  std::vector<ThesisRecord> out;
  out.reserve(result.rows.size());
  for (const auto& row : result.rows) {
    ThesisRecord r;
    r.id = text_of(row[0]);
    r.titulo = text_of(row[1]);
    r.autor = text_of(row[2]);
    r.tutor = text_of(row[3]);
    r.tematica = text_of(row[4]);
    r.graduate_title = text_of(row[5]);
    r.thesis_level = text_of(row[6]);
    r.carrera = text_of(row[7]);
    r.year_approval = int_of(row[8]);
    r.month_approval = int_of(row[9]);
    r.number_pages = int_of(row[10]);
    r.resumen = text_of(row[11]);
    r.keywords = text_of(row[12]);
    r.citation = text_of(row[13]);
    r.location = text_of(row[14]);
    r.url = text_of(row[15]);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace geolog

#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "geolog/error.hpp"

namespace geolog {

inline constexpr std::string_view kThesisTable = "tesis";
inline constexpr std::string_view kAbsent = "-";

// Column order of the thesis CSV and of the `tesis` table.
inline constexpr std::array<std::string_view, 16> kThesisColumns = {
    "id",         "titulo",         "autor",        "tutor",         "tematica",
    "graduate_title", "thesis_level", "carrera",    "year_approval", "month_approval",
    "number_pages", "resumen",      "keywords",     "citation",      "location",
    "url"};

bool is_numeric_column(std::string_view column);

/// One thesis. Text fields never hold the empty string: missing data is the
/// "-" sentinel. Numeric fields use nullopt for missing data.
struct ThesisRecord {
  std::string id;
  std::string titulo;
  std::string autor;
  std::string tutor;
  std::string tematica;
  std::string graduate_title;
  std::string thesis_level;
  std::string carrera;
  std::optional<int> year_approval;
  std::optional<int> month_approval;
  std::optional<int> number_pages;
  std::string resumen;
  std::string keywords;
  std::string citation;
  std::string location;
  std::string url;

  bool operator==(const ThesisRecord&) const = default;
};

struct Rejection {
  std::size_t row = 0;  // 1-based data row
  ErrorCode reason = ErrorCode::kMalformedRow;
  std::string message;
};

struct IngestReport {
  std::size_t records_read = 0;
  std::size_t records_loaded = 0;
  std::vector<Rejection> rejected;
  std::string table_name{kThesisTable};
};

using RawRow = std::map<std::string, std::string>;

struct ParsedCsv {
  std::vector<std::pair<std::size_t, RawRow>> rows;  // (data row, fields)
  std::vector<Rejection> bad_rows;                   // wrong field count
  std::size_t data_rows = 0;
};

/// Parses the 16-column thesis CSV. Header names are matched case- and
/// accent-insensitively; `abstract` is accepted as `resumen`.
/// Throws HeaderMismatch, MalformedRow (quote imbalance) or InvalidEncoding.
ParsedCsv parse_thesis_csv(std::string_view input);

/// Throws BadNumeric or MissingId.
ThesisRecord normalize_record(const RawRow& row);

/// Creates or replaces `target` with a single `tesis` table holding every
/// record whose id was not seen earlier in the list.
/// Throws StorageError when the file cannot be written.
IngestReport build_database(const std::vector<ThesisRecord>& records, const std::string& target);

/// parse -> normalize -> build, with rejected rows reported by data-row number.
/// Refuses to overwrite an existing file unless `replace` is set.
IngestReport ingest_csv_file(const std::string& csv_path, const std::string& db_path,
                             bool replace);

/// Reads every row of `tesis` back in insertion order.
std::vector<ThesisRecord> read_all_records(const std::string& db_path);

}  // namespace geolog

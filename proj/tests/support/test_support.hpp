#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "geolog/corpus_ingest.hpp"
#include "geolog/error.hpp"
#include "geolog/llm_backend.hpp"

namespace geolog::testing {

// Code of the geolog::Error thrown by fn, or nullopt when nothing was thrown.
template <typename Fn>
std::optional<ErrorCode> error_code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

// Removes the directory on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(std::string_view name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

std::string fixture_path(std::string_view name);
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);
std::string sha256_file(const std::string& path);

// 16-row curated corpus: 10 theses approved in 2022 (6 tutored by Troncoso
// Salgado Liliana Paulina), the Armadillo title and two volcanism tutors.
std::string build_fixture_db(const TempDir& dir, std::string_view name = "tesis.db");

// Deterministic corpus with diacritics, embedded commas/quotes/newlines,
// "-" sentinels and null months/pages.
std::vector<ThesisRecord> synthetic_corpus(std::size_t n, unsigned seed = 244);

// Writes records as CSV with columns in the given order (default: canonical).
std::string to_csv(const std::vector<ThesisRecord>& records,
                   const std::vector<std::string>& column_order = {});
std::string field_value(const ThesisRecord& r, std::string_view column);

inline constexpr std::string_view kCountQuestion = "¿Cuántas tesis se realizaron en 2022?";
inline constexpr std::string_view kCountSql =
    "SELECT COUNT(*) FROM tesis WHERE year_approval = 2022;";
inline constexpr std::string_view kCountAnswer =
    "En el año 2022, se realizaron 10 tesis en la carrera de Ingeniería en Geología de la "
    "FIGEMPA.";

// list_tables -> schema -> query -> Final Answer, then the composed answer.
std::vector<ScriptEntry> golden_count_script();

}  // namespace geolog::testing

#include "test_support.hpp"

#include <openssl/evp.h>
#include <unistd.h>

#include <atomic>
#include <fstream>
#include <random>
#include <sstream>

#include "geolog/csv.hpp"

#ifndef GEOLOG_SOURCE_DIR
#error "GEOLOG_SOURCE_DIR must be defined"
#endif

namespace geolog::testing {

namespace fs = std::filesystem;

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() /
          ("geolog-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::string fixture_path(std::string_view name) {
  return (fs::path(GEOLOG_SOURCE_DIR) / "fixtures" / name).string();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

std::string sha256_file(const std::string& path) {
  const std::string data = read_file(path);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

std::string build_fixture_db(const TempDir& dir, std::string_view name) {
  const std::string db = dir.file(name);
  ingest_csv_file(fixture_path("tesis_fixture.csv"), db, true);
  return db;
}

std::vector<ThesisRecord> synthetic_corpus(std::size_t n, unsigned seed) {
  static const std::vector<std::string> given = {"Andrea Jadira", "Cristian Bayardo", "María José",
                                                 "Iñaki Andrés", "Lucía Belén", "José Ángel",
                                                 "Nathaly Gabriela", "Ramón Eduardo"};
  static const std::vector<std::string> family = {"Yépez Ruiz", "Zura Quilumbango", "Núñez Peña",
                                                  "Ortiz Ávila", "Troncoso Salgado",
                                                  "Bustillos Arequipa", "Muñoz Chávez"};
  static const std::vector<std::string> topics = {"Geofísica petrolera", "Volcanismo",
                                                  "Hidrogeología", "Geotecnia", "Sedimentología",
                                                  "Geología económica"};
  std::mt19937 rng(seed);
  auto pick = [&](const std::vector<std::string>& v) {
    return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
  };
  auto chance = [&](int percent) { return std::uniform_int_distribution<int>(0, 99)(rng) < percent; };

  std::vector<ThesisRecord> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    ThesisRecord r;
    char id[48];
    std::snprintf(id, sizeof id, "%08zx-46d3-4483-8698-%012llx", i + 1,
                  static_cast<unsigned long long>(0x9fb44c7239abULL + i * 7919));
    r.id = id;
    const std::string topic = pick(topics);
    r.titulo = "Estudio " + std::to_string(i) + " de " + topic + ", sector \"Norte\"";
    r.autor = pick(family) + " " + pick(given);
    r.tutor = pick(family) + " " + pick(given);
    r.tematica = topic;
    r.graduate_title = "Ingeniería en Geología";
    r.thesis_level = "Pregrado";
    r.carrera = "Carrera de Ingeniería en Geología";
    r.year_approval = std::uniform_int_distribution<int>(1995, 2024)(rng);
    if (!chance(25)) r.month_approval = std::uniform_int_distribution<int>(1, 12)(rng);
    if (!chance(5)) r.number_pages = std::uniform_int_distribution<int>(40, 400)(rng);
    r.resumen = chance(10) ? "-"
                           : "La investigación analiza " + topic +
                                 ", con énfasis en litofacies;\nincluye \"muestreo\" y análisis.";
    r.keywords = chance(10) ? "-" : topic + ", Ecuador, Geología";
    r.citation = r.autor + " (" + std::to_string(*r.year_approval) + "). " + r.titulo + ".";
    r.location = "Biblioteca General - FIGEMPA";
    r.url = "https://www.dspace.uce.edu.ec/handle/25000/" + std::to_string(20000 + i);
    out.push_back(std::move(r));
  }
  return out;
}

std::string field_value(const ThesisRecord& r, std::string_view column) {
  auto num = [](const std::optional<int>& v) { return v ? std::to_string(*v) : std::string("-"); };
  if (column == "id") return r.id;
  if (column == "titulo") return r.titulo;
  if (column == "autor") return r.autor;
  if (column == "tutor") return r.tutor;
  if (column == "tematica") return r.tematica;
  if (column == "graduate_title") return r.graduate_title;
  if (column == "thesis_level") return r.thesis_level;
  if (column == "carrera") return r.carrera;
  if (column == "year_approval") return num(r.year_approval);
  if (column == "month_approval") return num(r.month_approval);
  if (column == "number_pages") return num(r.number_pages);
  if (column == "resumen") return r.resumen;
  if (column == "keywords") return r.keywords;
  if (column == "citation") return r.citation;
  if (column == "location") return r.location;
  if (column == "url") return r.url;
  return {};
}

std::string to_csv(const std::vector<ThesisRecord>& records,
                   const std::vector<std::string>& column_order) {
  std::vector<std::string> cols = column_order;
  if (cols.empty()) cols.assign(kThesisColumns.begin(), kThesisColumns.end());
  std::string out;
  for (std::size_t c = 0; c < cols.size(); ++c) out += (c ? "," : "") + cols[c];
  out += "\r\n";
  for (const auto& r : records) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      out += (c ? "," : "") + csv::escape(field_value(r, cols[c]));
    }
    out += "\r\n";
  }
  return out;
}

std::vector<ScriptEntry> golden_count_script() {
  return {
      reply_any("Action: sql_db_list_tables\nAction Input: \"\""),
      reply_any("Thought: The tesis table looks relevant. I should query its schema.\n"
                "Action: sql_db_schema\nAction Input: tesis"),
      reply_any("Thought: I can count the theses approved in 2022.\nAction: sql_db_query\n"
                "Action Input: " + std::string(kCountSql) +
                "\nObservation: (the model must not write this)"),
      reply_any("Thought: I now know the final answer\nFinal Answer: 10"),
      reply_if_contains("Dada la siguiente pregunta", std::string(kCountAnswer)),
  };
}

}  // namespace geolog::testing

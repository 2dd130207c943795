#include "geolog/csv.hpp"

#include "geolog/error.hpp"
#include "geolog/text.hpp"

namespace geolog::csv {

std::vector<Record> read(std::string_view input) {
  if (input.substr(0, 3) == "\xEF\xBB\xBF") input.remove_prefix(3);
  if (!text::is_valid_utf8(input)) {
    throw Error(ErrorCode::kInvalidEncoding, "input is not valid UTF-8");
  }

  std::vector<Record> records;
  Record current;
  std::string field;
  std::size_t line = 1;
  std::size_t i = 0;
  const std::size_t n = input.size();
  bool record_has_content = false;

  auto end_field = [&] {
    current.fields.push_back(std::move(field));
    field.clear();
  };
  auto end_record = [&] {
    end_field();
    const bool blank = current.fields.size() == 1 && current.fields[0].empty() &&
                       !record_has_content;
    if (!blank) records.push_back(std::move(current));
    current = Record{};
    record_has_content = false;
  };

  current.line = line;
  while (i < n) {
    const char c = input[i];
    if (c == '"' && field.empty()) {
      // Quoted field.
      record_has_content = true;
      const std::size_t start_line = line;
      ++i;
      bool closed = false;
      while (i < n) {
        const char q = input[i];
        if (q == '"') {
          if (i + 1 < n && input[i + 1] == '"') {
            field.push_back('"');
            i += 2;
            continue;
          }
          ++i;
          closed = true;
          break;
        }
        if (q == '\n') ++line;
        field.push_back(q);
        ++i;
      }
      if (!closed) {
        throw Error(ErrorCode::kMalformedRow,
                    "unterminated quoted field starting at line " + std::to_string(start_line));
      }
      if (i < n && input[i] != ',' && input[i] != '\n' && input[i] != '\r') {
        throw Error(ErrorCode::kMalformedRow,
                    "unexpected character after closing quote at line " + std::to_string(line));
      }
      continue;
    }
    if (c == ',') {
      record_has_content = true;
      end_field();
      ++i;
      continue;
    }
    if (c == '\r' || c == '\n') {
      if (c == '\r' && i + 1 < n && input[i + 1] == '\n') ++i;
      ++i;
      end_record();
      ++line;
      current.line = line;
      continue;
    }
    if (c == '"') {
      throw Error(ErrorCode::kMalformedRow,
                  "stray quote inside unquoted field at line " + std::to_string(line));
    }
    field.push_back(c);
    ++i;
  }
  if (!field.empty() || record_has_content) end_record();
  return records;
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (const char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace geolog::csv

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace geolog::csv {

struct Record {
  std::size_t line = 0;  // 1-based line where the record starts
  std::vector<std::string> fields;
};

// RFC 4180 reader: comma separator, double-quote quoting with "" escapes,
// CRLF or LF line endings, embedded newlines inside quoted fields. Blank
// lines are skipped. A UTF-8 byte order mark at the start is ignored.
//
// Throws Error(kMalformedRow) on an unterminated quote or on characters after
// a closing quote, and Error(kInvalidEncoding) when the input is not UTF-8.
std::vector<Record> read(std::string_view input);

// Quotes a field when it contains a comma, quote, CR or LF.
std::string escape(std::string_view field);

}  // namespace geolog::csv

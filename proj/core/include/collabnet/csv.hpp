#pragma once

#include <cstddef>
#include <filesystem>
#include <initializer_list>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace collabnet::csv {

struct Row {
  std::size_t line = 0;  // 1-based physical line where the record starts
  std::vector<std::string> fields;
};

struct Table {
  std::vector<std::string> header;
  std::vector<Row> rows;

  /// Index of the first header matching any of the given names, compared
  /// case-insensitively.
  std::optional<std::size_t> column(std::initializer_list<std::string_view> names) const;
};

/// RFC-4180 style reader: quoted fields may contain the delimiter, doubled
/// quotes and line breaks. A UTF-8 BOM and CRLF line endings are accepted.
/// Blank lines are skipped. The first record is the header.
Table parse(std::string_view text, char delimiter);

/// Reads and parses a file; throws Error(MissingInput) if it cannot be opened.
Table read(const std::filesystem::path& path, char delimiter);

std::string escape(std::string_view field, char delimiter);

class Writer {
 public:
  Writer(std::ostream& out, char delimiter = ',') : out_(out), delimiter_(delimiter) {}

  void row(const std::vector<std::string>& fields);
  void row(std::initializer_list<std::string_view> fields);

 private:
  std::ostream& out_;
  char delimiter_;
};

/// Shortest decimal text that round-trips to the same double.
std::string format_number(double value);

}  // namespace collabnet::csv

#pragma once

// Minimal RFC 4180 CSV: comma separated, LF line endings, fields quoted only
// when they contain a comma, quote, CR or LF.

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace allserp::csv {

using Row = std::vector<std::string>;

std::string escape_field(std::string_view field);
std::string format_row(const Row& row);

/// Parses a whole document; tolerates CRLF and a missing final newline.
/// Throws std::runtime_error on an unterminated quoted field.
std::vector<Row> parse(std::string_view text);

/// A parsed file with a header row.
struct Table {
  Row header;
  std::vector<Row> rows;

  /// Column index by name; throws std::out_of_range when absent.
  std::size_t column(std::string_view name) const;
};

Table read_table(const std::filesystem::path& path);

}  // namespace allserp::csv

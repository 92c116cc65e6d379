#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace ownet::csv {

using Row = std::vector<std::string>;

/// Streaming reader for comma-separated files with optional RFC 4180 quoting.
/// Quoted fields may contain commas, doubled quotes and newlines.
class Reader {
 public:
  Reader(std::istream& in, std::string source_name);

  /// Reads the next record. Returns false at end of input.
  bool next(Row& row);

  /// Line on which the most recently returned record started (1-based).
  std::size_t line() const noexcept { return record_line_; }
  const std::string& source() const noexcept { return source_; }

 private:
  std::istream& in_;
  std::string source_;
  std::size_t line_ = 0;
  std::size_t record_line_ = 0;
  std::string buffer_;
};

/// Opens `path`, checks that the header equals `expected_header`, and returns
/// all data rows. Each row is checked for the header's field count.
struct Table {
  Row header;
  std::vector<Row> rows;
  std::vector<std::size_t> lines;
};
Table read_file(const std::string& path, const Row& expected_header);

/// Quotes a field only when it contains a comma, quote, CR or LF.
std::string escape(std::string_view field);
void write_row(std::ostream& out, const Row& row);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

}  // namespace ownet::csv

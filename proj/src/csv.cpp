#include "ownet/csv.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

#include "ownet/error.hpp"

namespace ownet::csv {

Reader::Reader(std::istream& in, std::string source_name) : in_(in), source_(std::move(source_name)) {}

bool Reader::next(Row& row) {
  row.clear();
  if (!std::getline(in_, buffer_)) return false;
  ++line_;
  record_line_ = line_;

  std::string field;
  bool quoted = false;
  bool field_was_quoted = false;
  std::size_t i = 0;
  while (true) {
    if (i == buffer_.size()) {
      if (quoted) {
        // Embedded newline inside a quoted field.
        if (!std::getline(in_, buffer_)) throw ParseError(source_, record_line_, "unterminated quoted field");
        ++line_;
        field.push_back('\n');
        i = 0;
        continue;
      }
      break;
    }
    char c = buffer_[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < buffer_.size() && buffer_[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"' && field.empty() && !field_was_quoted) {
      quoted = true;
      field_was_quoted = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      field_was_quoted = false;
    } else if (c == '\r' && i + 1 == buffer_.size()) {
      // CRLF line ending
    } else {
      if (field_was_quoted) throw ParseError(source_, record_line_, "text after closing quote");
      field.push_back(c);
    }
    ++i;
  }
  row.push_back(std::move(field));
  return true;
}

Table read_file(const std::string& path, const Row& expected_header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  Reader reader(in, path);
  Table table;
  if (!reader.next(table.header)) {
    throw ParseError(path, 1, "missing header");
  }
  if (!table.header.empty() && table.header[0].starts_with("\xEF\xBB\xBF")) table.header[0].erase(0, 3);
  if (table.header != expected_header) {
    std::string want;
    for (const auto& h : expected_header) want += (want.empty() ? "" : ",") + h;
    throw ParseError(path, 1, "unexpected header, want `" + want + "`");
  }
  Row row;
  while (reader.next(row)) {
    if (row.size() == 1 && row[0].empty()) continue;  // blank line
    if (row.size() != expected_header.size()) {
      throw ParseError(path, reader.line(),
                       "expected " + std::to_string(expected_header.size()) + " fields, got " +
                           std::to_string(row.size()));
    }
    table.rows.push_back(row);
    table.lines.push_back(reader.line());
  }
  return table;
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_row(std::ostream& out, const Row& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out << ',';
    out << escape(row[i]);
  }
  out << '\n';
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace ownet::csv

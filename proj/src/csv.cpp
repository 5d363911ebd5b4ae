#include "geosent/csv.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "geosent/error.hpp"

namespace geosent::csv {

Reader::Reader(std::istream& in, char sep) : in_(in), sep_(sep) {}

bool Reader::next(Row& row) {
  row.clear();
  if (in_.peek() == std::char_traits<char>::eof()) return false;
  record_line_ = line_;

  std::string field;
  bool quoted = false;
  bool field_started = false;
  for (;;) {
    int c = in_.get();
    if (c == std::char_traits<char>::eof()) {
      if (quoted) {
        throw DataError("unterminated quoted field starting at line " +
                        std::to_string(record_line_));
      }
      row.push_back(std::move(field));
      return true;
    }
    char ch = static_cast<char>(c);
    if (quoted) {
      if (ch == '"') {
        if (in_.peek() == '"') {
          in_.get();
          field.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        if (ch == '\n') ++line_;
        field.push_back(ch);
      }
      continue;
    }
    if (ch == '"' && !field_started) {
      quoted = true;
      field_started = true;
    } else if (ch == sep_) {
      row.push_back(std::move(field));
      field.clear();
      field_started = false;
    } else if (ch == '\r' && in_.peek() == '\n') {
      // swallowed; the LF ends the record
    } else if (ch == '\n') {
      ++line_;
      row.push_back(std::move(field));
      return true;
    } else {
      field.push_back(ch);
      field_started = true;
    }
  }
}

std::optional<std::size_t> Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  return std::nullopt;
}

std::size_t Table::require_column(std::string_view name, std::string_view source) const {
  if (auto c = column(name)) return *c;
  throw DataError(std::string(source) + ": missing column '" + std::string(name) + "'");
}

Table read_stream(std::istream& in) {
  Table t;
  Reader reader(in);
  Row row;
  if (!reader.next(row)) return t;
  // strip a UTF-8 BOM
  if (!row.empty() && row[0].rfind("\xEF\xBB\xBF", 0) == 0) row[0].erase(0, 3);
  t.header = std::move(row);
  while (reader.next(row)) {
    if (row.size() == 1 && row[0].empty()) continue;  // blank line
    t.lines.push_back(reader.line());
    t.rows.push_back(row);
  }
  return t;
}

Table read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return read_stream(in);
}

std::string escape(std::string_view field, char sep) {
  bool needs = field.find_first_of(std::string{sep, '"', '\n', '\r'}) != std::string_view::npos;
  if (!needs) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_row(std::ostream& out, const Row& row, char sep) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out << sep;
    out << escape(row[i], sep);
  }
  out << '\n';
}

}  // namespace geosent::csv

#include <charconv>
#include <cmath>

namespace geosent::csv {

std::optional<double> to_double(std::string_view field) {
  if (field.empty()) return std::nullopt;
  const char* first = field.data();
  if (*first == '+') ++first;
  double v = 0;
  auto [ptr, ec] = std::from_chars(first, field.data() + field.size(), v);
  if (ec != std::errc{} || ptr != field.data() + field.size()) return std::nullopt;
  return v;
}

std::optional<std::int64_t> to_int64(std::string_view field) {
  if (field.empty()) return std::nullopt;
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || ptr != field.data() + field.size()) return std::nullopt;
  return v;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace geosent::csv

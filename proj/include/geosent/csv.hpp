#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace geosent::csv {

using Row = std::vector<std::string>;

// RFC 4180 reader: quoted fields may contain separators, doubled quotes and
// newlines. A trailing CR before LF is dropped.
class Reader {
 public:
  explicit Reader(std::istream& in, char sep = ',');

  // Returns false at end of input. Throws DataError on an unterminated quote.
  bool next(Row& row);

  // 1-based physical line on which the last returned record started.
  std::size_t line() const noexcept { return record_line_; }

 private:
  std::istream& in_;
  char sep_;
  std::size_t line_ = 1;
  std::size_t record_line_ = 0;
};

// A header-indexed table read fully into memory.
struct Table {
  Row header;
  std::vector<Row> rows;
  std::vector<std::size_t> lines;  // source line of each row

  std::optional<std::size_t> column(std::string_view name) const;
  std::size_t require_column(std::string_view name, std::string_view source) const;
};

Table read_file(const std::string& path);
Table read_stream(std::istream& in);

std::string escape(std::string_view field, char sep = ',');
void write_row(std::ostream& out, const Row& row, char sep = ',');

}  // namespace geosent::csv

namespace geosent::csv {

// Whole-field numeric conversion; surrounding spaces are not accepted.
std::optional<double> to_double(std::string_view field);
std::optional<std::int64_t> to_int64(std::string_view field);

// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

}  // namespace geosent::csv

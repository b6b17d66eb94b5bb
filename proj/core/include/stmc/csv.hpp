#pragma once

#include <concepts>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace stmc::csv {

using Row = std::vector<std::string>;

/// RFC 4180 reader: quoted fields, doubled quotes, CRLF or LF line ends.
std::vector<Row> parse(std::istream& in);
std::vector<Row> read_file(const std::filesystem::path& path);

/// Shortest decimal representation that round-trips; "inf", "-inf", "nan".
std::string format_double(double value);

/// Inverse of format_double. Subnormal values parse instead of failing;
/// anything that is not a complete number raises DataError.
double parse_double(const std::string& text);

/// Buffered writer producing byte-stable output.
class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  Writer& field(std::string_view value);
  Writer& field(const char* value) { return field(std::string_view(value)); }
  Writer& field(const std::string& value) {
    return field(std::string_view(value));
  }
  Writer& field(double value);
  template <std::integral T>
  Writer& field(T value) {
    return field(std::string_view(std::to_string(value)));
  }
  Writer& empty_field() { return field(std::string_view{}); }
  void end_row();

  void row(const Row& values);

 private:
  std::ostream& out_;
  bool first_ = true;
};

/// Writes `contents` to `path`, creating parent directories.
void write_text_file(const std::filesystem::path& path,
                     std::string_view contents);

}  // namespace stmc::csv

#include "stmc/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "stmc/errors.hpp"

namespace stmc::csv {

std::vector<Row> parse(std::istream& in) {
  std::vector<Row> rows;
  Row row;
  std::string cell;
  bool in_quotes = false;
  bool cell_started = false;
  bool row_has_content = false;
  char c;
  auto end_cell = [&] {
    row.push_back(std::move(cell));
    cell.clear();
    cell_started = false;
    row_has_content = true;
  };
  auto end_row = [&] {
    if (row_has_content || cell_started || !cell.empty()) {
      end_cell();
      rows.push_back(std::move(row));
    }
    row.clear();
    row_has_content = false;
  };
  while (in.get(c)) {
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          cell.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        cell.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        cell_started = true;
        break;
      case ',':
        end_cell();
        break;
      case '\r':
        if (in.peek() == '\n') in.get(c);
        end_row();
        break;
      case '\n':
        end_row();
        break;
      default:
        cell.push_back(c);
        cell_started = true;
    }
  }
  if (in_quotes) throw DataError("csv: unterminated quoted field");
  end_row();
  return rows;
}

std::vector<Row> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return parse(in);
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == 0.0) return "0";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

double parse_double(const std::string& text) {
  const char* begin = text.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (text.empty() || end != begin + text.size())
    throw DataError("not a number: '" + text + "'");
  return v;
}

Writer& Writer::field(std::string_view value) {
  if (!first_) out_ << ',';
  first_ = false;
  bool needs_quotes = value.find_first_of(",\"\r\n") != std::string_view::npos;
  if (!needs_quotes) {
    out_ << value;
    return *this;
  }
  out_ << '"';
  for (char c : value) {
    if (c == '"') out_ << '"';
    out_ << c;
  }
  out_ << '"';
  return *this;
}

Writer& Writer::field(double value) { return field(format_double(value)); }

void Writer::end_row() {
  out_ << '\n';
  first_ = true;
}

void Writer::row(const Row& values) {
  for (const auto& v : values) field(v);
  end_row();
}

void write_text_file(const std::filesystem::path& path,
                     std::string_view contents) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
}

}  // namespace stmc::csv

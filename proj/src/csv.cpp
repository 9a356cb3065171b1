#include "liso/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <string_view>

namespace liso {

std::size_t Table::find(const std::string& name) const {
  for (std::size_t j = 0; j < header.size(); ++j)
    if (header[j] == name) return j;
  return header.size();
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_line(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(line.substr(start));
      return cells;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

double parse_cell(std::string_view raw, std::size_t line_no, std::size_t col_no) {
  std::string_view cell = trim(raw);
  auto fail = [&](const char* what) {
    throw CsvError("row " + std::to_string(line_no) + ", column " + std::to_string(col_no) +
                   ": " + what + (cell.empty() ? "" : " '" + std::string(cell) + "'"));
  };
  if (cell.empty()) fail("empty cell");
  std::string_view body = cell;
  if (body.front() == '+') body.remove_prefix(1);  // from_chars rejects a leading plus
  double v = 0.0;
  auto res = std::from_chars(body.data(), body.data() + body.size(), v);
  if (res.ec != std::errc{} || res.ptr != body.data() + body.size()) fail("not a number");
  if (!std::isfinite(v)) fail("non-finite value");
  return v;
}

}  // namespace

Table read_csv(const std::string& text) {
  std::string_view rest = text;
  if (rest.size() >= 3 && std::memcmp(rest.data(), "\xef\xbb\xbf", 3) == 0)
    rest.remove_prefix(3);

  auto next_line = [&](std::string_view& line) {
    if (rest.empty()) return false;
    std::size_t nl = rest.find('\n');
    if (nl == std::string_view::npos) {
      line = rest;
      rest = {};
    } else {
      line = rest.substr(0, nl);
      rest.remove_prefix(nl + 1);
    }
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return true;
  };

  std::string_view line;
  if (!next_line(line) || trim(line).empty()) throw CsvError("row 1: missing header row");

  Table t;
  for (std::string_view cell : split_line(line)) {
    std::string_view name = trim(cell);
    if (name.empty()) throw CsvError("row 1: empty header name");
    t.header.emplace_back(name);
  }
  t.columns.resize(t.header.size());

  std::size_t line_no = 1;
  while (next_line(line)) {
    ++line_no;
    if (trim(line).empty()) {
      if (rest.empty()) break;  // trailing newline
      throw CsvError("row " + std::to_string(line_no) + ": blank row");
    }
    auto cells = split_line(line);
    if (cells.size() != t.header.size())
      throw CsvError("row " + std::to_string(line_no) + ": expected " +
                     std::to_string(t.header.size()) + " cells, got " +
                     std::to_string(cells.size()));
    for (std::size_t j = 0; j < cells.size(); ++j)
      t.columns[j].push_back(parse_cell(cells[j], line_no, j + 1));
  }
  return t;
}

}  // namespace liso

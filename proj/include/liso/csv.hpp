#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace liso {

// Parse failure with the file line and column already in the message.
struct CsvError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Column-major numeric table. Cells must be finite decimal numbers with a
// '.' separator; the header row is mandatory and names every column.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;

  std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
  // index of a named column, or header.size() when absent
  std::size_t find(const std::string& name) const;
};

// Rejects rows with missing cells, non-numeric cells, and non-finite
// values; strips a UTF-8 byte-order mark and CR line endings.
Table read_csv(const std::string& text);

}  // namespace liso

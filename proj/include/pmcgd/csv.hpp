#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "pmcgd/data.hpp"

namespace pmcgd {

// Comma-separated text with an optional header row. The header is detected
// when any cell of the first row fails to parse as a number.
struct CsvTable {
  std::vector<std::string> header;  // empty when the file has none
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based source line of each row

  std::size_t columns() const;
  // Resolves a column by header name, or by 1-based index when no name matches.
  std::size_t column_index(const std::string& selector) const;
  std::vector<std::string> column(const std::string& selector) const;
};

CsvTable read_csv(std::istream& in);
CsvTable read_csv(const std::filesystem::path& path);

// Numeric matrix from the selected columns. Rows with missing or
// non-numeric cells are rejected together, listing their line numbers.
DataMatrix to_data_matrix(const CsvTable& table, const std::vector<std::string>& columns);

DataMatrix ingest_csv(const std::filesystem::path& path, const std::vector<std::string>& columns);

}  // namespace pmcgd

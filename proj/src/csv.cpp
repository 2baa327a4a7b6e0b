#include "pmcgd/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

#include "pmcgd/errors.hpp"

namespace pmcgd {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\"");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\"");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::optional<double> parse_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const char* first = s.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace

std::size_t CsvTable::columns() const {
  if (!header.empty()) return header.size();
  return rows.empty() ? 0 : rows[0].size();
}

std::size_t CsvTable::column_index(const std::string& selector) const {
  const auto it = std::find(header.begin(), header.end(), selector);
  if (it != header.end()) return static_cast<std::size_t>(it - header.begin());
  std::size_t idx = 0;
  const auto [ptr, ec] = std::from_chars(selector.data(), selector.data() + selector.size(), idx);
  if (ec == std::errc() && ptr == selector.data() + selector.size() && idx >= 1 && idx <= columns()) return idx - 1;
  throw DataError("unknown column '" + selector + "'");
}

std::vector<std::string> CsvTable::column(const std::string& selector) const {
  const auto j = column_index(selector);
  std::vector<std::string> out;
  out.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (j >= rows[i].size()) throw DataError("line " + std::to_string(line_numbers[i]) + " is too short");
    out.push_back(rows[i][j]);
  }
  return out;
}

CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto cells = split_line(line);
    if (first) {
      first = false;
      const bool numeric = std::all_of(cells.begin(), cells.end(), [](const std::string& c) {
        return parse_number(c).has_value() || c.empty() || c == "NA" || c == "NaN";
      });
      if (!numeric) {
        t.header = std::move(cells);
        continue;
      }
    }
    t.line_numbers.push_back(line_no);
    t.rows.push_back(std::move(cells));
  }
  return t;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return read_csv(in);
}

DataMatrix to_data_matrix(const CsvTable& table, const std::vector<std::string>& columns) {
  if (columns.empty()) throw DataError("no columns selected");
  std::vector<std::size_t> idx;
  for (const auto& c : columns) idx.push_back(table.column_index(c));
  if (table.rows.empty()) throw DataError("no data rows");

  const auto n = static_cast<Eigen::Index>(table.rows.size());
  Eigen::MatrixXd values(n, static_cast<Eigen::Index>(idx.size()));
  std::vector<std::size_t> bad_lines;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = table.rows[static_cast<std::size_t>(i)];
    bool ok = true;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const auto v = idx[k] < row.size() ? parse_number(row[idx[k]]) : std::nullopt;
      if (!v) {
        ok = false;
        break;
      }
      values(i, static_cast<Eigen::Index>(k)) = *v;
    }
    if (!ok) bad_lines.push_back(table.line_numbers[static_cast<std::size_t>(i)]);
  }
  if (!bad_lines.empty()) {
    std::string msg = "missing or non-numeric values at line";
    msg += bad_lines.size() > 1 ? "s " : " ";
    for (std::size_t k = 0; k < bad_lines.size(); ++k) msg += (k ? ", " : "") + std::to_string(bad_lines[k]);
    throw DataError(msg);
  }
  DataMatrix d(std::move(values));
  for (auto j : idx) d.column_names.push_back(j < table.header.size() ? table.header[j] : "x" + std::to_string(j + 1));
  return d;
}

DataMatrix ingest_csv(const std::filesystem::path& path, const std::vector<std::string>& columns) {
  return to_data_matrix(read_csv(path), columns);
}

}  // namespace pmcgd

#include "tavie/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "tavie/errors.hpp"

namespace tavie {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_cell(const std::string& raw, long row, long col) {
  const std::string s = trim(raw);
  if (s.empty()) throw ParseError("empty cell at row " + std::to_string(row) +
                                      ", column " + std::to_string(col),
                                  row, col);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size())
    throw ParseError("non-numeric cell '" + s + "' at row " + std::to_string(row) +
                         ", column " + std::to_string(col),
                     row, col);
  return v;
}

}  // namespace

Eigen::Index CsvTable::column_index(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  return it == columns.end() ? -1 : static_cast<Eigen::Index>(it - columns.begin());
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty file: " + path);
  if (!line.empty() && line.front() == '\xEF' && line.size() >= 3)
    line.erase(0, 3);  // UTF-8 BOM

  CsvTable table;
  for (const auto& name : split_line(line)) table.columns.push_back(trim(name));
  const auto width = static_cast<Eigen::Index>(table.columns.size());
  if (width == 0) throw ParseError("header row has no columns: " + path);

  std::vector<double> flat;
  long row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    const auto cells = split_line(line);
    if (static_cast<Eigen::Index>(cells.size()) != width)
      throw ParseError("row " + std::to_string(row) + " has " +
                           std::to_string(cells.size()) + " cells, expected " +
                           std::to_string(width),
                       row);
    for (Eigen::Index c = 0; c < width; ++c)
      flat.push_back(parse_cell(cells[static_cast<std::size_t>(c)], row, c + 1));
  }
  if (row == 0) throw ParseError("no data rows: " + path);

  table.values.resize(row, width);
  for (long r = 0; r < row; ++r)
    for (Eigen::Index c = 0; c < width; ++c)
      table.values(r, c) = flat[static_cast<std::size_t>(r * width + c)];
  return table;
}

ParsedCsv parse_csv(const std::string& path, const std::string& target_column,
                    std::vector<std::string> feature_columns,
                    std::optional<std::string> m_column) {
  const CsvTable table = read_csv(path);

  const Eigen::Index target_idx = table.column_index(target_column);
  if (target_idx < 0) throw ParseError("target column not found: " + target_column);

  Eigen::Index m_idx = -1;
  if (m_column) {
    m_idx = table.column_index(*m_column);
    if (m_idx < 0) throw ParseError("size column not found: " + *m_column);
  }

  if (feature_columns.empty()) {
    for (const auto& name : table.columns)
      if (name != target_column && (!m_column || name != *m_column))
        feature_columns.push_back(name);
  }
  if (feature_columns.empty()) throw ParseError("no feature columns selected");

  std::vector<Eigen::Index> feat_idx;
  for (const auto& name : feature_columns) {
    const Eigen::Index idx = table.column_index(name);
    if (idx < 0) throw ParseError("feature column not found: " + name);
    feat_idx.push_back(idx);
  }

  const Eigen::Index n = table.values.rows();
  Eigen::MatrixXd X(n, static_cast<Eigen::Index>(feat_idx.size()));
  for (std::size_t j = 0; j < feat_idx.size(); ++j)
    X.col(static_cast<Eigen::Index>(j)) = table.values.col(feat_idx[j]);
  const Eigen::VectorXd y = table.values.col(target_idx);

  std::optional<Eigen::VectorXd> m;
  if (m_idx >= 0) {
    Eigen::VectorXd sizes = table.values.col(m_idx);
    for (Eigen::Index i = 0; i < n; ++i)
      if (sizes[i] <= 0.0)
        throw ParseError("nonpositive size in row " + std::to_string(i + 1), i + 1);
    m = std::move(sizes);
  }

  for (Eigen::Index i = 0; i < n; ++i)
    if (X.row(i).cwiseAbs().maxCoeff() == 0.0)
      throw InvariantError("feature row " + std::to_string(i + 1) + " is all zero");

  ParsedCsv out{Dataset(std::move(X), y, std::move(m)), std::move(feature_columns),
                std::move(m_column)};
  return out;
}

void write_csv(std::ostream& os, const std::vector<std::string>& columns,
               const Eigen::MatrixXd& values) {
  for (std::size_t c = 0; c < columns.size(); ++c)
    os << columns[c] << (c + 1 < columns.size() ? ',' : '\n');
  char buf[40];
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", values(r, c));
      os << buf << (c + 1 < values.cols() ? ',' : '\n');
    }
  }
}

}  // namespace tavie

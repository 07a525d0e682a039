#ifndef TAVIE_CSV_HPP
#define TAVIE_CSV_HPP

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "tavie/dataset.hpp"

namespace tavie {

/// Fully numeric table: comma separated, header row required, '.' decimals.
struct CsvTable {
  std::vector<std::string> columns;
  Eigen::MatrixXd values;

  Eigen::Index column_index(const std::string& name) const;  // -1 if absent
};

CsvTable read_csv(const std::string& path);

struct ParsedCsv {
  Dataset dataset;
  std::vector<std::string> feature_columns;
  std::optional<std::string> m_column;
};

/// Builds a Dataset from named columns.  An empty feature list selects every
/// column except the target and the size column, in file order.  Non-numeric
/// cells and nonpositive sizes raise ParseError with the 1-based data row;
/// an all-zero feature row raises InvariantError naming the row.
ParsedCsv parse_csv(const std::string& path, const std::string& target_column,
                    std::vector<std::string> feature_columns = {},
                    std::optional<std::string> m_column = std::nullopt);

void write_csv(std::ostream& os, const std::vector<std::string>& columns,
               const Eigen::MatrixXd& values);

}  // namespace tavie

#endif  // TAVIE_CSV_HPP

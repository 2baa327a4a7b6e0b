#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace pmcgd {

// n x p observations, one row per observation. Row identifiers survive
// subsetting and perturbation so reports can point back at the input.
struct DataMatrix {
  Eigen::MatrixXd values;
  std::vector<std::string> row_ids;
  std::vector<std::string> column_names;

  DataMatrix() = default;
  explicit DataMatrix(Eigen::MatrixXd v);
  DataMatrix(Eigen::MatrixXd v, std::vector<std::string> ids);

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
};

}  // namespace pmcgd

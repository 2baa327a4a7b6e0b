#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pmcgd/data.hpp"

namespace pmcgd {

inline constexpr double kDefaultGoodThreshold = 0.5;

struct ObservationLabel {
  std::string row_id;
  int cluster = 1;  // 1-based
  bool is_bad = false;
  double z_max = 0.0;
  double v_at_map = 0.0;

  bool operator==(const ObservationLabel&) const = default;
};

// 0-based argmax of every row; ties go to the lowest index.
std::vector<int> map_assign(const Eigen::MatrixXd& Z);

// An observation is good iff v at its MAP component is strictly above
// the threshold.
std::vector<bool> detect_bad(const Eigen::MatrixXd& Z, const Eigen::MatrixXd& V,
                             double threshold = kDefaultGoodThreshold);

std::vector<ObservationLabel> label_observations(const DataMatrix& X, const Eigen::MatrixXd& Z,
                                                 const Eigen::MatrixXd& V, double threshold = kDefaultGoodThreshold);

enum class MisallocationMode { Merged, GoodOnly };

// Minimal number of rows whose cluster disagrees with the truth under the
// best one-to-one matching of clusters to classes. Merged mode counts every
// row at its MAP cluster; GoodOnly drops flagged rows.
long misallocation_count(const std::vector<int>& clusters, const std::vector<int>& truth,
                         const std::vector<bool>& bad = {}, MisallocationMode mode = MisallocationMode::Merged);

// Maximum-weight perfect matching on a square benefit matrix; result[r] is
// the column given to row r. Exhaustive up to 8 rows, Hungarian above.
std::vector<int> best_assignment(const Eigen::MatrixXd& benefit);

struct EncodedLabels {
  std::vector<int> codes;
  std::vector<std::string> names;  // names[code]
};

// Codes distinct strings in order of first appearance.
EncodedLabels encode_labels(const std::vector<std::string>& labels);

struct ConfusionTable {
  std::vector<std::string> row_labels;  // true classes
  std::vector<std::string> col_labels;  // clusters, plus "Bad" when separated
  std::vector<std::vector<long>> counts;

  long total() const;
  bool operator==(const ConfusionTable&) const = default;
};

// Truth x cluster counts with bad rows counted in their MAP cluster.
ConfusionTable merged_confusion(const EncodedLabels& truth, const std::vector<int>& clusters, int G);
// Truth x (clusters + Bad) counts with flagged rows in the Bad column.
ConfusionTable separated_confusion(const EncodedLabels& truth, const std::vector<int>& clusters,
                                   const std::vector<bool>& bad, int G);

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b);

}  // namespace pmcgd

#include "pmcgd/classification.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>

#include "pmcgd/errors.hpp"

namespace pmcgd {

namespace {

// Hungarian algorithm (potentials form) for minimum cost on a square matrix.
std::vector<int> hungarian_min(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> assign(n);
  for (int j = 1; j <= n; ++j) assign[p[j] - 1] = j - 1;
  return assign;
}

}  // namespace

std::vector<int> map_assign(const Eigen::MatrixXd& Z) {
  std::vector<int> out(static_cast<std::size_t>(Z.rows()));
  for (Eigen::Index i = 0; i < Z.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index g = 1; g < Z.cols(); ++g)
      if (Z(i, g) > Z(i, best)) best = g;
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

std::vector<bool> detect_bad(const Eigen::MatrixXd& Z, const Eigen::MatrixXd& V, double threshold) {
  if (Z.rows() != V.rows() || Z.cols() != V.cols()) throw DimensionError("detect_bad: Z and V shapes differ");
  const auto map = map_assign(Z);
  std::vector<bool> bad(map.size());
  for (std::size_t i = 0; i < map.size(); ++i) bad[i] = !(V(static_cast<Eigen::Index>(i), map[i]) > threshold);
  return bad;
}

std::vector<ObservationLabel> label_observations(const DataMatrix& X, const Eigen::MatrixXd& Z,
                                                 const Eigen::MatrixXd& V, double threshold) {
  const auto map = map_assign(Z);
  const auto bad = detect_bad(Z, V, threshold);
  std::vector<ObservationLabel> out;
  out.reserve(map.size());
  for (std::size_t i = 0; i < map.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    out.push_back({i < X.row_ids.size() ? X.row_ids[i] : std::to_string(i + 1), map[i] + 1, bad[i], Z(ii, map[i]),
                   V(ii, map[i])});
  }
  return out;
}

std::vector<int> best_assignment(const Eigen::MatrixXd& benefit) {
  if (benefit.rows() != benefit.cols()) throw DimensionError("best_assignment: matrix must be square");
  const int n = static_cast<int>(benefit.rows());
  if (n > 8) return hungarian_min(-benefit);
  std::vector<int> perm(n), best;
  std::iota(perm.begin(), perm.end(), 0);
  double best_value = -std::numeric_limits<double>::infinity();
  do {
    double value = 0.0;
    for (int r = 0; r < n; ++r) value += benefit(r, perm[r]);
    if (value > best_value) {
      best_value = value;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

long misallocation_count(const std::vector<int>& clusters, const std::vector<int>& truth,
                         const std::vector<bool>& bad, MisallocationMode mode) {
  if (clusters.size() != truth.size()) throw DimensionError("misallocation_count: label lengths differ");
  if (mode == MisallocationMode::GoodOnly && bad.size() != clusters.size())
    throw DimensionError("misallocation_count: bad flags required for good-only mode");
  std::map<int, int> cluster_index, class_index;
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    cluster_index.try_emplace(clusters[i], static_cast<int>(cluster_index.size()));
    class_index.try_emplace(truth[i], static_cast<int>(class_index.size()));
  }
  const auto k = static_cast<Eigen::Index>(std::max(cluster_index.size(), class_index.size()));
  Eigen::MatrixXd table = Eigen::MatrixXd::Zero(k, k);
  long considered = 0;
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    if (mode == MisallocationMode::GoodOnly && bad[i]) continue;
    table(cluster_index[clusters[i]], class_index[truth[i]]) += 1.0;
    ++considered;
  }
  if (k == 0) return 0;
  const auto match = best_assignment(table);
  long matched = 0;
  for (Eigen::Index r = 0; r < k; ++r) matched += static_cast<long>(table(r, match[static_cast<std::size_t>(r)]));
  return considered - matched;
}

EncodedLabels encode_labels(const std::vector<std::string>& labels) {
  EncodedLabels out;
  std::map<std::string, int> index;
  for (const auto& l : labels) {
    auto [it, inserted] = index.try_emplace(l, static_cast<int>(out.names.size()));
    if (inserted) out.names.push_back(l);
    out.codes.push_back(it->second);
  }
  return out;
}

long ConfusionTable::total() const {
  long t = 0;
  for (const auto& row : counts) t = std::accumulate(row.begin(), row.end(), t);
  return t;
}

ConfusionTable merged_confusion(const EncodedLabels& truth, const std::vector<int>& clusters, int G) {
  if (truth.codes.size() != clusters.size()) throw DimensionError("merged_confusion: label lengths differ");
  ConfusionTable t;
  t.row_labels = truth.names;
  for (int g = 1; g <= G; ++g) t.col_labels.push_back(std::to_string(g));
  t.counts.assign(truth.names.size(), std::vector<long>(static_cast<std::size_t>(G), 0));
  for (std::size_t i = 0; i < clusters.size(); ++i)
    ++t.counts[static_cast<std::size_t>(truth.codes[i])][static_cast<std::size_t>(clusters[i])];
  return t;
}

ConfusionTable separated_confusion(const EncodedLabels& truth, const std::vector<int>& clusters,
                                   const std::vector<bool>& bad, int G) {
  if (bad.size() != clusters.size()) throw DimensionError("separated_confusion: label lengths differ");
  ConfusionTable t = merged_confusion(truth, clusters, G);
  t.col_labels.push_back("Bad");
  for (auto& row : t.counts) std::fill(row.begin(), row.end(), 0), row.push_back(0);
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    auto& row = t.counts[static_cast<std::size_t>(truth.codes[i])];
    ++row[bad[i] ? static_cast<std::size_t>(G) : static_cast<std::size_t>(clusters[i])];
  }
  return t;
}

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) throw DimensionError("adjusted_rand_index: label lengths differ");
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> ra, rb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[{a[i], b[i]}] += 1.0;
    ra[a[i]] += 1.0;
    rb[b[i]] += 1.0;
  }
  auto c2 = [](double x) { return x * (x - 1.0) / 2.0; };
  double sum_ij = 0.0, sum_a = 0.0, sum_b = 0.0;
  for (const auto& [k, v] : joint) sum_ij += c2(v);
  for (const auto& [k, v] : ra) sum_a += c2(v);
  for (const auto& [k, v] : rb) sum_b += c2(v);
  const double total = c2(static_cast<double>(a.size()));
  if (total == 0.0) return 1.0;
  const double expected = sum_a * sum_b / total;
  const double max_index = 0.5 * (sum_a + sum_b);
  if (max_index == expected) return 1.0;
  return (sum_ij - expected) / (max_index - expected);
}

}  // namespace pmcgd

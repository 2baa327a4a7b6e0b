#include "pmcgd/datagen.hpp"

#include <cmath>
#include <ostream>
#include <random>

#include "pmcgd/errors.hpp"

namespace pmcgd {

namespace {

Eigen::VectorXd draw_normal(const Eigen::VectorXd& mean, const Eigen::MatrixXd& chol_l, std::mt19937_64& rng) {
  std::normal_distribution<double> std_normal(0.0, 1.0);
  Eigen::VectorXd z(mean.size());
  for (auto& v : z) v = std_normal(rng);
  return mean + chol_l * z;
}

Eigen::MatrixXd cholesky_factor(const Eigen::MatrixXd& sigma) {
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite("sampling covariance is not positive definite");
  return llt.matrixL();
}

void renumber(DataMatrix& d) {
  d.row_ids.clear();
  for (Eigen::Index i = 0; i < d.values.rows(); ++i) d.row_ids.push_back(std::to_string(i + 1));
}

}  // namespace

void ScenarioSpec::validate() const {
  if (components.empty()) throw std::invalid_argument("scenario has no components");
  const Eigen::Index p = components[0].mean.size();
  for (const auto& c : components) {
    if (c.size < 1) throw std::invalid_argument("component sizes must be at least 1");
    if (c.mean.size() != p || c.sigma.delta.size() != p) throw DimensionError("scenario component dimensions differ");
    if (!(c.sigma.delta.array() > 0).all() || !(c.sigma.lambda > 0))
      throw std::invalid_argument("scenario covariance factors must be positive");
  }
  if (noise_count < 0) throw std::invalid_argument("noise count must be non-negative");
  if (noise_count > 0) {
    if (static_cast<Eigen::Index>(noise_bounds.size()) != p) throw DimensionError("noise bounds dimension mismatch");
    for (const auto& [lo, hi] : noise_bounds)
      if (!(lo < hi)) throw std::invalid_argument("noise bounds must satisfy lo < hi");
  }
}

ScenarioSpec eve_noise_scenario(std::uint64_t seed) {
  const double c = std::sqrt(3.0) / 2.0;
  Eigen::Matrix2d gamma;
  gamma << c, 0.5, -0.5, c;
  ScenarioSpec s;
  s.components.push_back({Eigen::Vector2d(-2, -2), {1.0, Eigen::Vector2d(1.0 / 0.7, 0.7), gamma}, 90});
  s.components.push_back({Eigen::Vector2d(2, 2), {1.0, Eigen::Vector2d(1.0 / 0.3, 0.3), gamma}, 90});
  s.noise_count = 20;
  s.noise_bounds = {{-10.0, 10.0}, {-10.0, 10.0}};
  s.seed = seed;
  return s;
}

LabeledSample sample_gpcm(const ScenarioSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  const Eigen::Index p = spec.components[0].mean.size();
  Eigen::Index n = 0;
  for (const auto& c : spec.components) n += c.size;
  LabeledSample out;
  out.data.values.resize(n, p);
  Eigen::Index row = 0;
  for (std::size_t g = 0; g < spec.components.size(); ++g) {
    const auto& c = spec.components[g];
    const Eigen::MatrixXd l = cholesky_factor(c.sigma.matrix());
    for (int k = 0; k < c.size; ++k, ++row) {
      out.data.values.row(row) = draw_normal(c.mean, l, rng).transpose();
      out.true_component.push_back(static_cast<int>(g) + 1);
      out.true_bad.push_back(false);
    }
  }
  renumber(out.data);
  return out;
}

LabeledSample sample_scenario(const ScenarioSpec& spec) {
  auto s = sample_gpcm(spec);
  // Offset keeps the noise stream independent of the component draws.
  return add_uniform_noise(std::move(s), spec.noise_count, spec.noise_bounds, spec.seed ^ 0x9e3779b97f4a7c15ULL);
}

LabeledSample add_uniform_noise(LabeledSample sample, int count, const Bounds& bounds, std::uint64_t seed) {
  if (count < 0) throw std::invalid_argument("noise count must be non-negative");
  if (count == 0) return sample;
  const Eigen::Index p = sample.data.cols() > 0 ? sample.data.cols() : static_cast<Eigen::Index>(bounds.size());
  if (static_cast<Eigen::Index>(bounds.size()) != p) throw DimensionError("noise bounds dimension mismatch");
  for (const auto& [lo, hi] : bounds)
    if (!(lo < hi)) throw std::invalid_argument("noise bounds need lower < upper");
  std::mt19937_64 rng(seed);
  const Eigen::Index n0 = sample.data.rows();
  Eigen::MatrixXd values(n0 + count, p);
  if (n0 > 0) values.topRows(n0) = sample.data.values;
  for (Eigen::Index i = n0; i < n0 + count; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      std::uniform_real_distribution<double> u(bounds[static_cast<std::size_t>(j)].first,
                                               bounds[static_cast<std::size_t>(j)].second);
      values(i, j) = u(rng);
    }
    sample.true_component.push_back(0);
    sample.true_bad.push_back(true);
  }
  sample.data.values = std::move(values);
  renumber(sample.data);
  return sample;
}

DataMatrix perturb_observation(const DataMatrix& X, Eigen::Index row, Eigen::Index dim, double value) {
  if (row < 0 || row >= X.rows() || dim < 0 || dim >= X.cols())
    throw std::out_of_range("perturb_observation: index out of range");
  DataMatrix copy = X;
  copy.values(row, dim) = value;
  return copy;
}

LabeledSample sample_contaminated(const ModelParams& psi, int n, std::uint64_t seed) {
  if (n < 0) throw std::invalid_argument("sample size must be non-negative");
  std::mt19937_64 rng(seed);
  const Eigen::Index p = psi.p();
  std::vector<Eigen::MatrixXd> chol;
  for (const auto& d : psi.sigma) chol.push_back(cholesky_factor(d.matrix()));
  std::discrete_distribution<int> pick(psi.pi.begin(), psi.pi.end());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  LabeledSample out;
  out.data.values.resize(n, p);
  for (int i = 0; i < n; ++i) {
    const int g = pick(rng);
    const bool bad = unit(rng) >= psi.alpha[static_cast<std::size_t>(g)];
    const double scale = bad ? std::sqrt(psi.eta[static_cast<std::size_t>(g)]) : 1.0;
    out.data.values.row(i) =
        draw_normal(psi.mu[static_cast<std::size_t>(g)], scale * chol[static_cast<std::size_t>(g)], rng).transpose();
    out.true_component.push_back(g + 1);
    out.true_bad.push_back(bad);
  }
  renumber(out.data);
  return out;
}

void write_labeled_csv(const LabeledSample& sample, std::ostream& out) {
  const Eigen::Index p = sample.data.cols();
  for (Eigen::Index j = 0; j < p; ++j) {
    const auto idx = static_cast<std::size_t>(j);
    out << (idx < sample.data.column_names.size() ? sample.data.column_names[idx] : "x" + std::to_string(j + 1)) << ',';
  }
  out << "true_component,true_bad\n";
  out.precision(17);
  for (Eigen::Index i = 0; i < sample.data.rows(); ++i) {
    for (Eigen::Index j = 0; j < p; ++j) out << sample.data.values(i, j) << ',';
    const auto ii = static_cast<std::size_t>(i);
    out << sample.true_component[ii] << ',' << (sample.true_bad[ii] ? 1 : 0) << '\n';
  }
}

}  // namespace pmcgd

#include "pmcgd/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pmcgd/data.hpp"
#include "pmcgd/errors.hpp"

namespace pmcgd {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;  // ln(2*pi)
}

DataMatrix::DataMatrix(Eigen::MatrixXd v) : values(std::move(v)) {
  row_ids.reserve(static_cast<std::size_t>(values.rows()));
  for (Eigen::Index i = 0; i < values.rows(); ++i) row_ids.push_back(std::to_string(i + 1));
}

DataMatrix::DataMatrix(Eigen::MatrixXd v, std::vector<std::string> ids)
    : values(std::move(v)), row_ids(std::move(ids)) {
  if (static_cast<Eigen::Index>(row_ids.size()) != values.rows())
    throw DimensionError("row id count does not match number of rows");
}

CovMatrix::CovMatrix(const Eigen::MatrixXd& entries) : entries_(entries) {
  if (entries_.rows() != entries_.cols() || entries_.rows() == 0)
    throw DimensionError("covariance must be a non-empty square matrix");
  if (!entries_.allFinite()) throw NotPositiveDefinite("covariance has non-finite entries");
  const double scale = std::max(entries_.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  if ((entries_ - entries_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw NotPositiveDefinite("covariance is not symmetric");
  llt_.compute(entries_);
  if (llt_.info() != Eigen::Success) throw NotPositiveDefinite("covariance is not positive definite");
  const auto diag = llt_.matrixLLT().diagonal();
  if ((diag.array() <= 0.0).any() || !diag.allFinite())
    throw NotPositiveDefinite("covariance is not positive definite");
  log_det_ = 2.0 * diag.array().log().sum();
}

double CovMatrix::quad_form(const Eigen::Ref<const Eigen::VectorXd>& v) const {
  const Eigen::VectorXd y = llt_.matrixL().solve(v);
  return y.squaredNorm();
}

double log_sum_exp(std::span<const double> v) {
  if (v.empty()) return -std::numeric_limits<double>::infinity();
  const double m = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double t : v) s += std::exp(t - m);
  return m + std::log(s);
}

double mahalanobis_sq(const Eigen::Ref<const Eigen::VectorXd>& x,
                      const Eigen::Ref<const Eigen::VectorXd>& mu, const CovMatrix& sigma) {
  if (x.size() != mu.size() || x.size() != sigma.dim())
    throw DimensionError("mahalanobis_sq: x, mu and sigma dimensions disagree");
  return sigma.quad_form(x - mu);
}

double log_gaussian_from_distance(double delta, double log_det, Eigen::Index p) {
  return -0.5 * (static_cast<double>(p) * kLog2Pi + log_det + delta);
}

double log_gaussian_pdf(const Eigen::Ref<const Eigen::VectorXd>& x,
                        const Eigen::Ref<const Eigen::VectorXd>& mu, const CovMatrix& sigma) {
  return log_gaussian_from_distance(mahalanobis_sq(x, mu, sigma), sigma.log_det(), sigma.dim());
}

std::pair<double, double> contaminated_log_terms(double delta, double log_det, Eigen::Index p,
                                                 double alpha, double eta) {
  const double good = std::log(alpha) + log_gaussian_from_distance(delta, log_det, p);
  const double bad_weight = 1.0 - alpha;
  if (bad_weight <= 0.0) return {good, -std::numeric_limits<double>::infinity()};
  const double bad = std::log(bad_weight) +
                     log_gaussian_from_distance(delta / eta, log_det + static_cast<double>(p) * std::log(eta), p);
  return {good, bad};
}

double contaminated_log_pdf(const Eigen::Ref<const Eigen::VectorXd>& x, const ComponentParams& comp) {
  const double delta = mahalanobis_sq(x, comp.mu, comp.sigma);
  const auto [good, bad] = contaminated_log_terms(delta, comp.sigma.log_det(), comp.sigma.dim(), comp.alpha, comp.eta);
  const double terms[2] = {good, bad};
  return log_sum_exp(terms);
}

double mixture_log_pdf(const Eigen::Ref<const Eigen::VectorXd>& x,
                       std::span<const ComponentParams> components) {
  if (components.empty()) throw DimensionError("mixture_log_pdf: no components");
  double total = 0.0;
  for (const auto& c : components) total += c.pi;
  if (std::abs(total - 1.0) > 1e-10) throw std::invalid_argument("mixture weights do not sum to one");
  std::vector<double> terms;
  terms.reserve(2 * components.size());
  for (const auto& c : components) {
    const double delta = mahalanobis_sq(x, c.mu, c.sigma);
    const auto [good, bad] = contaminated_log_terms(delta, c.sigma.log_det(), c.sigma.dim(), c.alpha, c.eta);
    const double lp = std::log(c.pi);
    terms.push_back(lp + good);
    terms.push_back(lp + bad);
  }
  return log_sum_exp(terms);
}

}  // namespace pmcgd

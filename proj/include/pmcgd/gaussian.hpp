#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace pmcgd {

// Symmetric positive-definite covariance with its Cholesky factor cached.
// Construction fails with NotPositiveDefinite instead of regularizing.
class CovMatrix {
 public:
  explicit CovMatrix(const Eigen::MatrixXd& entries);

  const Eigen::MatrixXd& matrix() const { return entries_; }
  Eigen::Index dim() const { return entries_.rows(); }
  double log_det() const { return log_det_; }
  const Eigen::LLT<Eigen::MatrixXd>& llt() const { return llt_; }

  // Solves L y = v and returns |y|^2 = v' Sigma^{-1} v.
  double quad_form(const Eigen::Ref<const Eigen::VectorXd>& v) const;

 private:
  Eigen::MatrixXd entries_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  double log_det_ = 0.0;
};

// Parameters of one contaminated Gaussian component.
struct ComponentParams {
  double pi = 1.0;
  double alpha = 1.0;
  Eigen::VectorXd mu;
  CovMatrix sigma;
  double eta = 1.0;
};

// Numerically stable log(sum(exp(v))); -inf for an empty or all -inf input.
double log_sum_exp(std::span<const double> v);

double mahalanobis_sq(const Eigen::Ref<const Eigen::VectorXd>& x,
                      const Eigen::Ref<const Eigen::VectorXd>& mu, const CovMatrix& sigma);

double log_gaussian_pdf(const Eigen::Ref<const Eigen::VectorXd>& x,
                        const Eigen::Ref<const Eigen::VectorXd>& mu, const CovMatrix& sigma);

// log phi given a precomputed squared distance under Sigma; the inflated
// density is obtained with delta/eta and log_det + p*log(eta).
double log_gaussian_from_distance(double delta, double log_det, Eigen::Index p);

// log of alpha*phi(x; mu, Sigma) + (1-alpha)*phi(x; mu, eta*Sigma).
double contaminated_log_pdf(const Eigen::Ref<const Eigen::VectorXd>& x, const ComponentParams& comp);

// The two weighted terms of the contaminated density, in log space:
// {log(alpha*phi(x;mu,Sigma)), log((1-alpha)*phi(x;mu,eta*Sigma))}.
std::pair<double, double> contaminated_log_terms(double delta, double log_det, Eigen::Index p,
                                                 double alpha, double eta);

// log sum_g pi_g f(x; theta_g). Weights must sum to one within 1e-10.
double mixture_log_pdf(const Eigen::Ref<const Eigen::VectorXd>& x,
                       std::span<const ComponentParams> components);

}  // namespace pmcgd

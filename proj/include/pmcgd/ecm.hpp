#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "pmcgd/covariance.hpp"
#include "pmcgd/data.hpp"
#include "pmcgd/gaussian.hpp"

namespace pmcgd {

// Offsets keeping alpha in (alpha*, 1) and eta in (1, eta*) strictly inside.
inline constexpr double kAlphaEps = 1e-6;
inline constexpr double kEtaEps = 1e-6;

// A component whose effective size drops below this fraction of n is dead.
inline constexpr double kDeathFraction = 1e-8;

struct ModelParams {
  StructureId structure = StructureId::VVV;
  std::vector<double> pi;
  std::vector<double> alpha;
  std::vector<Eigen::VectorXd> mu;
  std::vector<EigenDecomposition> sigma;
  std::vector<double> eta;

  std::size_t G() const { return pi.size(); }
  Eigen::Index p() const { return mu.empty() ? 0 : mu[0].size(); }
  std::vector<ComponentParams> components() const;
};

struct Posteriors {
  Eigen::MatrixXd Z;  // n x G component responsibilities
  Eigen::MatrixXd V;  // n x G probability of being good within each component
};

struct FitConfig {
  double epsilon = 1e-5;
  double eta_star = 1000.0;
  double alpha_star = 0.5;
  int max_iter = 1000;
  std::uint64_t seed = 0;
  int restarts = 10;
  // Fix alpha and/or eta a priori instead of estimating them.
  std::optional<double> fixed_alpha;
  std::optional<double> fixed_eta;
  // Besides the degenerate Gaussian warm start, ECM is also run from the
  // same Gaussian fit with each (alpha, eta) pair here; the best final
  // log-likelihood wins.
  std::vector<std::pair<double, double>> extra_starts{{0.999, 1.01}};
  // The extra starts are applied to this many of the best Gaussian fits.
  int start_candidates = 3;
  // ECM is also run straight from each initial hard partition with each
  // (alpha, eta) here, skipping the Gaussian fit.
  std::vector<std::pair<double, double>> partition_starts{{0.99, 10.0}, {0.75, 3.0}};
  InnerOptions inner;

  void validate() const;
};

struct FitResult {
  ModelParams params;
  Posteriors posteriors;
  std::vector<double> loglik_trace;
  bool converged = false;
  int iterations = 0;
  std::vector<std::string> warnings;
  // Log-likelihood of the Gaussian (GPCM) fit used as the warm start;
  // NaN when the fit was started from user-supplied parameters.
  double gpcm_loglik = std::numeric_limits<double>::quiet_NaN();

  double loglik() const { return loglik_trace.back(); }
};

struct EStepResult {
  Posteriors posteriors;
  double loglik;
};

EStepResult e_step(const DataMatrix& X, const ModelParams& psi);

// argmax over (alpha*, 1) of sum_i z_i [v_i ln a + (1 - v_i) ln(1 - a)].
double update_alpha(const Eigen::Ref<const Eigen::VectorXd>& z, const Eigen::Ref<const Eigen::VectorXd>& v,
                    double alpha_star);

struct CmStep1Result {
  ModelParams params;
  ScatterSet scatter;
  std::vector<std::string> warnings;
};

// pi, alpha, mu and Sigma given the posteriors, with eta held at psi_prev.
CmStep1Result cm_step1(const DataMatrix& X, const Posteriors& post, const ModelParams& psi_prev,
                       const FitConfig& cfg);

// The eta part of the expected complete-data log-likelihood:
// -(p/2) A ln(eta) - B / (2 eta).
double eta_objective(double A, double B, Eigen::Index p, double eta);

// Closed-form maximizer of eta_objective on (1, eta*): clamp(B/(pA)).
double update_eta(double A, double B, Eigen::Index p, double eta_star);

std::vector<double> cm_step2(const DataMatrix& X, const Posteriors& post, const ModelParams& psi1,
                             const FitConfig& cfg);

struct AitkenResult {
  bool converged;
  double l_inf;
};

AitkenResult aitken_check(double l_r, double l_r1, double l_r2, double epsilon);

struct GpcmFit {
  ModelParams params;  // alpha = 1 - kAlphaEps, eta = 1 + kEtaEps
  double loglik;
  int restarts_ok = 0;
  // Best Gaussian fits from distinct restarts, by decreasing log-likelihood;
  // candidates[0] is params.
  std::vector<ModelParams> candidates;
  // The hard partitions the restarts started from, as 0-based labels.
  std::vector<std::vector<int>> partitions;
};

// Fits the Gaussian mixture with the same covariance structure by EM from
// cfg.restarts random hard partitions and keeps the best.
GpcmFit init_from_gpcm(const DataMatrix& X, StructureId structure, int G, const FitConfig& cfg);

FitResult fit(const DataMatrix& X, StructureId structure, int G, const FitConfig& cfg);

// ECM from explicit starting parameters.
FitResult fit_from(const DataMatrix& X, const ModelParams& psi0, const FitConfig& cfg);

}  // namespace pmcgd

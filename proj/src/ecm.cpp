#include "pmcgd/ecm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "pmcgd/errors.hpp"

namespace pmcgd {

namespace {

enum class Mode { Contaminated, Gaussian };

void add_warning(std::vector<std::string>& w, std::string msg) {
  if (std::find(w.begin(), w.end(), msg) == w.end()) w.push_back(std::move(msg));
}

// Recomputes Sigma from the scatter with a growing ridge until every
// composed matrix factorizes.
std::vector<EigenDecomposition> robust_sigma_update(StructureId s, ScatterSet scatter,
                                                    std::span<const EigenDecomposition> prev, const FitConfig& cfg,
                                                    std::vector<std::string>& warnings) {
  double ridge = 1e-10;
  for (int attempt = 0; attempt < 6; ++attempt) {
    auto upd = update_sigmas(s, scatter, prev, cfg.inner);
    if (upd.regularized) add_warning(warnings, "scatter matrix regularized (small or degenerate component)");
    if (!upd.inner_converged) add_warning(warnings, "inner covariance iteration hit its cap");
    bool ok = true;
    for (const auto& d : upd.decs) {
      try {
        (void)compose(d);
      } catch (const NotPositiveDefinite&) {
        ok = false;
        break;
      }
    }
    if (ok) return std::move(upd.decs);
    add_warning(warnings, "covariance regularized after factorization failure");
    for (auto& w : scatter.W) {
      const Eigen::Index p = w.rows();
      w += ridge * w.trace() / static_cast<double>(p) * Eigen::MatrixXd::Identity(p, p);
    }
    prev = {};
    ridge *= 100.0;
  }
  throw FitError("covariance update failed to produce a positive-definite matrix");
}

CmStep1Result cm_step1_impl(const DataMatrix& X, const Posteriors& post, const ModelParams& prev,
                            const FitConfig& cfg, Mode mode) {
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  const std::size_t G = prev.G();
  CmStep1Result out;
  out.params = prev;
  out.params.mu.assign(G, Eigen::VectorXd());
  const double death = kDeathFraction * static_cast<double>(n);
  for (std::size_t g = 0; g < G; ++g) {
    const auto z = post.Z.col(static_cast<Eigen::Index>(g));
    const auto v = post.V.col(static_cast<Eigen::Index>(g));
    const double ng = z.sum();
    if (!(ng >= death) || ng <= 0.0) throw ComponentDeath(static_cast<int>(g), ng);
    if (ng < static_cast<double>(p + 1))
      add_warning(out.warnings, "component " + std::to_string(g + 1) + " has fewer than p+1 effective observations");
    out.params.pi[g] = ng / static_cast<double>(n);
    if (mode == Mode::Contaminated)
      out.params.alpha[g] = cfg.fixed_alpha ? *cfg.fixed_alpha : update_alpha(z, v, cfg.alpha_star);

    const double eta = prev.eta[g];
    const Eigen::VectorXd w =
        (mode == Mode::Gaussian) ? Eigen::VectorXd(z) : Eigen::VectorXd(z.array() * (v.array() + (1.0 - v.array()) / eta));
    const double s = w.sum();
    if (!(s > 0)) throw ComponentDeath(static_cast<int>(g), s);
    Eigen::VectorXd mu = (X.values.transpose() * w) / s;
    const Eigen::MatrixXd centered = X.values.rowwise() - mu.transpose();
    Eigen::MatrixXd W = centered.transpose() * (centered.array().colwise() * w.array()).matrix();
    out.scatter.W.push_back(0.5 * (W + W.transpose()));
    out.scatter.n.push_back(ng);
    out.params.mu[g] = std::move(mu);
  }
  double total = std::accumulate(out.params.pi.begin(), out.params.pi.end(), 0.0);
  for (auto& w : out.params.pi) w /= total;

  std::span<const EigenDecomposition> warm;
  if (prev.sigma.size() == G) warm = prev.sigma;
  out.params.sigma = robust_sigma_update(prev.structure, out.scatter, warm, cfg, out.warnings);
  return out;
}

struct LoopResult {
  ModelParams params;
  Posteriors posteriors;
  std::vector<double> trace;
  bool converged = false;
  int iterations = 0;
  std::vector<std::string> warnings;
};

LoopResult run_loop(const DataMatrix& X, ModelParams psi, const FitConfig& cfg, Mode mode) {
  LoopResult r;
  for (int iter = 0;; ++iter) {
    auto es = e_step(X, psi);
    r.trace.push_back(es.loglik);
    r.posteriors = std::move(es.posteriors);
    const std::size_t k = r.trace.size();
    if (k >= 3 && aitken_check(r.trace[k - 3], r.trace[k - 2], r.trace[k - 1], cfg.epsilon).converged) {
      r.converged = true;
      break;
    }
    if (iter >= cfg.max_iter) break;
    auto cm1 = cm_step1_impl(X, r.posteriors, psi, cfg, mode);
    for (auto& w : cm1.warnings) add_warning(r.warnings, std::move(w));
    psi = std::move(cm1.params);
    if (mode == Mode::Contaminated) psi.eta = cm_step2(X, r.posteriors, psi, cfg);
    r.iterations = iter + 1;
  }
  r.params = std::move(psi);
  return r;
}

// Some component rests on fewer than p+1 effective observations; its
// likelihood is dominated by a near-singular covariance.
bool degenerate(const Posteriors& post, Eigen::Index p) {
  return (post.Z.colwise().sum().array() < static_cast<double>(p + 1)).any();
}

// Non-degenerate fits first, then higher log-likelihood.
bool better(bool deg_a, double ll_a, bool deg_b, double ll_b) {
  if (deg_a != deg_b) return !deg_a;
  return ll_a > ll_b;
}

void check_data(const DataMatrix& X, int G) {
  if (G < 1) throw std::invalid_argument("G must be at least 1");
  if (X.rows() < G) throw std::invalid_argument("need at least G observations");
  if (X.cols() < 1) throw std::invalid_argument("data has no columns");
  if (!X.values.allFinite()) throw DataError("data contains non-finite values");
}

// Uniform random labels; G distinct rows pin every component non-empty.
std::vector<int> random_partition(Eigen::Index n, int G, std::mt19937_64& rng) {
  std::vector<int> labels(static_cast<std::size_t>(n));
  std::uniform_int_distribution<int> pick(0, G - 1);
  for (auto& l : labels) l = pick(rng);
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  for (int g = 0; g < G; ++g) labels[static_cast<std::size_t>(order[static_cast<std::size_t>(g)])] = g;
  return labels;
}

// Hard partition around G rows drawn by k-means++ weighting, refined by a
// few Lloyd steps. Every component keeps at least its seed row.
std::vector<int> seeded_partition(const Eigen::MatrixXd& X, int G, std::mt19937_64& rng) {
  const Eigen::Index n = X.rows();
  Eigen::MatrixXd centers(G, X.cols());
  std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
  std::vector<Eigen::Index> seeds{first(rng)};
  centers.row(0) = X.row(seeds[0]);
  Eigen::VectorXd d2 = (X.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (int g = 1; g < G; ++g) {
    Eigen::Index pick;
    if (d2.sum() > 0.0) {
      std::discrete_distribution<Eigen::Index> draw(d2.data(), d2.data() + n);
      pick = draw(rng);
    } else {
      pick = first(rng);
    }
    seeds.push_back(pick);
    centers.row(g) = X.row(pick);
    d2 = d2.cwiseMin((X.rowwise() - centers.row(g)).rowwise().squaredNorm());
  }
  std::vector<int> labels(static_cast<std::size_t>(n), 0);
  for (int step = 0; step < 5; ++step) {
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index best;
      (centers.rowwise() - X.row(i)).rowwise().squaredNorm().minCoeff(&best);
      labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
    }
    for (int g = 0; g < G; ++g) labels[static_cast<std::size_t>(seeds[static_cast<std::size_t>(g)])] = g;
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(G, X.cols());
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(G);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(labels[static_cast<std::size_t>(i)]) += X.row(i);
      counts(labels[static_cast<std::size_t>(i)]) += 1.0;
    }
    for (int g = 0; g < G; ++g) centers.row(g) = sums.row(g) / counts(g);
  }
  return labels;
}

}  // namespace

std::vector<ComponentParams> ModelParams::components() const {
  std::vector<ComponentParams> out;
  out.reserve(G());
  for (std::size_t g = 0; g < G(); ++g) out.push_back(ComponentParams{pi[g], alpha[g], mu[g], compose(sigma[g]), eta[g]});
  return out;
}

void FitConfig::validate() const {
  if (!(eta_star > 1.0)) throw std::invalid_argument("eta_star must exceed 1");
  if (!(alpha_star >= 0.0 && alpha_star < 1.0)) throw std::invalid_argument("alpha_star must lie in [0, 1)");
  if (max_iter < 1) throw std::invalid_argument("max_iter must be at least 1");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (restarts < 1) throw std::invalid_argument("restarts must be at least 1");
  if (start_candidates < 1) throw std::invalid_argument("start_candidates must be at least 1");
  if (fixed_alpha && !(*fixed_alpha > 0.0 && *fixed_alpha <= 1.0))
    throw std::invalid_argument("fixed alpha must lie in (0, 1]");
  if (fixed_eta && !(*fixed_eta >= 1.0)) throw std::invalid_argument("fixed eta must be at least 1");
  for (const auto& starts : {extra_starts, partition_starts})
    for (const auto& [a, e] : starts)
      if (!(a > 0.0 && a < 1.0 && e > 1.0)) throw std::invalid_argument("starts need alpha in (0,1) and eta > 1");
}

EStepResult e_step(const DataMatrix& X, const ModelParams& psi) {
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  const auto G = static_cast<Eigen::Index>(psi.G());
  if (psi.p() != p) throw DimensionError("e_step: parameter and data dimensions disagree");

  Eigen::MatrixXd log_good(n, G), log_f(n, G);
  for (Eigen::Index g = 0; g < G; ++g) {
    const auto gi = static_cast<std::size_t>(g);
    const CovMatrix sigma = compose(psi.sigma[gi]);
    Eigen::MatrixXd centered = (X.values.rowwise() - psi.mu[gi].transpose()).transpose();
    sigma.llt().matrixL().solveInPlace(centered);
    const Eigen::VectorXd delta = centered.colwise().squaredNorm().transpose();
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto [good, bad] = contaminated_log_terms(delta(i), sigma.log_det(), p, psi.alpha[gi], psi.eta[gi]);
      const double terms[2] = {good, bad};
      log_good(i, g) = good;
      log_f(i, g) = log_sum_exp(terms);
    }
  }

  EStepResult r{{Eigen::MatrixXd(n, G), Eigen::MatrixXd(n, G)}, 0.0};
  std::vector<double> terms(static_cast<std::size_t>(G));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index g = 0; g < G; ++g) terms[static_cast<std::size_t>(g)] = std::log(psi.pi[static_cast<std::size_t>(g)]) + log_f(i, g);
    const double lp = log_sum_exp(terms);
    if (!std::isfinite(lp)) {
      const std::string id = i < static_cast<Eigen::Index>(X.row_ids.size()) ? X.row_ids[static_cast<std::size_t>(i)]
                                                                              : std::to_string(i + 1);
      throw FitError("density underflow for every component at row " + id);
    }
    r.loglik += lp;
    for (Eigen::Index g = 0; g < G; ++g) {
      r.posteriors.Z(i, g) = std::exp(terms[static_cast<std::size_t>(g)] - lp);
      r.posteriors.V(i, g) = std::isfinite(log_f(i, g)) ? std::min(1.0, std::exp(log_good(i, g) - log_f(i, g))) : 1.0;
    }
    r.posteriors.Z.row(i) /= r.posteriors.Z.row(i).sum();
  }
  return r;
}

double update_alpha(const Eigen::Ref<const Eigen::VectorXd>& z, const Eigen::Ref<const Eigen::VectorXd>& v,
                    double alpha_star) {
  if (z.size() != v.size()) throw DimensionError("update_alpha: z and v lengths differ");
  const double total = z.sum();
  if (!(total > 0.0)) throw ComponentDeath(0, total);
  const double good = z.dot(v);
  return std::clamp(good / total, alpha_star + kAlphaEps, 1.0 - kAlphaEps);
}

CmStep1Result cm_step1(const DataMatrix& X, const Posteriors& post, const ModelParams& psi_prev,
                       const FitConfig& cfg) {
  return cm_step1_impl(X, post, psi_prev, cfg, Mode::Contaminated);
}

double eta_objective(double A, double B, Eigen::Index p, double eta) {
  return -0.5 * static_cast<double>(p) * A * std::log(eta) - 0.5 * B / eta;
}

double update_eta(double A, double B, Eigen::Index p, double eta_star) {
  if (!(A > 0.0)) return 1.0 + kEtaEps;
  return std::clamp(B / (static_cast<double>(p) * A), 1.0 + kEtaEps, eta_star);
}

std::vector<double> cm_step2(const DataMatrix& X, const Posteriors& post, const ModelParams& psi1,
                             const FitConfig& cfg) {
  const std::size_t G = psi1.G();
  std::vector<double> etas(G);
  if (cfg.fixed_eta) {
    std::fill(etas.begin(), etas.end(), *cfg.fixed_eta);
    return etas;
  }
  for (std::size_t g = 0; g < G; ++g) {
    const auto gi = static_cast<Eigen::Index>(g);
    const Eigen::VectorXd bad = post.Z.col(gi).array() * (1.0 - post.V.col(gi).array());
    const CovMatrix sigma = compose(psi1.sigma[g]);
    Eigen::MatrixXd centered = (X.values.rowwise() - psi1.mu[g].transpose()).transpose();
    sigma.llt().matrixL().solveInPlace(centered);
    const double B = bad.dot(centered.colwise().squaredNorm().transpose());
    etas[g] = update_eta(bad.sum(), B, X.cols(), cfg.eta_star);
  }
  return etas;
}

AitkenResult aitken_check(double l_r, double l_r1, double l_r2, double epsilon) {
  const double denom = l_r1 - l_r;
  if (denom < 1e-14) return {true, l_r2};
  const double a = (l_r2 - l_r1) / denom;
  if (a >= 1.0) return {false, std::numeric_limits<double>::infinity()};
  const double l_inf = l_r1 + (l_r2 - l_r1) / (1.0 - a);
  const double gap = l_inf - l_r1;
  return {gap >= 0.0 && gap < epsilon, l_inf};
}

GpcmFit init_from_gpcm(const DataMatrix& X, StructureId structure, int G, const FitConfig& cfg) {
  check_data(X, G);
  cfg.validate();
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  const auto Gs = static_cast<std::size_t>(G);
  std::mt19937_64 rng(cfg.seed);

  GpcmFit best{{}, -std::numeric_limits<double>::infinity(), 0, {}, {}};
  struct Found {
    double loglik;
    bool degenerate;
    ModelParams params;
  };
  std::vector<Found> found;
  std::string last_error;
  for (int r = 0; r < cfg.restarts; ++r) {
    // even restarts: k-means++ partitions; odd: uniform random labels
    const auto labels = r % 2 == 0 ? seeded_partition(X.values, G, rng) : random_partition(n, G, rng);
    best.partitions.push_back(labels);
    Posteriors post{Eigen::MatrixXd::Zero(n, G), Eigen::MatrixXd::Ones(n, G)};
    for (Eigen::Index i = 0; i < n; ++i) post.Z(i, labels[static_cast<std::size_t>(i)]) = 1.0;

    ModelParams psi;
    psi.structure = structure;
    psi.pi.assign(Gs, 1.0 / G);
    psi.alpha.assign(Gs, 1.0);
    psi.eta.assign(Gs, 1.0 + kEtaEps);
    psi.mu.assign(Gs, Eigen::VectorXd::Zero(p));
    try {
      psi = cm_step1_impl(X, post, psi, cfg, Mode::Gaussian).params;
      auto loop = run_loop(X, std::move(psi), cfg, Mode::Gaussian);
      ++best.restarts_ok;
      found.push_back({loop.trace.back(), degenerate(loop.posteriors, p), std::move(loop.params)});
    } catch (const std::runtime_error& e) {
      last_error = e.what();
    }
  }
  if (best.restarts_ok == 0) throw FitError("all GPCM initializations failed: " + last_error);
  std::stable_sort(found.begin(), found.end(), [](const Found& a, const Found& b) {
    return better(a.degenerate, a.loglik, b.degenerate, b.loglik);
  });
  best.loglik = found.front().loglik;
  double last_ll = 0.0;
  for (auto& [ll, deg, params] : found) {
    // restarts landing on the same optimum add nothing
    bool repeat = !best.candidates.empty() && std::abs(ll - last_ll) <= 1e-6 * std::abs(ll);
    last_ll = ll;
    if (repeat || static_cast<int>(best.candidates.size()) >= cfg.start_candidates) continue;
    params.alpha.assign(Gs, 1.0 - kAlphaEps);
    params.eta.assign(Gs, 1.0 + kEtaEps);
    best.candidates.push_back(std::move(params));
  }
  best.params = best.candidates.front();
  return best;
}

FitResult fit_from(const DataMatrix& X, const ModelParams& psi0, const FitConfig& cfg) {
  check_data(X, static_cast<int>(psi0.G()));
  cfg.validate();
  ModelParams psi = psi0;
  if (cfg.fixed_alpha) psi.alpha.assign(psi.G(), *cfg.fixed_alpha);
  if (cfg.fixed_eta) psi.eta.assign(psi.G(), *cfg.fixed_eta);
  auto loop = run_loop(X, std::move(psi), cfg, Mode::Contaminated);
  FitResult r;
  r.params = std::move(loop.params);
  r.posteriors = std::move(loop.posteriors);
  r.loglik_trace = std::move(loop.trace);
  r.converged = loop.converged;
  r.iterations = loop.iterations;
  r.warnings = std::move(loop.warnings);
  return r;
}

FitResult fit(const DataMatrix& X, StructureId structure, int G, const FitConfig& cfg) {
  auto init = init_from_gpcm(X, structure, G, cfg);
  auto best = fit_from(X, init.params, cfg);
  bool best_deg = degenerate(best.posteriors, X.cols());
  // Other starts only replace the warm-start fit when they end higher; a
  // failing one is dropped since a valid fit already exists.
  auto try_start = [&](ModelParams psi0, double alpha, double eta) {
    psi0.alpha.assign(psi0.G(), std::clamp(alpha, cfg.alpha_star + kAlphaEps, 1.0 - kAlphaEps));
    psi0.eta.assign(psi0.G(), std::clamp(eta, 1.0 + kEtaEps, cfg.eta_star));
    try {
      auto r = fit_from(X, psi0, cfg);
      const bool deg = degenerate(r.posteriors, X.cols());
      if (better(deg, r.loglik(), best_deg, best.loglik())) {
        best = std::move(r);
        best_deg = deg;
      }
    } catch (const std::runtime_error&) {
    }
  };
  for (const auto& start : init.candidates)
    for (const auto& [alpha, eta] : cfg.extra_starts) try_start(start, alpha, eta);
  for (const auto& labels : init.partitions) {
    if (cfg.partition_starts.empty()) break;
    Posteriors post{Eigen::MatrixXd::Zero(X.rows(), G), Eigen::MatrixXd::Ones(X.rows(), G)};
    for (Eigen::Index i = 0; i < X.rows(); ++i) post.Z(i, labels[static_cast<std::size_t>(i)]) = 1.0;
    ModelParams psi0;
    try {
      psi0 = cm_step1_impl(X, post, init.params, cfg, Mode::Gaussian).params;
    } catch (const std::runtime_error&) {
      continue;
    }
    for (const auto& [alpha, eta] : cfg.partition_starts) try_start(psi0, alpha, eta);
  }
  best.gpcm_loglik = init.loglik;
  return best;
}

}  // namespace pmcgd

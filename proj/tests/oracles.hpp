// Independent reference computations shared by the unit and acceptance tests.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "pmcgd/covariance.hpp"

namespace oracle {

// Plain Nelder-Mead on R^k.
inline std::pair<std::vector<double>, double> nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                                          std::vector<double> x0, double step = 0.5,
                                                          int max_evals = 20000, double ftol = 1e-13) {
  const std::size_t k = x0.size();
  if (k == 0) return {x0, f(x0)};
  std::vector<std::vector<double>> s(k + 1, x0);
  for (std::size_t i = 0; i < k; ++i) s[i + 1][i] += step;
  std::vector<double> fs(k + 1);
  for (std::size_t i = 0; i <= k; ++i) fs[i] = f(s[i]);
  int evals = static_cast<int>(k + 1);
  std::vector<std::size_t> idx(k + 1);
  while (evals < max_evals) {
    for (std::size_t i = 0; i <= k; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return fs[a] < fs[b]; });
    const auto lo = idx[0], hi = idx[k], nh = idx[k - 1];
    if (std::abs(fs[hi] - fs[lo]) <= ftol * (1.0 + std::abs(fs[lo]))) break;
    std::vector<double> c(k, 0.0);
    for (std::size_t i = 0; i <= k; ++i)
      if (i != hi)
        for (std::size_t j = 0; j < k; ++j) c[j] += s[i][j] / static_cast<double>(k);
    auto along = [&](double t) {
      std::vector<double> x(k);
      for (std::size_t j = 0; j < k; ++j) x[j] = c[j] + t * (s[hi][j] - c[j]);
      return x;
    };
    auto xr = along(-1.0);
    double fr = f(xr);
    ++evals;
    if (fr < fs[lo]) {
      auto xe = along(-2.0);
      double fe = f(xe);
      ++evals;
      if (fe < fr) s[hi] = xe, fs[hi] = fe;
      else s[hi] = xr, fs[hi] = fr;
    } else if (fr < fs[nh]) {
      s[hi] = xr, fs[hi] = fr;
    } else {
      auto xc = along(fr < fs[hi] ? -0.5 : 0.5);
      double fc = f(xc);
      ++evals;
      if (fc < std::min(fr, fs[hi])) {
        s[hi] = xc, fs[hi] = fc;
      } else {
        for (std::size_t i = 0; i <= k; ++i) {
          if (i == lo) continue;
          for (std::size_t j = 0; j < k; ++j) s[i][j] = s[lo][j] + 0.5 * (s[i][j] - s[lo][j]);
          fs[i] = f(s[i]);
          ++evals;
        }
      }
    }
  }
  auto best = std::min_element(fs.begin(), fs.end()) - fs.begin();
  return {s[static_cast<std::size_t>(best)], fs[static_cast<std::size_t>(best)]};
}

// Bivariate Sigma_g built from free coordinates under a structure's pattern:
// log-volume, log-shape b (Delta = diag(e^b, e^-b)) and rotation angle.
struct Param2 {
  pmcgd::StructurePattern pat;
  int G;

  int dim() const {
    int d = pat.volume == pmcgd::Share::Equal ? 1 : G;
    d += pat.shape == pmcgd::ShapeKind::Spherical ? 0 : pat.shape == pmcgd::ShapeKind::Equal ? 1 : G;
    d += pat.orientation == pmcgd::OrientationKind::AxisAligned ? 0
         : pat.orientation == pmcgd::OrientationKind::Equal   ? 1
                                                              : G;
    return d;
  }

  std::vector<Eigen::MatrixXd> sigmas(const std::vector<double>& x) const {
    std::size_t at = 0;
    auto take = [&](bool per_group, int g) { return x[at + (per_group ? static_cast<std::size_t>(g) : 0)]; };
    std::vector<double> a(G), b(G, 0.0), t(G, 0.0);
    for (int g = 0; g < G; ++g) a[g] = take(pat.volume == pmcgd::Share::Variable, g);
    at += pat.volume == pmcgd::Share::Variable ? G : 1;
    if (pat.shape != pmcgd::ShapeKind::Spherical) {
      for (int g = 0; g < G; ++g) b[g] = take(pat.shape == pmcgd::ShapeKind::Variable, g);
      at += pat.shape == pmcgd::ShapeKind::Variable ? G : 1;
    }
    if (pat.orientation != pmcgd::OrientationKind::AxisAligned) {
      for (int g = 0; g < G; ++g) t[g] = take(pat.orientation == pmcgd::OrientationKind::Variable, g);
    }
    std::vector<Eigen::MatrixXd> out;
    for (int g = 0; g < G; ++g) {
      Eigen::Matrix2d R;
      R << std::cos(t[g]), -std::sin(t[g]), std::sin(t[g]), std::cos(t[g]);
      out.push_back(std::exp(a[g]) * R * Eigen::Vector2d(std::exp(b[g]), std::exp(-b[g])).asDiagonal() *
                    R.transpose());
    }
    return out;
  }
};

// Minimum of F over the structure's feasible set by multi-start Nelder-Mead.
inline double numeric_min_objective(pmcgd::StructureId s, const pmcgd::ScatterSet& sc, std::uint64_t seed = 1) {
  Param2 par{pmcgd::pattern_of(s), static_cast<int>(sc.size())};
  auto F = [&](const std::vector<double>& x) {
    auto S = par.sigmas(x);
    return pmcgd::scatter_objective(sc, std::span<const Eigen::MatrixXd>(S));
  };
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ang(0.0, std::numbers::pi);
  std::normal_distribution<double> nd(0.0, 0.5);
  double best = std::numeric_limits<double>::infinity();
  for (int start = 0; start < 12; ++start) {
    std::vector<double> x0(static_cast<std::size_t>(par.dim()));
    for (auto& v : x0) v = nd(rng);
    // angles sit at the tail of the vector; spread them over [0, pi)
    const int n_angles = par.pat.orientation == pmcgd::OrientationKind::AxisAligned ? 0
                         : par.pat.orientation == pmcgd::OrientationKind::Equal     ? 1
                                                                                    : par.G;
    for (int i = 0; i < n_angles; ++i) x0[x0.size() - 1 - static_cast<std::size_t>(i)] = ang(rng);
    auto [x, fx] = nelder_mead(F, x0);
    // polish from the best point with a smaller simplex
    auto [x2, fx2] = nelder_mead(F, x, 0.01);
    best = std::min({best, fx, fx2});
  }
  return best;
}

// Random positive-definite bivariate scatter set with G = 2.
inline pmcgd::ScatterSet random_scatter(std::mt19937_64& rng, int G = 2, int p = 2) {
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> un(5.0, 60.0);
  pmcgd::ScatterSet sc;
  for (int g = 0; g < G; ++g) {
    const double n = un(rng);
    Eigen::MatrixXd A(p, p + 3);
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < p + 3; ++j) A(i, j) = nd(rng) * (1.0 + i);
    Eigen::MatrixXd W = A * A.transpose() / (p + 3.0) * n;
    sc.W.push_back(0.5 * (W + W.transpose()));
    sc.n.push_back(n);
  }
  return sc;
}

// Gaussian mixture EM with unrestricted covariances, written from scratch.
struct PlainEm {
  std::vector<double> pi;
  std::vector<Eigen::VectorXd> mu;
  std::vector<Eigen::MatrixXd> sigma;
  double loglik = 0.0;
};

inline double log_phi(const Eigen::VectorXd& x, const Eigen::VectorXd& mu, const Eigen::MatrixXd& S) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(S);
  const Eigen::VectorXd d = x - mu;
  const double q = d.dot(ldlt.solve(d));
  const double logdet = ldlt.vectorD().array().log().sum();
  return -0.5 * (static_cast<double>(x.size()) * std::log(2 * std::numbers::pi) + logdet + q);
}

inline double plain_loglik(const Eigen::MatrixXd& X, const PlainEm& m) {
  double ll = 0.0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    double mx = -1e300;
    std::vector<double> t(m.pi.size());
    for (std::size_t g = 0; g < m.pi.size(); ++g) {
      t[g] = std::log(m.pi[g]) + log_phi(X.row(i).transpose(), m.mu[g], m.sigma[g]);
      mx = std::max(mx, t[g]);
    }
    double s = 0.0;
    for (double v : t) s += std::exp(v - mx);
    ll += mx + std::log(s);
  }
  return ll;
}

// Runs unrestricted EM from the given parameters until the log-likelihood
// gain drops below tol.
inline PlainEm plain_em(const Eigen::MatrixXd& X, PlainEm m, double tol = 1e-12, int max_iter = 20000) {
  const Eigen::Index n = X.rows();
  const std::size_t G = m.pi.size();
  double prev = plain_loglik(X, m);
  for (int it = 0; it < max_iter; ++it) {
    Eigen::MatrixXd Z(n, static_cast<Eigen::Index>(G));
    for (Eigen::Index i = 0; i < n; ++i) {
      double mx = -1e300;
      for (std::size_t g = 0; g < G; ++g) {
        Z(i, static_cast<Eigen::Index>(g)) = std::log(m.pi[g]) + log_phi(X.row(i).transpose(), m.mu[g], m.sigma[g]);
        mx = std::max(mx, Z(i, static_cast<Eigen::Index>(g)));
      }
      Z.row(i) = (Z.row(i).array() - mx).exp();
      Z.row(i) /= Z.row(i).sum();
    }
    for (std::size_t g = 0; g < G; ++g) {
      const Eigen::VectorXd z = Z.col(static_cast<Eigen::Index>(g));
      const double ng = z.sum();
      m.pi[g] = ng / static_cast<double>(n);
      m.mu[g] = X.transpose() * z / ng;
      const Eigen::MatrixXd C = X.rowwise() - m.mu[g].transpose();
      m.sigma[g] = C.transpose() * z.asDiagonal() * C / ng;
    }
    m.loglik = plain_loglik(X, m);
    if (std::abs(m.loglik - prev) < tol) break;
    prev = m.loglik;
  }
  return m;
}

}  // namespace oracle

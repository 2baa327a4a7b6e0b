#include "pmcgd/covariance.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include "pmcgd/errors.hpp"

namespace pmcgd {

namespace {

constexpr std::array<std::string_view, 14> kNames = {"EII", "VII", "EEI", "VEI", "EVI", "VVI", "EEE",
                                                     "VEE", "EVE", "EEV", "VVE", "VEV", "EVV", "VVV"};

double geo_mean(const Eigen::VectorXd& v) { return std::exp(v.array().log().mean()); }

// Makes the first entry with magnitude above 1e-12 positive.
void normalize_sign(Eigen::Ref<Eigen::VectorXd> col) {
  for (Eigen::Index i = 0; i < col.size(); ++i) {
    if (std::abs(col(i)) > 1e-12) {
      if (col(i) < 0) col = -col;
      return;
    }
  }
}

bool lex_greater(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a(i) > b(i) + 1e-12) return true;
    if (a(i) < b(i) - 1e-12) return false;
  }
  return false;
}

struct SymEigen {
  Eigen::VectorXd values;   // decreasing
  Eigen::MatrixXd vectors;  // matching columns
};

// Eigen-decomposition of a symmetric matrix, values decreasing, with the
// deterministic sign and tie-break rules.
SymEigen sym_eigen_desc(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.info() != Eigen::Success) throw NotPositiveDefinite("eigen-decomposition failed");
  const Eigen::Index p = m.rows();
  SymEigen out{es.eigenvalues().reverse(), es.eigenvectors().rowwise().reverse()};
  for (Eigen::Index j = 0; j < p; ++j) normalize_sign(out.vectors.col(j));
  const double scale = std::max(std::abs(out.values(0)), std::numeric_limits<double>::min());
  Eigen::Index start = 0;
  while (start < p) {
    Eigen::Index end = start + 1;
    while (end < p && std::abs(out.values(end) - out.values(start)) <= 1e-10 * scale) ++end;
    if (end - start > 1) {
      std::vector<Eigen::VectorXd> cols;
      for (Eigen::Index j = start; j < end; ++j) cols.emplace_back(out.vectors.col(j));
      std::stable_sort(cols.begin(), cols.end(), lex_greater);
      for (Eigen::Index j = start; j < end; ++j) out.vectors.col(j) = cols[static_cast<std::size_t>(j - start)];
    }
    start = end;
  }
  return out;
}

EigenDecomposition make_dec(double lambda, Eigen::VectorXd delta, Eigen::MatrixXd gamma) {
  return EigenDecomposition{lambda, std::move(delta), std::move(gamma)};
}

// Splits a positive vector of axis variances into volume and unit-determinant shape.
std::pair<double, Eigen::VectorXd> split_volume(const Eigen::VectorXd& variances) {
  const double v = geo_mean(variances);
  return {v, variances / v};
}

// Entry-wise floor so logs and reciprocals of near-zero variances stay finite.
Eigen::VectorXd floor_positive(Eigen::VectorXd v) {
  const double top = v.maxCoeff();
  const double floor = std::max(top * 1e-14, std::numeric_limits<double>::min());
  for (auto& x : v) x = std::max(x, floor);
  return v;
}

// --- per-structure solvers ------------------------------------------------

struct Problem {
  const ScatterSet& sc;
  Eigen::Index p;
  std::size_t G;
  double n_total;
  Eigen::MatrixXd W_total;
};

std::vector<EigenDecomposition> replicate_dec(const EigenDecomposition& d, std::size_t G) {
  return std::vector<EigenDecomposition>(G, d);
}

std::vector<EigenDecomposition> solve_eii(const Problem& pr) {
  const double lambda = pr.W_total.trace() / (static_cast<double>(pr.p) * pr.n_total);
  return replicate_dec(make_dec(lambda, Eigen::VectorXd::Ones(pr.p), Eigen::MatrixXd::Identity(pr.p, pr.p)), pr.G);
}

std::vector<EigenDecomposition> solve_vii(const Problem& pr) {
  std::vector<EigenDecomposition> out;
  for (std::size_t g = 0; g < pr.G; ++g) {
    const double lambda = pr.sc.W[g].trace() / (static_cast<double>(pr.p) * pr.sc.n[g]);
    out.push_back(make_dec(lambda, Eigen::VectorXd::Ones(pr.p), Eigen::MatrixXd::Identity(pr.p, pr.p)));
  }
  return out;
}

std::vector<EigenDecomposition> solve_eei(const Problem& pr) {
  auto [lambda, delta] = split_volume(floor_positive(pr.W_total.diagonal() / pr.n_total));
  return replicate_dec(make_dec(lambda, delta, Eigen::MatrixXd::Identity(pr.p, pr.p)), pr.G);
}

std::vector<EigenDecomposition> solve_vvi(const Problem& pr) {
  std::vector<EigenDecomposition> out;
  for (std::size_t g = 0; g < pr.G; ++g) {
    auto [lambda, delta] = split_volume(floor_positive(pr.sc.W[g].diagonal() / pr.sc.n[g]));
    out.push_back(make_dec(lambda, delta, Eigen::MatrixXd::Identity(pr.p, pr.p)));
  }
  return out;
}

// Equal volume, variable shape, given per-component axis sums a_g:
// Delta_g = a_g / geomean(a_g), lambda = sum_g geomean(a_g) / n.
std::pair<double, std::vector<Eigen::VectorXd>> equal_volume_variable_shape(const std::vector<Eigen::VectorXd>& a,
                                                                            double n_total) {
  double sum = 0.0;
  std::vector<Eigen::VectorXd> shapes;
  for (const auto& ag : a) {
    auto [c, shape] = split_volume(floor_positive(ag));
    sum += c;
    shapes.push_back(std::move(shape));
  }
  return {sum / n_total, std::move(shapes)};
}

std::vector<EigenDecomposition> solve_evi(const Problem& pr) {
  std::vector<Eigen::VectorXd> a;
  for (std::size_t g = 0; g < pr.G; ++g) a.push_back(pr.sc.W[g].diagonal());
  auto [lambda, shapes] = equal_volume_variable_shape(a, pr.n_total);
  std::vector<EigenDecomposition> out;
  for (auto& s : shapes) out.push_back(make_dec(lambda, s, Eigen::MatrixXd::Identity(pr.p, pr.p)));
  return out;
}

// Variable volume, equal shape, shared fixed orientation, given per-component
// axis sums a_g. Block coordinate descent on a problem that is convex in
// (log lambda_g, log delta_j), so it reaches the global minimum.
struct VolumeShape {
  std::vector<double> lambdas;
  Eigen::VectorXd delta;
  int iterations = 0;
  bool converged = false;
};

VolumeShape variable_volume_equal_shape(const std::vector<Eigen::VectorXd>& a, const std::vector<double>& n,
                                        Eigen::Index p, double tol, int max_iter) {
  const std::size_t G = a.size();
  std::vector<Eigen::VectorXd> af;
  for (const auto& ag : a) af.push_back(floor_positive(ag));
  VolumeShape vs;
  vs.delta = Eigen::VectorXd::Ones(p);
  vs.lambdas.resize(G);
  const double pd = static_cast<double>(p);
  auto update_lambdas = [&] {
    for (std::size_t g = 0; g < G; ++g) vs.lambdas[g] = (af[g].array() / vs.delta.array()).sum() / (pd * n[g]);
  };
  auto objective = [&] {
    double f = 0.0;
    for (std::size_t g = 0; g < G; ++g)
      f += n[g] * pd * std::log(vs.lambdas[g]) + (af[g].array() / vs.delta.array()).sum() / vs.lambdas[g];
    return f;
  };
  update_lambdas();
  double f = objective();
  for (vs.iterations = 1; vs.iterations <= max_iter; ++vs.iterations) {
    Eigen::VectorXd s = Eigen::VectorXd::Zero(p);
    for (std::size_t g = 0; g < G; ++g) s += af[g] / vs.lambdas[g];
    vs.delta = split_volume(s).second;
    update_lambdas();
    const double f_new = objective();
    const double drop = f - f_new;
    f = f_new;
    if (drop < tol) {
      vs.converged = true;
      break;
    }
  }
  return vs;
}

constexpr double kConvexTolerance = 1e-12;
constexpr int kConvexMaxIterations = 10000;

std::vector<EigenDecomposition> solve_vei(const Problem& pr, SigmaUpdate& info) {
  std::vector<Eigen::VectorXd> a;
  for (std::size_t g = 0; g < pr.G; ++g) a.push_back(pr.sc.W[g].diagonal());
  auto vs = variable_volume_equal_shape(a, pr.sc.n, pr.p, kConvexTolerance, kConvexMaxIterations);
  info.inner_iterations = std::max(info.inner_iterations, vs.iterations);
  std::vector<EigenDecomposition> out;
  for (std::size_t g = 0; g < pr.G; ++g)
    out.push_back(make_dec(vs.lambdas[g], vs.delta, Eigen::MatrixXd::Identity(pr.p, pr.p)));
  return out;
}

std::vector<EigenDecomposition> solve_eee(const Problem& pr) {
  return replicate_dec(decompose(Eigen::MatrixXd(pr.W_total / pr.n_total)), pr.G);
}

std::vector<EigenDecomposition> solve_vvv(const Problem& pr) {
  std::vector<EigenDecomposition> out;
  for (std::size_t g = 0; g < pr.G; ++g) out.push_back(decompose(Eigen::MatrixXd(pr.sc.W[g] / pr.sc.n[g])));
  return out;
}

std::vector<EigenDecomposition> solve_eev(const Problem& pr) {
  std::vector<SymEigen> eig;
  Eigen::VectorXd s = Eigen::VectorXd::Zero(pr.p);
  for (std::size_t g = 0; g < pr.G; ++g) {
    eig.push_back(sym_eigen_desc(pr.sc.W[g]));
    s += eig.back().values.cwiseMax(0.0);
  }
  auto [c, shape] = split_volume(floor_positive(s));
  const double lambda = c / pr.n_total;
  std::vector<EigenDecomposition> out;
  for (std::size_t g = 0; g < pr.G; ++g) out.push_back(make_dec(lambda, shape, eig[g].vectors));
  return out;
}

std::vector<EigenDecomposition> solve_vev(const Problem& pr, SigmaUpdate& info) {
  std::vector<SymEigen> eig;
  std::vector<Eigen::VectorXd> omegas;
  for (std::size_t g = 0; g < pr.G; ++g) {
    eig.push_back(sym_eigen_desc(pr.sc.W[g]));
    omegas.push_back(eig.back().values.cwiseMax(0.0));
  }
  auto vs = variable_volume_equal_shape(omegas, pr.sc.n, pr.p, kConvexTolerance, kConvexMaxIterations);
  info.inner_iterations = std::max(info.inner_iterations, vs.iterations);
  std::vector<EigenDecomposition> out;
  for (std::size_t g = 0; g < pr.G; ++g) out.push_back(make_dec(vs.lambdas[g], vs.delta, eig[g].vectors));
  return out;
}

std::vector<EigenDecomposition> solve_evv(const Problem& pr) {
  std::vector<EigenDecomposition> out;
  double sum = 0.0;
  for (std::size_t g = 0; g < pr.G; ++g) {
    out.push_back(decompose(pr.sc.W[g]));
    sum += out.back().lambda;  // |W_g|^{1/p}
  }
  const double lambda = sum / pr.n_total;
  for (auto& d : out) d.lambda = lambda;
  return out;
}

// VEE: Sigma_g = lambda_g * C with |C| = 1. Alternates the closed-form
// C given volumes and volumes given C, from prev when given and otherwise
// from several feasible starts.
std::vector<EigenDecomposition> solve_vee(const Problem& pr, std::span<const EigenDecomposition> prev,
                                          const InnerOptions& opts, SigmaUpdate& info) {
  const double pd = static_cast<double>(pr.p);
  std::vector<Eigen::MatrixXd> starts;
  if (!prev.empty()) {
    EigenDecomposition c = prev[0];
    c.lambda = 1.0;
    starts.push_back(c.matrix());
  } else {
    Eigen::MatrixXd pooled = pr.W_total / pr.n_total;
    starts.push_back(pooled / std::pow(pooled.determinant(), 1.0 / pd));
    starts.push_back(Eigen::MatrixXd::Identity(pr.p, pr.p));
    std::vector<Eigen::VectorXd> a;
    for (std::size_t g = 0; g < pr.G; ++g) a.push_back(pr.sc.W[g].diagonal());
    auto vs = variable_volume_equal_shape(a, pr.sc.n, pr.p, kConvexTolerance, kConvexMaxIterations);
    starts.push_back(vs.delta.asDiagonal());
  }

  std::optional<std::vector<EigenDecomposition>> best;
  double best_f = std::numeric_limits<double>::infinity();
  for (const auto& c0 : starts) {
    Eigen::LLT<Eigen::MatrixXd> llt(c0);
    if (llt.info() != Eigen::Success) continue;
    Eigen::MatrixXd c = c0;
    std::vector<double> lambdas(pr.G);
    auto fit_volumes = [&](const Eigen::LLT<Eigen::MatrixXd>& f) {
      for (std::size_t g = 0; g < pr.G; ++g)
        lambdas[g] = std::max(f.solve(pr.sc.W[g]).trace() / (pd * pr.sc.n[g]), std::numeric_limits<double>::min());
    };
    auto assemble = [&] {
      EigenDecomposition shared = decompose(c);
      std::vector<EigenDecomposition> decs(pr.G, shared);
      for (std::size_t g = 0; g < pr.G; ++g) decs[g].lambda = lambdas[g] * shared.lambda;
      return decs;
    };
    fit_volumes(llt);
    auto decs = assemble();
    double f = scatter_objective(pr.sc, decs);
    bool converged = false;
    int it = 0;
    for (it = 1; it <= opts.max_iterations; ++it) {
      Eigen::MatrixXd s = Eigen::MatrixXd::Zero(pr.p, pr.p);
      for (std::size_t g = 0; g < pr.G; ++g) s += pr.sc.W[g] / lambdas[g];
      s = 0.5 * (s + s.transpose());
      const double det = s.determinant();
      if (!(det > 0)) break;
      Eigen::MatrixXd c_new = s / std::pow(det, 1.0 / pd);
      Eigen::LLT<Eigen::MatrixXd> f_llt(c_new);
      if (f_llt.info() != Eigen::Success) break;
      const std::vector<double> old_lambdas = lambdas;
      const Eigen::MatrixXd old_c = c;
      c = c_new;
      fit_volumes(f_llt);
      auto trial = assemble();
      const double f_new = scatter_objective(pr.sc, trial);
      if (f_new > f) {  // rounding only; keep the better iterate
        c = old_c;
        lambdas = old_lambdas;
        converged = true;
        break;
      }
      const double drop = f - f_new;
      decs = std::move(trial);
      f = f_new;
      if (drop < opts.tolerance) {
        converged = true;
        break;
      }
    }
    info.inner_iterations = std::max(info.inner_iterations, it);
    if (f < best_f) {
      best_f = f;
      best = std::move(decs);
      info.inner_converged = converged;
    }
  }
  if (!best) throw NotPositiveDefinite("VEE update: no feasible start");
  return *best;
}

// Shared-orientation structures (EVE, VVE). Given the orientation D the
// per-component diagonal factors have closed forms; D itself is improved by
// majorization-minimization: writing W_g = w_g I - K_g with K_g PSD, the
// linearization of the concave part gives a Procrustes problem
// max tr(D' sum_g K_g D_k M_g), solved by SVD. Each inner iteration follows
// the MM step with one sweep of exact plane rotations of D, which copes with
// badly conditioned W_g where MM alone crawls.
class SharedOrientationSolver {
 public:
  SharedOrientationSolver(const Problem& pr, bool equal_volume) : pr_(pr), equal_volume_(equal_volume) {
    for (std::size_t g = 0; g < pr.G; ++g) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(pr.sc.W[g], Eigen::EigenvaluesOnly);
      top_eig_.push_back(es.eigenvalues().maxCoeff());
    }
  }

  // Closed-form diagonal factors for a fixed D.
  std::vector<EigenDecomposition> fit_given(const Eigen::MatrixXd& d) const {
    std::vector<Eigen::VectorXd> a;
    for (std::size_t g = 0; g < pr_.G; ++g) a.push_back((d.transpose() * pr_.sc.W[g] * d).diagonal());
    std::vector<EigenDecomposition> out;
    if (equal_volume_) {
      auto [lambda, shapes] = equal_volume_variable_shape(a, pr_.n_total);
      for (auto& s : shapes) out.push_back(make_dec(lambda, s, d));
    } else {
      for (std::size_t g = 0; g < pr_.G; ++g) {
        auto [lambda, shape] = split_volume(floor_positive(a[g] / pr_.sc.n[g]));
        out.push_back(make_dec(lambda, shape, d));
      }
    }
    return out;
  }

  Eigen::MatrixXd mm_step(const std::vector<EigenDecomposition>& decs) const {
    const Eigen::MatrixXd& d = decs[0].gamma;
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(pr_.p, pr_.p);
    for (std::size_t g = 0; g < pr_.G; ++g) {
      const Eigen::VectorXd m = (decs[g].lambda * decs[g].delta.array()).inverse().matrix();
      const Eigen::MatrixXd kd = top_eig_[g] * d - pr_.sc.W[g] * d;
      h += kd * m.asDiagonal();
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixU() * svd.matrixV().transpose();
  }

  // One cyclic sweep over column pairs (j, k) of D. With M_g fixed, the
  // objective along a rotation by t is c + P cos 2t + Q sin 2t, minimized
  // exactly.
  Eigen::MatrixXd rotation_sweep(const std::vector<EigenDecomposition>& decs) const {
    Eigen::MatrixXd d = decs[0].gamma;
    std::vector<Eigen::MatrixXd> a;
    std::vector<Eigen::VectorXd> m;
    for (std::size_t g = 0; g < pr_.G; ++g) {
      a.push_back(d.transpose() * pr_.sc.W[g] * d);
      m.push_back((decs[g].lambda * decs[g].delta.array()).inverse().matrix());
    }
    for (Eigen::Index j = 0; j < pr_.p; ++j) {
      for (Eigen::Index k = j + 1; k < pr_.p; ++k) {
        double P = 0.0, Q = 0.0;
        for (std::size_t g = 0; g < pr_.G; ++g) {
          const double dm = m[g](j) - m[g](k);
          P += 0.5 * dm * (a[g](j, j) - a[g](k, k));
          Q += dm * a[g](j, k);
        }
        const double r = std::hypot(P, Q);
        if (!(r > 0.0) || P + r <= 1e-15 * r) continue;
        const double t = 0.5 * std::atan2(-Q, -P);
        const double c = std::cos(t), sn = std::sin(t);
        const Eigen::VectorXd dj = d.col(j), dk = d.col(k);
        d.col(j) = c * dj + sn * dk;
        d.col(k) = c * dk - sn * dj;
        for (auto& ag : a) {
          const Eigen::VectorXd aj = ag.col(j), ak = ag.col(k);
          ag.col(j) = c * aj + sn * ak;
          ag.col(k) = c * ak - sn * aj;
          const Eigen::RowVectorXd rj = ag.row(j), rk = ag.row(k);
          ag.row(j) = c * rj + sn * rk;
          ag.row(k) = c * rk - sn * rj;
        }
      }
    }
    return d;
  }

  struct Outcome {
    std::vector<EigenDecomposition> decs;
    double f;
    int iterations;
    bool converged;
  };

  Outcome run(const Eigen::MatrixXd& d0, const InnerOptions& opts) const {
    auto decs = fit_given(d0);
    double f = scatter_objective(pr_.sc, decs);
    int it = 0;
    bool converged = false;
    for (it = 1; it <= opts.max_iterations; ++it) {
      auto trial = fit_given(mm_step(decs));
      double f_new = scatter_objective(pr_.sc, trial);
      if (pr_.p > 1) {
        auto rotated = fit_given(rotation_sweep(f_new <= f ? trial : decs));
        const double f_rot = scatter_objective(pr_.sc, rotated);
        if (f_rot < f_new) {
          trial = std::move(rotated);
          f_new = f_rot;
        }
      }
      if (!(f_new <= f)) {  // rounding noise at the optimum
        converged = true;
        break;
      }
      const double drop = f - f_new;
      decs = std::move(trial);
      f = f_new;
      if (drop < opts.tolerance) {
        converged = true;
        break;
      }
    }
    return {std::move(decs), f, it, converged};
  }

 private:
  const Problem& pr_;
  bool equal_volume_;
  std::vector<double> top_eig_;
};

std::vector<EigenDecomposition> solve_shared_orientation(const Problem& pr, bool equal_volume,
                                                         std::span<const EigenDecomposition> prev,
                                                         const InnerOptions& opts, SigmaUpdate& info) {
  SharedOrientationSolver solver(pr, equal_volume);
  std::vector<Eigen::MatrixXd> starts;
  if (!prev.empty()) {
    starts.push_back(prev[0].gamma);
  } else {
    starts.push_back(decompose(Eigen::MatrixXd(pr.W_total / pr.n_total)).gamma);
    starts.push_back(Eigen::MatrixXd::Identity(pr.p, pr.p));
  }
  std::optional<SharedOrientationSolver::Outcome> best;
  for (const auto& d0 : starts) {
    auto out = solver.run(d0, opts);
    info.inner_iterations = std::max(info.inner_iterations, out.iterations);
    if (!best || out.f < best->f) best = std::move(out);
  }
  info.inner_converged = best->converged;
  return std::move(best->decs);
}

bool needs_ridge(const Eigen::MatrixXd& w, double n_g, Eigen::Index p) {
  if (n_g < static_cast<double>(p)) return true;
  Eigen::LLT<Eigen::MatrixXd> llt(w);
  if (llt.info() != Eigen::Success) return true;
  return (llt.matrixLLT().diagonal().array() <= 0.0).any();
}

}  // namespace

std::string_view to_string(StructureId s) { return kNames[static_cast<std::size_t>(s)]; }

StructureId parse_structure(std::string_view code) {
  std::string upper(code);
  for (auto& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  for (std::size_t i = 0; i < kNames.size(); ++i)
    if (kNames[i] == upper) return kAllStructures[i];
  throw std::invalid_argument("unknown covariance structure '" + std::string(code) + "'");
}

StructurePattern pattern_of(StructureId s) {
  using enum StructureId;
  switch (s) {
    case EII: return {Share::Equal, ShapeKind::Spherical, OrientationKind::AxisAligned};
    case VII: return {Share::Variable, ShapeKind::Spherical, OrientationKind::AxisAligned};
    case EEI: return {Share::Equal, ShapeKind::Equal, OrientationKind::AxisAligned};
    case VEI: return {Share::Variable, ShapeKind::Equal, OrientationKind::AxisAligned};
    case EVI: return {Share::Equal, ShapeKind::Variable, OrientationKind::AxisAligned};
    case VVI: return {Share::Variable, ShapeKind::Variable, OrientationKind::AxisAligned};
    case EEE: return {Share::Equal, ShapeKind::Equal, OrientationKind::Equal};
    case VEE: return {Share::Variable, ShapeKind::Equal, OrientationKind::Equal};
    case EVE: return {Share::Equal, ShapeKind::Variable, OrientationKind::Equal};
    case EEV: return {Share::Equal, ShapeKind::Equal, OrientationKind::Variable};
    case VVE: return {Share::Variable, ShapeKind::Variable, OrientationKind::Equal};
    case VEV: return {Share::Variable, ShapeKind::Equal, OrientationKind::Variable};
    case EVV: return {Share::Equal, ShapeKind::Variable, OrientationKind::Variable};
    case VVV: return {Share::Variable, ShapeKind::Variable, OrientationKind::Variable};
  }
  throw std::invalid_argument("bad structure id");
}

Eigen::MatrixXd EigenDecomposition::matrix() const {
  Eigen::MatrixXd m = lambda * gamma * delta.asDiagonal() * gamma.transpose();
  return 0.5 * (m + m.transpose());
}

EigenDecomposition decompose(const Eigen::MatrixXd& sigma) {
  if (sigma.rows() != sigma.cols() || sigma.rows() == 0) throw DimensionError("decompose: matrix must be square");
  auto eig = sym_eigen_desc(sigma);
  if (!(eig.values.array() > 0.0).all() || !eig.values.allFinite())
    throw NotPositiveDefinite("decompose: matrix is not positive definite");
  auto [lambda, delta] = split_volume(eig.values);
  return make_dec(lambda, std::move(delta), std::move(eig.vectors));
}

EigenDecomposition decompose(const CovMatrix& sigma) { return decompose(sigma.matrix()); }

CovMatrix compose(const EigenDecomposition& d) {
  const Eigen::Index p = d.delta.size();
  if (p == 0 || d.gamma.rows() != p || d.gamma.cols() != p) throw DimensionError("compose: inconsistent sizes");
  if (!(d.lambda > 0) || !(d.delta.array() > 0).all()) throw NotPositiveDefinite("compose: non-positive factor");
  return CovMatrix(d.matrix());
}

long sigma_param_count(StructureId s, long G, long p) {
  using enum StructureId;
  const long rot = p * (p - 1) / 2;
  switch (s) {
    case EII: return 1;
    case VII: return G;
    case EEI: return p;
    case VEI: return G + p - 1;
    case EVI: return 1 + G * (p - 1);
    case VVI: return G * p;
    case EEE: return p * (p + 1) / 2;
    case VEE: return G + p - 1 + rot;
    case EVE: return 1 + G * (p - 1) + rot;
    case EEV: return p + G * rot;
    case VVE: return G * p + rot;
    case VEV: return G + p - 1 + G * rot;
    case EVV: return 1 + G * (p - 1) + G * rot;
    case VVV: return G * p * (p + 1) / 2;
  }
  return 0;
}

double scatter_objective(const ScatterSet& scatter, std::span<const EigenDecomposition> decs) {
  if (decs.size() != scatter.size()) throw DimensionError("scatter_objective: size mismatch");
  double f = 0.0;
  for (std::size_t g = 0; g < decs.size(); ++g) {
    const auto& d = decs[g];
    const double p = static_cast<double>(d.delta.size());
    const double log_det = p * std::log(d.lambda) + d.delta.array().log().sum();
    const Eigen::VectorXd rotated = (d.gamma.transpose() * scatter.W[g] * d.gamma).diagonal();
    f += scatter.n[g] * log_det + (rotated.array() / d.delta.array()).sum() / d.lambda;
  }
  return f;
}

double scatter_objective(const ScatterSet& scatter, std::span<const Eigen::MatrixXd> sigmas) {
  if (sigmas.size() != scatter.size()) throw DimensionError("scatter_objective: size mismatch");
  double f = 0.0;
  for (std::size_t g = 0; g < sigmas.size(); ++g) {
    CovMatrix c(sigmas[g]);
    f += scatter.n[g] * c.log_det() + c.llt().solve(scatter.W[g]).trace();
  }
  return f;
}

SigmaUpdate update_sigmas(StructureId s, const ScatterSet& scatter, std::span<const EigenDecomposition> prev,
                          const InnerOptions& opts) {
  if (scatter.W.empty() || scatter.W.size() != scatter.n.size())
    throw DimensionError("update_sigmas: empty or inconsistent scatter set");
  const Eigen::Index p = scatter.W[0].rows();
  SigmaUpdate info;

  ScatterSet sc = scatter;
  for (std::size_t g = 0; g < sc.size(); ++g) {
    if (sc.W[g].rows() != p || sc.W[g].cols() != p) throw DimensionError("update_sigmas: W dimension mismatch");
    if (!(sc.n[g] > 0)) throw ComponentDeath(static_cast<int>(g), sc.n[g]);
    sc.W[g] = 0.5 * (sc.W[g] + sc.W[g].transpose());
    if (needs_ridge(sc.W[g], sc.n[g], p)) {
      double base = sc.W[g].trace() / static_cast<double>(p);
      if (!(base > 0)) base = 1.0;
      sc.W[g] += 1e-8 * base * Eigen::MatrixXd::Identity(p, p);
      info.regularized = true;
    }
  }
  if (!prev.empty() && prev.size() != sc.size()) prev = {};

  Problem pr{sc, p, sc.size(), std::accumulate(sc.n.begin(), sc.n.end(), 0.0), Eigen::MatrixXd::Zero(p, p)};
  for (const auto& w : sc.W) pr.W_total += w;

  using enum StructureId;
  if (pr.G == 1) {
    // one component: only the spherical / diagonal / general split matters
    const auto pat = pattern_of(s);
    s = pat.shape == ShapeKind::Spherical                ? EII
        : pat.orientation == OrientationKind::AxisAligned ? EEI
                                                          : EEE;
  }
  switch (s) {
    case EII: info.decs = solve_eii(pr); break;
    case VII: info.decs = solve_vii(pr); break;
    case EEI: info.decs = solve_eei(pr); break;
    case VEI: info.decs = solve_vei(pr, info); break;
    case EVI: info.decs = solve_evi(pr); break;
    case VVI: info.decs = solve_vvi(pr); break;
    case EEE: info.decs = solve_eee(pr); break;
    case VEE: info.decs = solve_vee(pr, prev, opts, info); break;
    case EVE: info.decs = solve_shared_orientation(pr, true, prev, opts, info); break;
    case EEV: info.decs = solve_eev(pr); break;
    case VVE: info.decs = solve_shared_orientation(pr, false, prev, opts, info); break;
    case VEV: info.decs = solve_vev(pr, info); break;
    case EVV: info.decs = solve_evv(pr); break;
    case VVV: info.decs = solve_vvv(pr); break;
  }
  return info;
}

std::vector<EigenDecomposition> project_structure(StructureId s, std::span<const EigenDecomposition> decs) {
  if (s == StructureId::VVV) return {decs.begin(), decs.end()};
  ScatterSet sc;
  for (const auto& d : decs) {
    sc.W.push_back(d.matrix());
    sc.n.push_back(1.0);
  }
  std::vector<EigenDecomposition> prev;
  if (satisfies_pattern(s, decs)) prev.assign(decs.begin(), decs.end());
  return update_sigmas(s, sc, prev).decs;
}

bool satisfies_pattern(StructureId s, std::span<const EigenDecomposition> decs) {
  if (decs.empty()) return false;
  const auto pat = pattern_of(s);
  const Eigen::Index p = decs[0].delta.size();
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(p, p);
  for (const auto& d : decs) {
    if (d.delta.size() != p || d.gamma.rows() != p) return false;
    if (pat.shape == ShapeKind::Spherical && d.delta != Eigen::VectorXd::Ones(p)) return false;
    if (pat.orientation == OrientationKind::AxisAligned && d.gamma != eye) return false;
    if (pat.volume == Share::Equal && d.lambda != decs[0].lambda) return false;
    if (pat.shape == ShapeKind::Equal && d.delta != decs[0].delta) return false;
    if (pat.orientation == OrientationKind::Equal && d.gamma != decs[0].gamma) return false;
  }
  return true;
}

}  // namespace pmcgd

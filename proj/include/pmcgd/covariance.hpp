#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "pmcgd/gaussian.hpp"

namespace pmcgd {

// The fourteen eigen-decomposed covariance structures. Letters give
// volume / shape / orientation: E = equal across components, V = variable,
// I = identity (spherical shape or axis-aligned orientation).
enum class StructureId { EII, VII, EEI, VEI, EVI, VVI, EEE, VEE, EVE, EEV, VVE, VEV, EVV, VVV };

inline constexpr std::array<StructureId, 14> kAllStructures = {
    StructureId::EII, StructureId::VII, StructureId::EEI, StructureId::VEI, StructureId::EVI,
    StructureId::VVI, StructureId::EEE, StructureId::VEE, StructureId::EVE, StructureId::EEV,
    StructureId::VVE, StructureId::VEV, StructureId::EVV, StructureId::VVV};

std::string_view to_string(StructureId s);
StructureId parse_structure(std::string_view code);

enum class Share { Equal, Variable };
enum class ShapeKind { Spherical, Equal, Variable };
enum class OrientationKind { AxisAligned, Equal, Variable };

struct StructurePattern {
  Share volume;
  ShapeKind shape;
  OrientationKind orientation;
};

StructurePattern pattern_of(StructureId s);

// Sigma = lambda * Gamma * diag(delta) * Gamma', with prod(delta) = 1.
struct EigenDecomposition {
  double lambda = 1.0;
  Eigen::VectorXd delta;
  Eigen::MatrixXd gamma;

  Eigen::MatrixXd matrix() const;
};

// Volume |Sigma|^{1/p}, unit-determinant shape sorted decreasing, and
// sign-normalized eigenvectors (first nonzero entry positive; ties broken
// lexicographically).
EigenDecomposition decompose(const CovMatrix& sigma);
EigenDecomposition decompose(const Eigen::MatrixXd& sigma);

CovMatrix compose(const EigenDecomposition& d);

// Free parameters in Sigma_1..Sigma_G for the structure.
long sigma_param_count(StructureId s, long G, long p);

// Weighted scattering matrices W_g with effective sizes n_g.
struct ScatterSet {
  std::vector<Eigen::MatrixXd> W;
  std::vector<double> n;

  std::size_t size() const { return W.size(); }
};

struct InnerOptions {
  double tolerance = 1e-8;  // absolute decrease of F between inner sweeps
  int max_iterations = 100;
};

struct SigmaUpdate {
  std::vector<EigenDecomposition> decs;
  bool regularized = false;       // a ridge was added to some W_g
  bool inner_converged = true;    // false if an iterative structure hit its cap
  int inner_iterations = 0;
};

// F = sum_g n_g ln|Sigma_g| + tr(W_g Sigma_g^{-1}).
double scatter_objective(const ScatterSet& scatter, std::span<const EigenDecomposition> decs);
double scatter_objective(const ScatterSet& scatter, std::span<const Eigen::MatrixXd> sigmas);

// Minimizes F subject to the structure's equality pattern. `prev` (may be
// empty) warm-starts the iterative structures; the result never has a larger
// F than prev when prev is feasible.
SigmaUpdate update_sigmas(StructureId s, const ScatterSet& scatter,
                          std::span<const EigenDecomposition> prev, const InnerOptions& opts = {});

// Maps arbitrary per-component decompositions onto the structure's pattern
// by refitting with each composed matrix as a unit-weight scatter.
std::vector<EigenDecomposition> project_structure(StructureId s, std::span<const EigenDecomposition> decs);

// True when shared factors are bit-identical across components and
// identity/spherical factors are exact.
bool satisfies_pattern(StructureId s, std::span<const EigenDecomposition> decs);

}  // namespace pmcgd

#pragma once

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "pmcgd/covariance.hpp"
#include "pmcgd/data.hpp"
#include "pmcgd/ecm.hpp"

namespace pmcgd {

struct ComponentSpec {
  Eigen::VectorXd mean;
  EigenDecomposition sigma;
  int size = 0;
};

using Bounds = std::vector<std::pair<double, double>>;  // per-dimension [lo, hi]

struct ScenarioSpec {
  std::vector<ComponentSpec> components;
  int noise_count = 0;
  Bounds noise_bounds;
  std::uint64_t seed = 0;

  void validate() const;
};

struct LabeledSample {
  DataMatrix data;
  std::vector<int> true_component;  // 1-based; 0 marks noise
  std::vector<bool> true_bad;
};

// Two equal-volume bivariate components with a shared orientation and
// different shapes (an EVE configuration), 90 points each, plus 20 uniform
// noise points on [-10, 10]^2.
ScenarioSpec eve_noise_scenario(std::uint64_t seed);

// Gaussian draws per component (noise_count is ignored here).
LabeledSample sample_gpcm(const ScenarioSpec& spec);

// sample_gpcm followed by add_uniform_noise with the scenario's noise settings.
LabeledSample sample_scenario(const ScenarioSpec& spec);

LabeledSample add_uniform_noise(LabeledSample sample, int count, const Bounds& bounds, std::uint64_t seed);

// Copy of X with cell (row, dim) replaced by value.
DataMatrix perturb_observation(const DataMatrix& X, Eigen::Index row, Eigen::Index dim, double value);

// Component g ~ pi, then good with probability alpha_g (covariance Sigma_g)
// or bad (covariance eta_g * Sigma_g).
LabeledSample sample_contaminated(const ModelParams& psi, int n, std::uint64_t seed);

// Columns: features..., true_component, true_bad.
void write_labeled_csv(const LabeledSample& sample, std::ostream& out);

}  // namespace pmcgd

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pmcgd/covariance.hpp"
#include "pmcgd/data.hpp"
#include "pmcgd/ecm.hpp"

namespace pmcgd {

// Free parameters of a contaminated model: Sigma count + G*p means +
// (G-1) weights + G alphas + G etas. With contaminated = false the alpha
// and eta terms are dropped (the Gaussian-mixture count).
long count_free_params(StructureId s, long G, long p, bool contaminated = true);

// Larger is better: 2 * loglik - m * ln(n).
double bic(double loglik, long m, long n);

struct SweepGrid {
  std::vector<StructureId> structures;
  std::vector<int> g_values;
  FitConfig config;
  unsigned workers = 0;  // 0 = hardware concurrency

  void validate() const;
};

struct RankedEntry {
  StructureId structure;
  int G;
  FitResult fit;
  long m;
  double bic;
};

struct FailedFit {
  StructureId structure;
  int G;
  std::string error;
};

struct RankedResults {
  std::vector<RankedEntry> entries;  // sorted by bic, best first
  std::vector<FailedFit> failures;

  const RankedEntry& best() const { return entries.front(); }
};

// Fits every (structure, G) pair and ranks the successful fits by BIC.
// Output does not depend on the number of workers.
RankedResults sweep(const DataMatrix& X, const SweepGrid& grid);

}  // namespace pmcgd

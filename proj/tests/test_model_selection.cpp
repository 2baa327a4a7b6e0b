#include <cmath>
#include <random>

#include "doctest.h"

#include "pmcgd/errors.hpp"
#include "pmcgd/model_selection.hpp"

using namespace pmcgd;

namespace {

DataMatrix gaussian_sample(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd X(n, 2);
  for (int i = 0; i < n; ++i) X(i, 0) = nd(rng), X(i, 1) = 0.5 * X(i, 0) + nd(rng);
  return DataMatrix(X);
}

}  // namespace

TEST_CASE("parameter counts") {
  CHECK(count_free_params(StructureId::VVV, 2, 2) == 15);
  CHECK(count_free_params(StructureId::EII, 1, 3) == 6);
  CHECK(count_free_params(StructureId::VVV, 2, 2, false) == 11);
  CHECK(sigma_param_count(StructureId::VVV, 3, 2) == 9);
  CHECK(sigma_param_count(StructureId::EII, 5, 7) == 1);
  CHECK(sigma_param_count(StructureId::VEE, 2, 3) == 7);
  for (auto s : kAllStructures)
    for (long G = 1; G <= 4; ++G)
      CHECK(count_free_params(s, G, 4) - count_free_params(s, G, 4, false) == 2 * G);
}

TEST_CASE("BIC arithmetic") {
  CHECK(bic(-100.0, 15, 100) == doctest::Approx(-200.0 - 15.0 * std::log(100.0)).epsilon(1e-14));
  CHECK(bic(-100.0, 15, 100) == doctest::Approx(-269.0775528).epsilon(1e-9));
  CHECK(bic(-42.0, 0, 10) == -84.0);
  CHECK(bic(-42.0, 7, 1) == -84.0);
  CHECK_THROWS(bic(-1.0, 1, 0));
}

TEST_CASE("sweep ranks by BIC and picks one component for Gaussian data") {
  int g1_wins = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    SweepGrid grid{{StructureId::VVV}, {1, 2}, FitConfig{}, 1};
    const auto X = gaussian_sample(150, seed);
    const auto ranked = sweep(X, grid);
    REQUIRE(ranked.entries.size() + ranked.failures.size() == 2);
    for (std::size_t k = 1; k < ranked.entries.size(); ++k)
      CHECK(ranked.entries[k - 1].bic >= ranked.entries[k].bic);
    for (const auto& e : ranked.entries) {
      CHECK(e.m == count_free_params(e.structure, e.G, 2));
      CHECK(e.bic == doctest::Approx(bic(e.fit.loglik(), e.m, 150)));
    }
    if (ranked.best().G == 1) ++g1_wins;
  }
  CHECK(g1_wins >= 4);
}

TEST_CASE("sweep with one pair and worker-independent output") {
  const auto X = gaussian_sample(60, 9);
  SweepGrid one{{StructureId::EEE}, {2}, FitConfig{}, 1};
  CHECK(sweep(X, one).entries.size() == 1);

  SweepGrid grid{{StructureId::EII, StructureId::VVV, StructureId::EVE}, {1, 2}, FitConfig{}, 1};
  const auto a = sweep(X, grid);
  grid.workers = 3;
  const auto b = sweep(X, grid);
  REQUIRE(a.entries.size() == b.entries.size());
  for (std::size_t k = 0; k < a.entries.size(); ++k) {
    CHECK(a.entries[k].structure == b.entries[k].structure);
    CHECK(a.entries[k].G == b.entries[k].G);
    CHECK(a.entries[k].bic == b.entries[k].bic);
  }
}

TEST_CASE("sweep records failures and fails when nothing fits") {
  Eigen::MatrixXd X(3, 2);
  X << 0, 0, 1, 1, 2, 2.5;
  SweepGrid grid{{StructureId::VVV}, {4}, FitConfig{}, 1};
  CHECK_THROWS(sweep(DataMatrix(X), grid));
}

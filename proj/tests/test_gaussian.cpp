#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "doctest.h"

#include "pmcgd/errors.hpp"
#include "pmcgd/gaussian.hpp"

using namespace pmcgd;

namespace {

// Density by the textbook formula, inverse and determinant via full-pivot LU.
double naive_pdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mu, const Eigen::MatrixXd& S) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(S);
  const Eigen::VectorXd d = x - mu;
  const double q = d.dot(lu.inverse() * d);
  const double p = static_cast<double>(x.size());
  return std::exp(-0.5 * q) / std::sqrt(std::pow(2.0 * std::numbers::pi, p) * lu.determinant());
}

Eigen::MatrixXd random_spd(std::mt19937_64& rng, int p) {
  std::normal_distribution<double> nd;
  Eigen::MatrixXd A(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) A(i, j) = nd(rng);
  return A * A.transpose() + 0.5 * Eigen::MatrixXd::Identity(p, p);
}

}  // namespace

TEST_CASE("log_sum_exp") {
  std::vector<double> v{std::log(1.0), std::log(2.0), std::log(3.0)};
  CHECK(log_sum_exp(v) == doctest::Approx(std::log(6.0)).epsilon(1e-14));
  std::vector<double> big{1000.0, 1000.0};
  CHECK(log_sum_exp(big) == doctest::Approx(1000.0 + std::log(2.0)));
  std::vector<double> empty;
  CHECK(log_sum_exp(empty) == -std::numeric_limits<double>::infinity());
  const double ninf = -std::numeric_limits<double>::infinity();
  std::vector<double> all_ninf{ninf, ninf};
  CHECK(log_sum_exp(all_ninf) == ninf);
  std::vector<double> mixed{ninf, 0.0};
  CHECK(log_sum_exp(mixed) == doctest::Approx(0.0));
}

TEST_CASE("CovMatrix validation") {
  Eigen::MatrixXd ns(2, 2);
  ns << 1, 0.5, 0.4, 1;
  CHECK_THROWS_AS(CovMatrix{ns}, NotPositiveDefinite);
  Eigen::MatrixXd indef(2, 2);
  indef << 1, 2, 2, 1;
  CHECK_THROWS_AS(CovMatrix{indef}, NotPositiveDefinite);
  CHECK_THROWS_AS(CovMatrix{Eigen::MatrixXd(2, 3)}, DimensionError);
  Eigen::MatrixXd S(2, 2);
  S << 2, 0.3, 0.3, 1;
  CovMatrix c(S);
  CHECK(c.log_det() == doctest::Approx(std::log(S.determinant())).epsilon(1e-13));
  Eigen::Vector2d v(1.0, -2.0);
  CHECK(c.quad_form(v) == doctest::Approx(v.dot(S.inverse() * v)).epsilon(1e-13));
}

TEST_CASE("Gaussian density matches the textbook formula") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  for (int p : {1, 2, 3, 5}) {
    for (int rep = 0; rep < 10; ++rep) {
      const Eigen::MatrixXd S = random_spd(rng, p);
      Eigen::VectorXd mu(p), x(p);
      for (int k = 0; k < p; ++k) {
        mu(k) = nd(rng);
        x(k) = nd(rng);
      }
      CovMatrix c(S);
      CHECK(std::exp(log_gaussian_pdf(x, mu, c)) == doctest::Approx(naive_pdf(x, mu, S)).epsilon(1e-11));
      CHECK(mahalanobis_sq(x, mu, c) == doctest::Approx((x - mu).dot(S.inverse() * (x - mu))).epsilon(1e-11));
    }
  }
}

TEST_CASE("contaminated density is the alpha-weighted blend") {
  std::mt19937_64 rng(11);
  const Eigen::MatrixXd S = random_spd(rng, 3);
  const Eigen::Vector3d mu(0.1, -0.2, 0.3), x(1.0, 0.5, -1.5);
  for (double alpha : {0.5, 0.8, 0.99, 1.0}) {
    for (double eta : {1.0, 2.0, 50.0}) {
      ComponentParams comp{1.0, alpha, mu, CovMatrix(S), eta};
      const double expect = alpha * naive_pdf(x, mu, S) + (1 - alpha) * naive_pdf(x, mu, eta * S);
      CHECK(std::exp(contaminated_log_pdf(x, comp)) == doctest::Approx(expect).epsilon(1e-11));
    }
  }
  // alpha = 1 drops the inflated term entirely
  auto [good, bad] = contaminated_log_terms(1.0, 0.0, 2, 1.0, 5.0);
  CHECK(std::isfinite(good));
  CHECK(bad == -std::numeric_limits<double>::infinity());
}

TEST_CASE("contaminated density integrates to one") {
  Eigen::MatrixXd S(2, 2);
  S << 1.0, 0.4, 0.4, 0.5;
  ComponentParams comp{1.0, 0.7, Eigen::Vector2d(0.5, -0.5), CovMatrix(S), 4.0};
  const double h = 0.05;
  double total = 0.0;
  for (double a = -15.0; a < 15.0; a += h)
    for (double b = -15.0; b < 15.0; b += h)
      total += std::exp(contaminated_log_pdf(Eigen::Vector2d(a + h / 2, b + h / 2), comp)) * h * h;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("mixture density equals the brute-force sum") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> u(0.5, 1.0);
  for (int rep = 0; rep < 50; ++rep) {
    const int p = 1 + rep % 4;
    const int G = 1 + rep % 3;
    std::vector<ComponentParams> comps;
    std::vector<double> w(G);
    double tot = 0.0;
    for (auto& x : w) tot += (x = u(rng));
    for (int g = 0; g < G; ++g) {
      Eigen::VectorXd mu(p);
      for (int k = 0; k < p; ++k) mu(k) = nd(rng);
      comps.push_back({w[g] / tot, u(rng), mu, CovMatrix(random_spd(rng, p)), 1.0 + 10 * u(rng)});
    }
    Eigen::VectorXd x(p);
    for (int k = 0; k < p; ++k) x(k) = nd(rng);
    double brute = 0.0;
    for (const auto& c : comps)
      brute += c.pi * (c.alpha * naive_pdf(x, c.mu, c.sigma.matrix()) +
                       (1 - c.alpha) * naive_pdf(x, c.mu, c.eta * c.sigma.matrix()));
    CHECK(std::exp(mixture_log_pdf(x, comps)) == doctest::Approx(brute).epsilon(1e-12));
  }
}

TEST_CASE("mixture density rejects bad weights and far points stay finite") {
  ComponentParams a{0.5, 0.9, Eigen::Vector2d::Zero(), CovMatrix(Eigen::Matrix2d::Identity()), 10.0};
  ComponentParams b = a;
  b.pi = 0.6;
  std::vector<ComponentParams> comps{a, b};
  CHECK_THROWS_AS(mixture_log_pdf(Eigen::Vector2d::Zero(), comps), std::invalid_argument);
  comps[1].pi = 0.5;
  const double far = mixture_log_pdf(Eigen::Vector2d(1e3, -1e3), comps);
  CHECK(std::isfinite(far));
  CHECK(far < -1e4);
}

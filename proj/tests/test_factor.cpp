#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "nsdfm/factor.hpp"
#include "nsdfm/rng.hpp"

namespace {

// exact r-factor panel: x = Lambda * F, no idiosyncratic noise
Eigen::MatrixXd exact_factor_panel(int n, int r, int cols, std::uint64_t seed,
                                   Eigen::MatrixXd* lambda_out = nullptr) {
  nsdfm::RngStream rng(seed);
  Eigen::MatrixXd lambda(n, r);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < r; ++j) lambda(i, j) = rng.normal();
  Eigen::MatrixXd f(r, cols);
  for (int j = 0; j < r; ++j) {
    double level = 0.0;
    for (int t = 0; t < cols; ++t) {
      level += rng.normal();
      f(j, t) = level;
    }
  }
  if (lambda_out) *lambda_out = lambda;
  return lambda * f;
}

}  // namespace

TEST_CASE("uncentered covariance matches the direct formula") {
  Eigen::MatrixXd d(2, 3);
  d << 1, 2, 3,
       0, -1, 1;
  const Eigen::MatrixXd g = nsdfm::covariance_uncentered(d);
  // g = d d' / 3
  REQUIRE(g(0, 0) == Catch::Approx(14.0 / 3.0).epsilon(1e-14));
  REQUIRE(g(0, 1) == Catch::Approx(1.0 / 3.0).epsilon(1e-14));
  REQUIRE(g(1, 0) == Catch::Approx(1.0 / 3.0).epsilon(1e-14));
  REQUIRE(g(1, 1) == Catch::Approx(2.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("top_eigen solves a 2x2 problem exactly") {
  Eigen::MatrixXd s(2, 2);
  s << 2, 1,
       1, 2;
  auto [vals, vecs] = nsdfm::top_eigen(s, 2);
  // eigenvalues 3 and 1, eigenvectors (1,1)/sqrt(2) and (1,-1)/sqrt(2)
  REQUIRE(std::abs(vals(0) - 3.0) < 1e-10);
  REQUIRE(std::abs(vals(1) - 1.0) < 1e-10);
  const double s2 = 1.0 / std::sqrt(2.0);
  REQUIRE(std::abs(vecs(0, 0) - s2) < 1e-10);
  REQUIRE(std::abs(vecs(1, 0) - s2) < 1e-10);
  // sign rule: the entry of largest magnitude (ties: first) is positive
  REQUIRE(std::abs(vecs(0, 1) - s2) < 1e-10);
  REQUIRE(std::abs(vecs(1, 1) + s2) < 1e-10);
}

TEST_CASE("top_eigen rejects asymmetric input") {
  Eigen::MatrixXd s(2, 2);
  s << 1, 0.5,
       0.2, 1;
  REQUIRE_THROWS_AS(nsdfm::top_eigen(s, 1), nsdfm::estimation_error);
}

TEST_CASE("iterative eigensolver agrees with the direct one") {
  nsdfm::RngStream rng(97);
  Eigen::MatrixXd a(60, 60);
  for (int i = 0; i < 60; ++i)
    for (int j = 0; j < 60; ++j) a(i, j) = rng.normal();
  const Eigen::MatrixXd s = a * a.transpose() / 60.0;
  auto [vals_d, vecs_d] = nsdfm::top_eigen(s, 4);
  auto [vals_i, vecs_i] = nsdfm::detail::top_eigen_iterative(s, 4);
  nsdfm::detail::fix_sign(vecs_i);  // top_eigen applies this after the branch
  REQUIRE((vals_d - vals_i).cwiseAbs().maxCoeff() < 1e-8);
  REQUIRE((vecs_d - vecs_i).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("estimate_factors satisfies the exact normalizations") {
  const Eigen::MatrixXd x = exact_factor_panel(25, 3, 120, 41);
  const nsdfm::FactorModel fm = nsdfm::estimate_factors(x, 3);
  const int n = 25;

  // loadings normalization Lambda' Lambda / n = I
  const Eigen::MatrixXd gram = fm.loadings.transpose() * fm.loadings / n;
  REQUIRE((gram - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-10);

  // factor differences have diagonal uncentered covariance eigval_i / n
  const Eigen::MatrixXd dcov = nsdfm::covariance_uncentered(fm.diff_factors);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const double expect = i == j ? fm.eigvals(i) / n : 0.0;
      REQUIRE(std::abs(dcov(i, j) - expect) < 1e-8 * (1.0 + fm.eigvals(0)));
    }

  // differencing the factor levels reproduces diff_factors exactly
  const Eigen::MatrixXd dd = nsdfm::difference_matrix(fm.factors);
  REQUIRE((dd - fm.diff_factors).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("estimate_factors reconstructs a pure factor panel") {
  const Eigen::MatrixXd x = exact_factor_panel(30, 2, 80, 59);
  const nsdfm::FactorModel fm = nsdfm::estimate_factors(x, 2);
  const Eigen::MatrixXd fitted = fm.loadings * fm.factors;
  const double scale = x.cwiseAbs().maxCoeff();
  REQUIRE((fitted - x).cwiseAbs().maxCoeff() < 1e-9 * scale);
  REQUIRE(nsdfm::variance_share(x, 2) == Catch::Approx(1.0).margin(1e-10));
}

TEST_CASE("estimate_factors refuses r beyond the panel rank") {
  const Eigen::MatrixXd x = exact_factor_panel(10, 1, 50, 77);
  REQUIRE_THROWS_AS(nsdfm::estimate_factors(x, 3), nsdfm::estimation_error);
}

TEST_CASE("factor count bounds are enforced") {
  const Eigen::MatrixXd x = exact_factor_panel(6, 2, 40, 13);
  REQUIRE_THROWS_AS(nsdfm::estimate_factors(x, 0), nsdfm::estimation_error);
  REQUIRE_THROWS_AS(nsdfm::estimate_factors(x, 7), nsdfm::estimation_error);
}

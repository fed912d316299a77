#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "nsdfm/irf.hpp"
#include "nsdfm/rng.hpp"

namespace {

Eigen::MatrixXd random_matrix(int rows, int cols, std::uint64_t seed) {
  nsdfm::RngStream rng(seed);
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

// generic raw IRF from a stable VAR(1) factor process
nsdfm::IrfSet make_raw(int n, int r, int q, int H, std::uint64_t seed) {
  Eigen::MatrixXd A = random_matrix(r, r, seed);
  A *= 0.5 / std::max(1.0, A.cwiseAbs().rowwise().sum().maxCoeff());
  const std::vector<Eigen::MatrixXd> B = nsdfm::invert_polynomial({A}, H);
  const Eigen::MatrixXd lambda = random_matrix(n, r, seed + 1);
  const Eigen::MatrixXd K = random_matrix(r, q, seed + 2);
  return nsdfm::raw_irf(lambda, B, K, H);
}

Eigen::MatrixXd rotation2(double angle) {
  Eigen::MatrixXd o(2, 2);
  o << std::cos(angle), -std::sin(angle),
       std::sin(angle), std::cos(angle);
  return o;
}

}  // namespace

TEST_CASE("polynomial inversion reproduces the scalar geometric series") {
  Eigen::MatrixXd a(1, 1);
  a << 0.5;
  const std::vector<Eigen::MatrixXd> B = nsdfm::invert_polynomial({a}, 20);
  REQUIRE(B.size() == 21);
  for (int k = 0; k <= 20; ++k)
    REQUIRE(std::abs(B[static_cast<size_t>(k)](0, 0) - std::pow(0.5, k)) < 1e-12);
}

TEST_CASE("polynomial inversion satisfies the defining recursion") {
  const Eigen::MatrixXd A1 = 0.4 * random_matrix(3, 3, 11);
  const Eigen::MatrixXd A2 = 0.2 * random_matrix(3, 3, 12);
  const std::vector<Eigen::MatrixXd> B = nsdfm::invert_polynomial({A1, A2}, 15);
  REQUIRE((B[0] - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE((B[1] - A1).cwiseAbs().maxCoeff() < 1e-14);
  for (int k = 2; k <= 15; ++k) {
    const Eigen::MatrixXd expect =
        A1 * B[static_cast<size_t>(k - 1)] + A2 * B[static_cast<size_t>(k - 2)];
    REQUIRE((B[static_cast<size_t>(k)] - expect).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("raw IRFs map factor space to the panel") {
  const nsdfm::IrfSet raw = make_raw(6, 3, 2, 10, 21);
  REQUIRE(raw.n() == 6);
  REQUIRE(raw.q() == 2);
  REQUIRE(raw.horizon == 10);
  REQUIRE(raw.coeffs.size() == 11);
  REQUIRE(raw.factor_coeffs.size() == 11);
  REQUIRE(raw.identification == nsdfm::IdentificationScheme::raw);
}

TEST_CASE("recursive identification zeroes the upper impact triangle") {
  const nsdfm::IrfSet raw = make_raw(5, 3, 2, 8, 33);
  const std::vector<int> order = {3, 1};
  const nsdfm::IrfSet ident = nsdfm::identify_recursive(raw, order);
  const Eigen::MatrixXd& impact = ident.coeffs.front();
  // ordered impact block is lower triangular with positive diagonal
  REQUIRE(std::abs(impact(3, 1)) < 1e-10);
  REQUIRE(impact(3, 0) > 0.0);
  REQUIRE(impact(1, 1) > 0.0);
  REQUIRE(ident.order == order);
  REQUIRE(ident.identification == nsdfm::IdentificationScheme::recursive);
}

TEST_CASE("recursive identification is invariant to shock rotations") {
  const nsdfm::IrfSet raw = make_raw(5, 3, 2, 8, 45);
  nsdfm::IrfSet rotated = raw;
  nsdfm::detail::rotate_irf(rotated, rotation2(0.7));
  const std::vector<int> order = {0, 2};
  const nsdfm::IrfSet a = nsdfm::identify_recursive(raw, order);
  const nsdfm::IrfSet b = nsdfm::identify_recursive(rotated, order);
  for (size_t k = 0; k < a.coeffs.size(); ++k)
    REQUIRE((a.coeffs[k] - b.coeffs[k]).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("recursive identification rejects bad orderings") {
  const nsdfm::IrfSet raw = make_raw(5, 3, 2, 8, 51);
  REQUIRE_THROWS_AS(nsdfm::identify_recursive(raw, {0}), nsdfm::config_error);
  REQUIRE_THROWS_AS(nsdfm::identify_recursive(raw, {0, 9}), nsdfm::config_error);
}

TEST_CASE("permanent identification isolates the common trend") {
  // build a raw set whose long-run factor response has rank one
  const int n = 6, r = 3, q = 2, H = 12;
  const Eigen::MatrixXd lambda = random_matrix(n, r, 61);
  const Eigen::VectorXd u = random_matrix(r, 1, 62);
  const Eigen::RowVectorXd v = random_matrix(1, q, 63);
  nsdfm::IrfSet raw;
  for (int k = 0; k <= H; ++k) {
    // responses converge to the rank-one limit u v' as k grows; the decay
    // is fast enough to clear the rank ratio test at the last horizon
    const double w = std::exp(-2.0 * k);
    const Eigen::MatrixXd fk = u * v + w * random_matrix(r, q, 100 + static_cast<std::uint64_t>(k));
    raw.factor_coeffs.push_back(fk);
    raw.coeffs.push_back(lambda * fk);
  }
  raw.horizon = H;

  const nsdfm::IrfSet ident = nsdfm::identify_permanent(raw, 1, H, 0);
  const Eigen::MatrixXd lr = ident.coeffs[static_cast<size_t>(H)];
  // transitory shock: essentially zero long-run response everywhere
  const double lr_scale = lr.col(0).cwiseAbs().maxCoeff();
  REQUIRE(lr.col(1).cwiseAbs().maxCoeff() < 1e-6 * lr_scale);
  // permanent shock pushes the sign variable up in the long run
  REQUIRE(lr(0, 0) > 0.0);
  REQUIRE(ident.tau == 1);
}

TEST_CASE("permanent identification is invariant to shock rotations") {
  const int n = 6, r = 3, q = 2, H = 12;
  const Eigen::MatrixXd lambda = random_matrix(n, r, 71);
  const Eigen::VectorXd u = random_matrix(r, 1, 72);
  const Eigen::RowVectorXd v = random_matrix(1, q, 73);
  nsdfm::IrfSet raw;
  for (int k = 0; k <= H; ++k) {
    const double w = std::exp(-2.0 * k);
    const Eigen::MatrixXd fk =
        u * v + w * random_matrix(r, q, 300 + static_cast<std::uint64_t>(k));
    raw.factor_coeffs.push_back(fk);
    raw.coeffs.push_back(lambda * fk);
  }
  raw.horizon = H;
  nsdfm::IrfSet rotated = raw;
  nsdfm::detail::rotate_irf(rotated, rotation2(-1.1));

  const nsdfm::IrfSet a = nsdfm::identify_permanent(raw, 1, H, 2);
  const nsdfm::IrfSet b = nsdfm::identify_permanent(rotated, 1, H, 2);
  for (size_t k = 0; k < a.coeffs.size(); ++k)
    REQUIRE((a.coeffs[k] - b.coeffs[k]).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("permanent identification runs the rank ratio test") {
  // full-rank long-run matrix cannot have tau = 1
  const nsdfm::IrfSet raw = make_raw(5, 3, 2, 8, 81);
  REQUIRE_THROWS_AS(nsdfm::identify_permanent(raw, 1, 8, 0), nsdfm::estimation_error);
}

TEST_CASE("normalization pins the pivot exactly") {
  const nsdfm::IrfSet raw = make_raw(4, 2, 2, 6, 91);
  const nsdfm::IrfSet ident = nsdfm::identify_recursive(raw, {0, 1});
  const nsdfm::IrfSet norm = nsdfm::normalize_irf(ident, 0, 0, 0, 0.5);
  REQUIRE(norm.coeffs.front()(0, 0) == 0.5);  // exact, not approximate
  const double scale = 0.5 / ident.coeffs.front()(0, 0);
  // whole shock column scales; the other shock is untouched
  for (size_t k = 0; k < norm.coeffs.size(); ++k) {
    REQUIRE((norm.coeffs[k].col(1) - ident.coeffs[k].col(1)).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE((norm.coeffs[k].col(0) - scale * ident.coeffs[k].col(0))
                .cwiseAbs()
                .maxCoeff() < 1e-12);
  }
  REQUIRE(norm.normalization.has_value());
  REQUIRE(norm.normalization->target == 0.5);
}

TEST_CASE("normalization refuses a zero pivot") {
  const nsdfm::IrfSet raw = make_raw(4, 2, 2, 6, 99);
  const nsdfm::IrfSet ident = nsdfm::identify_recursive(raw, {2, 3});
  // the recursive scheme zeroes variable 2's response to shock 2 on impact
  REQUIRE_THROWS_AS(nsdfm::normalize_irf(ident, 2, 1, 0, 1.0), nsdfm::estimation_error);
}

TEST_CASE("long_run_response checks its bounds") {
  const nsdfm::IrfSet raw = make_raw(4, 2, 2, 6, 103);
  REQUIRE_NOTHROW(nsdfm::long_run_response(raw, 6));
  REQUIRE_THROWS_AS(nsdfm::long_run_response(raw, 7), nsdfm::config_error);
  REQUIRE_THROWS_AS(nsdfm::long_run_response(raw, -1), nsdfm::config_error);
}

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "nsdfm/rng.hpp"
#include "nsdfm/selection.hpp"

namespace {

// levels panel with one common random walk, one stationary common factor
// and random-walk idiosyncratic components: r = 2, q = 2, tau = 1
struct DynPanel {
  Eigen::MatrixXd levels;
  Eigen::MatrixXd diffs;
};

DynPanel make_dyn_panel(int n, int T, std::uint64_t seed) {
  nsdfm::RngStream rng(seed);
  Eigen::VectorXd lam1(n), lam2(n);
  for (int i = 0; i < n; ++i) lam1(i) = rng.normal();
  for (int i = 0; i < n; ++i) lam2(i) = rng.normal();

  Eigen::VectorXd f1(T + 1), f2(T + 1);
  double walk = 0.0;
  for (int t = 0; t <= T; ++t) {
    walk += rng.normal();
    f1(t) = walk;
    f2(t) = rng.normal();
  }

  DynPanel out;
  out.levels.resize(n, T + 1);
  for (int i = 0; i < n; ++i) {
    double idio = 0.0;
    for (int t = 0; t <= T; ++t) {
      idio += rng.normal();
      out.levels(i, t) = lam1(i) * f1(t) + lam2(i) * f2(t) + idio;
    }
  }
  out.diffs = out.levels.rightCols(T) - out.levels.leftCols(T);
  return out;
}

}  // namespace

TEST_CASE("static factor count criteria find a clean structure") {
  const DynPanel p = make_dyn_panel(40, 400, 7);
  const nsdfm::RSelection sel = nsdfm::estimate_r(p.diffs, 8);
  REQUIRE(sel.r_ic == 2);
  REQUIRE(sel.r_ratio == 2);
  REQUIRE(sel.ic_path.size() == 9);
  REQUIRE(sel.ratio_path.size() == 8);
  REQUIRE(sel.eigvals.size() == 40);
}

TEST_CASE("estimate_r is invariant to rescaling a series") {
  DynPanel p = make_dyn_panel(30, 300, 19);
  const nsdfm::RSelection base = nsdfm::estimate_r(p.diffs, 6);
  p.diffs.row(4) *= 1000.0;
  p.diffs.row(11) *= 1e-3;
  const nsdfm::RSelection scaled = nsdfm::estimate_r(p.diffs, 6);
  REQUIRE(base.r_ic == scaled.r_ic);
  for (size_t k = 0; k < base.ic_path.size(); ++k)
    REQUIRE(base.ic_path[k] == Catch::Approx(scaled.ic_path[k]).margin(1e-9));
}

TEST_CASE("estimate_r names a flat series in its error") {
  DynPanel p = make_dyn_panel(10, 100, 23);
  p.diffs.row(3).setConstant(2.5);  // zero variance after centering
  try {
    nsdfm::estimate_r(p.diffs, 4);
    FAIL("expected data_error");
  } catch (const nsdfm::data_error& e) {
    REQUIRE(std::string(e.what()).find('3') != std::string::npos);
  }
}

TEST_CASE("penalty scales match their closed forms") {
  // m = min(n, B^2, sqrt(T/B)); s = log(m)/m
  const double s = nsdfm::penalty_q_scale(50, 100, 7);
  const double m = std::sqrt(100.0 / 7.0);
  REQUIRE(s == Catch::Approx(std::log(m) / m).epsilon(1e-12));
  REQUIRE(s == Catch::Approx(0.35178).margin(5e-5));

  const double pt = nsdfm::penalty_tau_scale(200, 200, 10);
  const double blb = 10.0 * std::log(10.0);
  const double expected = (std::sqrt(blb / 200.0) + 1.0 / 200.0) *
                          std::log(std::min(std::sqrt(200.0 / blb), 200.0));
  REQUIRE(pt == Catch::Approx(expected).epsilon(1e-12));
  REQUIRE(pt == Catch::Approx(0.37215).margin(5e-5));
}

TEST_CASE("dynamic shock and trend counts on the two-factor panel") {
  const DynPanel p = make_dyn_panel(30, 500, 31);
  const int T = static_cast<int>(p.diffs.cols());
  nsdfm::SpectralDensity sd =
      nsdfm::lag_window_spectrum(p.diffs, nsdfm::default_bandwidth(T));
  nsdfm::dynamic_eigenvalues(sd);

  auto [q_hat, q_path] = nsdfm::estimate_q(sd, T, 6);
  REQUIRE(q_hat == 2);
  REQUIRE(q_path.size() == 7);

  auto [tau_hat, tau_path] = nsdfm::estimate_tau(sd, T, 6);
  REQUIRE(tau_hat == 1);
  REQUIRE(tau_path.size() == 7);
}

TEST_CASE("a huge penalty multiplier drives both counts to zero") {
  const DynPanel p = make_dyn_panel(20, 200, 43);
  const int T = static_cast<int>(p.diffs.cols());
  nsdfm::SpectralDensity sd =
      nsdfm::lag_window_spectrum(p.diffs, nsdfm::default_bandwidth(T));
  nsdfm::dynamic_eigenvalues(sd);
  REQUIRE(nsdfm::estimate_q(sd, T, 5, 1e6).first == 0);
  REQUIRE(nsdfm::estimate_tau(sd, T, 5, 1e6).first == 0);
}

TEST_CASE("selection guards its inputs") {
  const DynPanel p = make_dyn_panel(10, 120, 53);
  const int T = static_cast<int>(p.diffs.cols());
  nsdfm::SpectralDensity sd = nsdfm::lag_window_spectrum(p.diffs, 4);
  // eigenvalues not computed yet
  REQUIRE_THROWS_AS(nsdfm::estimate_q(sd, T, 4), nsdfm::estimation_error);
  nsdfm::dynamic_eigenvalues(sd);
  REQUIRE_THROWS_AS(nsdfm::estimate_q(sd, T, 10), nsdfm::config_error);
  REQUIRE_THROWS_AS(nsdfm::estimate_tau(sd, T, -1), nsdfm::config_error);
  REQUIRE_THROWS_AS(nsdfm::estimate_r(p.diffs, 0), nsdfm::config_error);
}

TEST_CASE("penalty tuning finds a stable interval on clean data") {
  const DynPanel p = make_dyn_panel(30, 400, 61);
  std::vector<double> grid;
  for (double c = 0.2; c <= 3.01; c += 0.2) grid.push_back(c);
  const nsdfm::TuneResult tr =
      nsdfm::tune_penalty(nsdfm::DynamicCriterion::q, p.diffs, 5, grid);
  REQUIRE(tr.c_grid.size() == grid.size());
  REQUIRE(tr.stability_path.size() == grid.size());
  REQUIRE(tr.full_sample_counts.size() == grid.size());
  REQUIRE_FALSE(tr.fallback);
  REQUIRE(tr.c_star >= grid.front());
  REQUIRE(tr.c_star <= grid.back());
  // the tuned multiplier must reproduce q = 2 on the full sample
  const int T = static_cast<int>(p.diffs.cols());
  nsdfm::SpectralDensity sd =
      nsdfm::lag_window_spectrum(p.diffs, nsdfm::default_bandwidth(T));
  nsdfm::dynamic_eigenvalues(sd);
  REQUIRE(nsdfm::estimate_q(sd, T, 5, tr.c_star).first == 2);
}

TEST_CASE("tune_penalty validates the grid") {
  const DynPanel p = make_dyn_panel(12, 150, 67);
  REQUIRE_THROWS_AS(
      nsdfm::tune_penalty(nsdfm::DynamicCriterion::q, p.diffs, 4, {}),
      nsdfm::config_error);
  REQUIRE_THROWS_AS(
      nsdfm::tune_penalty(nsdfm::DynamicCriterion::q, p.diffs, 4, {1.0, 0.5}),
      nsdfm::config_error);
}

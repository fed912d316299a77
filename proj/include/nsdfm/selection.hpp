#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include "nsdfm/errors.hpp"
#include "nsdfm/spectral.hpp"

namespace nsdfm {

// Static factor count selection on the differenced panel.
struct RSelection {
  int r_ic = 0;              // information-criterion choice (default method)
  int r_ratio = 0;           // eigenvalue-ratio choice
  std::vector<double> ic_path;     // criterion value at k = 0..r_max
  std::vector<double> ratio_path;  // ratio at k = 1..r_max
  std::vector<double> eigvals;     // eigenvalues of the standardized covariance
};

// Penalty-tuning scan following the stability-interval recipe: the chosen
// multiplier is the midpoint of the second interval of the grid on which
// the selected count is constant and its across-subsample variance is zero
// (the first such interval is the small-c saturation plateau).
struct TuneResult {
  double c_star = 1.0;
  std::vector<double> c_grid;
  std::vector<double> stability_path;  // across-subsample variance per grid point
  std::vector<int> full_sample_counts; // selection on the full sample per grid point
  bool fallback = false;               // no stability interval; c_star forced to 1
};

struct SelectionResult {
  int r_hat = 0;
  int q_hat = 0;
  int tau_hat = 0;
  int d_hat = 0;  // q_hat - tau_hat
  int c_hat = 0;  // r_hat - tau_hat
  RSelection r_detail;
  std::vector<double> q_path;    // criterion value at k = 0..q_max
  std::vector<double> tau_path;  // criterion value at k = 0..tau_max
  double penalty_q = 1.0;
  double penalty_tau = 1.0;
  std::optional<TuneResult> tune_q;
  std::optional<TuneResult> tune_tau;
  bool clamped = false;  // tau_hat was reduced to keep tau <= q <= r
};

namespace detail {

inline std::vector<double> eig_descending(const Eigen::MatrixXd& sym) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (sym + sym.transpose()));
  if (es.info() != Eigen::Success)
    throw estimation_error("eigendecomposition failed in selection");
  std::vector<double> v(static_cast<size_t>(sym.rows()));
  for (Eigen::Index i = 0; i < sym.rows(); ++i)
    v[static_cast<size_t>(i)] = es.eigenvalues()(sym.rows() - 1 - i);
  return v;
}

}  // namespace detail

// Number of static factors from the differenced panel (n x T). Method A is
// an information criterion log V(k) + k (n+T)/(nT) log(min(n,T)) on the
// panel with every series scaled to unit variance; method B is the largest
// adjacent eigenvalue ratio. Method A is the default path downstream.
inline RSelection estimate_r(const Eigen::MatrixXd& diffs, int r_max) {
  const Eigen::Index n = diffs.rows();
  const Eigen::Index T = diffs.cols();
  if (r_max < 1 || r_max >= std::min(n, T))
    throw config_error("estimate_r: r_max out of range");

  Eigen::MatrixXd z = diffs;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mean = z.row(i).mean();
    const double var = (z.row(i).array() - mean).square().sum() / static_cast<double>(T);
    if (!(var > 0.0))
      throw data_error("estimate_r: series " + std::to_string(i) + " has zero variance");
    z.row(i) /= std::sqrt(var);
  }

  const Eigen::MatrixXd cov = (z * z.transpose()) / static_cast<double>(T);
  const std::vector<double> mu = detail::eig_descending(cov);
  if (mu.front() - mu.back() <= 1e-12 * std::max(1.0, mu.front()))
    throw estimation_error("estimate_r: degenerate covariance, all eigenvalues equal");

  RSelection out;
  out.eigvals = mu;
  const double total = std::accumulate(mu.begin(), mu.end(), 0.0);
  const double penalty = (static_cast<double>(n) + static_cast<double>(T)) /
                         (static_cast<double>(n) * static_cast<double>(T)) *
                         std::log(static_cast<double>(std::min(n, T)));
  double tail = total;
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= r_max; ++k) {
    if (k > 0) tail -= mu[static_cast<size_t>(k - 1)];
    const double v = std::max(tail, 1e-300) / static_cast<double>(n);
    const double ic = std::log(v) + static_cast<double>(k) * penalty;
    out.ic_path.push_back(ic);
    if (ic < best) {
      best = ic;
      out.r_ic = k;
    }
  }
  double best_ratio = -1.0;
  for (int k = 1; k <= r_max; ++k) {
    const double denom = std::max(mu[static_cast<size_t>(k)], 1e-300);
    const double ratio = mu[static_cast<size_t>(k - 1)] / denom;
    out.ratio_path.push_back(ratio);
    if (ratio > best_ratio) {
      best_ratio = ratio;
      out.r_ratio = k;
    }
  }
  return out;
}

// Penalty shapes for the dynamic criteria. Both vanish as n, T -> infinity
// and diverge relative to the corresponding eigenvalue gaps when the
// candidate count is too low.
inline double penalty_q_scale(int n, int T, int bandwidth) {
  const double m = std::min({static_cast<double>(n),
                             static_cast<double>(bandwidth) * bandwidth,
                             std::sqrt(static_cast<double>(T) / bandwidth)});
  return std::log(m) / m;
}

inline double penalty_tau_scale(int n, int T, int bandwidth) {
  const double bl = static_cast<double>(bandwidth) * std::log(static_cast<double>(bandwidth));
  const double lead = std::sqrt(bl / static_cast<double>(T)) + 1.0 / static_cast<double>(n);
  const double m = std::min(std::sqrt(static_cast<double>(T) / bl), static_cast<double>(n));
  return lead * std::log(m);
}

// Number of dynamic shocks q: argmin over k of
// log( average over the whole grid of the eigenvalue tail sum past k / n )
// + k c s(n,T). Requires dynamic_eigenvalues to have been run.
inline std::pair<int, std::vector<double>> estimate_q(const SpectralDensity& sd, int T,
                                                      int q_max, double penalty_c = 1.0) {
  if (sd.eigvals.size() == 0)
    throw estimation_error("estimate_q: dynamic eigenvalues not computed");
  const Eigen::Index n = sd.eigvals.rows();
  if (q_max < 0 || q_max >= n) throw config_error("estimate_q: q_max out of range");
  const int nfreq = sd.nfreq();
  const double s = penalty_q_scale(static_cast<int>(n), T, sd.bandwidth);

  // tail(k) = sum over frequencies and j > k, averaged below
  std::vector<double> path;
  double best = std::numeric_limits<double>::infinity();
  int arg = 0;
  for (int k = 0; k <= q_max; ++k) {
    double tail = 0.0;
    for (int h = 0; h < nfreq; ++h)
      for (Eigen::Index j = k; j < n; ++j) tail += std::max(sd.eigvals(j, h), 0.0);
    const double avg = tail / (static_cast<double>(n) * static_cast<double>(nfreq));
    const double value = std::log(std::max(avg, 1e-300)) +
                         static_cast<double>(k) * penalty_c * s;
    path.push_back(value);
    if (value < best) {
      best = value;
      arg = k;
    }
  }
  return {arg, path};
}

// Number of common trends tau from the zero-frequency slice only:
// argmin over k of log( tail sum of mu_j(0) past k / n ) + k c p(n,T).
inline std::pair<int, std::vector<double>> estimate_tau(const SpectralDensity& sd, int T,
                                                        int tau_max, double penalty_c = 1.0) {
  if (sd.eigvals.size() == 0)
    throw estimation_error("estimate_tau: dynamic eigenvalues not computed");
  const Eigen::Index n = sd.eigvals.rows();
  if (tau_max < 0 || tau_max >= n) throw config_error("estimate_tau: tau_max out of range");
  const double p = penalty_tau_scale(static_cast<int>(n), T, sd.bandwidth);
  const Eigen::VectorXd zero = sd.eigvals.col(sd.zero_index());

  std::vector<double> path;
  double best = std::numeric_limits<double>::infinity();
  int arg = 0;
  for (int k = 0; k <= tau_max; ++k) {
    double tail = 0.0;
    for (Eigen::Index j = k; j < n; ++j) tail += std::max(zero(j), 0.0);
    const double value = std::log(std::max(tail / static_cast<double>(n), 1e-300)) +
                         static_cast<double>(k) * penalty_c * p;
    path.push_back(value);
    if (value < best) {
      best = value;
      arg = k;
    }
  }
  return {arg, path};
}

enum class DynamicCriterion { q, tau };

// Penalty tuning over nested subsamples. diffs is the full differenced
// panel; each subsample keeps the first n_j series and first T_j periods
// and recomputes its own bandwidth. Grid points where the across-subsample
// variance of the selected count is zero and the full-sample count is
// locally constant form stability intervals; c* is the midpoint of the
// second interval (of the only one, if unique). No interval at all falls
// back to c* = 1 with the fallback flag set.
inline TuneResult tune_penalty(DynamicCriterion crit, const Eigen::MatrixXd& diffs,
                               int k_max, std::vector<double> c_grid,
                               std::vector<double> fractions = {0.6, 0.7, 0.8, 0.9, 1.0}) {
  const Eigen::Index n = diffs.rows();
  const Eigen::Index T = diffs.cols();
  if (c_grid.empty()) throw config_error("tune_penalty: empty grid");
  if (!std::is_sorted(c_grid.begin(), c_grid.end()))
    throw config_error("tune_penalty: grid must be ascending");
  for (double f : fractions)
    if (!(f > 0.0 && f <= 1.0)) throw config_error("tune_penalty: fractions must lie in (0,1]");

  // one spectral decomposition per subsample, reused across the grid
  struct Sub {
    SpectralDensity sd;
    int T = 0;
  };
  std::vector<Sub> subs;
  for (double f : fractions) {
    const auto nj = static_cast<Eigen::Index>(std::lround(f * static_cast<double>(n)));
    const auto Tj = static_cast<Eigen::Index>(std::lround(f * static_cast<double>(T)));
    if (nj < 2 || Tj < 8) throw config_error("tune_penalty: subsample too small");
    Sub s;
    s.T = static_cast<int>(Tj);
    s.sd = lag_window_spectrum(diffs.topLeftCorner(nj, Tj), default_bandwidth(s.T));
    dynamic_eigenvalues(s.sd);
    if (k_max >= nj) throw config_error("tune_penalty: k_max exceeds subsample size");
    subs.push_back(std::move(s));
  }

  TuneResult out;
  out.c_grid = c_grid;
  std::vector<std::vector<int>> counts(c_grid.size());
  for (size_t ci = 0; ci < c_grid.size(); ++ci) {
    for (const Sub& s : subs) {
      const int k = crit == DynamicCriterion::q
                        ? estimate_q(s.sd, s.T, k_max, c_grid[ci]).first
                        : estimate_tau(s.sd, s.T, k_max, c_grid[ci]).first;
      counts[ci].push_back(k);
    }
    double mean = 0.0;
    for (int k : counts[ci]) mean += k;
    mean /= static_cast<double>(counts[ci].size());
    double var = 0.0;
    for (int k : counts[ci]) var += (k - mean) * (k - mean);
    var /= static_cast<double>(counts[ci].size());
    out.stability_path.push_back(var);
    out.full_sample_counts.push_back(counts[ci].back());  // fraction 1.0 is last
  }

  // maximal runs of zero variance with a constant full-sample count
  struct Run {
    size_t lo, hi;
  };
  std::vector<Run> runs;
  size_t i = 0;
  while (i < c_grid.size()) {
    if (out.stability_path[i] > 0.0) {
      ++i;
      continue;
    }
    size_t j = i;
    while (j + 1 < c_grid.size() && out.stability_path[j + 1] == 0.0 &&
           out.full_sample_counts[j + 1] == out.full_sample_counts[i])
      ++j;
    runs.push_back({i, j});
    i = j + 1;
  }
  if (runs.empty()) {
    out.fallback = true;
    out.c_star = 1.0;
    return out;
  }
  const Run& pick = runs.size() >= 2 ? runs[1] : runs[0];
  out.c_star = c_grid[(pick.lo + pick.hi) / 2];
  return out;
}

}  // namespace nsdfm

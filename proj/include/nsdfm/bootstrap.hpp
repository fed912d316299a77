#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "nsdfm/errors.hpp"
#include "nsdfm/pipeline.hpp"
#include "nsdfm/rng.hpp"

namespace nsdfm {

struct BootstrapSettings {
  int replicates = 200;   // minimum 50
  double coverage = 0.68;
  int block_length = 0;   // 0 = ceil(T^{1/3})
  std::uint64_t seed = 0;
};

namespace detail {

// type-7 quantile (linear interpolation), data sorted in place
inline double quantile_sorted(std::vector<double>& v, double p) {
  const size_t m = v.size();
  if (m == 0) throw estimation_error("quantile of an empty sample");
  const double pos = p * static_cast<double>(m - 1);
  const size_t lo = static_cast<size_t>(std::floor(pos));
  const size_t hi = std::min(lo + 1, m - 1);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] + frac * (v[hi] - v[lo]);
}

}  // namespace detail

// Residual bootstrap bands around the identified IRFs in `fit`.
// Per replicate: dynamics residuals are resampled i.i.d. (centered) and
// fed through the estimated levels-VAR form with zero initial conditions
// to rebuild factor paths; idiosyncratic residuals are resampled in moving
// blocks of columns; the rebuilt panel goes through the full pipeline
// again. Bands are pointwise empirical quantiles at (1 +- coverage)/2.
// Replicates whose re-estimation fails are skipped; more than 10% failures
// aborts.
inline void bootstrap_bands(IrfSet& irf, const Eigen::MatrixXd& x,
                            const PipelineSpec& spec, const PipelineFit& fit,
                            const BootstrapSettings& bs) {
  if (bs.replicates < 50) throw config_error("bootstrap: need at least 50 replicates");
  if (!(bs.coverage > 0.0 && bs.coverage < 1.0))
    throw config_error("bootstrap: coverage must lie in (0,1)");

  const Eigen::Index n = x.rows();
  const Eigen::Index T = x.cols() - 1;
  const Eigen::MatrixXd resid =
      fit.vecm ? fit.vecm->residuals : fit.var->residuals;
  const Eigen::VectorXd rmean = resid.rowwise().mean();
  const Eigen::MatrixXd w_centered = resid.colwise() - rmean;
  const Eigen::VectorXd h = fit.vecm
                                ? (fit.vecm->has_intercept() ? fit.vecm->intercept
                                                             : Eigen::VectorXd::Zero(spec.r))
                                : (fit.var->has_intercept() ? fit.var->intercept
                                                            : Eigen::VectorXd::Zero(spec.r));
  const std::vector<Eigen::MatrixXd>& A = fit.var_coeffs;
  const Eigen::MatrixXd xi = x - fit.factors.loadings * fit.factors.factors;
  const int block = bs.block_length > 0
                        ? bs.block_length
                        : static_cast<int>(std::ceil(std::cbrt(static_cast<double>(T))));

  const size_t nslice = irf.coeffs.size();
  std::vector<std::vector<Eigen::MatrixXd>> draws;
  draws.reserve(static_cast<size_t>(bs.replicates));
  int failures = 0;

  for (int b = 0; b < bs.replicates; ++b) {
    RngStream rng(stream_seed(bs.seed, "bootstrap", static_cast<std::uint64_t>(b)));
    // factor path from the estimated dynamics, zero initial conditions
    Eigen::MatrixXd Fb = Eigen::MatrixXd::Zero(spec.r, T + 1);
    for (Eigen::Index t = 1; t <= T; ++t) {
      Eigen::VectorXd v = h + w_centered.col(static_cast<Eigen::Index>(
                                  rng.below(static_cast<std::uint64_t>(w_centered.cols()))));
      for (size_t k = 0; k < A.size(); ++k) {
        const Eigen::Index lag = t - static_cast<Eigen::Index>(k) - 1;
        if (lag >= 0) v += A[k] * Fb.col(lag);
      }
      Fb.col(t) = v;
    }
    // idiosyncratic part: moving blocks of columns of xi
    Eigen::MatrixXd xib(n, T + 1);
    Eigen::Index filled = 0;
    while (filled <= T) {
      const Eigen::Index start = static_cast<Eigen::Index>(
          rng.below(static_cast<std::uint64_t>(T + 2 - block)));
      const Eigen::Index len = std::min<Eigen::Index>(block, T + 1 - filled);
      xib.middleCols(filled, len) = xi.middleCols(start, len);
      filled += len;
    }
    const Eigen::MatrixXd xb = fit.factors.loadings * Fb + xib;
    try {
      PipelineFit fb = run_pipeline(xb, spec);
      draws.push_back(std::move(fb.irf.coeffs));
    } catch (const error&) {
      ++failures;
    }
  }
  if (failures * 10 > bs.replicates)
    throw estimation_error("bootstrap: " + std::to_string(failures) + " of " +
                           std::to_string(bs.replicates) + " replicates failed");

  const double lo_p = (1.0 - bs.coverage) / 2.0;
  const double hi_p = (1.0 + bs.coverage) / 2.0;
  irf.lower.assign(nslice, Eigen::MatrixXd::Zero(irf.n(), irf.q()));
  irf.upper.assign(nslice, Eigen::MatrixXd::Zero(irf.n(), irf.q()));
  std::vector<double> cell(draws.size());
  for (size_t k = 0; k < nslice; ++k) {
    for (int i = 0; i < irf.n(); ++i) {
      for (int j = 0; j < irf.q(); ++j) {
        for (size_t b = 0; b < draws.size(); ++b) cell[b] = draws[b][k](i, j);
        std::sort(cell.begin(), cell.end());
        irf.lower[k](i, j) = detail::quantile_sorted(cell, lo_p);
        irf.upper[k](i, j) = detail::quantile_sorted(cell, hi_p);
      }
    }
  }
  irf.band_coverage = bs.coverage;
  irf.band_replicates = bs.replicates - failures;
}

}  // namespace nsdfm

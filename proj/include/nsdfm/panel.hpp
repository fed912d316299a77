#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "nsdfm/errors.hpp"

namespace nsdfm {

enum class Frequency { monthly, quarterly, daily };

// A levels panel: one row per series, one column per period. With T+1
// columns the time index runs t = 0..T, matching the convention used by
// the differencing and detrending routines below.
struct Panel {
  Eigen::MatrixXd values;                 // n x (T+1)
  std::vector<std::string> series_names;  // size n
  std::vector<int> transform_codes;       // size n, each in {1,2,3}
  Frequency frequency = Frequency::quarterly;
  std::vector<std::string> dates;         // optional labels, size T+1 or empty

  int n() const { return static_cast<int>(values.rows()); }
  int T() const { return static_cast<int>(values.cols()) - 1; }
};

struct TrendFit {
  Eigen::VectorXd slope;      // per-series linear trend coefficient
  bool intercept_kept = true; // intercepts are never removed
};

// Ingestion-time validation. Intermediate panels produced by differencing
// are allowed to be shorter than this.
inline void validate_panel(const Panel& p) {
  if (p.values.rows() < 1) throw data_error("panel has no series");
  if (p.values.cols() < 3) throw data_error("panel needs at least 3 periods (T >= 2)");
  if (p.series_names.size() != static_cast<size_t>(p.values.rows()))
    throw data_error("series name count does not match row count");
  if (!p.transform_codes.empty() &&
      p.transform_codes.size() != static_cast<size_t>(p.values.rows()))
    throw data_error("transform code count does not match row count");
  if (!p.dates.empty() && p.dates.size() != static_cast<size_t>(p.values.cols()))
    throw data_error("date label count does not match column count");
  if (!p.values.allFinite()) throw data_error("panel contains non-finite values");
}

// First differences: column t of the result is col t+1 minus col t of the
// input, so an input with T+1 columns yields T columns.
inline Eigen::MatrixXd difference(const Eigen::MatrixXd& x) {
  if (x.cols() < 2) throw data_error("difference needs at least 2 columns");
  return x.rightCols(x.cols() - 1) - x.leftCols(x.cols() - 1);
}

// Cumulative sums anchored at x0; inverse of difference.
inline Eigen::MatrixXd integrate(const Eigen::MatrixXd& d, const Eigen::VectorXd& x0) {
  if (d.rows() != x0.size()) throw data_error("integrate: x0 size mismatch");
  Eigen::MatrixXd out(d.rows(), d.cols() + 1);
  out.col(0) = x0;
  for (Eigen::Index t = 0; t < d.cols(); ++t) out.col(t + 1) = out.col(t) + d.col(t);
  return out;
}

inline Panel difference(const Panel& p) {
  Panel out = p;
  out.values = difference(p.values);
  if (!out.dates.empty()) out.dates.erase(out.dates.begin());
  return out;
}

inline Panel integrate(const Panel& p, const Eigen::VectorXd& x0) {
  Panel out = p;
  out.values = integrate(p.values, x0);
  out.dates.clear();  // no label for the synthetic anchor period
  return out;
}

// Applies the per-series transform codes: 1 = none, 2 = log, 3 = log
// difference. If any series uses code 3 the whole panel drops its first
// column so all series stay on a common time index.
inline Panel apply_transforms(const Panel& raw) {
  if (raw.transform_codes.size() != static_cast<size_t>(raw.n()))
    throw data_error("apply_transforms: missing transform codes");
  const int n = raw.n();
  const Eigen::Index cols = raw.values.cols();
  bool any_diff = false;
  for (int i = 0; i < n; ++i) {
    const int code = raw.transform_codes[i];
    if (code < 1 || code > 3)
      throw data_error("unknown transform code for series " + raw.series_names[i]);
    if (code == 3) any_diff = true;
  }
  Eigen::MatrixXd full(n, cols);
  for (int i = 0; i < n; ++i) {
    const int code = raw.transform_codes[i];
    if (code == 1) {
      full.row(i) = raw.values.row(i);
      continue;
    }
    // codes 2 and 3 need strictly positive levels
    for (Eigen::Index t = 0; t < cols; ++t) {
      if (!(raw.values(i, t) > 0.0))
        throw data_error("log transform needs positive values, series " +
                         raw.series_names[i]);
    }
    full.row(i) = raw.values.row(i).array().log();
    if (code == 3) {
      for (Eigen::Index t = cols - 1; t >= 1; --t) full(i, t) -= full(i, t - 1);
      full(i, 0) = 0.0;  // placeholder, dropped below
    }
  }
  Panel out = raw;
  if (any_diff) {
    out.values = full.rightCols(cols - 1);
    if (!out.dates.empty()) out.dates.erase(out.dates.begin());
  } else {
    out.values = full;
  }
  if (!out.values.allFinite())
    throw data_error("transforms produced non-finite values");
  return out;
}

// Non-overlapping block means over time, dropping a trailing partial block.
// Used for monthly -> quarterly (block 3) and daily -> quarterly
// (calendar-free approximation with a fixed block length).
inline Panel aggregate_blocks(const Panel& p, int block, Frequency target) {
  if (block < 1) throw config_error("aggregation block must be positive");
  const Eigen::Index nblocks = p.values.cols() / block;
  if (nblocks < 3) throw data_error("too few periods after aggregation");
  Panel out = p;
  out.values.resize(p.n(), nblocks);
  for (Eigen::Index b = 0; b < nblocks; ++b)
    out.values.col(b) = p.values.middleCols(b * block, block).rowwise().mean();
  out.frequency = target;
  if (!out.dates.empty()) {
    std::vector<std::string> d(static_cast<size_t>(nblocks));
    for (Eigen::Index b = 0; b < nblocks; ++b)
      d[static_cast<size_t>(b)] = p.dates[static_cast<size_t>(b * block + block - 1)];
    out.dates = std::move(d);
  }
  return out;
}

inline Panel to_quarterly(const Panel& p, int daily_block = 63) {
  switch (p.frequency) {
    case Frequency::quarterly: return p;
    case Frequency::monthly: return aggregate_blocks(p, 3, Frequency::quarterly);
    case Frequency::daily: return aggregate_blocks(p, daily_block, Frequency::quarterly);
  }
  throw config_error("unknown frequency");
}

// Least squares linear detrending. With t = 0..T the regressor t - T/2 is
// exactly centered, so the slope is the usual OLS coefficient and the
// intercept is deliberately retained in the returned panel.
inline std::pair<Panel, TrendFit> detrend_ls(const Panel& p) {
  const int n = p.n();
  const Eigen::Index cols = p.values.cols();
  const double Tval = static_cast<double>(cols - 1);
  double denom = 0.0;
  for (Eigen::Index t = 0; t < cols; ++t) {
    const double c = static_cast<double>(t) - Tval / 2.0;
    denom += c * c;
  }
  if (denom <= 0.0) throw data_error("detrend_ls needs at least 2 periods");
  TrendFit fit;
  fit.slope.resize(n);
  Panel out = p;
  for (int i = 0; i < n; ++i) {
    double num = 0.0;
    for (Eigen::Index t = 0; t < cols; ++t)
      num += (static_cast<double>(t) - Tval / 2.0) * p.values(i, t);
    const double b = num / denom;
    fit.slope(i) = b;
    for (Eigen::Index t = 0; t < cols; ++t)
      out.values(i, t) = p.values(i, t) - b * static_cast<double>(t);
  }
  return {out, fit};
}

// Difference-mean detrending: the slope is (y_T - y_0)/T, i.e. the mean of
// the first differences. Detrended first and last observations coincide.
inline std::pair<Panel, TrendFit> detrend_demean(const Panel& p) {
  const Eigen::Index cols = p.values.cols();
  if (cols < 2) throw data_error("detrend_demean needs at least 2 periods");
  const double Tval = static_cast<double>(cols - 1);
  TrendFit fit;
  fit.slope = (p.values.col(cols - 1) - p.values.col(0)) / Tval;
  Panel out = p;
  for (Eigen::Index t = 0; t < cols; ++t)
    out.values.col(t) = p.values.col(t) - fit.slope * static_cast<double>(t);
  return {out, fit};
}

// Adds back a fitted trend; inverse of the detrenders.
inline Panel retrend(const Panel& p, const TrendFit& fit) {
  Panel out = p;
  for (Eigen::Index t = 0; t < p.values.cols(); ++t)
    out.values.col(t) = p.values.col(t) + fit.slope * static_cast<double>(t);
  return out;
}

}  // namespace nsdfm

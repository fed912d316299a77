#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <utility>

#include "nsdfm/errors.hpp"
#include "nsdfm/rng.hpp"

namespace nsdfm {

// Principal-component factor estimates for an I(1) panel. Loadings are
// normalized so loadings'loadings / n = I_r, factors are extracted from
// the levels directly (not cumulated differences) and diff_factors is the
// exact first difference of factors.
struct FactorModel {
  Eigen::MatrixXd loadings;      // n x r
  Eigen::MatrixXd factors;       // r x (T+1)
  Eigen::MatrixXd diff_factors;  // r x T
  Eigen::VectorXd eigvals;       // top r eigenvalues of the differenced covariance
  int r = 0;
};

// Second-moment matrix of the differenced panel, (1/T) * diffs * diffs'.
// Deliberately uncentered: after detrending the differences are mean zero
// in population and the estimator keeps its simple outer-product form.
inline Eigen::MatrixXd covariance_uncentered(const Eigen::MatrixXd& diffs) {
  if (diffs.cols() < 1) throw data_error("covariance of an empty sample");
  return (diffs * diffs.transpose()) / static_cast<double>(diffs.cols());
}

namespace detail {

// Deterministic sign convention: the entry of largest magnitude in each
// eigenvector is made positive; on exact ties the lowest index wins
// (strict > in the scan keeps the earliest maximizer).
inline void fix_sign(Eigen::Ref<Eigen::MatrixXd> vectors) {
  for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
    Eigen::Index best = 0;
    double mag = std::abs(vectors(0, j));
    for (Eigen::Index i = 1; i < vectors.rows(); ++i) {
      const double a = std::abs(vectors(i, j));
      if (a > mag) {
        mag = a;
        best = i;
      }
    }
    if (vectors(best, j) < 0.0) vectors.col(j) = -vectors.col(j);
  }
}

// Blocked orthogonal iteration with Rayleigh-Ritz refinement for the top-k
// eigenpairs of a large symmetric matrix. Deterministic start.
inline std::pair<Eigen::VectorXd, Eigen::MatrixXd> top_eigen_iterative(
    const Eigen::MatrixXd& sym, int k) {
  const Eigen::Index n = sym.rows();
  const int block = std::min<Eigen::Index>(n, k + std::min<Eigen::Index>(10, n - k));
  RngStream rng(0x5eedf00dULL);
  Eigen::MatrixXd Q(n, block);
  for (Eigen::Index i = 0; i < n; ++i)
    for (int j = 0; j < block; ++j) Q(i, j) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(Q);
  Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, block);
  Eigen::VectorXd prev = Eigen::VectorXd::Zero(k);
  for (int iter = 0; iter < 1000; ++iter) {
    Eigen::MatrixXd Z = sym * Q;
    Eigen::HouseholderQR<Eigen::MatrixXd> step(Z);
    Q = step.householderQ() * Eigen::MatrixXd::Identity(n, block);
    Eigen::MatrixXd small = Q.transpose() * sym * Q;
    small = 0.5 * (small + small.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(small);
    // ascending from Eigen; rotate the basis and flip to descending
    Eigen::MatrixXd rot = es.eigenvectors().rowwise().reverse();
    Q = Q * rot;
    Eigen::VectorXd vals = es.eigenvalues().reverse();
    if ((vals.head(k) - prev).cwiseAbs().maxCoeff() <=
        1e-13 * std::max(1.0, vals.cwiseAbs().maxCoeff()))
      break;
    prev = vals.head(k);
  }
  Eigen::MatrixXd small = Q.transpose() * sym * Q;
  small = 0.5 * (small + small.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(small);
  Eigen::MatrixXd vecs = Q * es.eigenvectors().rowwise().reverse();
  Eigen::VectorXd vals = es.eigenvalues().reverse();
  return {vals.head(k), vecs.leftCols(k)};
}

}  // namespace detail

// Top-k eigenpairs of a symmetric matrix, eigenvalues descending,
// eigenvectors orthonormal with the deterministic sign convention. Full
// decomposition up to n = 2000, blocked iteration beyond.
inline std::pair<Eigen::VectorXd, Eigen::MatrixXd> top_eigen(
    const Eigen::MatrixXd& sym, int k) {
  const Eigen::Index n = sym.rows();
  if (sym.cols() != n) throw estimation_error("top_eigen: matrix not square");
  if (k < 1 || k > n) throw estimation_error("top_eigen: k out of range");
  const double scale = std::max(1.0, sym.cwiseAbs().maxCoeff());
  if ((sym - sym.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw estimation_error("top_eigen: matrix not symmetric");

  Eigen::VectorXd vals;
  Eigen::MatrixXd vecs;
  if (n <= 2000) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (sym + sym.transpose()));
    if (es.info() != Eigen::Success)
      throw estimation_error("top_eigen: eigendecomposition failed");
    vals = es.eigenvalues().reverse().head(k);
    vecs = es.eigenvectors().rowwise().reverse().leftCols(k);
  } else {
    std::tie(vals, vecs) = detail::top_eigen_iterative(sym, k);
  }
  detail::fix_sign(vecs);
  return {vals, vecs};
}

// local helper so factor.hpp does not depend on panel.hpp
inline Eigen::MatrixXd difference_matrix(const Eigen::MatrixXd& x) {
  return x.rightCols(x.cols() - 1) - x.leftCols(x.cols() - 1);
}

// PCA factor extraction on a detrended levels panel x (n x (T+1)):
// eigenvectors W of the differenced second-moment matrix give
// loadings = sqrt(n) W, factors = loadings' x / n.
inline FactorModel estimate_factors(const Eigen::MatrixXd& x, int r) {
  const Eigen::Index n = x.rows();
  if (r < 1 || r > n) throw estimation_error("estimate_factors: r out of range");
  if (x.cols() < 2) throw data_error("estimate_factors: panel too short");
  const Eigen::MatrixXd diffs = difference_matrix(x);
  const Eigen::MatrixXd gamma0 = covariance_uncentered(diffs);
  auto [vals, W] = top_eigen(gamma0, r);
  const double floor = static_cast<double>(n) * 1e-14 * std::max(vals(0), 0.0);
  if (!(vals(r - 1) > floor))
    throw estimation_error("estimate_factors: r exceeds the rank of the differenced covariance");

  FactorModel fm;
  fm.r = r;
  fm.eigvals = vals;
  fm.loadings = std::sqrt(static_cast<double>(n)) * W;
  fm.factors = (fm.loadings.transpose() * x) / static_cast<double>(n);
  // differenced factors computed from the factor levels so the telescoping
  // identity factors(t) - factors(t-1) == diff_factors(t) holds exactly
  fm.diff_factors = fm.factors.rightCols(fm.factors.cols() - 1) -
                    fm.factors.leftCols(fm.factors.cols() - 1);
  return fm;
}

// Common variance share at the differenced level: fraction of total
// variance of the differenced panel captured by the first r principal
// components.
inline double variance_share(const Eigen::MatrixXd& x, int r) {
  const Eigen::MatrixXd gamma0 =
      covariance_uncentered(difference_matrix(x));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gamma0);
  const double total = es.eigenvalues().sum();
  if (total <= 0.0) throw estimation_error("variance_share: degenerate panel");
  return es.eigenvalues().tail(r).sum() / total;
}

}  // namespace nsdfm

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "nsdfm/errors.hpp"
#include "nsdfm/factor.hpp"

namespace nsdfm {

// Reduced-rank VECM for the r extracted factors,
//   dF_t = alpha beta' F_{t-1} + G_1 dF_{t-1} + ... + G_p dF_{t-p} + h + w_t,
// with cointegration rank c and a rank-q loading K of the residual
// covariance (w_t = K u_t for q orthonormal shocks).
struct VecmModel {
  Eigen::MatrixXd beta;    // r x c, normalized beta' S11 beta = I
  Eigen::MatrixXd alpha;   // r x c
  std::vector<Eigen::MatrixXd> gamma;  // p matrices, r x r
  Eigen::VectorXd intercept;           // size r, or size 0 when absent
  Eigen::MatrixXd residuals;           // r x (T - p)
  Eigen::MatrixXd K;                   // r x q (empty until estimate_K)
  Eigen::VectorXd eigvals;             // the c selected canonical eigenvalues
  int p = 0;
  int c = 0;
  int q = 0;

  bool has_intercept() const { return intercept.size() > 0; }
};

namespace detail {

// OLS of each row of Y on the columns of Z (obs in columns for both).
// Throws on a numerically rank-deficient regressor set.
inline Eigen::MatrixXd ols_rows(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& Z) {
  const Eigen::MatrixXd gram = Z * Z.transpose();
  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      ldlt.vectorD().minCoeff() <= gram.diagonal().maxCoeff() * 1e-13)
    throw estimation_error("collinear regressors in least squares step");
  return ldlt.solve(Z * Y.transpose()).transpose();
}

inline Eigen::MatrixXd sym_inv_sqrt(const Eigen::MatrixXd& S, double cond_limit,
                                    const std::string& what) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (S + S.transpose()));
  if (es.info() != Eigen::Success)
    throw estimation_error(what + ": eigendecomposition failed");
  const Eigen::VectorXd d = es.eigenvalues();
  if (!(d.minCoeff() > 0.0) || d.maxCoeff() / d.minCoeff() > cond_limit)
    throw estimation_error(what + " ill-conditioned, smallest eigenvalue " +
                           std::to_string(d.minCoeff()));
  return es.eigenvectors() * d.cwiseSqrt().cwiseInverse().asDiagonal() *
         es.eigenvectors().transpose();
}

}  // namespace detail

// Concentrates the short-run regressors out: e0 = residual of dF_t and
// e1 = residual of F_{t-1}, both after regressing on
// (dF_{t-1}, ..., dF_{t-p}, optional constant) over t = p+1..T. With p = 0
// and no intercept the inputs pass through untouched.
inline std::pair<Eigen::MatrixXd, Eigen::MatrixXd> concentrate(const Eigen::MatrixXd& F,
                                                               int p, bool intercept) {
  const Eigen::Index r = F.rows();
  const Eigen::Index T = F.cols() - 1;
  if (p < 0) throw config_error("concentrate: negative lag order");
  if (T - p < r + 2)
    throw estimation_error("concentrate: sample too short for p = " + std::to_string(p));

  const Eigen::MatrixXd dF = difference_matrix(F);  // cols 0..T-1 hold dF_1..dF_T
  const Eigen::Index m = T - p;                     // observations t = p+1..T
  Eigen::MatrixXd y0 = dF.rightCols(m);             // dF_t
  Eigen::MatrixXd y1 = F.middleCols(p, m);          // F_{t-1}

  const Eigen::Index nz = static_cast<Eigen::Index>(p) * r + (intercept ? 1 : 0);
  if (nz == 0) return {y0, y1};

  Eigen::MatrixXd Z(nz, m);
  for (int k = 1; k <= p; ++k)
    Z.middleRows(static_cast<Eigen::Index>(k - 1) * r, r) = dF.middleCols(p - k, m);
  if (intercept) Z.row(nz - 1).setOnes();

  const Eigen::MatrixXd coef0 = detail::ols_rows(y0, Z);
  const Eigen::MatrixXd coef1 = detail::ols_rows(y1, Z);
  return {y0 - coef0 * Z, y1 - coef1 * Z};
}

// Rank-q shock loading from dynamics residuals: K = W_q D_q^{1/2} built
// from the top q eigenpairs of the residual covariance, so K K' is the
// best rank-q approximation of that covariance.
inline Eigen::MatrixXd estimate_K(const Eigen::MatrixXd& residuals, int q) {
  const Eigen::Index r = residuals.rows();
  if (q < 1 || q > r) throw config_error("estimate_K: q out of range");
  const Eigen::MatrixXd cov = covariance_uncentered(residuals);
  auto [vals, vecs] = top_eigen(cov, q);
  // a q beyond the numerical rank only warns via flooring; the caller sees
  // zero columns rather than NaN
  Eigen::VectorXd floored = vals.cwiseMax(0.0);
  return vecs * floored.cwiseSqrt().asDiagonal();
}

// Two-step reduced-rank estimation. Step 1 solves the canonical-correlation
// eigenproblem on the whitened cross moments of the concentrated residuals
// and keeps the c dominant directions as beta. Step 2 re-runs OLS of dF_t
// on (beta'F_{t-1}, lagged differences, constant) jointly for alpha, the
// G_k and the intercept. Pass q > 0 to fill K from the residuals.
inline VecmModel johansen(const Eigen::MatrixXd& F, int p, int c, bool intercept,
                          int q = 0) {
  const Eigen::Index r = F.rows();
  const Eigen::Index T = F.cols() - 1;
  if (c < 1 || c >= r) throw config_error("johansen: need 1 <= c < r");
  if (p < 0) throw config_error("johansen: negative lag order");

  auto [e0, e1] = concentrate(F, p, intercept);
  const double Tm = static_cast<double>(e0.cols());
  const Eigen::MatrixXd S00 = (e0 * e0.transpose()) / Tm;
  const Eigen::MatrixXd S01 = (e0 * e1.transpose()) / Tm;
  const Eigen::MatrixXd S11 = (e1 * e1.transpose()) / Tm;

  const Eigen::MatrixXd S11_isqrt = detail::sym_inv_sqrt(S11, 1e12, "johansen: S11");
  Eigen::LDLT<Eigen::MatrixXd> s00(S00);
  if (s00.info() != Eigen::Success || !s00.isPositive())
    throw estimation_error("johansen: S00 not positive definite");

  Eigen::MatrixXd M =
      S11_isqrt * S01.transpose() * s00.solve(S01) * S11_isqrt;
  // keep all r canonical eigenvalues for rank diagnostics; only the c
  // dominant directions enter beta
  auto [lam, U] = top_eigen(0.5 * (M + M.transpose()), static_cast<int>(r));

  // canonical eigenvalues are squared correlations; warn-level tolerance
  // then clip to [0, 1]
  for (Eigen::Index j = 0; j < lam.size(); ++j) {
    if (lam(j) < -1e-8 || lam(j) > 1.0 + 1e-8)
      throw estimation_error("johansen: eigenvalue " + std::to_string(lam(j)) +
                             " outside [0,1]");
    lam(j) = std::min(std::max(lam(j), 0.0), 1.0);
  }

  VecmModel m;
  m.p = p;
  m.c = c;
  m.eigvals = lam;
  m.beta = S11_isqrt * U.leftCols(c);  // beta' S11 beta = I
  detail::fix_sign(m.beta);
  const Eigen::MatrixXd bsb = m.beta.transpose() * S11 * m.beta;
  m.alpha = S01 * m.beta * bsb.inverse();

  // second step: joint OLS over t = p+1..T
  const Eigen::MatrixXd dF = difference_matrix(F);
  const Eigen::Index nobs = T - p;
  Eigen::MatrixXd y = dF.rightCols(nobs);
  const Eigen::Index nz = c + static_cast<Eigen::Index>(p) * r + (intercept ? 1 : 0);
  Eigen::MatrixXd Z(nz, nobs);
  Z.topRows(c) = m.beta.transpose() * F.middleCols(p, nobs);
  for (int k = 1; k <= p; ++k)
    Z.middleRows(c + static_cast<Eigen::Index>(k - 1) * r, r) = dF.middleCols(p - k, nobs);
  if (intercept) Z.row(nz - 1).setOnes();
  const Eigen::MatrixXd coef = detail::ols_rows(y, Z);

  m.gamma.reserve(static_cast<size_t>(p));
  for (int k = 1; k <= p; ++k)
    m.gamma.push_back(coef.middleCols(c + static_cast<Eigen::Index>(k - 1) * r, r));
  if (intercept) m.intercept = coef.col(nz - 1);

  // residuals use the step-1 alpha (identical to the OLS block up to
  // rounding by Frisch-Waugh) so the stored model is self-consistent
  Eigen::MatrixXd fitted = m.alpha * Z.topRows(c);
  for (int k = 1; k <= p; ++k)
    fitted += m.gamma[static_cast<size_t>(k - 1)] *
              Z.middleRows(c + static_cast<Eigen::Index>(k - 1) * r, r);
  if (intercept) fitted.colwise() += m.intercept;
  m.residuals = y - fitted;

  if (q > 0) {
    m.q = q;
    m.K = estimate_K(m.residuals, q);
  }
  return m;
}

// Levels VAR(p+1) implied by the fitted VECM:
//   A_1 = G_1 + alpha beta' + I,  A_k = G_k - G_{k-1},  A_{p+1} = -G_p.
// I - sum A_k = -alpha beta' has rank c, leaving r - c unit roots.
inline std::vector<Eigen::MatrixXd> vecm_to_var(const VecmModel& m) {
  const Eigen::Index r = m.beta.rows();
  const Eigen::MatrixXd Pi = m.alpha * m.beta.transpose();
  std::vector<Eigen::MatrixXd> A(static_cast<size_t>(m.p) + 1);
  A[0] = Pi + Eigen::MatrixXd::Identity(r, r);
  if (m.p >= 1) A[0] += m.gamma[0];
  for (int k = 2; k <= m.p; ++k)
    A[static_cast<size_t>(k - 1)] =
        m.gamma[static_cast<size_t>(k - 1)] - m.gamma[static_cast<size_t>(k - 2)];
  if (m.p >= 1)
    A[static_cast<size_t>(m.p)] = -m.gamma[static_cast<size_t>(m.p - 1)];
  else
    A.resize(1);  // p = 0: VAR(1) with A_1 = Pi + I
  return A;
}

}  // namespace nsdfm

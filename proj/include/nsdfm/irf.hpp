#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "nsdfm/errors.hpp"

namespace nsdfm {

enum class IdentificationScheme { raw, recursive, permanent };

struct Normalization {
  int variable = 0;
  int shock = 0;
  int horizon = 0;
  double target = 1.0;
};

// Impulse responses of the observed panel to the q common shocks.
// coeffs[k] is the n x q horizon-k slice; factor_coeffs[k] keeps the r x q
// factor-level responses B_k K (rotated alongside), which identification
// and long-run diagnostics need.
struct IrfSet {
  std::vector<Eigen::MatrixXd> coeffs;
  std::vector<Eigen::MatrixXd> factor_coeffs;
  int horizon = 0;
  IdentificationScheme identification = IdentificationScheme::raw;
  std::vector<int> order;  // recursive: panel rows defining the scheme
  int tau = 0;             // permanent: number of permanent shocks
  std::optional<Normalization> normalization;
  std::vector<Eigen::MatrixXd> lower, upper;  // bootstrap bands, may be empty
  double band_coverage = 0.0;
  int band_replicates = 0;
  std::string dynamics_tag;  // "vecm" or "var"

  int n() const { return coeffs.empty() ? 0 : static_cast<int>(coeffs.front().rows()); }
  int q() const { return coeffs.empty() ? 0 : static_cast<int>(coeffs.front().cols()); }
  bool has_bands() const { return !lower.empty(); }
};

// Power-series inverse of A(L) = I - A_1 L - ... - A_s L^s:
// B_0 = I, B_k = sum_{j=1..min(k,s)} A_j B_{k-j}.
inline std::vector<Eigen::MatrixXd> invert_polynomial(const std::vector<Eigen::MatrixXd>& A,
                                                      int H) {
  if (A.empty()) throw config_error("invert_polynomial: empty polynomial");
  const Eigen::Index r = A.front().rows();
  if (H < 0) throw config_error("invert_polynomial: negative horizon");
  std::vector<Eigen::MatrixXd> B(static_cast<size_t>(H) + 1);
  B[0] = Eigen::MatrixXd::Identity(r, r);
  const int s = static_cast<int>(A.size());
  for (int k = 1; k <= H; ++k) {
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(r, r);
    for (int j = 1; j <= std::min(k, s); ++j)
      acc += A[static_cast<size_t>(j - 1)] * B[static_cast<size_t>(k - j)];
    B[static_cast<size_t>(k)] = acc;
  }
  return B;
}

// Raw (unidentified) responses: slice k is loadings * B_k * K.
inline IrfSet raw_irf(const Eigen::MatrixXd& loadings,
                      const std::vector<Eigen::MatrixXd>& B, const Eigen::MatrixXd& K,
                      int H) {
  if (B.empty()) throw config_error("raw_irf: empty coefficient series");
  if (H < 0 || H >= static_cast<int>(B.size()))
    throw config_error("raw_irf: horizon exceeds available coefficients");
  if (loadings.cols() != B.front().rows() || B.front().cols() != K.rows())
    throw config_error("raw_irf: dimension mismatch");
  IrfSet irf;
  irf.horizon = H;
  irf.coeffs.reserve(static_cast<size_t>(H) + 1);
  irf.factor_coeffs.reserve(static_cast<size_t>(H) + 1);
  for (int k = 0; k <= H; ++k) {
    Eigen::MatrixXd fk = B[static_cast<size_t>(k)] * K;
    irf.coeffs.push_back(loadings * fk);
    irf.factor_coeffs.push_back(std::move(fk));
  }
  return irf;
}

namespace detail {

inline void rotate_irf(IrfSet& irf, const Eigen::MatrixXd& R) {
  for (auto& s : irf.coeffs) s = s * R;
  for (auto& s : irf.factor_coeffs) s = s * R;
}

}  // namespace detail

// Recursive identification on the ordered variable rows: with M the q
// impact rows in the given order, R = M^{-1} chol(M M') rotates the shocks
// so the ordered impact block is lower triangular with positive diagonal.
inline IrfSet identify_recursive(const IrfSet& raw, const std::vector<int>& order) {
  const int q = raw.q();
  if (static_cast<int>(order.size()) != q)
    throw config_error("identify_recursive: need exactly q ordered variables");
  Eigen::MatrixXd M(q, q);
  for (int i = 0; i < q; ++i) {
    if (order[static_cast<size_t>(i)] < 0 || order[static_cast<size_t>(i)] >= raw.n())
      throw config_error("identify_recursive: variable index out of range");
    M.row(i) = raw.coeffs.front().row(order[static_cast<size_t>(i)]);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  const double smin = svd.singularValues()(q - 1);
  const double smax = svd.singularValues()(0);
  if (!(smin > 0.0) || smax / smin > 1e10)
    throw estimation_error("identify_recursive: impact block ill-conditioned");

  Eigen::LLT<Eigen::MatrixXd> llt(M * M.transpose());
  if (llt.info() != Eigen::Success)
    throw estimation_error("identify_recursive: Cholesky failed");
  const Eigen::MatrixXd L = llt.matrixL();
  const Eigen::MatrixXd R = M.partialPivLu().solve(L);

  // R must be orthogonal by construction; guard against a silently bad solve
  const double dev = (R.transpose() * R - Eigen::MatrixXd::Identity(q, q))
                         .cwiseAbs()
                         .maxCoeff();
  if (dev > 1e-8)
    throw estimation_error("identify_recursive: rotation not orthogonal");

  IrfSet out = raw;
  detail::rotate_irf(out, R);
  out.identification = IdentificationScheme::recursive;
  out.order = order;
  return out;
}

// Levels response at a long horizon (the finite-horizon proxy for the
// infinite-horizon cumulated response).
inline Eigen::MatrixXd long_run_response(const IrfSet& irf, int H_lr) {
  if (H_lr < 0 || H_lr > irf.horizon)
    throw config_error("long_run_response: horizon out of range");
  return irf.coeffs[static_cast<size_t>(H_lr)];
}

// Permanent/transitory identification: rotate so only the first tau shocks
// have nonzero long-run responses. The rotation is the right singular basis
// of the factor-level long-run matrix B_{H_lr} K (rank tau); its trailing
// q - tau singular vectors span the transitory directions. Signs are fixed
// so the permanent shocks raise the designated variable in the long run and
// transitory columns follow the largest-entry-positive convention.
//
// strict = true runs a singular value ratio test asserting the long-run
// matrix really has rank tau. That holds for dynamics that impose the
// unit roots (the VECM path); an unrestricted levels VAR only has roots
// near one, so its caller passes strict = false and the SVD delivers the
// best rank-tau split instead of a hard failure.
inline IrfSet identify_permanent(const IrfSet& raw, int tau, int H_lr,
                                 int sign_variable = 0, bool strict = true) {
  const int q = raw.q();
  if (tau < 1 || tau > q) throw config_error("identify_permanent: tau out of range");
  if (H_lr < 0 || H_lr > raw.horizon)
    throw config_error("identify_permanent: H_lr out of range");
  if (sign_variable < 0 || sign_variable >= raw.n())
    throw config_error("identify_permanent: sign variable out of range");

  const Eigen::MatrixXd Xi = raw.factor_coeffs[static_cast<size_t>(H_lr)];
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Xi, Eigen::ComputeFullV);
  const Eigen::VectorXd s = svd.singularValues();
  if (!(s(0) > 0.0))
    throw estimation_error("identify_permanent: long-run response is zero");
  const double ratio_tol = 1e-4;
  if (strict && (s(tau - 1) / s(0) < ratio_tol ||
                 (tau < q && s(tau) / s(0) >= ratio_tol)))
    throw estimation_error("identify_permanent: long-run rank is not tau (singular value ratio test)");

  Eigen::MatrixXd R = svd.matrixV();
  IrfSet out = raw;
  detail::rotate_irf(out, R);

  // sign conventions, applied identically to both coefficient sets
  const Eigen::MatrixXd lr = out.coeffs[static_cast<size_t>(H_lr)];
  for (int j = 0; j < q; ++j) {
    bool flip = false;
    if (j < tau) {
      flip = lr(sign_variable, j) < 0.0;
    } else {
      Eigen::Index best = 0;
      out.coeffs.front().col(j).cwiseAbs().maxCoeff(&best);
      flip = out.coeffs.front()(best, j) < 0.0;
    }
    if (flip) {
      for (auto& sl : out.coeffs) sl.col(j) = -sl.col(j);
      for (auto& sl : out.factor_coeffs) sl.col(j) = -sl.col(j);
    }
  }
  out.identification = IdentificationScheme::permanent;
  out.tau = tau;
  return out;
}

// Rescales shock `shock` so the response of `variable` at `horizon` equals
// target exactly.
inline IrfSet normalize_irf(const IrfSet& irf, int variable, int shock, int horizon,
                            double target) {
  if (variable < 0 || variable >= irf.n()) throw config_error("normalize_irf: bad variable");
  if (shock < 0 || shock >= irf.q()) throw config_error("normalize_irf: bad shock");
  if (horizon < 0 || horizon > irf.horizon) throw config_error("normalize_irf: bad horizon");
  const double pivot = irf.coeffs[static_cast<size_t>(horizon)](variable, shock);
  if (std::abs(pivot) <= 1e-12)
    throw estimation_error("normalize_irf: pivot response too close to zero");
  const double scale = target / pivot;
  IrfSet out = irf;
  for (auto& sl : out.coeffs) sl.col(shock) *= scale;
  for (auto& sl : out.factor_coeffs) sl.col(shock) *= scale;
  // pin the pivot itself so the contract holds exactly, not just to rounding
  out.coeffs[static_cast<size_t>(horizon)](variable, shock) = target;
  out.normalization = Normalization{variable, shock, horizon, target};
  return out;
}

}  // namespace nsdfm

#pragma once

#include <Eigen/Dense>
#include <vector>

#include "nsdfm/errors.hpp"
#include "nsdfm/factor.hpp"
#include "nsdfm/vecm.hpp"

namespace nsdfm {

// Unrestricted VAR(p) in levels, F_t = A_1 F_{t-1} + ... + A_p F_{t-p} + h + w_t.
// No unit-root restriction is imposed; long-horizon objects built from this
// model are inconsistent when the factors are cointegrated, which the
// pipeline surfaces as a warning.
struct VarModel {
  std::vector<Eigen::MatrixXd> A;  // p matrices, r x r
  Eigen::VectorXd intercept;       // size r, or 0 when absent
  Eigen::MatrixXd residuals;       // r x (T - p)
  Eigen::MatrixXd K;               // r x q (empty until estimate_K)
  int p = 0;
  int q = 0;

  bool has_intercept() const { return intercept.size() > 0; }
};

// Equation-by-equation least squares over t = p+1..T. The intercept is
// handled by centering, and the centered normal equations are solved with
// a rank-revealing decomposition: a degenerate regressor set falls back to
// the minimum-norm solution instead of failing (a constant factor path
// yields intercept = F and all A_k = 0).
inline VarModel var_ls(const Eigen::MatrixXd& F, int p, bool intercept, int q = 0) {
  const Eigen::Index r = F.rows();
  const Eigen::Index T = F.cols() - 1;
  if (p < 1) throw config_error("var_ls: lag order must be positive");
  if (T - p < 2) throw estimation_error("var_ls: sample too short");

  const Eigen::Index m = T - p;  // targets t = p+1..T
  Eigen::MatrixXd y = F.rightCols(m);
  Eigen::MatrixXd Z(static_cast<Eigen::Index>(p) * r, m);
  for (int k = 1; k <= p; ++k)
    Z.middleRows(static_cast<Eigen::Index>(k - 1) * r, r) = F.middleCols(p + 1 - k, m);

  Eigen::VectorXd ymean = Eigen::VectorXd::Zero(r);
  Eigen::VectorXd zmean = Eigen::VectorXd::Zero(Z.rows());
  if (intercept) {
    ymean = y.rowwise().mean();
    zmean = Z.rowwise().mean();
    y.colwise() -= ymean;
    Z.colwise() -= zmean;
  }

  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(Z.transpose());
  const Eigen::MatrixXd coef = cod.solve(y.transpose()).transpose();

  VarModel vm;
  vm.p = p;
  vm.A.reserve(static_cast<size_t>(p));
  for (int k = 1; k <= p; ++k)
    vm.A.push_back(coef.middleCols(static_cast<Eigen::Index>(k - 1) * r, r));
  if (intercept) vm.intercept = ymean - coef * zmean;
  vm.residuals = y - coef * Z;  // centered forms cancel the intercept exactly

  if (q > 0) {
    vm.q = q;
    vm.K = estimate_K(vm.residuals, q);
  }
  return vm;
}

}  // namespace nsdfm

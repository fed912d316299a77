#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "nsdfm/errors.hpp"
#include "nsdfm/factor.hpp"
#include "nsdfm/irf.hpp"
#include "nsdfm/var.hpp"
#include "nsdfm/vecm.hpp"

namespace nsdfm {

// Everything needed to go from a (detrended) levels panel to identified
// impulse responses. Shared by the CLI, the bootstrap and the Monte Carlo
// harness so all three run literally the same code path.
struct PipelineSpec {
  int r = 1;
  int q = 1;
  int c = 1;              // cointegration rank (vecm only)
  std::string dynamics = "vecm";  // "vecm" or "var"
  int p = 1;              // vecm: lagged-difference count; var: lag order
  bool intercept = true;
  int horizon = 20;
  IdentificationScheme scheme = IdentificationScheme::recursive;
  std::vector<int> order;        // recursive ordering (q panel rows)
  int tau = 1;                   // permanent shocks
  int sign_variable = 0;         // permanent sign anchor
  int long_run_horizon = 500;
  std::optional<Normalization> normalization;
};

struct PipelineFit {
  FactorModel factors;
  std::optional<VecmModel> vecm;
  std::optional<VarModel> var;
  std::vector<Eigen::MatrixXd> var_coeffs;  // levels VAR form used for B(L)
  IrfSet irf;
  std::vector<std::string> warnings;
};

inline void validate_spec(const PipelineSpec& s, Eigen::Index n) {
  if (s.r < 1 || s.r > n) throw config_error("pipeline: r out of range");
  if (s.q < 1 || s.q > s.r) throw config_error("pipeline: need 1 <= q <= r");
  if (s.dynamics != "vecm" && s.dynamics != "var")
    throw config_error("pipeline: dynamics must be vecm or var");
  if (s.dynamics == "vecm" && (s.c < 1 || s.c >= s.r))
    throw config_error("pipeline: need 1 <= c < r for the VECM");
  if (s.horizon < 0) throw config_error("pipeline: negative horizon");
  if (s.scheme == IdentificationScheme::recursive &&
      static_cast<int>(s.order.size()) != s.q)
    throw config_error("pipeline: recursive identification needs q ordered variables");
  if (s.scheme == IdentificationScheme::permanent && (s.tau < 1 || s.tau > s.q))
    throw config_error("pipeline: need 1 <= tau <= q");
}

inline PipelineFit run_pipeline(const Eigen::MatrixXd& x, const PipelineSpec& spec) {
  validate_spec(spec, x.rows());
  PipelineFit fit;
  fit.factors = estimate_factors(x, spec.r);
  const Eigen::MatrixXd& F = fit.factors.factors;

  Eigen::MatrixXd K;
  if (spec.dynamics == "vecm") {
    fit.vecm = johansen(F, spec.p, spec.c, spec.intercept, spec.q);
    fit.var_coeffs = vecm_to_var(*fit.vecm);
    K = fit.vecm->K;
  } else {
    fit.var = var_ls(F, spec.p, spec.intercept, spec.q);
    fit.var_coeffs = fit.var->A;
    K = fit.var->K;
  }

  int H_eff = spec.horizon;
  if (spec.scheme == IdentificationScheme::permanent)
    H_eff = std::max(H_eff, spec.long_run_horizon);
  const std::vector<Eigen::MatrixXd> B = invert_polynomial(fit.var_coeffs, H_eff);
  fit.irf = raw_irf(fit.factors.loadings, B, K, H_eff);
  fit.irf.dynamics_tag = spec.dynamics;

  switch (spec.scheme) {
    case IdentificationScheme::raw:
      break;
    case IdentificationScheme::recursive:
      fit.irf = identify_recursive(fit.irf, spec.order);
      break;
    case IdentificationScheme::permanent:
      if (spec.dynamics == "var")
        fit.warnings.push_back(
            "permanent identification on an unrestricted levels VAR: long-run "
            "responses are inconsistent when factors are cointegrated");
      fit.irf = identify_permanent(fit.irf, spec.tau,
                                   std::min(spec.long_run_horizon, fit.irf.horizon),
                                   spec.sign_variable,
                                   /*strict=*/spec.dynamics != "var");
      break;
  }
  if (spec.normalization) {
    const Normalization& nm = *spec.normalization;
    fit.irf = normalize_irf(fit.irf, nm.variable, nm.shock, nm.horizon, nm.target);
  }
  return fit;
}

}  // namespace nsdfm

#pragma once

#include <Eigen/Dense>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nsdfm/errors.hpp"
#include "nsdfm/factor.hpp"
#include "nsdfm/irf.hpp"
#include "nsdfm/montecarlo.hpp"
#include "nsdfm/selection.hpp"
#include "nsdfm/var.hpp"
#include "nsdfm/vecm.hpp"

namespace nsdfm {

using json = nlohmann::json;

inline json matrix_json(const Eigen::MatrixXd& m) {
  json data = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

inline json vector_json(const Eigen::VectorXd& v) {
  json data = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) data.push_back(v(i));
  return data;
}

inline json factor_model_json(const FactorModel& fm) {
  return json{{"r", fm.r},
              {"eigvals", vector_json(fm.eigvals)},
              {"loadings", matrix_json(fm.loadings)},
              {"factors", matrix_json(fm.factors)},
              {"diff_factors", matrix_json(fm.diff_factors)}};
}

inline json vecm_model_json(const VecmModel& m) {
  json gam = json::array();
  for (const auto& g : m.gamma) gam.push_back(matrix_json(g));
  json j{{"p", m.p},
         {"c", m.c},
         {"q", m.q},
         {"beta", matrix_json(m.beta)},
         {"alpha", matrix_json(m.alpha)},
         {"gamma", std::move(gam)},
         {"eigvals", vector_json(m.eigvals)},
         {"K", matrix_json(m.K)},
         {"residuals", matrix_json(m.residuals)}};
  j["intercept"] = m.has_intercept() ? vector_json(m.intercept) : json(nullptr);
  return j;
}

inline json var_model_json(const VarModel& m) {
  json A = json::array();
  for (const auto& a : m.A) A.push_back(matrix_json(a));
  json j{{"p", m.p},
         {"q", m.q},
         {"A", std::move(A)},
         {"K", matrix_json(m.K)},
         {"residuals", matrix_json(m.residuals)}};
  j["intercept"] = m.has_intercept() ? vector_json(m.intercept) : json(nullptr);
  return j;
}

inline json irf_json(const IrfSet& irf, const std::vector<std::string>& names,
                     int max_horizon = -1) {
  const int H = max_horizon < 0 ? irf.horizon : std::min(max_horizon, irf.horizon);
  json slices = json::array();
  for (int k = 0; k <= H; ++k) slices.push_back(matrix_json(irf.coeffs[static_cast<size_t>(k)]));
  json j{{"horizon", H},
         {"dynamics", irf.dynamics_tag},
         {"variables", names},
         {"identification", irf.identification == IdentificationScheme::raw ? "raw"
                            : irf.identification == IdentificationScheme::recursive
                                ? "recursive"
                                : "permanent"},
         {"coeffs", std::move(slices)}};
  if (irf.identification == IdentificationScheme::recursive) j["order"] = irf.order;
  if (irf.identification == IdentificationScheme::permanent) j["tau"] = irf.tau;
  if (irf.normalization) {
    j["normalization"] = json{{"variable", irf.normalization->variable},
                              {"shock", irf.normalization->shock},
                              {"horizon", irf.normalization->horizon},
                              {"target", irf.normalization->target}};
  }
  if (irf.has_bands()) {
    json lo = json::array(), hi = json::array();
    for (int k = 0; k <= H; ++k) {
      lo.push_back(matrix_json(irf.lower[static_cast<size_t>(k)]));
      hi.push_back(matrix_json(irf.upper[static_cast<size_t>(k)]));
    }
    j["bands"] = json{{"coverage", irf.band_coverage},
                      {"replicates", irf.band_replicates},
                      {"lower", std::move(lo)},
                      {"upper", std::move(hi)}};
  }
  return j;
}

inline json tune_json(const TuneResult& tr) {
  return json{{"c_star", tr.c_star},
              {"fallback", tr.fallback},
              {"c_grid", tr.c_grid},
              {"stability_path", tr.stability_path},
              {"full_sample_counts", tr.full_sample_counts}};
}

inline json selection_json(const SelectionResult& sel) {
  json j{{"r", sel.r_hat},
         {"q", sel.q_hat},
         {"tau", sel.tau_hat},
         {"d", sel.d_hat},
         {"c", sel.c_hat},
         {"clamped", sel.clamped},
         {"penalty_q", sel.penalty_q},
         {"penalty_tau", sel.penalty_tau},
         {"criterion_paths",
          json{{"r_ic", sel.r_detail.ic_path},
               {"r_ratio", sel.r_detail.ratio_path},
               {"q", sel.q_path},
               {"tau", sel.tau_path}}},
         {"r_methods", json{{"ic", sel.r_detail.r_ic}, {"ratio", sel.r_detail.r_ratio}}}};
  if (sel.tune_q) j["tune_q"] = tune_json(*sel.tune_q);
  if (sel.tune_tau) j["tune_tau"] = tune_json(*sel.tune_tau);
  return j;
}

inline json dgp_params_json(const DgpParams& gp) {
  return json{{"r", gp.r},
              {"q", gp.q},
              {"c", gp.c},
              {"Lambda", matrix_json(gp.Lambda)},
              {"U1", matrix_json(gp.U1)},
              {"K", matrix_json(gp.K)},
              {"R", matrix_json(gp.R)},
              {"rho", gp.rho},
              {"d_coef", vector_json(gp.d_coef)},
              {"idio_scale", vector_json(gp.idio_scale)}};
}

inline void write_json(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write " + path);
  out << j.dump(2) << '\n';
}

inline json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw data_error(path + ": invalid JSON: " + e.what());
  }
  return j;
}

}  // namespace nsdfm

// Command-line front end: ingest, select, estimate, irf, simulate and
// experiment subcommands over the nsdfm library. Exit codes: 0 success,
// 2 configuration error, 3 data error, 4 numerical/estimation error.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "nsdfm/nsdfm.hpp"

namespace fs = std::filesystem;
using nsdfm::json;

namespace {

struct CommonOpts {
  std::string data;
  std::string transforms;
  std::string detrend = "ls";  // ls | demean | none
  std::string out;
  std::string frequency = "quarterly";
  bool to_quarterly = false;
  int daily_block = 63;
};

struct CountOpts {
  std::string r = "auto";
  std::string q = "auto";
  std::string tau = "auto";
  int r_max = 10;
  int q_max = 8;
  int tau_max = 8;
  double penalty = 1.0;
  bool tune = false;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool need_data = true) {
  auto* d = cmd->add_option("--data", o.data, "levels panel CSV");
  if (need_data) d->required();
  cmd->add_option("--transforms", o.transforms, "sidecar CSV mapping series to codes 1/2/3");
  cmd->add_option("--detrend", o.detrend, "ls | demean | none")
      ->check(CLI::IsMember({"ls", "demean", "none"}));
  cmd->add_option("--out", o.out, "output directory")->required();
  cmd->add_option("--frequency", o.frequency, "monthly | quarterly | daily")
      ->check(CLI::IsMember({"monthly", "quarterly", "daily"}));
  cmd->add_flag("--to-quarterly", o.to_quarterly, "aggregate to quarterly block means");
  cmd->add_option("--daily-block", o.daily_block, "block length for daily aggregation");
}

void add_counts(CLI::App* cmd, CountOpts& o) {
  cmd->add_option("--r", o.r, "static factor count, integer or 'auto'");
  cmd->add_option("--q", o.q, "dynamic shock count, integer or 'auto'");
  cmd->add_option("--tau", o.tau, "common trend count, integer or 'auto'");
  cmd->add_option("--r-max", o.r_max, "selection bound for r");
  cmd->add_option("--q-max", o.q_max, "selection bound for q");
  cmd->add_option("--tau-max", o.tau_max, "selection bound for tau");
  cmd->add_option("--penalty", o.penalty, "penalty multiplier for the q/tau criteria");
  cmd->add_flag("--tune", o.tune, "tune the penalty multiplier on subsamples");
}

int parse_count(const std::string& s, const char* what) {
  if (s == "auto") return -1;
  try {
    size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos != s.size() || v < 0) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw nsdfm::config_error(std::string(what) + " must be a nonnegative integer or 'auto'");
  }
}

nsdfm::Frequency parse_frequency(const std::string& s) {
  if (s == "monthly") return nsdfm::Frequency::monthly;
  if (s == "daily") return nsdfm::Frequency::daily;
  return nsdfm::Frequency::quarterly;
}

void ensure_outdir(const std::string& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw nsdfm::data_error("cannot create output directory " + out);
}

// load + transform + optional aggregation; detrending is separate
nsdfm::Panel load_panel(const CommonOpts& o, std::vector<std::string>* log = nullptr) {
  nsdfm::Panel p = nsdfm::read_panel_csv(o.data);
  p.frequency = parse_frequency(o.frequency);
  if (log)
    log->push_back("read " + std::to_string(p.n()) + " series x " +
                   std::to_string(p.values.cols()) + " periods from " + o.data);
  if (o.to_quarterly && p.frequency != nsdfm::Frequency::quarterly) {
    p = nsdfm::to_quarterly(p, o.daily_block);
    if (log)
      log->push_back("aggregated to quarterly: " + std::to_string(p.values.cols()) +
                     " periods");
  }
  if (!o.transforms.empty()) {
    nsdfm::attach_transforms(p, nsdfm::read_transforms_csv(o.transforms));
    p = nsdfm::apply_transforms(p);
    if (log)
      log->push_back("applied transforms: " + std::to_string(p.values.cols()) +
                     " periods remain");
  }
  nsdfm::validate_panel(p);
  return p;
}

nsdfm::Panel detrend(const nsdfm::Panel& p, const std::string& mode,
                     nsdfm::TrendFit* fit = nullptr) {
  if (mode == "none") return p;
  auto [out, tf] = mode == "demean" ? nsdfm::detrend_demean(p) : nsdfm::detrend_ls(p);
  if (fit) *fit = tf;
  return out;
}

std::vector<double> default_tune_grid() {
  std::vector<double> g;
  for (double c = 0.05; c <= 3.0 + 1e-9; c += 0.05) g.push_back(c);
  return g;
}

// full count selection on a detrended panel
nsdfm::SelectionResult select_counts(const nsdfm::Panel& detrended, const CountOpts& co,
                                     nsdfm::SpectralDensity* sd_out = nullptr) {
  const Eigen::MatrixXd diffs = nsdfm::difference(detrended.values);
  const int T = static_cast<int>(diffs.cols());

  nsdfm::SelectionResult sel;
  sel.r_detail = nsdfm::estimate_r(diffs, co.r_max);
  sel.r_hat = sel.r_detail.r_ic;

  nsdfm::SpectralDensity sd =
      nsdfm::lag_window_spectrum(diffs, nsdfm::default_bandwidth(T));
  nsdfm::dynamic_eigenvalues(sd);

  sel.penalty_q = co.penalty;
  sel.penalty_tau = co.penalty;
  if (co.tune) {
    sel.tune_q = nsdfm::tune_penalty(nsdfm::DynamicCriterion::q, diffs, co.q_max,
                                     default_tune_grid());
    sel.tune_tau = nsdfm::tune_penalty(nsdfm::DynamicCriterion::tau, diffs, co.tau_max,
                                       default_tune_grid());
    sel.penalty_q = sel.tune_q->c_star;
    sel.penalty_tau = sel.tune_tau->c_star;
  }
  std::tie(sel.q_hat, sel.q_path) = nsdfm::estimate_q(sd, T, co.q_max, sel.penalty_q);
  std::tie(sel.tau_hat, sel.tau_path) =
      nsdfm::estimate_tau(sd, T, co.tau_max, sel.penalty_tau);

  if (sel.tau_hat > sel.q_hat) {
    sel.tau_hat = sel.q_hat;
    sel.clamped = true;
  }
  if (sel.q_hat > sel.r_hat && sel.r_hat > 0) {
    sel.q_hat = sel.r_hat;
    sel.clamped = true;
    if (sel.tau_hat > sel.q_hat) sel.tau_hat = sel.q_hat;
  }
  sel.d_hat = sel.q_hat - sel.tau_hat;
  sel.c_hat = sel.r_hat - sel.tau_hat;
  if (sd_out) *sd_out = std::move(sd);
  return sel;
}

struct ResolvedCounts {
  int r = 0, q = 0, tau = 0, c = 0;
  std::optional<nsdfm::SelectionResult> selection;
};

ResolvedCounts resolve_counts(const nsdfm::Panel& detrended, const CountOpts& co) {
  ResolvedCounts rc;
  const int r_req = parse_count(co.r, "--r");
  const int q_req = parse_count(co.q, "--q");
  const int tau_req = parse_count(co.tau, "--tau");
  if (r_req < 0 || q_req < 0 || tau_req < 0) rc.selection = select_counts(detrended, co);
  rc.r = r_req >= 0 ? r_req : rc.selection->r_hat;
  rc.q = q_req >= 0 ? q_req : rc.selection->q_hat;
  rc.tau = tau_req >= 0 ? tau_req : rc.selection->tau_hat;
  if (rc.r < 1) throw nsdfm::estimation_error("resolved r = 0: no factor structure found");
  if (rc.q < 1 || rc.q > rc.r)
    throw nsdfm::config_error("need 1 <= q <= r (resolved q = " + std::to_string(rc.q) +
                              ", r = " + std::to_string(rc.r) + ")");
  if (rc.tau > rc.q) rc.tau = rc.q;
  rc.c = rc.r - rc.tau;
  return rc;
}

int resolve_series(const std::string& token, const std::vector<std::string>& names) {
  for (size_t i = 0; i < names.size(); ++i)
    if (names[i] == token) return static_cast<int>(i);
  // fall back to a 1-based index for convenience
  try {
    size_t pos = 0;
    const int v = std::stoi(token, &pos);
    if (pos == token.size() && v >= 1 && v <= static_cast<int>(names.size())) return v - 1;
  } catch (const std::exception&) {
  }
  throw nsdfm::config_error("unknown series '" + token + "'");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

// ---------------------------------------------------------------------- ingest

int cmd_ingest(const CommonOpts& com) {
  ensure_outdir(com.out);
  std::vector<std::string> log;
  nsdfm::Panel p = load_panel(com, &log);
  nsdfm::write_panel_csv(p, com.out + "/panel.csv");
  std::ofstream lf(com.out + "/ingest.log");
  for (const auto& line : log) lf << line << '\n';
  lf << "wrote " << com.out << "/panel.csv\n";
  std::cout << "ingested " << p.n() << " series, " << p.values.cols() << " periods\n";
  return 0;
}

// ---------------------------------------------------------------------- select

int cmd_select(const CommonOpts& com, const CountOpts& co) {
  ensure_outdir(com.out);
  nsdfm::Panel p = load_panel(com);
  nsdfm::Panel det = detrend(p, com.detrend);
  nsdfm::SpectralDensity sd;
  nsdfm::SelectionResult sel = select_counts(det, co, &sd);

  nsdfm::write_json(nsdfm::selection_json(sel), com.out + "/selection.json");
  nsdfm::write_criterion_csv(sel.r_detail.ic_path, 0, com.out + "/r_criterion.csv");
  nsdfm::write_criterion_csv(sel.q_path, 0, com.out + "/q_criterion.csv");
  nsdfm::write_criterion_csv(sel.tau_path, 0, com.out + "/tau_criterion.csv");
  nsdfm::write_eigenvalue_csv(sd, com.out + "/dynamic_eigenvalues.csv");
  if (sel.tune_q) nsdfm::write_stability_csv(*sel.tune_q, com.out + "/stability_q.csv");
  if (sel.tune_tau)
    nsdfm::write_stability_csv(*sel.tune_tau, com.out + "/stability_tau.csv");
  std::cout << "r = " << sel.r_hat << ", q = " << sel.q_hat << ", tau = " << sel.tau_hat
            << ", d = " << sel.d_hat << ", c = " << sel.c_hat << '\n';
  return 0;
}

// -------------------------------------------------------------- estimate / irf

struct DynOpts {
  std::string dynamics = "vecm";
  int lags = -1;  // -1: 1 for vecm, 2 for var
  std::string identify = "recursive";
  std::string order;
  std::string normalize;     // var:horizon:value
  std::string sign_var;      // permanent identification sign anchor
  int horizon = 20;
  int long_run_horizon = 500;
  int boot = 0;
  double band_coverage = 0.68;
  int block = 0;
  std::uint64_t seed = 0;
};

void add_dyn(CLI::App* cmd, DynOpts& o, bool irf_level) {
  cmd->add_option("--dynamics", o.dynamics, "vecm | var")
      ->check(CLI::IsMember({"vecm", "var"}));
  cmd->add_option("--lags", o.lags, "vecm: lagged differences; var: lag order");
  if (irf_level) {
    cmd->add_option("--identify", o.identify, "recursive | permanent | raw")
        ->check(CLI::IsMember({"recursive", "permanent", "raw"}));
    cmd->add_option("--order", o.order, "comma list of series for the recursive scheme");
    cmd->add_option("--normalize", o.normalize, "series:horizon:value");
    cmd->add_option("--sign-var", o.sign_var,
                    "series whose long-run response signs the permanent shock");
    cmd->add_option("--horizon", o.horizon, "IRF horizon");
    cmd->add_option("--long-run-horizon", o.long_run_horizon,
                    "horizon treated as the long run");
    cmd->add_option("--boot", o.boot, "bootstrap replicates (0 = no bands)");
    cmd->add_option("--coverage", o.band_coverage, "band coverage, e.g. 0.68");
    cmd->add_option("--block", o.block, "bootstrap block length (0 = T^(1/3))");
    cmd->add_option("--seed", o.seed, "bootstrap seed");
  }
}

nsdfm::PipelineSpec build_spec(const nsdfm::Panel& p, const ResolvedCounts& rc,
                               const DynOpts& dy, std::vector<std::string>* warnings) {
  nsdfm::PipelineSpec spec;
  spec.r = rc.r;
  spec.q = rc.q;
  spec.dynamics = dy.dynamics;
  spec.p = dy.lags >= 0 ? dy.lags : (dy.dynamics == "vecm" ? 1 : 2);
  spec.horizon = dy.horizon;
  spec.long_run_horizon = dy.long_run_horizon;
  if (dy.dynamics == "vecm") {
    if (rc.tau < 1)
      throw nsdfm::estimation_error(
          "resolved tau = 0 leaves no common trend; fit --dynamics var instead");
    if (rc.c < 1 || rc.c >= rc.r)
      throw nsdfm::config_error("cointegration rank c = r - tau = " +
                                std::to_string(rc.c) + " must lie in [1, r)");
    spec.c = rc.c;
  }
  if (dy.identify == "raw") {
    spec.scheme = nsdfm::IdentificationScheme::raw;
  } else if (dy.identify == "recursive") {
    spec.scheme = nsdfm::IdentificationScheme::recursive;
    if (dy.order.empty())
      throw nsdfm::config_error("recursive identification needs --order");
    for (const std::string& tok : split_list(dy.order))
      spec.order.push_back(resolve_series(tok, p.series_names));
  } else {
    spec.scheme = nsdfm::IdentificationScheme::permanent;
    spec.tau = rc.tau;
    spec.sign_variable =
        dy.sign_var.empty() ? 0 : resolve_series(dy.sign_var, p.series_names);
  }
  (void)warnings;
  return spec;
}

nsdfm::Normalization parse_normalization(const std::string& s, const nsdfm::Panel& p,
                                         const nsdfm::PipelineSpec& spec) {
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : s) {
    if (ch == ':') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  parts.push_back(cur);
  if (parts.size() != 3) throw nsdfm::config_error("--normalize expects series:horizon:value");
  nsdfm::Normalization nm;
  nm.variable = resolve_series(parts[0], p.series_names);
  try {
    nm.horizon = std::stoi(parts[1]);
    nm.target = std::stod(parts[2]);
  } catch (const std::exception&) {
    throw nsdfm::config_error("--normalize expects series:horizon:value");
  }
  if (spec.scheme == nsdfm::IdentificationScheme::recursive) {
    // the normalized shock is the one at the variable's slot in the ordering
    auto it = std::find(spec.order.begin(), spec.order.end(), nm.variable);
    if (it == spec.order.end())
      throw nsdfm::config_error("--normalize series must appear in --order");
    nm.shock = static_cast<int>(it - spec.order.begin());
  } else {
    nm.shock = 0;  // first (permanent) shock
  }
  return nm;
}

int cmd_estimate(const CommonOpts& com, const CountOpts& co, DynOpts dy) {
  ensure_outdir(com.out);
  nsdfm::Panel p = load_panel(com);
  nsdfm::Panel det = detrend(p, com.detrend);
  ResolvedCounts rc = resolve_counts(det, co);
  dy.identify = "raw";  // estimate stops before identification
  nsdfm::PipelineSpec spec = build_spec(det, rc, dy, nullptr);
  spec.horizon = 0;
  nsdfm::PipelineFit fit = nsdfm::run_pipeline(det.values, spec);

  if (rc.selection)
    nsdfm::write_json(nsdfm::selection_json(*rc.selection), com.out + "/selection.json");
  nsdfm::write_json(nsdfm::factor_model_json(fit.factors), com.out + "/factor_model.json");
  if (fit.vecm)
    nsdfm::write_json(nsdfm::vecm_model_json(*fit.vecm), com.out + "/vecm_model.json");
  if (fit.var)
    nsdfm::write_json(nsdfm::var_model_json(*fit.var), com.out + "/var_model.json");
  std::cout << "estimated " << spec.dynamics << " dynamics on r = " << spec.r
            << " factors (q = " << spec.q << ")\n";
  return 0;
}

int cmd_irf(const CommonOpts& com, const CountOpts& co, const DynOpts& dy) {
  ensure_outdir(com.out);
  nsdfm::Panel p = load_panel(com);
  nsdfm::Panel det = detrend(p, com.detrend);
  ResolvedCounts rc = resolve_counts(det, co);
  nsdfm::PipelineSpec spec = build_spec(det, rc, dy, nullptr);
  if (!dy.normalize.empty())
    spec.normalization = parse_normalization(dy.normalize, det, spec);

  nsdfm::PipelineFit fit = nsdfm::run_pipeline(det.values, spec);
  for (const std::string& w : fit.warnings) std::cerr << "warning: " << w << '\n';

  if (dy.boot > 0) {
    nsdfm::BootstrapSettings bs;
    bs.replicates = dy.boot;
    bs.coverage = dy.band_coverage;
    bs.block_length = dy.block;
    bs.seed = dy.seed;
    nsdfm::bootstrap_bands(fit.irf, det.values, spec, fit, bs);
  }

  if (rc.selection)
    nsdfm::write_json(nsdfm::selection_json(*rc.selection), com.out + "/selection.json");
  nsdfm::write_irf_csv(fit.irf, det.series_names, com.out + "/irf.csv", dy.horizon);
  nsdfm::write_json(nsdfm::irf_json(fit.irf, det.series_names, dy.horizon),
                    com.out + "/irf.json");
  nsdfm::write_json(nsdfm::factor_model_json(fit.factors), com.out + "/factor_model.json");
  if (fit.vecm)
    nsdfm::write_json(nsdfm::vecm_model_json(*fit.vecm), com.out + "/vecm_model.json");
  if (fit.var)
    nsdfm::write_json(nsdfm::var_model_json(*fit.var), com.out + "/var_model.json");
  std::cout << "wrote " << com.out << "/irf.csv (" << dy.horizon << " horizons, "
            << (fit.irf.has_bands() ? "with" : "no") << " bands)\n";
  return 0;
}

// -------------------------------------------------------------------- simulate

int cmd_simulate(int T, int n, int m, int r, int q, int c, int H, std::uint64_t seed,
                 const std::string& out) {
  ensure_outdir(out);
  nsdfm::DgpParams gp = nsdfm::gen_params(n, r, q, c, seed);
  nsdfm::SimOutput sim = nsdfm::simulate_panel(gp, n, T, m, H, seed);
  nsdfm::write_panel_csv(sim.panel, out + "/panel.csv");
  {
    std::ofstream tf(out + "/transforms.csv");
    tf << "series,code\n";
    for (const auto& name : sim.panel.series_names) tf << name << ",1\n";
  }
  std::ofstream irf_csv(out + "/true_irf.csv");
  irf_csv << "variable,shock,horizon,value\n";
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < q; ++j)
      for (int k = 0; k <= H; ++k)
        irf_csv << sim.panel.series_names[static_cast<size_t>(i)] << ",shock" << (j + 1)
                << ',' << k << ','
                << nsdfm::detail::fmt(sim.true_irf[static_cast<size_t>(k)](i, j)) << '\n';
  nsdfm::write_json(nsdfm::dgp_params_json(sim.params), out + "/params.json");
  std::cout << "simulated " << n << " x " << (T + 1) << " panel (m = " << m << ")\n";
  return 0;
}

// ------------------------------------------------------------------ experiment

nsdfm::ExperimentConfig load_experiment_config(const std::string& path) {
  const json j = nsdfm::read_json(path);
  nsdfm::ExperimentConfig cfg;
  try {
    cfg.pipeline = j.at("pipeline").get<std::string>();
    for (const auto& cell : j.at("cells")) {
      if (!cell.is_array() || cell.size() != 3)
        throw nsdfm::config_error("experiment cells must be [T, n, m] triples");
      cfg.cells.push_back({cell[0].get<int>(), cell[1].get<int>(), cell[2].get<int>()});
    }
    cfg.replications = j.value("replications", cfg.replications);
    if (j.contains("horizons")) cfg.horizons = j["horizons"].get<std::vector<int>>();
    if (j.contains("dgp")) {
      cfg.r = j["dgp"].value("r", cfg.r);
      cfg.q = j["dgp"].value("q", cfg.q);
      cfg.c = j["dgp"].value("c", cfg.c);
    }
    if (j.contains("lags")) {
      cfg.p_vecm = j["lags"].value("vecm", cfg.p_vecm);
      cfg.p_var = j["lags"].value("var", cfg.p_var);
    }
    if (j.contains("selection")) {
      cfg.r_max = j["selection"].value("r_max", cfg.r_max);
      cfg.q_max = j["selection"].value("q_max", cfg.q_max);
      cfg.tau_max = j["selection"].value("tau_max", cfg.tau_max);
      if (j["selection"].contains("penalty")) {
        // shorthand that sets both criteria at once
        cfg.penalty_q = j["selection"]["penalty"].get<double>();
        cfg.penalty_tau = cfg.penalty_q;
      }
      cfg.penalty_q = j["selection"].value("penalty_q", cfg.penalty_q);
      cfg.penalty_tau = j["selection"].value("penalty_tau", cfg.penalty_tau);
      cfg.tune = j["selection"].value("tune", cfg.tune);
    }
    cfg.seed = j.value("seed", cfg.seed);
  } catch (const json::exception& e) {
    throw nsdfm::config_error(path + ": " + e.what());
  }
  return cfg;
}

int cmd_experiment(const std::string& config_path, const std::string& out,
                   std::optional<std::uint64_t> seed_override) {
  ensure_outdir(out);
  nsdfm::ExperimentConfig cfg = load_experiment_config(config_path);
  if (seed_override) cfg.seed = *seed_override;
  nsdfm::ExperimentReport report = nsdfm::run_experiment(cfg);
  nsdfm::write_experiment_csv(report, out + "/report.csv");

  json jc;
  jc["pipeline"] = cfg.pipeline;
  jc["replications"] = cfg.replications;
  jc["seed"] = cfg.seed;
  json cells = json::array();
  bool all_ok = true;
  for (const auto& cr : report.cells) {
    json c{{"T", cr.cell.T}, {"n", cr.cell.n}, {"m", cr.cell.m},
           {"ok", cr.ok},    {"failures", cr.failures}};
    if (!cr.ok) {
      c["note"] = cr.note;
      all_ok = false;
    } else if (cfg.pipeline == "selection") {
      c["pct_tau"] = cr.pct_tau;
      c["pct_q"] = cr.pct_q;
      c["pct_r"] = cr.pct_r;
    } else {
      c["mse"] = cr.mse;
      c["horizons"] = cfg.horizons;
    }
    cells.push_back(std::move(c));
  }
  jc["cells"] = std::move(cells);
  nsdfm::write_json(jc, out + "/report.json");
  std::cout << "wrote " << out << "/report.csv (" << report.cells.size() << " cells)\n";
  if (!all_ok) {
    std::cerr << "error: at least one cell aborted\n";
    return 4;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"non-stationary dynamic factor models: estimation, identification, simulation"};
  app.require_subcommand(1);

  CommonOpts com_ingest, com_select, com_estimate, com_irf;
  CountOpts co_select, co_estimate, co_irf;
  DynOpts dy_estimate, dy_irf;

  auto* ingest = app.add_subcommand("ingest", "read, transform and rewrite a panel");
  add_common(ingest, com_ingest);

  auto* select = app.add_subcommand("select", "choose r, q and tau from the data");
  add_common(select, com_select);
  add_counts(select, co_select);

  auto* estimate = app.add_subcommand("estimate", "factors and dynamics, no identification");
  add_common(estimate, com_estimate);
  add_counts(estimate, co_estimate);
  add_dyn(estimate, dy_estimate, false);

  auto* irf = app.add_subcommand("irf", "identified impulse responses with optional bands");
  add_common(irf, com_irf);
  add_counts(irf, co_irf);
  add_dyn(irf, dy_irf, true);

  int sim_T = 100, sim_n = 100, sim_m = 0, sim_r = 4, sim_q = 3, sim_c = 3, sim_H = 50;
  std::uint64_t sim_seed = 1;
  std::string sim_out;
  auto* simulate = app.add_subcommand("simulate", "draw one panel from the benchmark DGP");
  simulate->add_option("--T", sim_T, "time periods (panel has T+1 columns)");
  simulate->add_option("--n", sim_n, "series count");
  simulate->add_option("--m", sim_m, "series with I(1) idiosyncratic components");
  simulate->add_option("--r", sim_r, "factors");
  simulate->add_option("--q", sim_q, "shocks");
  simulate->add_option("--c", sim_c, "cointegration rank");
  simulate->add_option("--horizon", sim_H, "true IRF horizon");
  simulate->add_option("--seed", sim_seed, "seed");
  simulate->add_option("--out", sim_out, "output directory")->required();

  std::string exp_config, exp_out;
  std::uint64_t exp_seed = 0;
  bool exp_seed_set = false;
  auto* experiment = app.add_subcommand("experiment", "Monte Carlo grid from a config file");
  experiment->add_option("--config", exp_config, "experiment config JSON")->required();
  experiment->add_option("--out", exp_out, "output directory")->required();
  experiment->add_option("--seed", exp_seed, "override the config seed")
      ->each([&](const std::string&) { exp_seed_set = true; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // help/version exit 0, any parse problem exits 2
  }

  try {
    if (app.got_subcommand(ingest)) return cmd_ingest(com_ingest);
    if (app.got_subcommand(select)) return cmd_select(com_select, co_select);
    if (app.got_subcommand(estimate))
      return cmd_estimate(com_estimate, co_estimate, dy_estimate);
    if (app.got_subcommand(irf)) return cmd_irf(com_irf, co_irf, dy_irf);
    if (app.got_subcommand(simulate))
      return cmd_simulate(sim_T, sim_n, sim_m, sim_r, sim_q, sim_c, sim_H, sim_seed,
                          sim_out);
    if (app.got_subcommand(experiment))
      return cmd_experiment(exp_config, exp_out,
                            exp_seed_set ? std::optional<std::uint64_t>(exp_seed)
                                         : std::nullopt);
  } catch (const nsdfm::config_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const nsdfm::data_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const nsdfm::estimation_error& e) {
    std::cerr << "estimation error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  }
  return 2;
}

#pragma once

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "nsdfm/errors.hpp"
#include "nsdfm/irf.hpp"
#include "nsdfm/montecarlo.hpp"
#include "nsdfm/panel.hpp"
#include "nsdfm/selection.hpp"

namespace nsdfm {

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

inline std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

inline std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

// fixed formatting so identical numbers always serialize to identical bytes
inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace detail

// Reads a levels panel: header row of series names, one row per period.
// A first column whose header is "date" (any case) or empty is kept as
// labels and excluded from the numeric panel. Ragged or non-numeric rows
// are ingestion errors.
inline Panel read_panel_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw data_error(path + ": empty file");
  std::vector<std::string> header = detail::split_csv_line(line);
  if (header.empty()) throw data_error(path + ": empty header");
  const std::string first = detail::lower(detail::trim(header.front()));
  const bool has_dates = first.empty() || first == "date" || first == "dates";
  const size_t offset = has_dates ? 1 : 0;
  if (header.size() <= offset) throw data_error(path + ": no series columns");

  Panel p;
  for (size_t j = offset; j < header.size(); ++j) {
    const std::string name = detail::trim(header[j]);
    if (name.empty()) throw data_error(path + ": blank series name in header");
    p.series_names.push_back(name);
  }
  const size_t n = p.series_names.size();

  std::vector<std::vector<double>> rows;
  size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    std::vector<std::string> cells = detail::split_csv_line(line);
    if (cells.size() != header.size())
      throw data_error(path + ":" + std::to_string(lineno) + ": expected " +
                       std::to_string(header.size()) + " cells, got " +
                       std::to_string(cells.size()));
    if (has_dates) p.dates.push_back(detail::trim(cells.front()));
    std::vector<double> row(n);
    for (size_t j = 0; j < n; ++j) {
      const std::string cell = detail::trim(cells[j + offset]);
      char* end = nullptr;
      row[j] = std::strtod(cell.c_str(), &end);
      if (cell.empty() || end != cell.c_str() + cell.size())
        throw data_error(path + ":" + std::to_string(lineno) + ": bad value '" +
                         cell + "'");
    }
    rows.push_back(std::move(row));
  }

  p.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(rows.size()));
  for (size_t t = 0; t < rows.size(); ++t)
    for (size_t j = 0; j < n; ++j)
      p.values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(t)) = rows[t][j];
  p.transform_codes.assign(n, 1);
  validate_panel(p);
  return p;
}

// Sidecar mapping series name -> transform code. Two columns, an optional
// header row is skipped when its second cell is not a number.
inline std::map<std::string, int> read_transforms_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open " + path);
  std::map<std::string, int> codes;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    std::vector<std::string> cells = detail::split_csv_line(line);
    if (cells.size() != 2)
      throw data_error(path + ":" + std::to_string(lineno) + ": expected name,code");
    const std::string name = detail::trim(cells[0]);
    const std::string code_str = detail::trim(cells[1]);
    char* end = nullptr;
    const long code = std::strtol(code_str.c_str(), &end, 10);
    if (end != code_str.c_str() + code_str.size()) {
      if (lineno == 1) continue;  // header row
      throw data_error(path + ":" + std::to_string(lineno) + ": bad code '" +
                       code_str + "'");
    }
    if (code < 1 || code > 3)
      throw data_error(path + ":" + std::to_string(lineno) + ": code must be 1, 2 or 3");
    codes[name] = static_cast<int>(code);
  }
  if (codes.empty()) throw data_error(path + ": no transform entries");
  return codes;
}

inline void attach_transforms(Panel& p, const std::map<std::string, int>& codes) {
  p.transform_codes.resize(p.series_names.size());
  for (size_t i = 0; i < p.series_names.size(); ++i) {
    const auto it = codes.find(p.series_names[i]);
    if (it == codes.end())
      throw data_error("no transform code for series " + p.series_names[i]);
    p.transform_codes[i] = it->second;
  }
}

inline void write_panel_csv(const Panel& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write " + path);
  const bool dates = !p.dates.empty();
  if (dates) out << "date";
  for (size_t j = 0; j < p.series_names.size(); ++j) {
    if (dates || j > 0) out << ',';
    out << p.series_names[j];
  }
  out << '\n';
  for (Eigen::Index t = 0; t < p.values.cols(); ++t) {
    if (dates) out << p.dates[static_cast<size_t>(t)];
    for (Eigen::Index i = 0; i < p.values.rows(); ++i) {
      if (dates || i > 0) out << ',';
      out << detail::fmt(p.values(i, t));
    }
    out << '\n';
  }
}

// Long-format IRF table: variable, shock, horizon, value and, when bands
// are present, lower/upper.
inline void write_irf_csv(const IrfSet& irf, const std::vector<std::string>& names,
                          const std::string& path, int max_horizon = -1) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write " + path);
  const int H = max_horizon < 0 ? irf.horizon : std::min(max_horizon, irf.horizon);
  const bool bands = irf.has_bands();
  out << "variable,shock,horizon,value";
  if (bands) out << ",lower,upper";
  out << '\n';
  for (int i = 0; i < irf.n(); ++i) {
    for (int j = 0; j < irf.q(); ++j) {
      for (int k = 0; k <= H; ++k) {
        out << names[static_cast<size_t>(i)] << ",shock" << (j + 1) << ',' << k << ','
            << detail::fmt(irf.coeffs[static_cast<size_t>(k)](i, j));
        if (bands)
          out << ',' << detail::fmt(irf.lower[static_cast<size_t>(k)](i, j)) << ','
              << detail::fmt(irf.upper[static_cast<size_t>(k)](i, j));
        out << '\n';
      }
    }
  }
}

inline void write_criterion_csv(const std::vector<double>& path_values, int k0,
                                const std::string& path) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write " + path);
  out << "k,value\n";
  for (size_t i = 0; i < path_values.size(); ++i)
    out << (k0 + static_cast<int>(i)) << ',' << detail::fmt(path_values[i]) << '\n';
}

// Dynamic eigenvalues: one row per eigenvalue index, one column per grid
// frequency.
inline void write_eigenvalue_csv(const SpectralDensity& sd, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write " + path);
  out << "j";
  for (double th : sd.grid) out << ',' << detail::fmt(th);
  out << '\n';
  for (Eigen::Index j = 0; j < sd.eigvals.rows(); ++j) {
    out << (j + 1);
    for (int h = 0; h < sd.nfreq(); ++h) out << ',' << detail::fmt(sd.eigvals(j, h));
    out << '\n';
  }
}

inline void write_stability_csv(const TuneResult& tr, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write " + path);
  out << "c,variance,full_sample_count\n";
  for (size_t i = 0; i < tr.c_grid.size(); ++i)
    out << detail::fmt(tr.c_grid[i]) << ',' << detail::fmt(tr.stability_path[i]) << ','
        << tr.full_sample_counts[i] << '\n';
}

// Experiment reports shaped like the simulation tables: one row per grid
// cell, MSE columns per horizon or hit percentages for selection runs.
inline void write_experiment_csv(const ExperimentReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write " + path);
  const bool selection = report.config.pipeline == "selection";
  out << "T,n,m";
  if (selection) {
    out << ",pct_tau,pct_q,pct_r";
  } else {
    for (int k : report.config.horizons) out << ",k=" << k;
  }
  out << ",failures,status\n";
  for (const CellReport& cr : report.cells) {
    out << cr.cell.T << ',' << cr.cell.n << ',' << cr.cell.m;
    if (selection) {
      if (cr.ok)
        out << ',' << detail::fmt(cr.pct_tau) << ',' << detail::fmt(cr.pct_q) << ','
            << detail::fmt(cr.pct_r);
      else
        out << ",,,";
    } else {
      for (size_t hi = 0; hi < report.config.horizons.size(); ++hi) {
        out << ',';
        if (cr.ok) out << detail::fmt(cr.mse[hi]);
      }
    }
    out << ',' << cr.failures << ',' << (cr.ok ? "ok" : cr.note) << '\n';
  }
}

}  // namespace nsdfm

#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include "nsdfm/json_io.hpp"

namespace fs = std::filesystem;

namespace {

struct TmpDir {
  fs::path path;
  TmpDir() {
    path = fs::temp_directory_path() /
           ("nsdfm_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TmpDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string dir(const std::string& name) const { return (path / name).string(); }
};

int run_cli(const std::string& args) {
  const std::string cmd = std::string(NSDFM_CLI_PATH) + " " + args;
  const int status = std::system(cmd.c_str());
  if (status == -1) return -1;
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  return -2;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("cli help and parse errors use the documented exit codes") {
  TmpDir tmp;
  REQUIRE(run_cli("--help > " + tmp.dir("help.txt")) == 0);
  REQUIRE(run_cli("frobnicate 2> /dev/null") == 2);
  REQUIRE(run_cli("select --no-such-flag 2> /dev/null") == 2);
}

TEST_CASE("cli simulate writes a reproducible panel bundle") {
  TmpDir tmp;
  const std::string common =
      "simulate --T 80 --n 20 --m 10 --r 3 --q 2 --c 2 --horizon 10 --seed 7";
  REQUIRE(run_cli(common + " --out " + tmp.dir("a") + " > /dev/null") == 0);
  REQUIRE(run_cli(common + " --out " + tmp.dir("b") + " > /dev/null") == 0);

  REQUIRE(fs::exists(tmp.dir("a") + "/panel.csv"));
  REQUIRE(fs::exists(tmp.dir("a") + "/true_irf.csv"));
  REQUIRE(fs::exists(tmp.dir("a") + "/params.json"));
  REQUIRE(fs::exists(tmp.dir("a") + "/transforms.csv"));
  REQUIRE(slurp(tmp.dir("a") + "/panel.csv") == slurp(tmp.dir("b") + "/panel.csv"));
  REQUIRE(slurp(tmp.dir("a") + "/true_irf.csv") == slurp(tmp.dir("b") + "/true_irf.csv"));

  // a different seed must change the data
  REQUIRE(run_cli("simulate --T 80 --n 20 --m 10 --seed 8 --out " + tmp.dir("c") +
                  " > /dev/null") == 0);
  REQUIRE(slurp(tmp.dir("a") + "/panel.csv") != slurp(tmp.dir("c") + "/panel.csv"));
}

TEST_CASE("cli select reports counts on a simulated panel") {
  TmpDir tmp;
  REQUIRE(run_cli("simulate --T 150 --n 30 --m 15 --r 3 --q 2 --c 2 --seed 21 --out " +
                  tmp.dir("sim") + " > /dev/null") == 0);
  REQUIRE(run_cli("select --data " + tmp.dir("sim") + "/panel.csv --r-max 6 --q-max 4 "
                  "--tau-max 4 --out " + tmp.dir("sel") + " > /dev/null") == 0);
  REQUIRE(fs::exists(tmp.dir("sel") + "/selection.json"));
  REQUIRE(fs::exists(tmp.dir("sel") + "/r_criterion.csv"));
  REQUIRE(fs::exists(tmp.dir("sel") + "/dynamic_eigenvalues.csv"));
  const nsdfm::json sel = nsdfm::read_json(tmp.dir("sel") + "/selection.json");
  REQUIRE(sel["r"].get<int>() >= 1);
  REQUIRE(sel["q"].get<int>() >= 1);
  REQUIRE(sel["tau"].get<int>() >= 0);
  REQUIRE(sel["tau"].get<int>() <= sel["q"].get<int>());
}

TEST_CASE("cli irf runs the full pipeline deterministically") {
  TmpDir tmp;
  REQUIRE(run_cli("simulate --T 120 --n 25 --m 12 --r 3 --q 2 --c 2 --seed 33 --out " +
                  tmp.dir("sim") + " > /dev/null") == 0);
  const std::string common =
      "irf --data " + tmp.dir("sim") + "/panel.csv --r 3 --q 2 --tau 1 "
      "--dynamics vecm --lags 1 --identify recursive --order S001,S002 "
      "--normalize S001:0:0.5 --horizon 10";
  REQUIRE(run_cli(common + " --out " + tmp.dir("x") + " > /dev/null") == 0);
  REQUIRE(run_cli(common + " --out " + tmp.dir("y") + " > /dev/null") == 0);
  REQUIRE(fs::exists(tmp.dir("x") + "/irf.csv"));
  REQUIRE(fs::exists(tmp.dir("x") + "/irf.json"));
  REQUIRE(fs::exists(tmp.dir("x") + "/vecm_model.json"));
  REQUIRE(slurp(tmp.dir("x") + "/irf.csv") == slurp(tmp.dir("y") + "/irf.csv"));
  // the normalization pins the pivot response exactly
  REQUIRE(slurp(tmp.dir("x") + "/irf.csv").find("S001,shock1,0,0.5\n") !=
          std::string::npos);
}

TEST_CASE("cli estimate with var dynamics writes the var model") {
  TmpDir tmp;
  REQUIRE(run_cli("simulate --T 100 --n 20 --m 10 --r 3 --q 2 --c 2 --seed 41 --out " +
                  tmp.dir("sim") + " > /dev/null") == 0);
  REQUIRE(run_cli("estimate --data " + tmp.dir("sim") + "/panel.csv --r 3 --q 2 "
                  "--dynamics var --lags 2 --out " + tmp.dir("est") + " > /dev/null") == 0);
  REQUIRE(fs::exists(tmp.dir("est") + "/factor_model.json"));
  REQUIRE(fs::exists(tmp.dir("est") + "/var_model.json"));
  REQUIRE_FALSE(fs::exists(tmp.dir("est") + "/vecm_model.json"));
}

TEST_CASE("cli var with permanent identification warns but succeeds") {
  TmpDir tmp;
  REQUIRE(run_cli("simulate --T 120 --n 20 --m 10 --r 3 --q 2 --c 2 --seed 55 --out " +
                  tmp.dir("sim") + " > /dev/null") == 0);
  const int code = run_cli(
      "irf --data " + tmp.dir("sim") + "/panel.csv --r 3 --q 2 --tau 1 "
      "--dynamics var --lags 2 --identify permanent --horizon 10 --out " +
      tmp.dir("out") + " > /dev/null 2> " + tmp.dir("stderr.txt"));
  REQUIRE(code == 0);
  const std::string err = slurp(tmp.dir("stderr.txt"));
  REQUIRE(err.find("warning") != std::string::npos);
  REQUIRE(fs::exists(tmp.dir("out") + "/irf.csv"));
}

TEST_CASE("cli maps error families to exit codes") {
  TmpDir tmp;
  // missing data file: data error
  REQUIRE(run_cli("select --data " + tmp.dir("absent.csv") + " --out " + tmp.dir("o1") +
                  " 2> /dev/null") == 3);
  // unparsable count: config error
  REQUIRE(run_cli("simulate --T 60 --n 10 --m 5 --seed 3 --out " + tmp.dir("sim") +
                  " > /dev/null") == 0);
  REQUIRE(run_cli("irf --data " + tmp.dir("sim") + "/panel.csv --r banana --out " +
                  tmp.dir("o2") + " 2> /dev/null") == 2);
  // recursive identification without an ordering: config error
  REQUIRE(run_cli("irf --data " + tmp.dir("sim") + "/panel.csv --r 2 --q 2 --tau 1 "
                  "--identify recursive --out " + tmp.dir("o3") + " 2> /dev/null") == 2);
  // r beyond the panel width: config error from the pipeline check
  REQUIRE(run_cli("irf --data " + tmp.dir("sim") + "/panel.csv --r 99 --q 2 --tau 1 "
                  "--identify recursive --order S001,S002 --out " + tmp.dir("o4") +
                  " 2> /dev/null") == 2);
  // lag order leaving no estimation sample: estimation error
  REQUIRE(run_cli("irf --data " + tmp.dir("sim") + "/panel.csv --r 2 --q 2 --tau 1 "
                  "--dynamics vecm --lags 58 --identify recursive --order S001,S002 "
                  "--out " + tmp.dir("o5") + " 2> /dev/null") == 4);
}

TEST_CASE("cli experiment consumes a config file") {
  TmpDir tmp;
  {
    std::ofstream cfg(tmp.dir("exp.json"));
    cfg << R"({
      "pipeline": "vecm",
      "cells": [[60, 15, 7]],
      "replications": 2,
      "horizons": [0, 5],
      "dgp": {"r": 3, "q": 2, "c": 2},
      "seed": 9
    })";
  }
  REQUIRE(run_cli("experiment --config " + tmp.dir("exp.json") + " --out " +
                  tmp.dir("exp") + " > /dev/null") == 0);
  REQUIRE(fs::exists(tmp.dir("exp") + "/report.csv"));
  REQUIRE(fs::exists(tmp.dir("exp") + "/report.json"));
  const nsdfm::json rep = nsdfm::read_json(tmp.dir("exp") + "/report.json");
  REQUIRE(rep["cells"].size() == 1);
  REQUIRE(rep["cells"][0]["ok"].get<bool>());

  // an empty grid is a config error
  {
    std::ofstream cfg(tmp.dir("empty.json"));
    cfg << R"({"pipeline": "vecm", "cells": []})";
  }
  REQUIRE(run_cli("experiment --config " + tmp.dir("empty.json") + " --out " +
                  tmp.dir("exp2") + " 2> /dev/null") == 2);
}

#include <filesystem>
#include <set>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "shuffle/experiment.hpp"

using namespace shuffle;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("shuffle_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("catalog") {
  std::set<std::string> names;
  for (const auto& e : list_experiments()) names.insert(e.name);
  CHECK(names == std::set<std::string>{"spectra", "lowerbound", "uniform-time", "couple", "exact-tv", "moment"});
  bool found = false;
  for (const auto& p : experiment_info("lowerbound").parameters) {
    if (p.name == "replicas") found = p.constraint.find(">= 100") != std::string::npos;
  }
  CHECK(found);
  try {
    experiment_info("riffle");
    FAIL("expected an error");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("exact-tv") != std::string::npos);
  }
  CHECK(catalog_json().size() == 6);
}

TEST_CASE("time expressions") {
  CHECK(evaluate_time_expression(json(17), 1024) == 17);
  CHECK(evaluate_time_expression(json("0.05*nlogn"), 1024) == 354);
  CHECK(evaluate_time_expression(json("3*nlogn"), 1024) == 21293);
  CHECK(evaluate_time_expression(json("2*n"), 64) == 128);
  CHECK(evaluate_time_expression(json("250"), 64) == 250);
  CHECK_THROWS(evaluate_time_expression(json("x*n"), 64));
  CHECK_THROWS(evaluate_time_expression(json("2*logn"), 64));
}

TEST_CASE("config validation lists every problem") {
  try {
    ExperimentConfig::from_json(json{{"experiment", "lowerbound"}, {"n", 1}, {"replicas", 10}, {"times", json::array()}});
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.problems().size() >= 3);
  }
  CHECK_THROWS_AS(ExperimentConfig::from_json(json{{"experiment", "nope"}, {"n", 5}}), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json(json{{"experiment", "exact-tv"}, {"n", 9}}), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json(json{{"experiment", "couple"}, {"n", 8}, {"i", 2}, {"j", 2}, {"t", 3}, {"replicas", 100}}),
                  ConfigError);
  const auto ok = ExperimentConfig::from_json(json{{"experiment", "spectra"}, {"n", json::array({64, 1000})}});
  CHECK(ok.n == std::vector<std::size_t>{64, 1000});
  CHECK(ok.hash() == ExperimentConfig::from_json(ok.to_json()).hash());
}

TEST_CASE("spectra experiment output") {
  const auto dir = scratch("spectra");
  const auto cfg = ExperimentConfig::from_json(json{{"experiment", "spectra"}, {"n", 1000}, {"write_eigenfunction", true}});
  const auto m = run_experiment(cfg, dir);
  CHECK(m.complete);
  CHECK(m.checks_passed());
  const auto j = json::parse(slurp(dir / "spectra.json"));
  CHECK(std::floor(j["zeta"][0].get<double>() * 1000) == 2088);
  CHECK(std::floor(j["zeta"][1].get<double>() * 1000) == 7461);
  for (const char* key : {"n", "m", "zeta", "gamma", "lambda", "rho", "norm2", "norm_inf", "residuals"}) CHECK(j.contains(key));
  CHECK(slurp(dir / "eigenfunction.csv").rfind("k,f_re,f_im\n0,0,0\n1,1,0\n", 0) == 0);
  const auto manifest = json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest["complete"].get<bool>());
  CHECK(manifest["outputs"].size() == 2);

  const auto small = ExperimentConfig::from_json(json{{"experiment", "spectra"}, {"n", 64}});
  run_experiment(small, dir);
  CHECK(json::parse(slurp(dir / "spectra.json"))["roots"].size() == 64);
}

TEST_CASE("reruns are byte-identical across thread counts") {
  const json cfgs[] = {
      {{"experiment", "exact-tv"}, {"n", 5}, {"rule", "cyclic"}, {"dump_times", {3}}},
      {{"experiment", "moment"}, {"n", 32}, {"times", {0, "1*n", "0.5*nlogn"}}, {"replicas", 300}, {"seed", 5}},
      {{"experiment", "lowerbound"}, {"n", 32}, {"times", {4, 64}}, {"replicas", 300}},
      {{"experiment", "couple"}, {"n", 24}, {"i", 3}, {"j", 7}, {"t", 50}, {"replicas", 300}},
      {{"experiment", "uniform-time"}, {"n", 12}, {"rule", "pak"}, {"runs", 200}},
      {{"experiment", "uniform-time"}, {"n", 12}, {"rule", "quenched"}, {"runs", 200}},
  };
  for (const auto& j : cfgs) {
    const auto cfg = ExperimentConfig::from_json(j);
    const auto a = scratch("rerun_a"), b = scratch("rerun_b");
    const auto ma = run_experiment(cfg, a, 1);
    const auto mb = run_experiment(cfg, b, 8);
    REQUIRE(ma.outputs.size() == mb.outputs.size());
    for (const auto& o : ma.outputs) {
      CAPTURE(o.path);
      CHECK(o.complete);
      CHECK(slurp(a / o.path) == slurp(b / o.path));
    }
    CHECK(ma.config_hash == mb.config_hash);
  }
}

TEST_CASE("csv headers") {
  const auto dir = scratch("headers");
  run_experiment(ExperimentConfig::from_json(
                     json{{"experiment", "lowerbound"}, {"n", 16}, {"times", {1, 2}}, {"replicas", 100}}),
                 dir);
  CHECK(slurp(dir / "lowerbound.csv").rfind("t,pred_re,pred_im,emp_re,emp_im,emp_m2,bound_m2,tv_lb,advantage,stderr\n", 0) == 0);
  run_experiment(ExperimentConfig::from_json(
                     json{{"experiment", "couple"}, {"n", 16}, {"i", 0}, {"j", 1}, {"t", 5}, {"replicas", 100}}),
                 dir);
  CHECK(slurp(dir / "couple.csv").rfind("replica,unglue_time,N_ij,product_re,product_im\n", 0) == 0);
  run_experiment(ExperimentConfig::from_json(json{{"experiment", "uniform-time"}, {"n", 8}, {"runs", 10}}), dir);
  CHECK(slurp(dir / "uniform_time.csv").rfind("run,T\n", 0) == 0);
  CHECK(slurp(dir / "epochs.csv").rfind("run,k,u_k,m_k,D_k,growth,good\n", 0) == 0);
  run_experiment(ExperimentConfig::from_json(json{{"experiment", "exact-tv"}, {"n", 4}, {"rule", "star"}}), dir);
  CHECK(slurp(dir / "exact_tv.csv").rfind("t,tv\n0,", 0) == 0);
}

TEST_CASE("runtime failure leaves an incomplete manifest") {
  const auto dir = scratch("fail");
  auto cfg = ExperimentConfig::from_json(json{{"experiment", "spectra"}, {"n", 1000}});
  cfg.max_iterations = 1;
  cfg.tol = 1e-300;
  CHECK_THROWS(run_experiment(cfg, dir));
  const auto manifest = json::parse(slurp(dir / "manifest.json"));
  CHECK_FALSE(manifest["complete"].get<bool>());
  CHECK(manifest.contains("error"));
}

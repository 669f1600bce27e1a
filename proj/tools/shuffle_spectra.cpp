#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "shuffle/experiment.hpp"

using nlohmann::json;

namespace {

enum Exit { kOk = 0, kBadConfig = 1, kRuntime = 2, kCheckFailed = 3 };

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  bool check = false;
};

// Per-kind flags, stored as already-typed JSON overrides.
struct Overrides {
  std::vector<std::size_t> n;
  std::optional<int> branch;
  std::optional<double> tol;
  std::vector<std::string> times;
  std::optional<std::size_t> replicas;
  std::optional<std::string> rule;
  std::optional<std::uint64_t> cap, horizon, t;
  std::optional<std::uint32_t> i, j;
  std::optional<double> threshold;
  std::vector<std::uint64_t> dump_times;
  bool write_f = false;
};

json time_entry(const std::string& s) {
  if (!s.empty() && s.find_first_not_of("0123456789") == std::string::npos) return json(std::stoull(s));
  return json(s);
}

json merged_config(const std::string& kind, const Common& c, const Overrides& o) {
  json cfg = json::object();
  if (!c.config.empty()) {
    std::ifstream in(c.config);
    if (!in) throw shuffle::ConfigError({"config: cannot open " + c.config});
    try {
      cfg = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
      throw shuffle::ConfigError({std::string("config: ") + e.what()});
    }
    if (cfg.contains("experiment") && cfg["experiment"] != kind) {
      throw shuffle::ConfigError({"experiment: config says " + cfg["experiment"].dump() + " but subcommand is " + kind});
    }
  }
  cfg["experiment"] = kind;
  if (!o.n.empty()) cfg["n"] = o.n.size() == 1 ? json(o.n.front()) : json(o.n);
  if (o.branch) cfg["branch"] = *o.branch;
  if (o.tol) cfg["tol"] = *o.tol;
  if (!o.times.empty()) {
    cfg["times"] = json::array();
    for (const auto& s : o.times) cfg["times"].push_back(time_entry(s));
  }
  if (o.replicas) cfg["replicas"] = *o.replicas;
  if (o.rule) cfg["rule"] = *o.rule;
  if (o.cap) cfg["cap"] = *o.cap;
  if (o.horizon) cfg["horizon"] = *o.horizon;
  if (o.t) cfg["t"] = *o.t;
  if (o.i) cfg["i"] = *o.i;
  if (o.j) cfg["j"] = *o.j;
  if (o.threshold) cfg["threshold"] = *o.threshold;
  if (!o.dump_times.empty()) cfg["dump_times"] = o.dump_times;
  if (o.write_f) cfg["write_eigenfunction"] = true;
  if (c.seed) cfg["seed"] = *c.seed;
  return cfg;
}

int run(const std::string& kind, const Common& c, const Overrides& o) {
  shuffle::ExperimentConfig config;
  try {
    config = shuffle::ExperimentConfig::from_json(merged_config(kind, c, o));
  } catch (const shuffle::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return kBadConfig;
  }
  const std::string out = c.out.empty() ? config.output : c.out;
  shuffle::Manifest manifest;
  try {
    manifest = shuffle::run_experiment(config, out, c.threads);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
  for (const auto& f : manifest.outputs) std::cout << "wrote " << out << '/' << f.path << '\n';
  if (c.check) {
    for (const auto& ck : manifest.checks) {
      std::cout << (ck.passed ? "PASS " : "FAIL ") << ck.name << "  " << ck.detail << '\n';
    }
    if (!manifest.checks_passed()) return kCheckFailed;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semi-random transposition shuffles: spectra, statistics, coupling, uniform times, exact TV"};
  app.require_subcommand(1);
  app.set_version_flag("--version", SHUFFLE_VERSION);

  Common common;
  Overrides over;
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "JSON config file");
    sub->add_option("--out", common.out, "output directory (default: config 'output' or ./out)");
    sub->add_option("--seed", common.seed, "master seed (u64)");
    sub->add_option("--threads", common.threads, "worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);
    sub->add_flag("--check", common.check, "evaluate acceptance checks; exit 3 if any fails");
  };

  auto* spectra = app.add_subcommand("spectra", "roots, eigenvalue and eigenfunction of the renewal chain");
  add_common(spectra);
  spectra->add_option("--n", over.n, "deck size(s)");
  spectra->add_option("--branch", over.branch, "root branch m >= 1");
  spectra->add_option("--tol", over.tol, "solver tolerance");
  spectra->add_flag("--eigenfunction", over.write_f, "also write eigenfunction.csv");

  CLI::App* moment = app.add_subcommand("moment", "Monte Carlo moments of the test statistic");
  CLI::App* lower = app.add_subcommand("lowerbound", "moments, TV lower bound and distinguisher advantage");
  for (auto* sub : {moment, lower}) {
    add_common(sub);
    sub->add_option("--n", over.n, "deck size(s)");
    sub->add_option("--branch", over.branch, "root branch m >= 1");
    sub->add_option("--times", over.times, "times: integers or c*nlogn / c*n");
    sub->add_option("--replicas", over.replicas, "replicas per time (>= 100)");
  }

  auto* couple = app.add_subcommand("couple", "coupling with two independent single-card copies");
  add_common(couple);
  couple->add_option("--n", over.n, "deck size");
  couple->add_option("--i", over.i, "first card");
  couple->add_option("--j", over.j, "second card");
  couple->add_option("--t", over.t, "steps");
  couple->add_option("--replicas", over.replicas, "coupled runs (>= 100)");

  auto* utime = app.add_subcommand("uniform-time", "card-marking strong uniform time");
  add_common(utime);
  utime->add_option("--n", over.n, "deck size(s)");
  utime->add_option("--rule", over.rule, "cyclic|star|uniform|quenched|pak");
  utime->add_option("--runs", over.replicas, "independent runs");
  utime->add_option("--cap", over.cap, "step cap per run (>= n)");

  auto* exact = app.add_subcommand("exact-tv", "exact total variation to uniform for n <= 8");
  add_common(exact);
  exact->add_option("--n", over.n, "deck size(s)");
  exact->add_option("--rule", over.rule, "cyclic|star|uniform");
  exact->add_option("--threshold", over.threshold, "mixing threshold (default 1/(2e))");
  exact->add_option("--horizon", over.horizon, "last t (default floor(4 n ln n))");
  exact->add_option("--dump", over.dump_times, "times at which to dump the full law");

  auto* list = app.add_subcommand("list", "print the experiment catalog as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kBadConfig;
  }

  if (list->parsed()) {
    std::cout << shuffle::catalog_json().dump(2) << '\n';
    return kOk;
  }
  for (auto* sub : app.get_subcommands()) return run(sub->get_name(), common, over);
  return kBadConfig;
}

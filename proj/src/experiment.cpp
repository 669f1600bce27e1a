#include "shuffle/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include "shuffle/coupling.hpp"
#include "shuffle/engine.hpp"
#include "shuffle/exact_tv.hpp"
#include "shuffle/parallel.hpp"
#include "shuffle/rule.hpp"
#include "shuffle/spectral.hpp"
#include "shuffle/statistic.hpp"
#include "shuffle/uniform_time.hpp"

#ifndef SHUFFLE_VERSION
#define SHUFFLE_VERSION "dev"
#endif

namespace shuffle {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string join_lines(const std::vector<std::string>& items) {
  std::string out = "invalid config:";
  for (const auto& s : items) out += "\n  - " + s;
  return out;
}

std::string num(double v) {
  if (v == 0.0) v = 0.0;  // no "-0" in the files
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t default_horizon(std::size_t n) {
  const double nd = static_cast<double>(n);
  return static_cast<std::uint64_t>(std::floor(4.0 * nd * std::log(nd)));
}

// Wraps one output file: created on open, marked complete after close.
class OutputSink {
 public:
  OutputSink(Manifest& manifest, const fs::path& dir, std::string name)
      : manifest_(manifest), index_(manifest.outputs.size()) {
    manifest_.outputs.push_back({name, false});
    stream_.open(dir / name, std::ios::binary | std::ios::trunc);
    if (!stream_) throw std::runtime_error("cannot open output file " + (dir / name).string());
  }
  std::ostream& out() { return stream_; }
  void finish() {
    stream_.close();
    if (!stream_) throw std::runtime_error("failed writing " + manifest_.outputs[index_].path);
    manifest_.outputs[index_].complete = true;
  }

 private:
  Manifest& manifest_;
  std::size_t index_;
  std::ofstream stream_;
};

std::string suffixed(const std::string& stem, const std::string& ext, std::size_t n, bool many) {
  return many ? stem + "_n" + std::to_string(n) + ext : stem + ext;
}

void add_check(Manifest& m, std::string name, bool passed, std::string detail) {
  m.checks.push_back({std::move(name), passed, std::move(detail)});
}

std::vector<std::uint64_t> resolve_times(const ExperimentConfig& cfg, std::size_t n) {
  std::vector<std::uint64_t> out;
  for (const auto& entry : cfg.times) out.push_back(evaluate_time_expression(entry, n));
  return out;
}

// ---------------------------------------------------------------------------

json spectra_record(const ExperimentConfig& cfg, std::size_t n, Manifest& manifest, const fs::path& dir, bool many) {
  SolverOptions opts{cfg.tol, cfg.max_iterations};
  const Complex zeta = solve_zeta(cfg.branch, opts);
  SpectralPair pair;
  Eigenfunction f;
  if (n >= 8) {
    pair = solve_gamma(n, zeta, opts, cfg.branch);
    f = eigenfunction(n, pair.gamma);
  } else {
    // Below the continuation range the slowest exact root stands in.
    f = slowest_eigenfunction(n);
    const double nd = static_cast<double>(n);
    pair.n = n;
    pair.m = cfg.branch;
    pair.zeta = zeta;
    pair.gamma = f.gamma;
    pair.omega = 1.0 / f.gamma;
    pair.z_n = nd * (pair.omega - 1.0);
    pair.lambda = f.lambda;
    pair.rho = nd * std::abs(1.0 - f.lambda);
    pair.psi_residual = std::abs(psi(zeta));
    pair.poly_residual = char_poly_residual(n, f.gamma);
  }
  const double eig_res = eigen_residual(f);
  json rec = {{"n", n},
              {"m", cfg.branch},
              {"zeta", complex_json(pair.zeta)},
              {"abs_one_plus_zeta", std::abs(1.0 + pair.zeta)},
              {"z_n", complex_json(pair.z_n)},
              {"omega", complex_json(pair.omega)},
              {"gamma", complex_json(pair.gamma)},
              {"lambda", complex_json(pair.lambda)},
              {"rho", pair.rho},
              {"norm2", f.norm2},
              {"norm_inf", f.norm_inf},
              {"residuals", {{"psi", pair.psi_residual}, {"poly", pair.poly_residual}, {"eigen", eig_res}}}};
  if (n <= 64) {
    json roots = json::array();
    for (const auto& g : all_gamma_roots(n)) roots.push_back(complex_json(g));
    rec["roots"] = roots;
  }
  if (cfg.write_eigenfunction) {
    OutputSink sink(manifest, dir, suffixed("eigenfunction", ".csv", n, many));
    sink.out() << "k,f_re,f_im\n";
    for (std::size_t k = 0; k < n; ++k) sink.out() << k << ',' << num(f.values[k].real()) << ',' << num(f.values[k].imag()) << '\n';
    sink.finish();
  }
  const std::string tag = "n=" + std::to_string(n) + ": ";
  add_check(manifest, "psi residual", pair.psi_residual <= cfg.tol, tag + num(pair.psi_residual));
  add_check(manifest, "polynomial residual", pair.poly_residual <= cfg.tol, tag + num(pair.poly_residual));
  add_check(manifest, "eigen residual", eig_res <= 1e-10 * f.norm_inf, tag + num(eig_res));
  add_check(manifest, "|gamma| <= 1", std::abs(pair.gamma) <= 1.0 + 1e-12, tag + num(std::abs(pair.gamma)));
  return rec;
}

void run_spectra(const ExperimentConfig& cfg, Manifest& manifest, const fs::path& dir) {
  json records = json::array();
  for (auto n : cfg.n) records.push_back(spectra_record(cfg, n, manifest, dir, cfg.n.size() > 1));
  OutputSink sink(manifest, dir, "spectra.json");
  sink.out() << (cfg.n.size() == 1 ? records.front() : records).dump(2) << '\n';
  sink.finish();
}

TestStatistic statistic_for(const ExperimentConfig& cfg, std::size_t n) {
  if (n >= 8) return TestStatistic(eigenfunction(n, spectral_pair(n, cfg.branch, {cfg.tol, cfg.max_iterations}).gamma));
  return TestStatistic(slowest_eigenfunction(n));
}

void run_moment(const ExperimentConfig& cfg, Manifest& manifest, const fs::path& dir, unsigned threads,
                bool with_advantage) {
  for (auto n : cfg.n) {
    const bool many = cfg.n.size() > 1;
    const auto stat = statistic_for(cfg, n);
    const auto times = resolve_times(cfg, n);
    const auto samples = sample_shuffle_F(stat, times, cfg.replicas, cfg.seed, threads);
    const auto control = sample_uniform_F(stat, cfg.replicas, cfg.seed, threads);

    OutputSink sink(manifest, dir, suffixed(with_advantage ? "lowerbound" : "moment", ".csv", n, many));
    auto& out = sink.out();
    if (with_advantage) {
      out << "t,pred_re,pred_im,emp_re,emp_im,emp_m2,bound_m2,tv_lb,advantage,stderr\n";
    } else {
      out << "t,pred_re,pred_im,emp_re,emp_im,emp_m2,bound_m2,stationary_m2,tv_lb,stderr,m2_stderr\n";
    }
    for (std::size_t k = 0; k < times.size(); ++k) {
      const auto s = summarize(samples[k]);
      const auto t = times[k];
      const Complex pred = predicted_mean(stat, t);
      const double bound = second_moment_bound(stat, t);
      out << t << ',' << num(pred.real()) << ',' << num(pred.imag()) << ',' << num(s.mean.real()) << ','
          << num(s.mean.imag()) << ',' << num(s.second_moment) << ',' << num(bound) << ',';
      if (with_advantage) {
        const auto adv = distinguisher_advantage(samples[k], control, std::arg(pred));
        out << num(tv_lower_bound(stat, t)) << ',' << num(adv.advantage) << ',' << num(s.std_error) << '\n';
      } else {
        out << num(stationary_second_moment(stat)) << ',' << num(tv_lower_bound(stat, t)) << ','
            << num(s.std_error) << ',' << num(s.m2_std_error) << '\n';
      }
      const std::string tag = "n=" + std::to_string(n) + " t=" + std::to_string(t) + ": ";
      // Rounding floor for t = 0, where every replica gives the same value.
      const double slack = 4.0 * s.std_error + 1e-9 * stat.eigenfunction().norm2 * stat.eigenfunction().norm2;
      add_check(manifest, "first moment", std::abs(s.mean - pred) <= slack,
                tag + "|emp-pred|=" + num(std::abs(s.mean - pred)) + " 4se=" + num(4.0 * s.std_error));
      add_check(manifest, "second moment bound", s.second_moment <= bound + 4.0 * s.m2_std_error,
                tag + "emp=" + num(s.second_moment) + " bound=" + num(bound));
    }
    sink.finish();
    const auto c = summarize(control);
    const double stationary = stationary_second_moment(stat);
    add_check(manifest, "stationary mean", std::abs(c.mean) <= 4.0 * c.std_error,
              "n=" + std::to_string(n) + ": |mean|=" + num(std::abs(c.mean)) + " 4se=" + num(4.0 * c.std_error));
    add_check(manifest, "stationary second moment", std::abs(c.second_moment - stationary) <= 4.0 * c.m2_std_error,
              "n=" + std::to_string(n) + ": emp=" + num(c.second_moment) + " exact=" + num(stationary));
  }
}

void run_couple(const ExperimentConfig& cfg, Manifest& manifest, const fs::path& dir, unsigned threads) {
  for (auto n : cfg.n) {
    const bool many = cfg.n.size() > 1;
    const auto stat = statistic_for(cfg, n);
    const auto t = *cfg.t;
    const auto report = pair_correlation_check(n, cfg.card_i, cfg.card_j, t, cfg.replicas, cfg.seed, stat, threads, 100);
    OutputSink sink(manifest, dir, suffixed("couple", ".csv", n, many));
    sink.out() << "replica,unglue_time,N_ij,product_re,product_im\n";
    for (std::size_t r = 0; r < report.runs.size(); ++r) {
      const auto& run = report.runs[r];
      sink.out() << r << ',' << (run.unglue_time ? std::to_string(*run.unglue_time) : std::string()) << ','
                 << num(run.n_ij) << ',' << num(run.product_sample.real()) << ',' << num(run.product_sample.imag()) << '\n';
    }
    sink.finish();
    json summary = {{"n", n},
                    {"i", cfg.card_i},
                    {"j", cfg.card_j},
                    {"t", t},
                    {"replicas", report.replicas},
                    {"mean_N_ij", report.mean_n_ij},
                    {"product_mean", complex_json(report.product_mean)},
                    {"product_std_error", report.product_std_error},
                    {"correlation_bound", report.correlation_bound},
                    {"control_product", complex_json(report.control_product)},
                    {"control_expected", complex_json(report.control_expected)},
                    {"control_std_error", report.control_std_error},
                    {"unglue_probability", report.unglue_probability},
                    {"unglue_std_error", report.unglue_std_error},
                    {"unglue_bound", report.unglue_bound}};
    OutputSink js(manifest, dir, suffixed("couple_summary", ".json", n, many));
    js.out() << summary.dump(2) << '\n';
    js.finish();
    const std::string tag = "n=" + std::to_string(n) + ": ";
    add_check(manifest, "unglue bound", report.unglue_holds,
              tag + num(report.unglue_probability) + " <= " + num(report.unglue_bound) + " + 4se");
    add_check(manifest, "pair correlation bound", report.correlation_holds,
              tag + num(std::abs(report.product_mean)) + " <= " + num(report.correlation_bound) + " + 4se");
    add_check(manifest, "independent copies control", report.control_holds, tag);
  }
}

void run_uniform_time(const ExperimentConfig& cfg, Manifest& manifest, const fs::path& dir, unsigned threads) {
  const RuleKind kind = parse_rule_kind(cfg.rule);
  for (auto n : cfg.n) {
    const bool many = cfg.n.size() > 1;
    const double nd = static_cast<double>(n);
    const std::uint64_t cap =
        cfg.cap ? cfg.cap : std::max<std::uint64_t>(n, static_cast<std::uint64_t>(std::ceil(50.0 * nd * std::log(nd))));
    std::vector<UniformTimeResult> runs(cfg.replicas);
    std::vector<std::vector<EpochStats>> epochs(cfg.replicas);
    parallel_for(cfg.replicas, threads, [&](std::size_t r) {
      Engine seeder = make_stream(cfg.seed, StreamLabel::Rule, r);
      auto rule = ShuffleRule::make(kind, n, seeder());
      runs[r] = run_until_uniform_time(n, rule, cfg.seed, cap, r);
      epochs[r] = epoch_stats(runs[r].trace);
      runs[r].trace.events.clear();
      runs[r].trace.events.shrink_to_fit();
    });

    OutputSink tsink(manifest, dir, suffixed("uniform_time", ".csv", n, many));
    tsink.out() << "run,T\n";
    std::size_t finished = 0, late = 0;
    bool at_least_n = true;
    const double tail_cut = 8.0 * nd * std::log(nd);
    for (std::size_t r = 0; r < runs.size(); ++r) {
      tsink.out() << r << ',' << (runs[r].T ? std::to_string(*runs[r].T) : std::string()) << '\n';
      if (runs[r].T) {
        ++finished;
        if (*runs[r].T < n) at_least_n = false;
      }
      if (!runs[r].T || static_cast<double>(*runs[r].T) > tail_cut) ++late;
    }
    tsink.finish();

    OutputSink esink(manifest, dir, suffixed("epochs", ".csv", n, many));
    esink.out() << "run,k,u_k,m_k,D_k,growth,good\n";
    bool monotone = true;
    for (std::size_t r = 0; r < epochs.size(); ++r) {
      for (const auto& e : epochs[r]) {
        esink.out() << r << ',' << e.k << ',' << num(e.u_k) << ',' << num(e.m_k) << ',' << e.d_k << ','
                    << int(e.growth) << ',' << int(e.good) << '\n';
        if (1.0 - e.u_next < e.m_k + static_cast<double>(e.d_k) / nd - 1e-12) monotone = false;
      }
    }
    esink.finish();

    const std::string tag = "n=" + std::to_string(n) + ": ";
    add_check(manifest, "T >= n", at_least_n, tag);
    add_check(manifest, "m_{k+1} >= m_k + D_k/n", monotone, tag);
    const auto c4 = strong_epoch_check(epochs, n);
    add_check(manifest, "strong epoch frequency", c4.epochs == 0 || c4.holds, tag + num(c4.frequency));
    bool c3 = true;
    for (const auto& b : contraction_bins(epochs)) c3 = c3 && b.holds;
    add_check(manifest, "contraction bins", c3, tag);
    json summary = {{"n", n}, {"rule", cfg.rule}, {"runs", cfg.replicas}, {"cap", cap}, {"finished", finished},
                    {"tail_threshold", tail_cut},
                    {"tail_probability", static_cast<double>(late) / static_cast<double>(cfg.replicas)},
                    {"strong_epoch_frequency", c4.frequency}, {"strong_epoch_threshold", c4.threshold}};
    if (n <= 6 && finished > 0) {
      std::vector<std::uint64_t> counts(factorial(n), 0);
      for (const auto& run : runs) {
        if (run.T) ++counts[perm_rank(run.final)];
      }
      const double p = chi_squared_uniform_p_value(counts);
      summary["chi_squared_p_value"] = p;
      add_check(manifest, "uniformity at T", p > 1e-3, tag + "p=" + num(p));
    }
    OutputSink js(manifest, dir, suffixed("uniform_time_summary", ".json", n, many));
    js.out() << summary.dump(2) << '\n';
    js.finish();
  }
}

void run_exact_tv(const ExperimentConfig& cfg, Manifest& manifest, const fs::path& dir, unsigned threads) {
  const RuleKind kind = parse_rule_kind(cfg.rule);
  for (auto n : cfg.n) {
    const bool many = cfg.n.size() > 1;
    const double threshold = cfg.threshold > 0 ? cfg.threshold : default_mixing_threshold();
    const std::uint64_t horizon = cfg.horizon.value_or(default_horizon(n));
    const auto result = exact_mixing_time(n, ShuffleRule::make(kind, n, cfg.seed), threshold, horizon, threads, cfg.dump_times);

    const bool with_bound = kind == RuleKind::Cyclic && n >= 3;
    std::optional<TestStatistic> stat;
    if (with_bound) stat.emplace(slowest_eigenfunction(n));
    OutputSink sink(manifest, dir, suffixed("exact_tv", ".csv", n, many));
    sink.out() << (with_bound ? "t,tv,tv_lb\n" : "t,tv\n");
    bool below = true;
    for (const auto& [t, tv] : result.tv_curve) {
      sink.out() << t << ',' << num(tv);
      if (with_bound) {
        const double lb = tv_lower_bound(*stat, t);
        sink.out() << ',' << num(lb);
        if (lb > tv) below = false;
      }
      sink.out() << '\n';
    }
    sink.finish();
    for (const auto& [t, mu] : result.snapshots) {
      OutputSink dump(manifest, dir, suffixed("distribution_t" + std::to_string(t), ".csv", n, many));
      dump.out() << "rank,prob\n";
      for (std::size_t rank = 0; rank < mu.probs().size(); ++rank) dump.out() << rank << ',' << num(mu.probs()[rank]) << '\n';
      dump.finish();
    }
    json summary = {{"n", n}, {"rule", cfg.rule}, {"threshold", threshold}, {"horizon", horizon}};
    summary["tau_mix"] = result.tau_mix ? json(*result.tau_mix) : json(nullptr);
    OutputSink js(manifest, dir, suffixed("exact_tv_summary", ".json", n, many));
    js.out() << summary.dump(2) << '\n';
    js.finish();
    if (with_bound) add_check(manifest, "tv lower bound below exact tv", below, "n=" + std::to_string(n));
  }
}

}  // namespace

// ---------------------------------------------------------------------------

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error(join_lines(problems)), problems_(std::move(problems)) {}

std::vector<ExperimentInfo> list_experiments() {
  const ParameterSchema n{"n", "integer or list of integers", true, "n >= 2"};
  const ParameterSchema seed{"seed", "u64", false, "default 1"};
  const ParameterSchema branch{"branch", "integer", false, "branch >= 1, default 1"};
  const ParameterSchema times{"times", "list of integers or \"c*nlogn\" / \"c*n\" expressions", true, "non-empty"};
  return {
      {"spectra", "roots of e^z - z - 1 and of the characteristic polynomial, eigenfunction norms",
       {n, branch, {"tol", "real", false, "tol > 0, default 1e-12"}, {"write_eigenfunction", "bool", false, ""}}},
      {"moment", "Monte Carlo moments of F against lambda^t ||f||^2 and the second-moment bound",
       {n, branch, times, {"replicas", "integer", true, "replicas >= 100"}, seed}},
      {"lowerbound", "moments plus the binned distinguisher advantage against uniform permutations",
       {n, branch, times, {"replicas", "integer", true, "replicas >= 100"}, seed}},
      {"uniform-time", "card-marking strong uniform time: T, epoch statistics, uniformity at T",
       {n, {"rule", "string", false, "cyclic|star|uniform|quenched|pak"}, {"replicas", "integer", true, "replicas >= 1 (alias: runs)"},
        seed, {"cap", "integer", false, "cap >= n"}}},
      {"couple", "coupling of the shuffle with two independent single-card copies",
       {n, {"i", "integer", true, "0 <= i < n"}, {"j", "integer", true, "0 <= j < n, j != i"},
        {"t", "integer", true, "t >= 1"}, {"replicas", "integer", true, "replicas >= 100"}, seed, branch}},
      {"exact-tv", "exact law over S_n, total variation curve and mixing time (n <= 8)",
       {n, {"rule", "string", false, "cyclic|star|uniform"}, {"threshold", "real", false, "0 < threshold < 1, default 1/(2e)"},
        {"horizon", "integer", false, "default floor(4 n ln n)"}, {"dump_times", "list of integers", false, ""}}},
  };
}

const ExperimentInfo& experiment_info(const std::string& name) {
  static const auto catalog = list_experiments();
  for (const auto& info : catalog) {
    if (info.name == name) return info;
  }
  std::string names;
  for (const auto& info : catalog) names += (names.empty() ? "" : ", ") + info.name;
  throw std::invalid_argument("unknown experiment '" + name + "' (valid: " + names + ")");
}

json catalog_json() {
  json out = json::array();
  for (const auto& info : list_experiments()) {
    json params = json::array();
    for (const auto& p : info.parameters) {
      params.push_back({{"name", p.name}, {"type", p.type}, {"required", p.required}, {"constraint", p.constraint}});
    }
    out.push_back({{"name", info.name}, {"description", info.description}, {"parameters", params}});
  }
  return out;
}

std::uint64_t evaluate_time_expression(const json& entry, std::size_t n) {
  const double nd = static_cast<double>(n);
  if (entry.is_number_unsigned() || entry.is_number_integer()) {
    const auto v = entry.get<std::int64_t>();
    if (v < 0) throw std::invalid_argument("time must be nonnegative");
    return static_cast<std::uint64_t>(v);
  }
  if (!entry.is_string()) throw std::invalid_argument("time entry must be an integer or expression string");
  std::string text = entry.get<std::string>();
  text.erase(std::remove(text.begin(), text.end(), ' '), text.end());
  const auto star = text.find('*');
  std::size_t used = 0;
  if (star == std::string::npos) {
    const auto v = std::stoull(text, &used);
    if (used != text.size()) throw std::invalid_argument("bad time expression '" + text + "'");
    return v;
  }
  const double c = std::stod(text.substr(0, star), &used);
  if (used != star || c < 0) throw std::invalid_argument("bad time coefficient in '" + text + "'");
  const std::string unit = text.substr(star + 1);
  if (unit == "nlogn") return static_cast<std::uint64_t>(std::floor(c * nd * std::log(nd)));
  if (unit == "n") return static_cast<std::uint64_t>(std::floor(c * nd));
  throw std::invalid_argument("unknown time unit '" + unit + "' (use nlogn or n)");
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  std::vector<std::string> problems;
  ExperimentConfig cfg;
  if (!j.is_object()) throw ConfigError({"config must be a JSON object"});

  const auto get_uint = [&](const char* key, auto& target) {
    if (!j.contains(key)) return false;
    const auto& v = j.at(key);
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
      problems.push_back(std::string(key) + ": expected a nonnegative integer");
      return false;
    }
    target = static_cast<std::remove_reference_t<decltype(target)>>(v.get<std::uint64_t>());
    return true;
  };

  if (!j.contains("experiment") || !j.at("experiment").is_string()) {
    problems.push_back("experiment: required string");
  } else {
    cfg.kind = j.at("experiment").get<std::string>();
    try {
      experiment_info(cfg.kind);
    } catch (const std::invalid_argument& e) {
      problems.push_back(std::string("experiment: ") + e.what());
    }
  }

  if (!j.contains("n")) {
    problems.push_back("n: required");
  } else {
    const auto& v = j.at("n");
    const auto push = [&](const json& e) {
      if (!e.is_number_integer() || e.get<std::int64_t>() < 2) {
        problems.push_back("n: every deck size must be an integer >= 2");
      } else {
        cfg.n.push_back(e.get<std::size_t>());
      }
    };
    if (v.is_array()) {
      if (v.empty()) problems.push_back("n: empty list");
      for (const auto& e : v) push(e);
    } else {
      push(v);
    }
  }

  if (j.contains("rule")) {
    if (!j.at("rule").is_string()) {
      problems.push_back("rule: expected a string");
    } else {
      cfg.rule = j.at("rule").get<std::string>();
    }
  }
  if (j.contains("branch")) {
    if (!j.at("branch").is_number_integer() || j.at("branch").get<int>() < 1) {
      problems.push_back("branch: expected an integer >= 1");
    } else {
      cfg.branch = j.at("branch").get<int>();
    }
  }
  if (j.contains("times")) {
    if (!j.at("times").is_array()) problems.push_back("times: expected a list");
    else cfg.times = j.at("times");
  }
  get_uint("replicas", cfg.replicas);
  if (!j.contains("replicas")) get_uint("runs", cfg.replicas);
  get_uint("seed", cfg.seed);
  if (j.contains("output")) {
    if (!j.at("output").is_string()) problems.push_back("output: expected a string");
    else cfg.output = j.at("output").get<std::string>();
  }
  if (j.contains("tol")) {
    if (!j.at("tol").is_number() || !(j.at("tol").get<double>() > 0)) problems.push_back("tol: expected a positive number");
    else cfg.tol = j.at("tol").get<double>();
  }
  get_uint("max_iterations", cfg.max_iterations);
  if (j.contains("threshold")) {
    const auto& v = j.at("threshold");
    if (!v.is_number() || !(v.get<double>() > 0 && v.get<double>() < 1)) problems.push_back("threshold: expected a number in (0, 1)");
    else cfg.threshold = v.get<double>();
  }
  std::uint64_t tmp = 0;
  if (get_uint("horizon", tmp)) cfg.horizon = tmp;
  if (get_uint("t", tmp)) cfg.t = tmp;
  get_uint("i", cfg.card_i);
  get_uint("j", cfg.card_j);
  get_uint("cap", cfg.cap);
  if (j.contains("dump_times")) {
    if (!j.at("dump_times").is_array()) {
      problems.push_back("dump_times: expected a list");
    } else {
      for (const auto& e : j.at("dump_times")) {
        if (!e.is_number_integer() || e.get<std::int64_t>() < 0) problems.push_back("dump_times: entries must be nonnegative integers");
        else cfg.dump_times.push_back(e.get<std::uint64_t>());
      }
    }
  }
  if (j.contains("write_eigenfunction")) {
    if (!j.at("write_eigenfunction").is_boolean()) problems.push_back("write_eigenfunction: expected a boolean");
    else cfg.write_eigenfunction = j.at("write_eigenfunction").get<bool>();
  }

  // Kind-specific constraints.
  const auto& k = cfg.kind;
  const bool sampled = k == "moment" || k == "lowerbound";
  if (sampled || k == "couple") {
    if (cfg.replicas < 100) problems.push_back("replicas: must be >= 100 for " + k);
  }
  if (sampled) {
    if (cfg.times.empty()) problems.push_back("times: required, non-empty");
    for (auto n : cfg.n) {
      for (const auto& e : cfg.times) {
        try {
          evaluate_time_expression(e, n);
        } catch (const std::exception& ex) {
          problems.push_back(std::string("times: ") + ex.what());
          break;
        }
      }
    }
  }
  if (k == "moment" || k == "lowerbound" || k == "couple") {
    for (auto n : cfg.n) {
      if (n < 3) problems.push_back("n: the statistic needs n >= 3");
    }
  }
  if (k == "couple") {
    if (!cfg.t || *cfg.t < 1) problems.push_back("t: required, >= 1");
    if (!j.contains("i") || !j.contains("j")) problems.push_back("i, j: required");
    if (cfg.card_i == cfg.card_j) problems.push_back("i, j: must be distinct cards");
    for (auto n : cfg.n) {
      if (cfg.card_i >= n || cfg.card_j >= n) problems.push_back("i, j: must be < n");
    }
  }
  if (k == "uniform-time" || k == "exact-tv") {
    try {
      const auto kind = parse_rule_kind(cfg.rule);
      if (kind == RuleKind::ExplicitSequence) problems.push_back("rule: explicit sequences are not configurable here");
      if (k == "exact-tv" && kind != RuleKind::Cyclic && kind != RuleKind::Star && kind != RuleKind::UniformIID) {
        problems.push_back("rule: exact-tv supports cyclic, star and uniform");
      }
    } catch (const std::invalid_argument& e) {
      problems.push_back(std::string("rule: ") + e.what());
    }
  }
  if (k == "uniform-time") {
    if (cfg.replicas < 1) problems.push_back("replicas: must be >= 1");
    for (auto n : cfg.n) {
      if (cfg.cap != 0 && cfg.cap < n) problems.push_back("cap: must be >= n");
    }
  }
  if (k == "exact-tv") {
    for (auto n : cfg.n) {
      if (n > kMaxExactDeck) problems.push_back("n: exact-tv needs n <= 8");
    }
  }
  if (!problems.empty()) throw ConfigError(std::move(problems));
  return cfg;
}

json ExperimentConfig::to_json() const {
  json j = {{"experiment", kind}, {"n", n}, {"rule", rule}, {"branch", branch}, {"times", times},
            {"replicas", replicas}, {"seed", seed}, {"tol", tol}, {"max_iterations", max_iterations},
            {"dump_times", dump_times}, {"i", card_i}, {"j", card_j},
            {"cap", cap}, {"write_eigenfunction", write_eigenfunction}};
  if (threshold > 0) j["threshold"] = threshold;
  if (horizon) j["horizon"] = *horizon;
  if (t) j["t"] = *t;
  return j;
}

std::uint64_t ExperimentConfig::hash() const { return fnv1a(to_json().dump()); }

bool Manifest::checks_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

json Manifest::to_json() const {
  json outs = json::array();
  for (const auto& o : outputs) outs.push_back({{"path", o.path}, {"complete", o.complete}});
  json cks = json::array();
  for (const auto& c : checks) cks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  json j = {{"experiment", experiment}, {"config_hash", hex64(config_hash)}, {"seed", seed},
            {"version", SHUFFLE_VERSION}, {"outputs", outs}, {"checks", cks}, {"complete", complete},
            {"wall_seconds", wall_seconds}};
  if (!error.empty()) j["error"] = error;
  return j;
}

Manifest run_experiment(const ExperimentConfig& config, const fs::path& out_dir, unsigned threads) {
  fs::create_directories(out_dir);
  Manifest manifest;
  manifest.experiment = config.kind;
  manifest.config_hash = config.hash();
  manifest.seed = config.seed;
  const auto started = std::chrono::steady_clock::now();
  const auto write_manifest = [&] {
    manifest.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    json j = manifest.to_json();
    j["config"] = config.to_json();
    j["started_at"] = static_cast<std::int64_t>(std::time(nullptr));
    std::ofstream out(out_dir / "manifest.json", std::ios::binary | std::ios::trunc);
    out << j.dump(2) << '\n';
  };
  try {
    if (config.kind == "spectra") run_spectra(config, manifest, out_dir);
    else if (config.kind == "moment") run_moment(config, manifest, out_dir, threads, false);
    else if (config.kind == "lowerbound") run_moment(config, manifest, out_dir, threads, true);
    else if (config.kind == "couple") run_couple(config, manifest, out_dir, threads);
    else if (config.kind == "uniform-time") run_uniform_time(config, manifest, out_dir, threads);
    else if (config.kind == "exact-tv") run_exact_tv(config, manifest, out_dir, threads);
    else experiment_info(config.kind);
    manifest.complete = true;
  } catch (const std::exception& e) {
    manifest.complete = false;
    manifest.error = e.what();
    write_manifest();
    throw;
  }
  write_manifest();
  return manifest;
}

}  // namespace shuffle

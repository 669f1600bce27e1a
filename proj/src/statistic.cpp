#include "shuffle/statistic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "shuffle/engine.hpp"
#include "shuffle/parallel.hpp"
#include "shuffle/rng.hpp"

namespace shuffle {

TestStatistic::TestStatistic(Eigenfunction f) : f_(std::move(f)) {
  if (f_.values.size() != f_.n || f_.n < 2) throw std::invalid_argument("malformed eigenfunction");
  conj_values_.reserve(f_.n);
  for (const auto& v : f_.values) conj_values_.push_back(std::conj(v));
}

Complex TestStatistic::evaluate(const Permutation& perm) const {
  if (perm.size() != f_.n) throw std::invalid_argument("permutation and statistic sizes differ");
  Complex sum = 0.0;
  const auto states = perm.card_to_state();
  for (std::size_t i = 0; i < f_.n; ++i) sum += f_.values[states[i]] * conj_values_[i];
  return sum / static_cast<double>(f_.n);
}

Complex evaluate_F(const Permutation& perm, const TestStatistic& stat) { return stat.evaluate(perm); }

double lambda_power_sq(Complex lambda, std::uint64_t t) {
  if (t == 0) return 1.0;
  return std::exp(2.0 * static_cast<double>(t) * std::log(std::abs(lambda)));
}

Complex predicted_mean(const TestStatistic& stat, std::uint64_t t) {
  const auto& f = stat.eigenfunction();
  const double norm_sq = f.norm2 * f.norm2;
  if (t == 0) return norm_sq;
  const double td = static_cast<double>(t);
  const double modulus = std::exp(td * std::log(std::abs(f.lambda)));
  const double phase = std::fmod(td * std::arg(f.lambda), 2.0 * std::numbers::pi);
  return std::polar(modulus * norm_sq, phase);
}

double stationary_second_moment(const TestStatistic& stat) {
  const auto& f = stat.eigenfunction();
  if (f.n < 2) throw std::invalid_argument("need n >= 2");
  const double sq = f.norm2 * f.norm2;
  return sq * sq / static_cast<double>(f.n - 1);
}

double second_moment_bound(const TestStatistic& stat, std::uint64_t t) {
  const auto& f = stat.eigenfunction();
  const double nd = static_cast<double>(f.n);
  const double inf4 = std::pow(f.norm_inf, 4);
  return (lambda_power_sq(f.lambda, t) + (12.0 * static_cast<double>(t) + nd) / (nd * nd)) * inf4;
}

double tv_lower_bound(const TestStatistic& stat, std::uint64_t t) {
  const auto& f = stat.eigenfunction();
  const double nd = static_cast<double>(f.n);
  const double decay = lambda_power_sq(f.lambda, t);
  const double num = decay * std::pow(f.norm2, 4);
  const double den = 4.0 * std::pow(f.norm_inf, 4) * (decay + (12.0 * static_cast<double>(t) + 3.0 * nd) / (nd * nd));
  return std::clamp(num / den, 0.0, 1.0);
}

SampleSummary summarize(std::span<const Complex> samples) {
  if (samples.empty()) throw std::invalid_argument("no samples");
  const double count = static_cast<double>(samples.size());
  SampleSummary s;
  Complex mean = 0.0;
  double m2 = 0.0;
  for (const auto& v : samples) {
    mean += v;
    m2 += std::norm(v);
  }
  mean /= count;
  m2 /= count;
  double var = 0.0;
  double var_m2 = 0.0;
  for (const auto& v : samples) {
    var += std::norm(v - mean);
    const double d = std::norm(v) - m2;
    var_m2 += d * d;
  }
  const double dof = std::max(1.0, count - 1.0);
  s.mean = mean;
  s.second_moment = m2;
  s.std_error = std::sqrt(var / dof / count);
  s.m2_std_error = std::sqrt(var_m2 / dof / count);
  return s;
}

std::vector<std::vector<Complex>> sample_shuffle_F(const TestStatistic& stat,
                                                   std::span<const std::uint64_t> times,
                                                   std::size_t replicas, std::uint64_t seed,
                                                   unsigned threads) {
  const std::size_t n = stat.size();
  std::vector<std::size_t> order(times.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });

  std::vector<std::vector<Complex>> out(times.size(), std::vector<Complex>(replicas));
  parallel_for(replicas, threads, [&](std::size_t r) {
    Engine rng = make_stream(seed, StreamLabel::ShuffleR, r);
    RenewalDeck deck(n);
    std::uint64_t now = 0;
    const auto bound = static_cast<std::uint32_t>(n);
    for (std::size_t idx : order) {
      for (; now < times[idx]; ++now) deck.step(uniform_below(rng, bound));
      out[idx][r] = stat.evaluate(deck.materialize());
    }
  });
  return out;
}

std::vector<Complex> sample_uniform_F(const TestStatistic& stat, std::size_t count, std::uint64_t seed,
                                      unsigned threads) {
  std::vector<Complex> out(count);
  parallel_for(count, threads, [&](std::size_t r) {
    Engine rng = make_stream(seed, StreamLabel::UniformSample, r);
    out[r] = stat.evaluate(random_permutation(stat.size(), rng));
  });
  return out;
}

std::vector<MomentReport> moment_experiment(const TestStatistic& stat, std::span<const std::uint64_t> times,
                                            std::size_t replicas, std::uint64_t seed, unsigned threads) {
  if (replicas < 100) throw std::invalid_argument("moment experiment needs at least 100 replicas");
  const auto samples = sample_shuffle_F(stat, times, replicas, seed, threads);
  std::vector<MomentReport> reports;
  reports.reserve(times.size());
  for (std::size_t k = 0; k < times.size(); ++k) {
    const auto s = summarize(samples[k]);
    MomentReport row;
    row.t = times[k];
    row.predicted_mean = predicted_mean(stat, times[k]);
    row.empirical_mean = s.mean;
    row.empirical_second_moment = s.second_moment;
    row.second_moment_bound = second_moment_bound(stat, times[k]);
    row.tv_lower_bound = tv_lower_bound(stat, times[k]);
    row.replicas = replicas;
    row.std_error = s.std_error;
    row.m2_std_error = s.m2_std_error;
    reports.push_back(row);
  }
  return reports;
}

AdvantageResult distinguisher_advantage(std::span<const Complex> shuffle_samples,
                                        std::span<const Complex> uniform_samples, double phase,
                                        const AdvantageOptions& options) {
  if (shuffle_samples.empty() || uniform_samples.empty()) {
    throw std::invalid_argument("distinguisher needs nonempty sample sets");
  }
  if (options.bins < 1) throw std::invalid_argument("bin count must be positive");
  const Complex rotate = std::polar(1.0, -phase);
  const auto project = [&](Complex v) { return (v * rotate).real(); };

  double sum = 0.0, sum_sq = 0.0;
  for (auto v : shuffle_samples) { const double x = project(v); sum += x; sum_sq += x * x; }
  for (auto v : uniform_samples) { const double x = project(v); sum += x; sum_sq += x * x; }
  const double count = static_cast<double>(shuffle_samples.size() + uniform_samples.size());
  const double mean = sum / count;
  double sd = std::sqrt(std::max(0.0, sum_sq / count - mean * mean));
  if (!(sd > 0.0)) sd = 1.0;

  AdvantageResult result;
  result.bins = options.bins;
  result.lower = mean - options.half_width_sd * sd;
  result.upper = mean + options.half_width_sd * sd;
  const double width = (result.upper - result.lower) / options.bins;

  const auto histogram = [&](std::span<const Complex> samples) {
    std::vector<double> h(static_cast<std::size_t>(options.bins), 0.0);
    for (auto v : samples) {
      const double pos = std::floor((project(v) - result.lower) / width);
      const auto b = static_cast<std::size_t>(std::clamp(pos, 0.0, static_cast<double>(options.bins - 1)));
      h[b] += 1.0;
    }
    for (auto& x : h) x /= static_cast<double>(samples.size());
    return h;
  };
  const auto p = histogram(shuffle_samples);
  const auto q = histogram(uniform_samples);
  double tv = 0.0;
  for (std::size_t b = 0; b < p.size(); ++b) tv += std::abs(p[b] - q[b]);
  result.advantage = std::clamp(0.5 * tv, 0.0, 1.0);
  return result;
}

}  // namespace shuffle

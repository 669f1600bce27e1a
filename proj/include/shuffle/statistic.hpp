#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "shuffle/permutation.hpp"
#include "shuffle/spectral.hpp"

namespace shuffle {

// F(sigma) = (1/n) sum_i f(sigma(i)) conj(f(i)) for a renewal-frame
// permutation sigma. Its mean under the cyclic-to-random shuffle started at
// the identity is lambda^t ||f||_2^2 and its mean under the uniform law is 0.
class TestStatistic {
 public:
  explicit TestStatistic(Eigenfunction f);

  std::size_t size() const { return f_.n; }
  const Eigenfunction& eigenfunction() const { return f_; }
  Complex lambda() const { return f_.lambda; }

  Complex evaluate(const Permutation& perm) const;

 private:
  Eigenfunction f_;
  std::vector<Complex> conj_values_;
};

// Throws std::invalid_argument on a size mismatch.
Complex evaluate_F(const Permutation& perm, const TestStatistic& stat);

// lambda^t ||f||_2^2 in log-polar form.
Complex predicted_mean(const TestStatistic& stat, std::uint64_t t);

// E_U |F|^2 = ||f||_2^4 / (n - 1).
double stationary_second_moment(const TestStatistic& stat);

// (|lambda|^(2t) + (12 t + n) / n^2) ||f||_inf^4, an upper bound on E|F(sigma_t)|^2.
double second_moment_bound(const TestStatistic& stat, std::uint64_t t);

// Cauchy-Schwarz lower bound on TV(mu_t, U):
// |lambda|^(2t) ||f||_2^4 / (4 ||f||_inf^4 (|lambda|^(2t) + (12 t + 3 n) / n^2)),
// clamped to [0, 1].
double tv_lower_bound(const TestStatistic& stat, std::uint64_t t);

// |lambda|^(2t) = exp(2 t log |lambda|).
double lambda_power_sq(Complex lambda, std::uint64_t t);

struct MomentReport {
  std::uint64_t t = 0;
  Complex predicted_mean;
  Complex empirical_mean;
  double empirical_second_moment = 0;
  double second_moment_bound = 0;
  double tv_lower_bound = 0;
  std::size_t replicas = 0;
  double std_error = 0;     // standard error of the complex mean
  double m2_std_error = 0;  // standard error of the mean of |F|^2
};

struct SampleSummary {
  Complex mean;
  double second_moment = 0;
  double std_error = 0;
  double m2_std_error = 0;
};

// Order-dependent only through the sample order, which callers fix by index.
SampleSummary summarize(std::span<const Complex> samples);

// F at each requested time over `replicas` independent renewal-frame runs from
// the identity. Result is indexed [time][replica]; replica r draws from
// stream (seed, ShuffleR, r).
std::vector<std::vector<Complex>> sample_shuffle_F(const TestStatistic& stat,
                                                   std::span<const std::uint64_t> times,
                                                   std::size_t replicas, std::uint64_t seed,
                                                   unsigned threads = 1);

// F of `count` uniformly random permutations (stream UniformSample).
std::vector<Complex> sample_uniform_F(const TestStatistic& stat, std::size_t count, std::uint64_t seed,
                                      unsigned threads = 1);

// Requires replicas >= 100.
std::vector<MomentReport> moment_experiment(const TestStatistic& stat, std::span<const std::uint64_t> times,
                                            std::size_t replicas, std::uint64_t seed, unsigned threads = 1);

struct AdvantageOptions {
  int bins = 64;
  double half_width_sd = 6.0;  // bins span pooled mean +/- this many pooled sds
};

struct AdvantageResult {
  double advantage = 0;
  int bins = 0;
  double lower = 0;
  double upper = 0;
};

// Binned total-variation separation of Re(F e^{-i phase}) between the two
// sample sets. Values outside the range land in the edge bins.
AdvantageResult distinguisher_advantage(std::span<const Complex> shuffle_samples,
                                        std::span<const Complex> uniform_samples, double phase,
                                        const AdvantageOptions& options = {});

}  // namespace shuffle

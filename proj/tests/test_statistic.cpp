#include "doctest.h"
#include "oracles.hpp"
#include "shuffle/engine.hpp"
#include "shuffle/spectral.hpp"
#include "shuffle/statistic.hpp"

using namespace shuffle;

namespace {

TestStatistic stat3() { return TestStatistic(eigenfunction(3, -0.5)); }

Complex F_of(const TestStatistic& s, const oracle::Perm& p) {
  return s.evaluate(Permutation::from_card_to_state({p.begin(), p.end()}));
}

// Exact law after t renewal steps from the identity, as (perm, prob) pairs.
std::map<oracle::Perm, double> renewal_law(std::size_t n, int t) {
  oracle::Perm id(n);
  std::iota(id.begin(), id.end(), 0u);
  std::map<oracle::Perm, double> law{{id, 1.0}};
  for (int s = 0; s < t; ++s) {
    std::map<oracle::Perm, double> next;
    for (const auto& [p, w] : law) {
      for (std::uint32_t u = 0; u < n; ++u) next[oracle::renewal_move(p, u)] += w / n;
    }
    law = std::move(next);
  }
  return law;
}

}  // namespace

TEST_CASE("F examples at n = 3") {
  const auto s = stat3();
  CHECK(std::abs(s.evaluate(Permutation(3)) - 2.0 / 3.0) < 1e-15);
  CHECK(std::abs(F_of(s, {0, 2, 1}) - (-2.0 / 3.0)) < 1e-15);
  Complex mean = 0;
  double m2 = 0;
  for (const auto& p : oracle::all_perms(3)) {
    mean += F_of(s, p) / 6.0;
    m2 += std::norm(F_of(s, p)) / 6.0;
  }
  CHECK(std::abs(mean) < 1e-15);
  CHECK(m2 == doctest::Approx(2.0 / 9.0).epsilon(1e-14));
  CHECK(stationary_second_moment(s) == doctest::Approx(2.0 / 9.0).epsilon(1e-14));
  CHECK_THROWS_AS(s.evaluate(Permutation(4)), std::invalid_argument);
}

TEST_CASE("predicted mean against exact enumeration") {
  const auto s = stat3();
  CHECK(std::abs(predicted_mean(s, 0) - 2.0 / 3.0) < 1e-15);
  CHECK(std::abs(predicted_mean(s, 1) - (-2.0 / 9.0)) < 1e-15);
  CHECK(std::abs(predicted_mean(s, 2) - 2.0 / 27.0) < 1e-15);
  for (int t = 0; t <= 5; ++t) {
    Complex exact = 0;
    for (const auto& [p, w] : renewal_law(3, t)) exact += w * F_of(s, p);
    CHECK(std::abs(exact - predicted_mean(s, t)) < 1e-14);
  }
  // Complex eigenvalue at n = 5.
  const auto s5 = TestStatistic(slowest_eigenfunction(5));
  for (int t = 0; t <= 6; ++t) {
    Complex exact = 0;
    for (const auto& [p, w] : renewal_law(5, t)) exact += w * F_of(s5, p);
    CHECK(std::abs(exact - predicted_mean(s5, t)) < 1e-13);
  }
}

TEST_CASE("predicted mean recursion survives large t") {
  const auto s = TestStatistic(eigenfunction(1000, spectral_pair(1000).gamma));
  const Complex lam = s.lambda();
  for (std::uint64_t t : {0ull, 1ull, 999ull, 123456ull, 10000000ull}) {
    const Complex a = predicted_mean(s, t), b = predicted_mean(s, t + 1);
    if (std::abs(a) > 1e-290) CHECK(std::abs(b - lam * a) <= 1e-12 * std::abs(b) + 1e-300);
  }
}

TEST_CASE("second moment bound and tv lower bound at n = 3") {
  const auto s = stat3();
  CHECK(second_moment_bound(s, 0) == doctest::Approx(4.0 / 3.0).epsilon(1e-14));
  CHECK(std::norm(s.evaluate(Permutation(3))) <= second_moment_bound(s, 0));
  CHECK(tv_lower_bound(s, 0) == doctest::Approx(1.0 / 18.0).epsilon(1e-14));
  CHECK(tv_lower_bound(s, 0) <= 5.0 / 6.0);
  CHECK(tv_lower_bound(s, 200) < 1e-100);
  for (std::uint64_t t = 0; t < 60; ++t) {
    const double lb = tv_lower_bound(s, t);
    CHECK(lb >= 0.0);
    CHECK(lb <= 1.0);
  }
}

TEST_CASE("n = 2 stationary second moment") {
  Eigenfunction f;
  f.n = 2;
  f.values = {1.0, -1.0};
  f.lambda = -0.5;
  f.gamma = -1.0;
  f.norm2 = 1.0;
  f.norm_inf = 1.0;
  const TestStatistic s(f);
  CHECK(stationary_second_moment(s) == doctest::Approx(1.0));
}

TEST_CASE("rescaling leaves ratio quantities unchanged") {
  const auto f = eigenfunction(256, spectral_pair(256).gamma);
  const TestStatistic a(f), b(rescaled(f, Complex(0.3, -1.7)));
  for (std::uint64_t t : {0u, 50u, 300u, 2000u}) {
    CHECK(tv_lower_bound(a, t) == doctest::Approx(tv_lower_bound(b, t)).epsilon(1e-10));
  }
  const std::vector<std::uint64_t> times{0, 64, 256};
  const auto sa = sample_shuffle_F(a, times, 400, 3);
  const auto sb = sample_shuffle_F(b, times, 400, 3);
  const auto ua = sample_uniform_F(a, 400, 3);
  const auto ub = sample_uniform_F(b, 400, 3);
  for (std::size_t k = 0; k < times.size(); ++k) {
    const Complex ra = summarize(sa[k]).mean / predicted_mean(a, times[k]);
    const Complex rb = summarize(sb[k]).mean / predicted_mean(b, times[k]);
    CHECK(std::abs(ra - rb) < 1e-9);
    const double da = distinguisher_advantage(sa[k], ua, std::arg(predicted_mean(a, times[k]))).advantage;
    const double db = distinguisher_advantage(sb[k], ub, std::arg(predicted_mean(b, times[k]))).advantage;
    CHECK(da == doctest::Approx(db).epsilon(1e-9));
  }
}

TEST_CASE("distinguisher advantage edge cases") {
  std::vector<Complex> a(500), b(500);
  for (int k = 0; k < 500; ++k) {
    a[k] = Complex(std::sin(k * 0.37), 0);
    b[k] = a[k];
  }
  CHECK(distinguisher_advantage(a, b, 0.0).advantage == 0.0);
  std::vector<Complex> lo(300, Complex(-1.0)), hi(300, Complex(1.0));
  CHECK(distinguisher_advantage(lo, hi, 0.0).advantage == doctest::Approx(1.0));
  CHECK_THROWS_AS(distinguisher_advantage({}, b, 0.0), std::invalid_argument);
  const auto r = distinguisher_advantage(a, b, 0.0);
  CHECK(r.bins == 64);
  CHECK(r.lower < r.upper);
}

TEST_CASE("moment experiment at n = 64, modest replicas") {
  const auto s = TestStatistic(eigenfunction(64, spectral_pair(64).gamma));
  const std::vector<std::uint64_t> times{0, 64, 128};
  const auto rows = moment_experiment(s, times, 4000, 21);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].std_error < 1e-12);
  CHECK(std::abs(rows[0].empirical_mean - rows[0].predicted_mean) < 1e-12);
  for (const auto& r : rows) {
    CHECK(std::abs(r.empirical_mean - r.predicted_mean) <= 4 * r.std_error + 1e-12);
    CHECK(r.empirical_second_moment <= r.second_moment_bound + 4 * r.m2_std_error);
    CHECK(r.tv_lower_bound >= 0.0);
    CHECK(r.tv_lower_bound <= 1.0);
  }
  CHECK_THROWS(moment_experiment(s, times, 99, 21));
  const auto control = summarize(sample_uniform_F(s, 4000, 21));
  CHECK(std::abs(control.mean) <= 4 * control.std_error);
}

TEST_CASE("sampling is independent of thread count") {
  const auto s = TestStatistic(eigenfunction(32, spectral_pair(32).gamma));
  const std::vector<std::uint64_t> times{5, 40};
  CHECK(sample_shuffle_F(s, times, 300, 9, 1) == sample_shuffle_F(s, times, 300, 9, 8));
  CHECK(sample_uniform_F(s, 300, 9, 1) == sample_uniform_F(s, 300, 9, 8));
}

#include "doctest.h"
#include "oracles.hpp"
#include "shuffle/engine.hpp"
#include "shuffle/exact_tv.hpp"
#include "shuffle/spectral.hpp"
#include "shuffle/statistic.hpp"

using namespace shuffle;

namespace {
Permutation P(std::vector<State> v) { return Permutation::from_card_to_state(std::move(v)); }
}  // namespace

TEST_CASE("rank and unrank") {
  CHECK(perm_rank(Permutation(5)) == 0);
  CHECK(perm_unrank(3, 5) == P({2, 1, 0}));
  CHECK(perm_rank(P({2, 1, 0})) == 5);
  const auto perms = oracle::all_perms(6);
  for (std::uint64_t k = 0; k < factorial(6); ++k) {
    const auto p = perm_unrank(6, k);
    CHECK(perm_rank(p) == k);
    CHECK(std::equal(perms[k].begin(), perms[k].end(), p.card_to_state().begin()));
  }
  CHECK_THROWS_AS(perm_unrank(3, 6), std::out_of_range);
  CHECK(factorial(8) == 40320);
}

TEST_CASE("step kernel examples") {
  const auto u = ExactDistribution::uniform(5);
  for (State l = 0; l < 5; ++l) {
    const auto out = step_kernel(u, l);
    for (double p : out.probs()) CHECK(std::abs(p - 1.0 / 120) <= 1e-14);
  }
  const auto two = step_kernel(ExactDistribution::point_mass(Permutation(2)), 1);
  CHECK(two.probs() == std::vector<double>{0.5, 0.5});
  CHECK(tv_to_uniform(two) == 0.0);

  const auto three = step_kernel(ExactDistribution::point_mass(Permutation(3)), 0);
  Permutation s01(3), s02(3);
  transpose_step(s01, 0, 1);
  transpose_step(s02, 0, 2);
  CHECK(three.probs()[0] == doctest::Approx(1.0 / 3));
  CHECK(three.probs()[perm_rank(s01)] == doctest::Approx(1.0 / 3));
  CHECK(three.probs()[perm_rank(s02)] == doctest::Approx(1.0 / 3));
  CHECK(three.total() == doctest::Approx(1.0));
}

TEST_CASE("tv examples") {
  CHECK(tv_to_uniform(ExactDistribution::uniform(4)) <= 1e-15);
  CHECK(tv_to_uniform(ExactDistribution::point_mass(Permutation(3))) == doctest::Approx(5.0 / 6.0));
}

TEST_CASE("uniform fixed point for the annealed kernel") {
  for (std::size_t n : {3u, 4u, 6u}) {
    const TranspositionTable table(n);
    const auto out = step_kernel_uniform_location(ExactDistribution::uniform(n), table);
    const double target = 1.0 / factorial(n);
    for (double p : out.probs()) CHECK(std::abs(p - target) <= 1e-14);
  }
}

TEST_CASE("mass is conserved step by step") {
  const TranspositionTable table(6);
  auto mu = ExactDistribution::point_mass(Permutation(6));
  for (std::uint64_t t = 1; t <= 30; ++t) {
    mu = step_kernel(mu, static_cast<State>(t % 6), table, 3);
    CHECK(std::abs(mu.total() - 1.0) <= 1e-12);
    CHECK(mu.min_entry() >= 0.0);
  }
}

TEST_CASE("mixing time against the dense oracle") {
  auto two = exact_mixing_time(2, ShuffleRule::cyclic(2), default_mixing_threshold(), 5);
  REQUIRE(two.tau_mix);
  CHECK(*two.tau_mix == 1);
  auto two_star = exact_mixing_time(2, ShuffleRule::star(2), default_mixing_threshold(), 5);
  CHECK(*two_star.tau_mix == 1);

  for (std::size_t n : {4u, 5u}) {
    const std::uint64_t horizon = 30;
    const auto res = exact_mixing_time(n, ShuffleRule::cyclic(n), default_mixing_threshold(), horizon);
    std::vector<std::uint32_t> seq;
    for (std::uint64_t t = 1; t <= horizon; ++t) seq.push_back(static_cast<std::uint32_t>(t % n));
    const auto ref = oracle::dense_tv_curve(n, seq);
    REQUIRE(res.tv_curve.size() == horizon + 1);
    std::optional<std::uint64_t> ref_tau;
    for (std::uint64_t t = 0; t <= horizon; ++t) {
      CHECK(res.tv_curve[t].first == t);
      CHECK(std::abs(res.tv_curve[t].second - ref[t]) <= 1e-13);
      if (!ref_tau && ref[t] <= default_mixing_threshold()) ref_tau = t;
    }
    CHECK(res.tau_mix == ref_tau);
  }
  // Frozen from the dense oracle.
  const auto five = exact_mixing_time(5, ShuffleRule::cyclic(5), default_mixing_threshold(), 40);
  CHECK(five.tau_mix == std::optional<std::uint64_t>(5));

  const auto star = exact_mixing_time(5, ShuffleRule::star(5), default_mixing_threshold(), 40);
  const auto star_ref = oracle::dense_tv_curve(5, std::vector<std::uint32_t>(40, 0));
  for (std::uint64_t t = 0; t <= 40; ++t) CHECK(std::abs(star.tv_curve[t].second - star_ref[t]) <= 1e-13);

  const auto explicit_rule = ShuffleRule::explicit_sequence(5, {3, 1, 4, 1});
  const auto ex = exact_mixing_time(5, explicit_rule, default_mixing_threshold(), 20);
  std::vector<std::uint32_t> seq;
  for (int t = 0; t < 20; ++t) seq.push_back(std::vector<std::uint32_t>{3, 1, 4, 1}[t % 4]);
  const auto ex_ref = oracle::dense_tv_curve(5, seq);
  for (std::uint64_t t = 0; t <= 20; ++t) CHECK(std::abs(ex.tv_curve[t].second - ex_ref[t]) <= 1e-13);

  CHECK_THROWS(exact_mixing_time(5, ShuffleRule::pak_memory_two(5, 1), 0.2, 10));
  CHECK_THROWS(exact_mixing_time(9, ShuffleRule::cyclic(9), 0.2, 10));
}

TEST_CASE("horizon reached without crossing") {
  const auto res = exact_mixing_time(6, ShuffleRule::cyclic(6), 1e-9, 4, 1, {0, 2});
  CHECK_FALSE(res.tau_mix);
  CHECK(res.tv_curve.size() == 5);
  REQUIRE(res.snapshots.size() == 2);
  CHECK(res.snapshots[0].first == 0);
  CHECK(res.snapshots[0].second.probs()[0] == 1.0);
}

TEST_CASE("single-card marginal follows powers of M in the renewal frame") {
  for (std::size_t n : {4u, 5u, 6u}) {
    const TranspositionTable table(n);
    // Raw start that corresponds to the renewal identity.
    auto mu = ExactDistribution::point_mass(to_raw_frame(Permutation(n), 0));
    const Eigen::MatrixXd M = oracle::renewal_matrix(n);
    for (std::uint64_t t = 1; t <= 3 * n; ++t) {
      mu = step_kernel(mu, static_cast<State>(t % n), table);
      for (Card c = 0; c < n; ++c) {
        // Card c starts in renewal state c.
        Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n);
        row(c) = 1.0;
        for (std::uint64_t s = 0; s < t; ++s) row = row * M;
        const auto loc = card_location_marginal(mu, c);
        for (State s = 0; s < n; ++s) {
          const State location = static_cast<State>((t + 1 + n - s) % n);
          CHECK(std::abs(loc[location] - row(s)) <= 1e-12);
        }
      }
    }
  }
}

TEST_CASE("tv lower bound never exceeds exact tv, n = 5..8") {
  for (std::size_t n = 5; n <= 8; ++n) {
    const TestStatistic stat(slowest_eigenfunction(n));
    const auto horizon = static_cast<std::uint64_t>(std::floor(4.0 * n * std::log(double(n))));
    const auto res = exact_mixing_time(n, ShuffleRule::cyclic(n), default_mixing_threshold(), horizon, 0);
    for (const auto& [t, tv] : res.tv_curve) CHECK(tv_lower_bound(stat, t) <= tv);
  }
}

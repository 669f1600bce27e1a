#include <map>
#include <stdexcept>

#include "doctest.h"
#include "shuffle/exact_tv.hpp"
#include "shuffle/uniform_time.hpp"

using namespace shuffle;

TEST_CASE("marking predicate") {
  MarkingState s(5);
  mark_initial(s, 2);  // card 2
  CHECK(s.marked_count == 1);

  // r == l with an unmarked card marks it.
  auto ev = marking_step(s, 3, 3);
  REQUIRE(ev);
  CHECK(ev->card == 3);
  CHECK(ev->self_marked);
  CHECK(s.marked_count == 2);

  // r == l with a marked card changes nothing.
  CHECK_FALSE(marking_step(s, 3, 3));
  CHECK(s.marked_count == 2);

  // Card at l already marked: no change whatever r holds.
  CHECK_FALSE(marking_step(s, 3, 0));
  CHECK(s.marked_count == 2);
  // Card 3 now sits at location 0 and card 0 at 3.
  CHECK(s.perm.card_at(0) == 3);

  // Unmarked card at l, marked card at r: marked, then swapped.
  ev = marking_step(s, 1, 0);
  REQUIRE(ev);
  CHECK(ev->card == 1);
  CHECK(ev->partner == 3);
  CHECK_FALSE(ev->self_marked);
  CHECK(s.perm.card_at(0) == 1);

  // Unmarked at l, unmarked at r: nothing.
  CHECK_FALSE(marking_step(s, 4, 3));
  CHECK(s.t == 5);
  CHECK_THROWS_AS(marking_step(s, 5, 0), std::invalid_argument);
}

TEST_CASE("runs respect T >= n and the step cap") {
  for (auto kind : {RuleKind::Cyclic, RuleKind::Star, RuleKind::UniformIID, RuleKind::QuenchedEpochPermutation,
                    RuleKind::PakMemoryTwo}) {
    for (std::uint64_t r = 0; r < 200; ++r) {
      auto rule = ShuffleRule::make(kind, 9, r);
      const auto res = run_until_uniform_time(9, rule, 4, 5000, r);
      REQUIRE(res.T);
      CHECK(*res.T >= 9);
      CHECK(res.trace.events.size() == 8);
      std::uint64_t prev = 0;
      for (const auto& e : res.trace.events) {
        CHECK(e.t > prev);  // at most one new mark per step
        prev = e.t;
      }
      CHECK(res.trace.events.back().t == *res.T);
    }
  }
  auto rule = ShuffleRule::cyclic(30);
  const auto capped = run_until_uniform_time(30, rule, 1, 30);
  CHECK_FALSE(capped.T);
  CHECK(capped.trace.steps == 30);
  auto r2 = ShuffleRule::cyclic(30);
  CHECK_THROWS_AS(run_until_uniform_time(30, r2, 1, 29), std::invalid_argument);
}

TEST_CASE("sigma at T is uniform (n = 5, star and cyclic) and given T = t (n = 4)") {
  for (auto kind : {RuleKind::Star, RuleKind::Cyclic}) {
    std::vector<std::uint64_t> counts(120, 0);
    for (std::uint64_t r = 0; r < 30000; ++r) {
      auto rule = ShuffleRule::make(kind, 5, 0);
      const auto res = run_until_uniform_time(5, rule, 12, 10000, r);
      REQUIRE(res.T);
      ++counts[perm_rank(res.final)];
    }
    CHECK(chi_squared_uniform_p_value(counts) > 1e-3);
  }
  std::map<std::uint64_t, std::vector<std::uint64_t>> by_t;
  for (std::uint64_t r = 0; r < 40000; ++r) {
    auto rule = ShuffleRule::cyclic(4);
    const auto res = run_until_uniform_time(4, rule, 13, 10000, r);
    auto& c = by_t[*res.T];
    c.resize(24);
    ++c[perm_rank(res.final)];
  }
  int tested = 0;
  for (const auto& [t, c] : by_t) {
    std::uint64_t total = 0;
    for (auto x : c) total += x;
    if (total < 500) continue;
    ++tested;
    CHECK(chi_squared_uniform_p_value(c) > 1e-4);
  }
  CHECK(tested >= 3);
}

TEST_CASE("epoch statistics") {
  const std::size_t n = 40;
  for (std::uint64_t r = 0; r < 200; ++r) {
    auto rule = ShuffleRule::cyclic(n);
    const auto res = run_until_uniform_time(n, rule, 3, 100000, r);
    const auto ep = epoch_stats(res.trace);
    REQUIRE(!ep.empty());
    CHECK(ep[0].u_k == doctest::Approx(1.0 - 1.0 / n));
    for (std::size_t k = 0; k < ep.size(); ++k) {
      CHECK(ep[k].k == k + 1);
      CHECK(ep[k].u_k + ep[k].m_k == doctest::Approx(1.0));
      CHECK(1.0 - ep[k].u_next >= ep[k].m_k + double(ep[k].d_k) / n - 1e-12);
      if (k + 1 < ep.size()) CHECK(ep[k + 1].u_k == ep[k].u_next);
      CHECK(ep[k].good == (ep[k].growth || ep[k].m_k >= 0.5));
    }
    CHECK(ep.back().u_next == 0.0);
  }
  MarkingTrace bad;
  bad.n = 4;
  bad.steps = 10;
  bad.events = {{5, 1, 0, false}, {3, 2, 1, false}};
  CHECK_THROWS_AS(epoch_stats(bad), std::invalid_argument);
  bad.events = {{3, 1, 0, false}, {5, 1, 0, false}};
  CHECK_THROWS_AS(epoch_stats(bad), std::invalid_argument);
}

TEST_CASE("theta constants") {
  const auto c = theta_constants();
  CHECK(c.theta == doctest::Approx(0.042776).epsilon(1e-5));
  CHECK(c.c0 == 32.0 / (c.theta * c.theta * c.theta) + 1.0 / c.theta);
  CHECK(c.theta < 0.5);
}

TEST_CASE("chi-squared p-value") {
  CHECK(chi_squared_uniform_p_value({100, 100, 100, 100}) == doctest::Approx(1.0));
  CHECK(chi_squared_uniform_p_value({400, 0, 0, 0}) < 1e-10);
}

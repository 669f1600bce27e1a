#include "shuffle/exact_tv.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

#include "shuffle/parallel.hpp"

namespace shuffle {

namespace {

void require_exact_deck(std::size_t n) {
  if (n < 1 || n > kMaxExactDeck) {
    throw std::invalid_argument("exact computation limited to 1 <= n <= 8 (got " + std::to_string(n) + ")");
  }
}

template <class Seq>
std::uint64_t rank_of(const Seq& values, std::size_t n) {
  std::uint64_t rank = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t smaller = 0;
    for (std::size_t k = i + 1; k < n; ++k) smaller += values[k] < values[i];
    rank = rank * (n - i) + smaller;
  }
  return rank;
}

constexpr std::size_t kBlock = 1024;

}  // namespace

std::uint64_t factorial(std::size_t n) {
  std::uint64_t out = 1;
  for (std::size_t k = 2; k <= n; ++k) out *= k;
  return out;
}

std::uint64_t perm_rank(const Permutation& perm) { return rank_of(perm.card_to_state(), perm.size()); }

Permutation perm_unrank(std::size_t n, std::uint64_t index) {
  if (n > 20 || index >= factorial(n)) throw std::out_of_range("permutation rank out of range");
  std::vector<State> pool(n);
  std::iota(pool.begin(), pool.end(), State{0});
  std::vector<State> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t block = factorial(n - 1 - i);
    const auto pick = static_cast<std::size_t>(index / block);
    index %= block;
    out.push_back(pool[pick]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  return Permutation::from_card_to_state(std::move(out));
}

ExactDistribution ExactDistribution::point_mass(const Permutation& perm) {
  require_exact_deck(perm.size());
  ExactDistribution mu;
  mu.n_ = perm.size();
  mu.probs_.assign(factorial(mu.n_), 0.0);
  mu.probs_[perm_rank(perm)] = 1.0;
  return mu;
}

ExactDistribution ExactDistribution::uniform(std::size_t n) {
  require_exact_deck(n);
  ExactDistribution mu;
  mu.n_ = n;
  const auto size = factorial(n);
  mu.probs_.assign(size, 1.0 / static_cast<double>(size));
  return mu;
}

ExactDistribution ExactDistribution::from_probs(std::size_t n, std::vector<double> probs) {
  require_exact_deck(n);
  if (probs.size() != factorial(n)) throw std::invalid_argument("distribution length must be n!");
  ExactDistribution mu;
  mu.n_ = n;
  mu.probs_ = std::move(probs);
  return mu;
}

double ExactDistribution::total() const { return std::accumulate(probs_.begin(), probs_.end(), 0.0); }

double ExactDistribution::min_entry() const {
  return probs_.empty() ? 0.0 : *std::min_element(probs_.begin(), probs_.end());
}

TranspositionTable::TranspositionTable(std::size_t n) : n_(n) {
  require_exact_deck(n);
  const auto count = factorial(n);
  table_.resize(count * n * n);
  std::vector<State> values(n);
  for (std::uint64_t rank = 0; rank < count; ++rank) {
    const auto base = perm_unrank(n, rank);
    for (State l = 0; l < n; ++l) {
      for (State r = 0; r < n; ++r) {
        std::copy(base.card_to_state().begin(), base.card_to_state().end(), values.begin());
        // Exchanging the cards at locations l and r swaps those two values.
        for (auto& v : values) {
          if (v == l) v = r;
          else if (v == r) v = l;
        }
        table_[(rank * n + l) * n + r] = static_cast<std::uint32_t>(rank_of(values, n));
      }
    }
  }
}

ExactDistribution step_kernel(const ExactDistribution& mu, State l, const TranspositionTable& table,
                              unsigned threads) {
  const std::size_t n = mu.deck_size();
  if (table.deck_size() != n) throw std::invalid_argument("table and distribution sizes differ");
  if (l >= n) throw std::invalid_argument("location out of range");
  const auto& src = mu.probs();
  std::vector<double> dst(src.size());
  const double w = 1.0 / static_cast<double>(n);
  const std::size_t blocks = (src.size() + kBlock - 1) / kBlock;
  parallel_for(blocks, threads, [&](std::size_t b) {
    const std::size_t end = std::min(src.size(), (b + 1) * kBlock);
    for (std::size_t d = b * kBlock; d < end; ++d) {
      double acc = 0.0;
      for (State r = 0; r < n; ++r) acc += src[table.image(d, l, r)];
      dst[d] = acc * w;
    }
  });
  return ExactDistribution::from_probs(n, std::move(dst));
}

ExactDistribution step_kernel(const ExactDistribution& mu, State l) {
  return step_kernel(mu, l, TranspositionTable(mu.deck_size()));
}

ExactDistribution step_kernel_uniform_location(const ExactDistribution& mu, const TranspositionTable& table,
                                               unsigned threads) {
  const std::size_t n = mu.deck_size();
  const auto& src = mu.probs();
  std::vector<double> dst(src.size());
  const double w = 1.0 / static_cast<double>(n * n);
  const std::size_t blocks = (src.size() + kBlock - 1) / kBlock;
  parallel_for(blocks, threads, [&](std::size_t b) {
    const std::size_t end = std::min(src.size(), (b + 1) * kBlock);
    for (std::size_t d = b * kBlock; d < end; ++d) {
      double acc = 0.0;
      for (State l = 0; l < n; ++l)
        for (State r = 0; r < n; ++r) acc += src[table.image(d, l, r)];
      dst[d] = acc * w;
    }
  });
  return ExactDistribution::from_probs(n, std::move(dst));
}

double tv_to_uniform(const ExactDistribution& mu) {
  const double u = 1.0 / static_cast<double>(mu.probs().size());
  double sum = 0.0;
  for (double p : mu.probs()) sum += std::abs(p - u);
  return std::clamp(0.5 * sum, 0.0, 1.0);
}

std::vector<double> card_location_marginal(const ExactDistribution& mu, Card card) {
  const std::size_t n = mu.deck_size();
  if (card >= n) throw std::invalid_argument("card out of range");
  std::vector<double> out(n, 0.0);
  for (std::uint64_t rank = 0; rank < mu.probs().size(); ++rank) {
    out[perm_unrank(n, rank).state_of(card)] += mu.probs()[rank];
  }
  return out;
}

double default_mixing_threshold() { return 1.0 / (2.0 * std::numbers::e); }

MixingResult exact_mixing_time(std::size_t n, ShuffleRule rule, double threshold, std::uint64_t horizon,
                               unsigned threads, const std::vector<std::uint64_t>& dump_times) {
  require_exact_deck(n);
  if (rule.size() != n) throw std::invalid_argument("rule and deck sizes differ");
  const bool annealed = rule.kind() == RuleKind::UniformIID;
  if (!rule.is_deterministic() && !annealed) {
    throw std::invalid_argument("exact evolution needs a deterministic rule or the iid uniform rule");
  }
  const TranspositionTable table(n);
  MixingResult result;
  result.threshold = threshold;
  auto mu = ExactDistribution::point_mass(Permutation(n));
  const auto record = [&](std::uint64_t t) {
    const double tv = tv_to_uniform(mu);
    result.tv_curve.emplace_back(t, tv);
    if (!result.tau_mix && tv <= threshold) result.tau_mix = t;
    if (std::find(dump_times.begin(), dump_times.end(), t) != dump_times.end()) result.snapshots.emplace_back(t, mu);
  };
  record(0);
  for (std::uint64_t t = 1; t <= horizon; ++t) {
    mu = annealed ? step_kernel_uniform_location(mu, table, threads) : step_kernel(mu, rule.location(t), table, threads);
    record(t);
  }
  return result;
}

}  // namespace shuffle

#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "shuffle/permutation.hpp"
#include "shuffle/rule.hpp"

namespace shuffle {

inline constexpr std::size_t kMaxExactDeck = 8;

std::uint64_t factorial(std::size_t n);

// Lexicographic rank of the card -> state array: the identity has rank 0 and
// the reversal (n-1, ..., 0) has rank n! - 1. This is the index order of
// ExactDistribution and of every (rank, prob) dump.
std::uint64_t perm_rank(const Permutation& perm);
Permutation perm_unrank(std::size_t n, std::uint64_t index);  // throws std::out_of_range

// Dense probability vector over S_n, n <= 8.
class ExactDistribution {
 public:
  ExactDistribution() = default;
  static ExactDistribution point_mass(const Permutation& perm);
  static ExactDistribution uniform(std::size_t n);
  static ExactDistribution from_probs(std::size_t n, std::vector<double> probs);

  std::size_t deck_size() const { return n_; }
  const std::vector<double>& probs() const { return probs_; }
  std::vector<double>& mutable_probs() { return probs_; }
  double total() const;
  double min_entry() const;

 private:
  std::size_t n_ = 0;
  std::vector<double> probs_;
};

// Precomputed rank images: image(rank, l, r) is the rank after exchanging the
// cards at locations l and r. Transpositions are involutions, so the same
// table serves as the gather source for the pushforward.
class TranspositionTable {
 public:
  explicit TranspositionTable(std::size_t n);
  std::size_t deck_size() const { return n_; }
  std::uint32_t image(std::uint64_t rank, State l, State r) const {
    return table_[(rank * n_ + l) * n_ + r];
  }

 private:
  std::size_t n_;
  std::vector<std::uint32_t> table_;
};

// Exact pushforward under one step with location l: mixture over r of the
// transposition (l, r), weight 1/n each. Parallel over destination blocks.
ExactDistribution step_kernel(const ExactDistribution& mu, State l, const TranspositionTable& table,
                              unsigned threads = 1);
ExactDistribution step_kernel(const ExactDistribution& mu, State l);

// Annealed step for iid uniform L_t: average of step_kernel over l.
ExactDistribution step_kernel_uniform_location(const ExactDistribution& mu, const TranspositionTable& table,
                                               unsigned threads = 1);

double tv_to_uniform(const ExactDistribution& mu);

// Law of the location of `card` under mu.
std::vector<double> card_location_marginal(const ExactDistribution& mu, Card card);

struct MixingResult {
  std::optional<std::uint64_t> tau_mix;  // empty when the horizon is reached first
  double threshold = 0;
  std::vector<std::pair<std::uint64_t, double>> tv_curve;  // t = 0..horizon
  // Distributions kept at the requested dump times.
  std::vector<std::pair<std::uint64_t, ExactDistribution>> snapshots;
};

double default_mixing_threshold();  // 1 / (2e)

// Evolves the exact law of sigma*_t from the identity for t = 0..horizon and
// reports the first t with TV <= threshold. TV to uniform does not depend on
// the starting permutation (right multiplication is a bijection of S_n), so
// this is also the maximum over starts. Deterministic rules and the annealed
// UniformIID rule are supported; other random rules throw.
MixingResult exact_mixing_time(std::size_t n, ShuffleRule rule, double threshold, std::uint64_t horizon,
                               unsigned threads = 1, const std::vector<std::uint64_t>& dump_times = {});

}  // namespace shuffle

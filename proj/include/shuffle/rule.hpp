#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "shuffle/permutation.hpp"
#include "shuffle/rng.hpp"

namespace shuffle {

enum class RuleKind { Cyclic, Star, UniformIID, QuenchedEpochPermutation, PakMemoryTwo, ExplicitSequence };

std::string_view to_string(RuleKind kind);
// Accepts the lowercase names used on the command line ("cyclic", "star",
// "uniform", "quenched", "pak", "explicit"). Throws std::invalid_argument.
RuleKind parse_rule_kind(std::string_view name);

// Generator of the location sequence L_1, L_2, ... . Steps are 1-based.
//
// Cyclic, Star and ExplicitSequence are stateless and may be queried at any t.
// The random kinds own their own stream (seeded from the rule seed) and must be
// queried in order t = 1, 2, ...; QuenchedEpochPermutation additionally keeps
// every epoch it has drawn, so earlier steps can be re-queried and the run can
// be replayed as an ExplicitSequence.
class ShuffleRule {
 public:
  static ShuffleRule cyclic(std::size_t n);
  static ShuffleRule star(std::size_t n);
  static ShuffleRule uniform_iid(std::size_t n, std::uint64_t seed);
  static ShuffleRule quenched_epochs(std::size_t n, std::uint64_t seed);
  static ShuffleRule pak_memory_two(std::size_t n, std::uint64_t seed);
  // The sequence repeats with period sequence.size().
  static ShuffleRule explicit_sequence(std::size_t n, std::vector<State> sequence);
  static ShuffleRule make(RuleKind kind, std::size_t n, std::uint64_t seed);

  RuleKind kind() const { return kind_; }
  std::size_t size() const { return n_; }
  bool is_deterministic() const;

  // L_t. Throws std::invalid_argument for t == 0 and std::logic_error when a
  // sequential kind is queried out of order.
  State location(std::uint64_t t);

  // Epoch permutations drawn so far (QuenchedEpochPermutation only).
  const std::vector<std::vector<State>>& epochs() const { return epochs_; }

  // Deterministic replay of everything emitted so far. Only meaningful for
  // QuenchedEpochPermutation (concatenated epochs) and deterministic kinds.
  ShuffleRule replay() const;

  // Restarts the sequence from t = 1 with the original seed.
  void reset();

 private:
  ShuffleRule(RuleKind kind, std::size_t n, std::uint64_t seed);

  void require_next(std::uint64_t t) const;

  RuleKind kind_;
  std::size_t n_;
  std::uint64_t seed_ = 0;
  Engine rng_;
  std::uint64_t next_t_ = 1;
  State prev_ = 0;   // L_{t-2} for PakMemoryTwo
  State last_ = 0;   // L_{t-1} for PakMemoryTwo
  std::vector<State> sequence_;
  std::vector<std::vector<State>> epochs_;
};

}  // namespace shuffle

#include "shuffle/rule.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace shuffle {

std::string_view to_string(RuleKind kind) {
  switch (kind) {
    case RuleKind::Cyclic: return "cyclic";
    case RuleKind::Star: return "star";
    case RuleKind::UniformIID: return "uniform";
    case RuleKind::QuenchedEpochPermutation: return "quenched";
    case RuleKind::PakMemoryTwo: return "pak";
    case RuleKind::ExplicitSequence: return "explicit";
  }
  return "unknown";
}

RuleKind parse_rule_kind(std::string_view name) {
  for (auto kind : {RuleKind::Cyclic, RuleKind::Star, RuleKind::UniformIID,
                    RuleKind::QuenchedEpochPermutation, RuleKind::PakMemoryTwo,
                    RuleKind::ExplicitSequence}) {
    if (to_string(kind) == name) return kind;
  }
  throw std::invalid_argument("unknown rule '" + std::string(name) +
                              "' (expected cyclic, star, uniform, quenched, pak, explicit)");
}

ShuffleRule::ShuffleRule(RuleKind kind, std::size_t n, std::uint64_t seed)
    : kind_(kind), n_(n), seed_(seed), rng_(make_stream(seed, StreamLabel::Rule)) {
  if (n == 0) throw std::invalid_argument("deck size must be positive");
}

ShuffleRule ShuffleRule::cyclic(std::size_t n) { return ShuffleRule(RuleKind::Cyclic, n, 0); }
ShuffleRule ShuffleRule::star(std::size_t n) { return ShuffleRule(RuleKind::Star, n, 0); }
ShuffleRule ShuffleRule::uniform_iid(std::size_t n, std::uint64_t seed) {
  return ShuffleRule(RuleKind::UniformIID, n, seed);
}
ShuffleRule ShuffleRule::quenched_epochs(std::size_t n, std::uint64_t seed) {
  return ShuffleRule(RuleKind::QuenchedEpochPermutation, n, seed);
}
ShuffleRule ShuffleRule::pak_memory_two(std::size_t n, std::uint64_t seed) {
  return ShuffleRule(RuleKind::PakMemoryTwo, n, seed);
}

ShuffleRule ShuffleRule::explicit_sequence(std::size_t n, std::vector<State> sequence) {
  if (sequence.empty()) throw std::invalid_argument("explicit sequence is empty");
  for (State s : sequence) {
    if (s >= n) throw std::invalid_argument("explicit sequence location out of range");
  }
  ShuffleRule rule(RuleKind::ExplicitSequence, n, 0);
  rule.sequence_ = std::move(sequence);
  return rule;
}

ShuffleRule ShuffleRule::make(RuleKind kind, std::size_t n, std::uint64_t seed) {
  switch (kind) {
    case RuleKind::Cyclic: return cyclic(n);
    case RuleKind::Star: return star(n);
    case RuleKind::UniformIID: return uniform_iid(n, seed);
    case RuleKind::QuenchedEpochPermutation: return quenched_epochs(n, seed);
    case RuleKind::PakMemoryTwo: return pak_memory_two(n, seed);
    case RuleKind::ExplicitSequence: break;
  }
  throw std::invalid_argument("explicit rules need a sequence; use explicit_sequence()");
}

bool ShuffleRule::is_deterministic() const {
  return kind_ == RuleKind::Cyclic || kind_ == RuleKind::Star || kind_ == RuleKind::ExplicitSequence;
}

void ShuffleRule::require_next(std::uint64_t t) const {
  if (t != next_t_) {
    throw std::logic_error("rule '" + std::string(to_string(kind_)) + "' queried at t=" +
                           std::to_string(t) + ", expected t=" + std::to_string(next_t_));
  }
}

State ShuffleRule::location(std::uint64_t t) {
  if (t == 0) throw std::invalid_argument("steps are 1-based");
  const auto n = static_cast<std::uint64_t>(n_);
  switch (kind_) {
    case RuleKind::Cyclic:
      return static_cast<State>(t % n);
    case RuleKind::Star:
      return 0;
    case RuleKind::ExplicitSequence:
      return sequence_[(t - 1) % sequence_.size()];
    case RuleKind::UniformIID: {
      require_next(t);
      ++next_t_;
      return uniform_below(rng_, static_cast<std::uint32_t>(n_));
    }
    case RuleKind::QuenchedEpochPermutation: {
      const std::uint64_t epoch = (t - 1) / n;
      if (epoch > epochs_.size()) require_next(t);
      if (epoch == epochs_.size()) {
        std::vector<State> block(n_);
        std::iota(block.begin(), block.end(), State{0});
        // Fisher-Yates with our own draws so the block is reproducible across
        // standard library implementations.
        for (std::size_t i = n_ - 1; i > 0; --i) {
          std::swap(block[i], block[uniform_below(rng_, static_cast<std::uint32_t>(i + 1))]);
        }
        epochs_.push_back(std::move(block));
      }
      next_t_ = std::max(next_t_, t + 1);
      return epochs_[epoch][(t - 1) % n];
    }
    case RuleKind::PakMemoryTwo: {
      require_next(t);
      ++next_t_;
      State out;
      if (t == 1) {
        out = 0;
      } else if (t == 2) {
        out = static_cast<State>(1 % n);
      } else if (uniform_below(rng_, static_cast<std::uint32_t>(n_)) != 0) {
        out = static_cast<State>((2 * static_cast<std::uint64_t>(last_) + n - prev_) % n);
      } else {
        out = prev_;
      }
      prev_ = last_;
      last_ = out;
      return out;
    }
  }
  return 0;
}

ShuffleRule ShuffleRule::replay() const {
  switch (kind_) {
    case RuleKind::QuenchedEpochPermutation: {
      if (epochs_.empty()) throw std::logic_error("no epochs drawn yet");
      std::vector<State> seq;
      seq.reserve(epochs_.size() * n_);
      for (const auto& e : epochs_) seq.insert(seq.end(), e.begin(), e.end());
      return explicit_sequence(n_, std::move(seq));
    }
    case RuleKind::Cyclic:
    case RuleKind::Star:
    case RuleKind::ExplicitSequence:
      return *this;
    default:
      throw std::logic_error("rule '" + std::string(to_string(kind_)) + "' keeps no replayable history");
  }
}

void ShuffleRule::reset() {
  rng_ = make_stream(seed_, StreamLabel::Rule);
  next_t_ = 1;
  prev_ = last_ = 0;
  epochs_.clear();
}

}  // namespace shuffle

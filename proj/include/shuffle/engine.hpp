#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "shuffle/permutation.hpp"
#include "shuffle/rng.hpp"
#include "shuffle/rule.hpp"

namespace shuffle {

struct StepRecord {
  std::uint64_t t;  // 1-based
  State l;
  State r;
};

struct CardStateRecord {
  std::uint64_t t;
  Card card;
  State state;
};

// Swaps the cards at locations l and r. Throws std::invalid_argument when
// either location is outside [0, n).
void transpose_step(Permutation& perm, State l, State r);

// Renewal-frame step: the card at state 0 is exchanged with the card at
// `partner`, then every card moves one state up (mod n). Each single card's
// state then evolves by the renewal matrix M.
void renewal_step(Permutation& perm, State partner);

// Renewal-frame deck with the rotation kept as a lazy offset, so a step costs
// O(1) instead of relabelling all n states.
class RenewalDeck {
 public:
  explicit RenewalDeck(std::size_t n) : slots_(n) {}

  std::size_t size() const { return slots_.size(); }
  State state_of(Card card) const { return wrap(slots_.state_of(card) + offset_); }
  Card card_at(State state) const { return slots_.card_at(wrap(state + size() - offset_)); }

  void step(State partner) {
    slots_.swap_states(wrap(size() - offset_), wrap(partner + size() - offset_));
    offset_ = wrap(offset_ + 1);
  }

  Permutation materialize() const;

 private:
  State wrap(std::size_t s) const { return static_cast<State>(s % size()); }

  Permutation slots_;
  std::size_t offset_ = 0;
};

// Raw <-> renewal conversion at time t for the cyclic rule L_t = t mod n.
// The card transposed at step t + 1 sits at location t + 1 and is in renewal
// state 0, and locations stay put while states move up, which pins
// location = (t + 1 - state) mod n. The map is its own inverse.
Permutation to_renewal_frame(const Permutation& raw, std::uint64_t t);
Permutation to_raw_frame(const Permutation& renewal, std::uint64_t t);

struct TraceOptions {
  bool record_steps = false;
  std::vector<Card> traced_cards;  // per-step (t, card, state) rows
};

struct Trajectory {
  Permutation final;
  std::vector<StepRecord> steps;
  std::vector<CardStateRecord> card_trace;
};

// Applies transpose_step(L_t, R_t) for t = 1..steps with R_t iid uniform drawn
// from `rng`.
Trajectory run_shuffle(Permutation start, ShuffleRule& rule, std::uint64_t steps, Engine& rng,
                       const TraceOptions& options = {});
// Same, with the R_t stream derived from `seed`.
Trajectory run_shuffle(Permutation start, ShuffleRule& rule, std::uint64_t steps, std::uint64_t seed,
                       const TraceOptions& options = {});

// Cyclic-to-random shuffle run directly in the renewal frame from the identity.
// When `state0_visits` is given, entry c counts the times s < steps at which
// card c occupied state 0.
Permutation run_renewal(std::size_t n, std::uint64_t steps, Engine& rng,
                        std::vector<std::uint64_t>* state0_visits = nullptr);

// Uniformly random permutation (Fisher-Yates on our own draws).
Permutation random_permutation(std::size_t n, Engine& rng);

void write_step_log_csv(std::ostream& out, const std::vector<StepRecord>& steps);
void write_card_trace_csv(std::ostream& out, const std::vector<CardStateRecord>& trace);

}  // namespace shuffle

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace shuffle {

using Card = std::uint32_t;
using State = std::uint32_t;

// A deck of n cards, stored card -> state (sigma(i) is the state of card i).
// The inverse state -> card view is kept in sync so that swapping the cards at
// two states is O(1).
class Permutation {
 public:
  Permutation() = default;
  explicit Permutation(std::size_t n);  // identity

  // Throws std::invalid_argument unless the array is a bijection on [0, n).
  static Permutation from_card_to_state(std::vector<State> card_to_state);

  std::size_t size() const { return card_to_state_.size(); }
  State state_of(Card card) const { return card_to_state_[card]; }
  Card card_at(State state) const { return state_to_card_[state]; }

  std::span<const State> card_to_state() const { return card_to_state_; }
  std::span<const Card> state_to_card() const { return state_to_card_; }

  // Exchanges the cards occupying states a and b. No bounds checking.
  void swap_states(State a, State b) {
    const Card ca = state_to_card_[a];
    const Card cb = state_to_card_[b];
    state_to_card_[a] = cb;
    state_to_card_[b] = ca;
    card_to_state_[ca] = b;
    card_to_state_[cb] = a;
  }

  // Relabels every state s as (offset + sign * s) mod n. sign must be +1 or -1.
  void relabel_states(std::int64_t offset, int sign);

  bool is_bijection() const;
  bool is_identity() const;

  friend bool operator==(const Permutation&, const Permutation&) = default;

 private:
  std::vector<State> card_to_state_;
  std::vector<Card> state_to_card_;
};

}  // namespace shuffle

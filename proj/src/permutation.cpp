#include "shuffle/permutation.hpp"

#include <numeric>
#include <stdexcept>
#include <string>

namespace shuffle {

Permutation::Permutation(std::size_t n) : card_to_state_(n), state_to_card_(n) {
  std::iota(card_to_state_.begin(), card_to_state_.end(), State{0});
  std::iota(state_to_card_.begin(), state_to_card_.end(), Card{0});
}

Permutation Permutation::from_card_to_state(std::vector<State> card_to_state) {
  const std::size_t n = card_to_state.size();
  std::vector<Card> inverse(n, static_cast<Card>(n));
  for (std::size_t card = 0; card < n; ++card) {
    const State s = card_to_state[card];
    if (s >= n) {
      throw std::invalid_argument("permutation entry " + std::to_string(s) + " out of range for n=" +
                                  std::to_string(n));
    }
    if (inverse[s] != n) {
      throw std::invalid_argument("state " + std::to_string(s) + " occupied twice");
    }
    inverse[s] = static_cast<Card>(card);
  }
  Permutation p;
  p.card_to_state_ = std::move(card_to_state);
  p.state_to_card_ = std::move(inverse);
  return p;
}

void Permutation::relabel_states(std::int64_t offset, int sign) {
  const auto n = static_cast<std::int64_t>(size());
  if (n == 0) return;
  std::int64_t base = offset % n;
  if (base < 0) base += n;
  for (std::size_t card = 0; card < card_to_state_.size(); ++card) {
    std::int64_t s = base + sign * static_cast<std::int64_t>(card_to_state_[card]);
    s %= n;
    if (s < 0) s += n;
    card_to_state_[card] = static_cast<State>(s);
    state_to_card_[static_cast<std::size_t>(s)] = static_cast<Card>(card);
  }
}

bool Permutation::is_bijection() const {
  const std::size_t n = size();
  if (state_to_card_.size() != n) return false;
  for (std::size_t card = 0; card < n; ++card) {
    const State s = card_to_state_[card];
    if (s >= n || state_to_card_[s] != card) return false;
  }
  return true;
}

bool Permutation::is_identity() const {
  for (std::size_t card = 0; card < size(); ++card) {
    if (card_to_state_[card] != card) return false;
  }
  return true;
}

}  // namespace shuffle

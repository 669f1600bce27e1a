#include "shuffle/engine.hpp"

#include <ostream>
#include <stdexcept>
#include <string>

namespace shuffle {

void transpose_step(Permutation& perm, State l, State r) {
  const std::size_t n = perm.size();
  if (l >= n || r >= n) {
    throw std::invalid_argument("transposition (" + std::to_string(l) + ", " + std::to_string(r) +
                                ") out of range for n=" + std::to_string(n));
  }
  perm.swap_states(l, r);
}

void renewal_step(Permutation& perm, State partner) {
  if (partner >= perm.size()) throw std::invalid_argument("renewal partner out of range");
  perm.swap_states(0, partner);
  perm.relabel_states(1, +1);
}

Permutation RenewalDeck::materialize() const {
  Permutation out = slots_;
  out.relabel_states(static_cast<std::int64_t>(offset_), +1);
  return out;
}

Permutation to_renewal_frame(const Permutation& raw, std::uint64_t t) {
  Permutation out = raw;
  const auto n = static_cast<std::uint64_t>(raw.size());
  out.relabel_states(static_cast<std::int64_t>((t + 1) % n), -1);
  return out;
}

Permutation to_raw_frame(const Permutation& renewal, std::uint64_t t) {
  return to_renewal_frame(renewal, t);
}

Trajectory run_shuffle(Permutation start, ShuffleRule& rule, std::uint64_t steps, Engine& rng,
                       const TraceOptions& options) {
  if (start.size() != rule.size()) throw std::invalid_argument("rule and deck sizes differ");
  const auto n = static_cast<std::uint32_t>(start.size());
  Trajectory traj{std::move(start), {}, {}};
  if (options.record_steps) traj.steps.reserve(steps);
  for (Card c : options.traced_cards) {
    if (c >= n) throw std::invalid_argument("traced card out of range");
    traj.card_trace.push_back({0, c, traj.final.state_of(c)});
  }
  for (std::uint64_t t = 1; t <= steps; ++t) {
    const State l = rule.location(t);
    const State r = uniform_below(rng, n);
    transpose_step(traj.final, l, r);
    if (options.record_steps) traj.steps.push_back({t, l, r});
    for (Card c : options.traced_cards) traj.card_trace.push_back({t, c, traj.final.state_of(c)});
  }
  return traj;
}

Trajectory run_shuffle(Permutation start, ShuffleRule& rule, std::uint64_t steps, std::uint64_t seed,
                       const TraceOptions& options) {
  Engine rng = make_stream(seed, StreamLabel::ShuffleR);
  return run_shuffle(std::move(start), rule, steps, rng, options);
}

Permutation run_renewal(std::size_t n, std::uint64_t steps, Engine& rng,
                        std::vector<std::uint64_t>* state0_visits) {
  RenewalDeck deck(n);
  if (state0_visits) state0_visits->assign(n, 0);
  const auto bound = static_cast<std::uint32_t>(n);
  for (std::uint64_t s = 0; s < steps; ++s) {
    if (state0_visits) ++(*state0_visits)[deck.card_at(0)];
    deck.step(uniform_below(rng, bound));
  }
  return deck.materialize();
}

Permutation random_permutation(std::size_t n, Engine& rng) {
  Permutation perm(n);
  for (std::size_t i = n; i > 1; --i) {
    perm.swap_states(static_cast<State>(i - 1), uniform_below(rng, static_cast<std::uint32_t>(i)));
  }
  return perm;
}

void write_step_log_csv(std::ostream& out, const std::vector<StepRecord>& steps) {
  out << "t,L_t,R_t\n";
  for (const auto& s : steps) out << s.t << ',' << s.l << ',' << s.r << '\n';
}

void write_card_trace_csv(std::ostream& out, const std::vector<CardStateRecord>& trace) {
  out << "t,card,state\n";
  for (const auto& row : trace) out << row.t << ',' << row.card << ',' << row.state << '\n';
}

}  // namespace shuffle

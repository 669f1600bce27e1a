#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <vector>

#include <boost/rational.hpp>

#include "shuffle/engine.hpp"
#include "shuffle/rng.hpp"
#include "shuffle/spectral.hpp"
#include "shuffle/statistic.hpp"

namespace shuffle {

using Rational = boost::rational<std::int64_t>;

// States of the two tracked cards one step ahead.
struct PairOutcome {
  State first;
  State second;
  friend bool operator==(const PairOutcome&, const PairOutcome&) = default;
};

template <class P>
struct PairAtom {
  PairOutcome pair;
  P probability;
};

template <class P>
struct JointAtom {
  PairOutcome sigma;  // (sigma_{s+1}(i), sigma_{s+1}(j))
  PairOutcome eta;    // (eta_{s+1}(i), etatilde_{s+1}(j))
  P probability;
};

namespace coupling_detail {

template <class P>
void accumulate(std::vector<PairAtom<P>>& law, PairOutcome pair, P p) {
  for (auto& atom : law) {
    if (atom.pair == pair) {
      atom.probability += p;
      return;
    }
  }
  law.push_back({pair, p});
}

template <class P>
P unit(std::size_t n) {
  return P(1) / P(static_cast<std::int64_t>(n));
}

}  // namespace coupling_detail

// Law of (sigma_{s+1}(i), sigma_{s+1}(j)) given sigma_s(i) = a, sigma_s(j) = b,
// a != b, under one renewal-frame step. Atoms with equal outcomes are merged.
template <class P>
std::vector<PairAtom<P>> sigma_pair_law(std::size_t n, State a, State b) {
  using coupling_detail::accumulate;
  const P inv = coupling_detail::unit<P>(n);
  const auto up = [n](State s) { return static_cast<State>((s + 1) % n); };
  std::vector<PairAtom<P>> law;
  if (a == 0 || b == 0) {
    // One tracked card is at state 0 and lands one above a uniform partner.
    const bool first_at_zero = (a == 0);
    const State other = first_at_zero ? b : a;
    for (State u = 0; u < n; ++u) {
      const State mover = up(u);
      const State rest = (u == other) ? State{1} : up(other);
      accumulate(law, first_at_zero ? PairOutcome{mover, rest} : PairOutcome{rest, mover}, inv);
    }
  } else {
    accumulate(law, {up(a), up(b)}, P(static_cast<std::int64_t>(n - 2)) * inv);
    accumulate(law, {State{1}, up(b)}, inv);
    accumulate(law, {up(a), State{1}}, inv);
  }
  return law;
}

// Row of M as (column, probability) in the chosen probability type.
template <class P>
std::vector<std::pair<State, P>> renewal_row_exact(std::size_t n, State s) {
  const P inv = coupling_detail::unit<P>(n);
  std::vector<std::pair<State, P>> row;
  if (s == 0) {
    for (State c = 0; c < n; ++c) row.emplace_back(c, inv);
    return row;
  }
  const State next = static_cast<State>((s + 1) % n);
  if (next == 1) {
    row.emplace_back(State{1}, P(1));
  } else {
    row.emplace_back(State{1}, inv);
    row.emplace_back(next, P(1) - inv);
  }
  return row;
}

// Law of (eta_{s+1}(i), etatilde_{s+1}(j)): product of two independent M rows.
template <class P>
std::vector<PairAtom<P>> eta_pair_law(std::size_t n, State a, State b) {
  std::vector<PairAtom<P>> law;
  for (const auto& [x, px] : renewal_row_exact<P>(n, a)) {
    for (const auto& [y, py] : renewal_row_exact<P>(n, b)) coupling_detail::accumulate(law, {x, y}, px * py);
  }
  return law;
}

// Joint one-step law used while glued: the maximal coupling of the sigma-pair
// law and the eta-pair law. Matching outcomes are paired with mass
// min(p_sigma, p_eta); the leftover masses are paired independently.
template <class P>
std::vector<JointAtom<P>> glued_joint_law(std::size_t n, State a, State b) {
  const auto sig = sigma_pair_law<P>(n, a, b);
  const auto eta = eta_pair_law<P>(n, a, b);
  std::vector<JointAtom<P>> joint;
  std::vector<P> sig_left, eta_left;
  P overlap(0);
  for (const auto& s : sig) {
    P left = s.probability;
    for (const auto& e : eta) {
      if (e.pair == s.pair) {
        const P common = std::min(s.probability, e.probability);
        joint.push_back({s.pair, e.pair, common});
        overlap += common;
        left -= common;
      }
    }
    sig_left.push_back(left);
  }
  for (const auto& e : eta) {
    P left = e.probability;
    for (const auto& s : sig) {
      if (s.pair == e.pair) left -= std::min(s.probability, e.probability);
    }
    eta_left.push_back(left);
  }
  const P residual = P(1) - overlap;
  if (residual > P(0)) {
    for (std::size_t x = 0; x < sig.size(); ++x) {
      if (!(sig_left[x] > P(0))) continue;
      for (std::size_t y = 0; y < eta.size(); ++y) {
        if (!(eta_left[y] > P(0))) continue;
        joint.push_back({sig[x].pair, eta[y].pair, sig_left[x] * eta_left[y] / residual});
      }
    }
  }
  return joint;
}

// Probability of staying glued: total mass on atoms with sigma == eta.
template <class P>
P glued_stay_probability(const std::vector<JointAtom<P>>& joint) {
  P stay(0);
  for (const auto& atom : joint) {
    if (atom.sigma == atom.eta) stay += atom.probability;
  }
  return stay;
}

// Partner states u for which a renewal step from (a, b) yields `pair`.
std::vector<State> partners_for(std::size_t n, State a, State b, PairOutcome pair);

// ---------------------------------------------------------------------------

struct CoupledState {
  explicit CoupledState(std::size_t n, Card i, Card j);

  std::size_t n;
  RenewalDeck sigma;  // true shuffle, renewal frame
  Card i;
  Card j;
  State eta_i;       // card i in copy eta
  State etatilde_j;  // card j in copy etatilde
  bool glued = true;
  std::uint64_t s = 0;

  bool agrees() const { return sigma.state_of(i) == eta_i && sigma.state_of(j) == etatilde_j; }
};

// One step of the coupled process. While glued, (sigma pair, eta pair) is
// drawn from glued_joint_law by inverse CDF and sigma's partner is then drawn
// uniformly among the consistent ones; once unglued, sigma and the two copies
// move independently. Throws std::logic_error on an inconsistent state.
void coupled_step(CoupledState& state, Engine& rng);

struct PairStats {
  Card i = 0;
  Card j = 0;
  std::uint64_t t = 0;
  double n_ij = 0;  // # of s < t with card i or j at state 0
  std::optional<std::uint64_t> unglue_time;
  State sigma_i = 0, sigma_j = 0, eta_i = 0, etatilde_j = 0;  // states at time t
  Complex product_sample;  // f(sigma_t(i)) conj f(sigma_t(j)), when f is given
};

// Runs coupled_step t times from the identity. Stream (seed, Coupling, replica).
PairStats run_coupling(std::size_t n, Card i, Card j, std::uint64_t t, std::uint64_t seed,
                       const Eigenfunction* f = nullptr, std::uint64_t replica = 0);

struct PairCorrelationReport {
  std::size_t replicas = 0;
  Complex product_mean;       // E f(sigma_t(i)) conj f(sigma_t(j))
  double product_std_error = 0;
  double mean_n_ij = 0;
  double correlation_bound = 0;  // (|lambda|^{2t} + (4t + 4 n N_ij) / n^2) ||f||_inf^2
  bool correlation_holds = false;

  Complex control_product;    // E f(eta_t(i)) * E conj f(etatilde_t(j))
  Complex control_expected;   // |lambda|^{2t} f(i) conj f(j)
  double control_std_error = 0;
  bool control_holds = false;

  double unglue_probability = 0;
  double unglue_std_error = 0;
  double unglue_bound = 0;  // (2/n) N_ij + 2t/n^2
  bool unglue_holds = false;

  std::vector<PairStats> runs;
};

// Requires replicas >= 10^4 (override with min_replicas for tests).
PairCorrelationReport pair_correlation_check(std::size_t n, Card i, Card j, std::uint64_t t,
                                             std::size_t replicas, std::uint64_t seed,
                                             const TestStatistic& stat, unsigned threads = 1,
                                             std::size_t min_replicas = 10000);

}  // namespace shuffle

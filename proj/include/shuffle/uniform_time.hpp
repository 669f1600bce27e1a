#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "shuffle/permutation.hpp"
#include "shuffle/rng.hpp"
#include "shuffle/rule.hpp"

namespace shuffle {

// Card-marking process in the raw frame (state = location).
struct MarkingState {
  explicit MarkingState(std::size_t n) : perm(n), marked(n, 0), mark_time(n, kNever) {}

  static constexpr std::uint64_t kNever = ~std::uint64_t{0};

  Permutation perm;
  std::vector<std::uint8_t> marked;  // by card; never cleared
  std::vector<std::uint64_t> mark_time;
  std::size_t marked_count = 0;
  std::uint64_t t = 0;  // last completed step
};

struct MarkEvent {
  std::uint64_t t;
  Card card;
  Card partner;       // card found at R_t (the card itself when R_t = L_t)
  bool self_marked;   // R_t = L_t
};

// Marks the card initially at `first_location` (time 0).
void mark_initial(MarkingState& state, State first_location);

// Step t = state.t + 1 with locations (l, r). On the pre-swap configuration the
// card at l is marked if it is unmarked and either the card at r is marked or
// r == l; then the cards at l and r are exchanged. Throws std::invalid_argument
// for locations outside [0, n).
std::optional<MarkEvent> marking_step(MarkingState& state, State l, State r);

struct MarkingTrace {
  std::size_t n = 0;
  std::vector<MarkEvent> events;  // in time order; the initial mark is not listed
  Card initial_card = 0;
  std::uint64_t steps = 0;         // steps simulated
  std::optional<std::uint64_t> uniform_time;
};

struct UniformTimeResult {
  std::optional<std::uint64_t> T;  // empty: cap reached before all cards were marked
  Permutation final;
  MarkingTrace trace;
};

// Runs the marking process until every card is marked or `cap` steps have
// passed (cap >= n). R_t comes from stream (seed, Marking, replica).
UniformTimeResult run_until_uniform_time(std::size_t n, ShuffleRule& rule, std::uint64_t seed, std::uint64_t cap,
                                         std::uint64_t replica = 0);

struct ThetaConstants {
  double theta;  // e^-2 (1 - e^-1) / 2
  double c0;     // 32 theta^-3 + theta^-1
};
ThetaConstants theta_constants();

// Epoch k (1-based) covers steps (k-1) 2n + 1 .. k 2n, counted from the
// initial mark.
struct EpochStats {
  std::uint64_t k = 0;
  double u_k = 0;     // unmarked fraction before epoch k
  double m_k = 0;     // 1 - u_k
  double u_next = 0;  // unmarked fraction after epoch k
  std::uint64_t d_k = 0;  // marks in epoch k by transposition with a pre-epoch-marked card
  bool growth = false;    // m_{k+1} >= (1 + theta/2) m_k
  bool good = false;      // growth or m_k >= 1/2
};

// Epochs up to and including the one containing T (or the last simulated
// step). Throws std::invalid_argument on a malformed trace.
std::vector<EpochStats> epoch_stats(const MarkingTrace& trace);

struct ContractionBin {
  std::uint64_t k = 0;
  double m_center = 0;
  std::size_t count = 0;
  double mean_u_next = 0;
  double mean_bound = 0;  // mean of u_k (1 - 2 theta m_k)
  double std_error = 0;   // of the paired difference
  bool holds = false;
};

// Mean of u_{k+1} against u_k (1 - 2 theta m_k), binned on (k, m_k rounded to
// `m_width`). Bins with fewer than `min_count` epochs are skipped.
std::vector<ContractionBin> contraction_bins(const std::vector<std::vector<EpochStats>>& runs,
                                             double m_width = 0.05, std::size_t min_count = 30);

struct StrongEpochCheck {
  std::size_t epochs = 0;  // epochs with m_k < 1/2
  double frequency = 0;    // of D_k >= theta n m_k / 2
  double std_error = 0;
  double threshold = 0;    // theta^2 / 8
  bool holds = false;
};
StrongEpochCheck strong_epoch_check(const std::vector<std::vector<EpochStats>>& runs, std::size_t n);

// Pearson chi-squared p-value of `counts` against the uniform law on its cells.
double chi_squared_uniform_p_value(const std::vector<std::uint64_t>& counts);

}  // namespace shuffle

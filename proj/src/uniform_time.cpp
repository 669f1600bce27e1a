#include "shuffle/uniform_time.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

#include <boost/math/distributions/chi_squared.hpp>

namespace shuffle {

void mark_initial(MarkingState& state, State first_location) {
  if (first_location >= state.perm.size()) throw std::invalid_argument("initial location out of range");
  const Card c = state.perm.card_at(first_location);
  if (!state.marked[c]) {
    state.marked[c] = 1;
    state.mark_time[c] = state.t;
    ++state.marked_count;
  }
}

std::optional<MarkEvent> marking_step(MarkingState& state, State l, State r) {
  const std::size_t n = state.perm.size();
  if (l >= n || r >= n) throw std::invalid_argument("marking step location out of range");
  ++state.t;
  std::optional<MarkEvent> event;
  const Card at_l = state.perm.card_at(l);
  const Card at_r = state.perm.card_at(r);
  if (!state.marked[at_l] && (state.marked[at_r] || r == l)) {
    state.marked[at_l] = 1;
    state.mark_time[at_l] = state.t;
    ++state.marked_count;
    event = MarkEvent{state.t, at_l, at_r, r == l};
  }
  state.perm.swap_states(l, r);
  return event;
}

UniformTimeResult run_until_uniform_time(std::size_t n, ShuffleRule& rule, std::uint64_t seed, std::uint64_t cap,
                                         std::uint64_t replica) {
  if (rule.size() != n) throw std::invalid_argument("rule and deck sizes differ");
  if (cap < n) throw std::invalid_argument("cap must be at least n");
  Engine rng = make_stream(seed, StreamLabel::Marking, replica);
  MarkingState state(n);
  UniformTimeResult result;
  result.trace.n = n;

  const auto bound = static_cast<std::uint32_t>(n);
  State l = rule.location(1);
  mark_initial(state, l);
  result.trace.initial_card = state.perm.card_at(l);
  for (std::uint64_t t = 1; t <= cap; ++t) {
    if (t > 1) l = rule.location(t);
    if (auto ev = marking_step(state, l, uniform_below(rng, bound))) result.trace.events.push_back(*ev);
    if (state.marked_count == n) {
      result.T = t;
      break;
    }
  }
  result.trace.steps = state.t;
  result.trace.uniform_time = result.T;
  result.final = std::move(state.perm);
  return result;
}

ThetaConstants theta_constants() {
  const double theta = std::exp(-2.0) * (1.0 - std::exp(-1.0)) / 2.0;
  return {theta, 32.0 / (theta * theta * theta) + 1.0 / theta};
}

std::vector<EpochStats> epoch_stats(const MarkingTrace& trace) {
  const std::size_t n = trace.n;
  if (n == 0) throw std::invalid_argument("empty trace");
  if (trace.events.size() + 1 > n) throw std::invalid_argument("trace marks more cards than the deck holds");
  const std::uint64_t epoch_len = 2 * n;
  const double nd = static_cast<double>(n);
  const double theta = theta_constants().theta;

  std::vector<std::uint64_t> mark_time(n, MarkingState::kNever);
  mark_time[trace.initial_card] = 0;
  std::uint64_t prev_t = 0;
  for (const auto& ev : trace.events) {
    if (ev.t < prev_t || ev.t > trace.steps || ev.card >= n || ev.partner >= n) {
      throw std::invalid_argument("malformed marking trace");
    }
    if (mark_time[ev.card] != MarkingState::kNever) throw std::invalid_argument("card marked twice in trace");
    mark_time[ev.card] = ev.t;
    prev_t = ev.t;
  }

  const std::uint64_t last = trace.uniform_time.value_or(trace.steps);
  const std::uint64_t epochs = std::max<std::uint64_t>(1, (last + epoch_len - 1) / epoch_len);
  std::vector<EpochStats> out;
  out.reserve(epochs);
  std::size_t cursor = 0;
  std::size_t marked = 1;  // initial mark
  for (std::uint64_t k = 1; k <= epochs; ++k) {
    const std::uint64_t start = (k - 1) * epoch_len;  // marks at times <= start precede the epoch
    const std::uint64_t end = k * epoch_len;
    EpochStats e;
    e.k = k;
    e.u_k = 1.0 - static_cast<double>(marked) / nd;
    e.m_k = 1.0 - e.u_k;
    for (; cursor < trace.events.size() && trace.events[cursor].t <= end; ++cursor) {
      const auto& ev = trace.events[cursor];
      ++marked;
      if (!ev.self_marked && mark_time[ev.partner] <= start) ++e.d_k;
    }
    e.u_next = 1.0 - static_cast<double>(marked) / nd;
    const double m_next = 1.0 - e.u_next;
    e.growth = m_next >= (1.0 + theta / 2.0) * e.m_k;
    e.good = e.growth || e.m_k >= 0.5;
    out.push_back(e);
  }
  return out;
}

std::vector<ContractionBin> contraction_bins(const std::vector<std::vector<EpochStats>>& runs,
                                             double m_width, std::size_t min_count) {
  const double theta = theta_constants().theta;
  struct Acc {
    std::size_t count = 0;
    double sum_next = 0, sum_bound = 0, sum_diff = 0, sum_diff_sq = 0;
  };
  std::map<std::pair<std::uint64_t, long>, Acc> bins;
  for (const auto& run : runs) {
    for (const auto& e : run) {
      const double bound = e.u_k * (1.0 - 2.0 * theta * e.m_k);
      auto& acc = bins[{e.k, std::lround(e.m_k / m_width)}];
      ++acc.count;
      acc.sum_next += e.u_next;
      acc.sum_bound += bound;
      const double d = e.u_next - bound;
      acc.sum_diff += d;
      acc.sum_diff_sq += d * d;
    }
  }
  std::vector<ContractionBin> out;
  for (const auto& [key, acc] : bins) {
    if (acc.count < min_count) continue;
    const double c = static_cast<double>(acc.count);
    ContractionBin b;
    b.k = key.first;
    b.m_center = static_cast<double>(key.second) * m_width;
    b.count = acc.count;
    b.mean_u_next = acc.sum_next / c;
    b.mean_bound = acc.sum_bound / c;
    const double mean_diff = acc.sum_diff / c;
    const double var = std::max(0.0, (acc.sum_diff_sq / c - mean_diff * mean_diff) * c / std::max(1.0, c - 1.0));
    b.std_error = std::sqrt(var / c);
    b.holds = mean_diff <= 4.0 * b.std_error;
    out.push_back(b);
  }
  return out;
}

StrongEpochCheck strong_epoch_check(const std::vector<std::vector<EpochStats>>& runs, std::size_t n) {
  const double theta = theta_constants().theta;
  StrongEpochCheck check;
  check.threshold = theta * theta / 8.0;
  std::size_t hits = 0;
  for (const auto& run : runs) {
    for (const auto& e : run) {
      if (e.m_k >= 0.5) continue;
      ++check.epochs;
      if (static_cast<double>(e.d_k) >= theta * static_cast<double>(n) * e.m_k / 2.0) ++hits;
    }
  }
  if (check.epochs == 0) return check;
  const double c = static_cast<double>(check.epochs);
  check.frequency = static_cast<double>(hits) / c;
  check.std_error = std::sqrt(check.frequency * (1.0 - check.frequency) / c);
  check.holds = check.frequency >= check.threshold - 4.0 * check.std_error;
  return check;
}

double chi_squared_uniform_p_value(const std::vector<std::uint64_t>& counts) {
  if (counts.size() < 2) throw std::invalid_argument("need at least two cells");
  double total = 0.0;
  for (auto c : counts) total += static_cast<double>(c);
  if (total <= 0.0) throw std::invalid_argument("no observations");
  const double expected = total / static_cast<double>(counts.size());
  double stat = 0.0;
  for (auto c : counts) {
    const double d = static_cast<double>(c) - expected;
    stat += d * d / expected;
  }
  const boost::math::chi_squared dist(static_cast<double>(counts.size() - 1));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

}  // namespace shuffle

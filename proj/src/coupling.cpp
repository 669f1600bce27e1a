#include "shuffle/coupling.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "shuffle/parallel.hpp"

namespace shuffle {

namespace {

PairOutcome pair_after(std::size_t n, State a, State b, State u) {
  const auto up = [n](State s) { return static_cast<State>((s + 1) % n); };
  // Renewal step: the cards at 0 and u trade states, then everything moves up.
  const auto move = [&](State s) { return s == 0 ? up(u) : (s == u ? up(0) : up(s)); };
  return {move(a), move(b)};
}

State sample_renewal_row(std::size_t n, State s, Engine& rng) {
  const auto bound = static_cast<std::uint32_t>(n);
  if (s == 0) return uniform_below(rng, bound);
  return uniform_below(rng, bound) == 0 ? State{1} : static_cast<State>((s + 1) % n);
}

// Glued laws depend only on (n, a, b), and the same pairs come back in every
// run, so each worker keeps the ones it has built.
const std::vector<JointAtom<double>>& cached_joint_law(std::size_t n, State a, State b) {
  struct Cache {
    std::size_t n = 0;
    std::unordered_map<std::uint64_t, std::vector<JointAtom<double>>> laws;
  };
  thread_local Cache cache;
  if (cache.n != n || cache.laws.size() > (1u << 16)) {
    cache.laws.clear();
    cache.n = n;
  }
  const std::uint64_t key = (static_cast<std::uint64_t>(a) << 32) | b;
  auto it = cache.laws.find(key);
  if (it == cache.laws.end()) it = cache.laws.emplace(key, glued_joint_law<double>(n, a, b)).first;
  return it->second;
}

}  // namespace

std::vector<State> partners_for(std::size_t n, State a, State b, PairOutcome pair) {
  std::vector<State> out;
  for (State u = 0; u < n; ++u) {
    if (pair_after(n, a, b, u) == pair) out.push_back(u);
  }
  return out;
}

CoupledState::CoupledState(std::size_t deck, Card ci, Card cj)
    : n(deck), sigma(deck), i(ci), j(cj), eta_i(ci), etatilde_j(cj) {
  if (ci == cj) throw std::invalid_argument("coupling needs two distinct cards");
  if (ci >= deck || cj >= deck) throw std::invalid_argument("tracked card out of range");
}

void coupled_step(CoupledState& state, Engine& rng) {
  const std::size_t n = state.n;
  const auto bound = static_cast<std::uint32_t>(n);
  if (state.glued && !state.agrees()) throw std::logic_error("coupled state marked glued but disagrees");

  if (!state.glued) {
    state.sigma.step(uniform_below(rng, bound));
    state.eta_i = sample_renewal_row(n, state.eta_i, rng);
    state.etatilde_j = sample_renewal_row(n, state.etatilde_j, rng);
    ++state.s;
    return;
  }

  const State a = state.sigma.state_of(state.i);
  const State b = state.sigma.state_of(state.j);
  const auto& joint = cached_joint_law(n, a, b);
  const double draw = uniform01(rng);
  double cumulative = 0.0;
  const JointAtom<double>* chosen = &joint.back();
  for (const auto& atom : joint) {
    cumulative += atom.probability;
    if (draw < cumulative) {
      chosen = &atom;
      break;
    }
  }

  // Partner for sigma, uniform among those producing the chosen pair.
  State partner;
  if (a != 0 && b != 0 && chosen->sigma == PairOutcome{static_cast<State>((a + 1) % n),
                                                        static_cast<State>((b + 1) % n)}) {
    // Every u except a and b, including the self-swap u = 0.
    State k = uniform_below(rng, bound - 2);
    const State lo = std::min(a, b), hi = std::max(a, b);
    if (k >= lo) ++k;
    if (k >= hi) ++k;
    partner = k;
  } else {
    const auto options = partners_for(n, a, b, chosen->sigma);
    if (options.empty()) throw std::logic_error("no partner realises the sampled sigma pair");
    partner = options.size() == 1 ? options.front()
                                  : options[uniform_below(rng, static_cast<std::uint32_t>(options.size()))];
  }
  state.sigma.step(partner);
  state.eta_i = chosen->eta.first;
  state.etatilde_j = chosen->eta.second;
  state.glued = state.agrees();
  ++state.s;
}

PairStats run_coupling(std::size_t n, Card i, Card j, std::uint64_t t, std::uint64_t seed,
                       const Eigenfunction* f, std::uint64_t replica) {
  CoupledState state(n, i, j);
  Engine rng = make_stream(seed, StreamLabel::Coupling, replica);
  PairStats stats;
  stats.i = i;
  stats.j = j;
  stats.t = t;
  for (std::uint64_t s = 0; s < t; ++s) {
    const Card at_zero = state.sigma.card_at(0);
    if (at_zero == i || at_zero == j) stats.n_ij += 1.0;
    const bool was_glued = state.glued;
    coupled_step(state, rng);
    if (was_glued && !state.glued) stats.unglue_time = state.s;
  }
  stats.sigma_i = state.sigma.state_of(i);
  stats.sigma_j = state.sigma.state_of(j);
  stats.eta_i = state.eta_i;
  stats.etatilde_j = state.etatilde_j;
  if (f) stats.product_sample = f->values[stats.sigma_i] * std::conj(f->values[stats.sigma_j]);
  return stats;
}

PairCorrelationReport pair_correlation_check(std::size_t n, Card i, Card j, std::uint64_t t,
                                             std::size_t replicas, std::uint64_t seed,
                                             const TestStatistic& stat, unsigned threads,
                                             std::size_t min_replicas) {
  if (replicas < min_replicas) {
    throw std::invalid_argument("pair correlation check needs at least " + std::to_string(min_replicas) +
                                " replicas");
  }
  const auto& f = stat.eigenfunction();
  if (f.n != n) throw std::invalid_argument("statistic size differs from deck size");

  PairCorrelationReport report;
  report.replicas = replicas;
  report.runs.resize(replicas);
  parallel_for(replicas, threads, [&](std::size_t r) { report.runs[r] = run_coupling(n, i, j, t, seed, &f, r); });

  const double count = static_cast<double>(replicas);
  std::vector<Complex> products, eta_values, etatilde_values;
  products.reserve(replicas);
  eta_values.reserve(replicas);
  etatilde_values.reserve(replicas);
  double unglued = 0.0;
  for (const auto& run : report.runs) {
    products.push_back(run.product_sample);
    eta_values.push_back(f.values[run.eta_i]);
    etatilde_values.push_back(std::conj(f.values[run.etatilde_j]));
    report.mean_n_ij += run.n_ij;
    if (run.unglue_time) unglued += 1.0;
  }
  report.mean_n_ij /= count;

  const auto prod = summarize(products);
  report.product_mean = prod.mean;
  report.product_std_error = prod.std_error;
  const double nd = static_cast<double>(n);
  const double decay = lambda_power_sq(f.lambda, t);
  report.correlation_bound =
      (decay + (4.0 * static_cast<double>(t) + 4.0 * nd * report.mean_n_ij) / (nd * nd)) * f.norm_inf * f.norm_inf;
  report.correlation_holds = std::abs(prod.mean) <= report.correlation_bound + 4.0 * prod.std_error;

  const auto e1 = summarize(eta_values);
  const auto e2 = summarize(etatilde_values);
  report.control_product = e1.mean * e2.mean;
  report.control_expected = decay * f.values[i] * std::conj(f.values[j]);
  report.control_std_error = std::abs(e1.mean) * e2.std_error + std::abs(e2.mean) * e1.std_error +
                             e1.std_error * e2.std_error;
  report.control_holds =
      std::abs(report.control_product - report.control_expected) <= 4.0 * report.control_std_error;

  report.unglue_probability = unglued / count;
  report.unglue_std_error =
      std::sqrt(std::max(report.unglue_probability * (1.0 - report.unglue_probability), 1.0 / count) / count);
  report.unglue_bound = 2.0 / nd * report.mean_n_ij + 2.0 * static_cast<double>(t) / (nd * nd);
  report.unglue_holds = report.unglue_probability <= report.unglue_bound + 4.0 * report.unglue_std_error;
  return report;
}

}  // namespace shuffle

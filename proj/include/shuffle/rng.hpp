#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace shuffle {

using Engine = std::mt19937_64;

// Labels separating the independent random streams drawn from one master seed.
// A stream is keyed by (master seed, label, index) so replica r always sees the
// same draws no matter which worker runs it or in what order.
enum class StreamLabel : std::uint64_t {
  ShuffleR = 1,      // R_t draws of a shuffle replica
  Rule = 2,          // L_t draws of a random rule
  Coupling = 3,      // joint draws of the coupled process
  UniformSample = 4, // uniformly random control permutations
  Marking = 5,       // marking-process replicas
  Spectrum = 6,      // random rescales in invariance checks
};

inline Engine make_stream(std::uint64_t seed, StreamLabel label, std::uint64_t index = 0) {
  const auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); };
  const auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  const auto tag = static_cast<std::uint64_t>(label);
  std::seed_seq seq{lo(seed), hi(seed), lo(tag), hi(tag), lo(index), hi(index)};
  return Engine(seq);
}

// Uniform integer on [0, n).
inline std::uint32_t uniform_below(Engine& rng, std::uint32_t n) {
  return std::uniform_int_distribution<std::uint32_t>(0, n - 1)(rng);
}

inline double uniform01(Engine& rng) {
  return std::generate_canonical<double, 53>(rng);
}

}  // namespace shuffle

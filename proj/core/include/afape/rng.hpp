#pragma once
// Deterministic, counter-keyed random streams.
//
// Every stochastic routine draws from a stream keyed by (seed, record id,
// purpose tag [, replicate]).  A stream's output is a pure function of its
// key and draw index, so generation is reproducible bit-for-bit regardless
// of worker count or execution order.

#include <cstdint>

namespace afape {

// Purpose tags. Values are part of the reproducibility contract; only append.
enum class RngTag : std::uint64_t {
  Features = 1,
  Labels = 2,
  Acquire = 3,
  Simulate = 4,
  Rollout = 5,
  GroundTruth = 6,
  ClassifierThin = 7,
  NuisanceInit = 8,
  NuisanceShuffle = 9,
  Bootstrap = 10,
  Imputation = 11,
  Subsample = 12,
  Diagnose = 13,
  ToyData = 14,
};

std::uint64_t mix64(std::uint64_t x);

// Combines key parts into a single well-mixed 64-bit state.
std::uint64_t stream_key(std::uint64_t seed, std::uint64_t id, RngTag tag,
                         std::uint64_t sub = 0);

// splitmix64 stream. Cheap to construct; one instance per (record, purpose).
class RngStream {
 public:
  explicit RngStream(std::uint64_t key) : state_(key) {}
  RngStream(std::uint64_t seed, std::uint64_t id, RngTag tag,
            std::uint64_t sub = 0)
      : state_(stream_key(seed, id, tag, sub)) {}

  std::uint64_t next_u64();

  // Uniform on [0,1) with 53 bits of precision.
  double uniform();

  // Uniform integer in [0, n).
  std::uint64_t uniform_int(std::uint64_t n);

  bool bernoulli(double p) { return uniform() < p; }

  // Standard normal via Box-Muller (two uniforms per draw, no caching).
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }

 private:
  std::uint64_t state_;
};

}  // namespace afape

#pragma once

#include <cstdint>
#include <vector>

namespace stopgame {

// Counter-based random stream: output n is a fixed mix of (key, n), so draws
// are reproducible no matter which thread runs which path and streams for
// different (seed, index) pairs are decorrelated.
class CounterRng {
 public:
  CounterRng(std::uint64_t master_seed, std::uint64_t stream_index);

  std::uint64_t next_u64();

  // Uniform in [0, 1).
  double next_double();

  // Uniform in (0, 1]; safe as an argument to log().
  double next_open_double();

  // Exponential with the given rate (rate > 0).
  double next_exponential(double rate);

  // Index into `weights` (nonnegative, not all zero) with probability
  // proportional to the weights.
  int next_categorical(const std::vector<double>& weights);

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// SplitMix64 finalizer; also usable standalone for seed derivation.
std::uint64_t splitmix64(std::uint64_t x);

}  // namespace stopgame

#include "stopgame/rng.hpp"

#include <cassert>
#include <cmath>

#include "stopgame/errors.hpp"

namespace stopgame {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

CounterRng::CounterRng(std::uint64_t master_seed, std::uint64_t stream_index)
    : key_(splitmix64(splitmix64(master_seed) ^
                      splitmix64(stream_index * 0xA24BAED4963EE407ull + 1))) {}

std::uint64_t CounterRng::next_u64() {
  return splitmix64(key_ + (counter_++) * 0x9E3779B97F4A7C15ull);
}

double CounterRng::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double CounterRng::next_open_double() { return 1.0 - next_double(); }

double CounterRng::next_exponential(double rate) {
  assert(rate > 0.0);
  return -std::log(next_open_double()) / rate;
}

int CounterRng::next_categorical(const std::vector<double>& weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "categorical draw from all-zero weights");
  }
  double u = next_double() * total;
  double acc = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    acc += weights[k];
    if (u < acc) return static_cast<int>(k);
  }
  // Roundoff can push u past the last partial sum; return the last
  // positive-weight index.
  for (std::size_t k = weights.size(); k-- > 0;) {
    if (weights[k] > 0.0) return static_cast<int>(k);
  }
  return 0;
}

}  // namespace stopgame

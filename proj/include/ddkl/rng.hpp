#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace ddkl {

// splitmix64 step; advances the state and returns the next value.
uint64_t splitmix64(uint64_t& state);

// Derive an independent stream seed from a master seed and a component label.
// Fixed labels keep streams stable when commands gain new consumers.
uint64_t derive_seed(uint64_t master, std::string_view label);
uint64_t derive_seed(uint64_t master, uint64_t index);

// Seeded generator with Box-Muller normals. One instance per stream; not
// thread-safe, derive a fresh one per work item for parallel loops.
class Rng {
 public:
  explicit Rng(uint64_t seed);

  uint64_t next_u64();
  double uniform();  // [0, 1)
  double normal();   // standard normal
  int uniform_int(int lo, int hi);  // inclusive bounds
  void fill_normal(std::span<double> out);

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace ddkl

#include "ddkl/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ddkl {

uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {
uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}
}  // namespace

uint64_t derive_seed(uint64_t master, std::string_view label) {
  uint64_t state = master ^ fnv1a64(label);
  splitmix64(state);
  return splitmix64(state);
}

uint64_t derive_seed(uint64_t master, uint64_t index) {
  uint64_t state = master ^ (0x9e3779b97f4a7c15ULL + index);
  splitmix64(state);
  return splitmix64(state);
}

Rng::Rng(uint64_t seed) : eng_(seed) {}

uint64_t Rng::next_u64() { return eng_(); }

double Rng::uniform() {
  return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = 0.0;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

int Rng::uniform_int(int lo, int hi) {
  if (hi < lo) throw std::invalid_argument("uniform_int: hi < lo");
  const uint64_t span = static_cast<uint64_t>(hi) - static_cast<uint64_t>(lo) + 1;
  // rejection to avoid modulo bias
  const uint64_t limit = UINT64_MAX - UINT64_MAX % span;
  uint64_t v;
  do {
    v = eng_();
  } while (v >= limit);
  return lo + static_cast<int>(v % span);
}

void Rng::fill_normal(std::span<double> out) {
  for (double& v : out) v = normal();
}

}  // namespace ddkl

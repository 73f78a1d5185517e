#include "wordforge/num/rng.hpp"

namespace wf::num {

namespace {

// splitmix64 finalizer; full-period bijection on 64-bit values.
uint64_t mix64(uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

uint64_t fnv1a(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

Rng::Rng(uint64_t seed, std::string_view stream)
    : key_(mix64(mix64(seed) ^ fnv1a(stream))) {}

Rng Rng::fork(std::string_view name) const {
  return Rng(mix64(key_ ^ fnv1a(name)), 0);
}

uint64_t Rng::next_u64() { return mix64(key_ ^ mix64(counter_++)); }

double Rng::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
  return lo + (hi - lo) * next_double();
}

uint64_t Rng::next_below(uint64_t n) {
  // Rejection sampling over the top range to avoid modulo bias.
  uint64_t limit = n * (UINT64_MAX / n);
  uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % n;
}

}  // namespace wf::num

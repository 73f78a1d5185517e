#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace wf::num {

// Counter-based generator: output i of a stream is a pure function of
// (key, i), so streams can be forked by name and replayed exactly.
// Callers own their Rng; nothing in the library keeps global state.
class Rng {
 public:
  explicit Rng(uint64_t seed, std::string_view stream = "");

  // Derives an independent stream. The child starts at counter 0 and its
  // sequence depends only on (parent key, name).
  Rng fork(std::string_view name) const;

  uint64_t next_u64();

  // [0, 1)
  double next_double();

  double uniform(double lo, double hi);

  // Unbiased integer in [0, n). n must be > 0.
  uint64_t next_below(uint64_t n);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    if (v.size() < 2) return;
    for (size_t i = v.size() - 1; i > 0; --i) {
      size_t j = static_cast<size_t>(next_below(i + 1));
      std::swap(v[i], v[j]);
    }
  }

  uint64_t key() const { return key_; }
  uint64_t counter() const { return counter_; }

 private:
  Rng(uint64_t key, uint64_t counter) : key_(key), counter_(counter) {}

  uint64_t key_;
  uint64_t counter_ = 0;
};

}  // namespace wf::num

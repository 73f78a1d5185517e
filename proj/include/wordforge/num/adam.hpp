#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>

#include "wordforge/num/tape.hpp"

namespace wf::num {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam with bias correction. Moment slots are keyed by parameter address
// and zero-initialized on first use; the step counter is shared across the
// parameter group, starts at 0, and increments once per step().
class Adam {
 public:
  explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

  // Applies one update using tape.grad_of() for each parameter.
  void step(std::span<Parameter* const> params, const Tape& tape);

  // Same, with explicitly supplied gradients (aligned with params).
  void step(std::span<Parameter* const> params, std::span<const Tensor> grads);

  int64_t steps() const { return step_count_; }
  const AdamConfig& config() const { return cfg_; }

 private:
  struct Slot {
    Tensor m, v;
  };

  AdamConfig cfg_;
  std::unordered_map<const Parameter*, Slot> slots_;
  int64_t step_count_ = 0;
};

}  // namespace wf::num

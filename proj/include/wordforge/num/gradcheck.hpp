#pragma once

#include <functional>
#include <span>
#include <string>

#include "wordforge/num/tape.hpp"

namespace wf::num {

struct GradCheckResult {
  double max_rel_err = 0.0;
  std::string worst;  // "param[index]" of the worst component
};

// Compares reverse-mode gradients of a scalar function against central
// finite differences, component by component. The function must be
// deterministic: it is re-evaluated many times at perturbed parameter
// values. Relative error uses |ad - fd| / (|ad| + |fd| + 1e-8).
GradCheckResult gradient_check(const std::function<Value(Tape&)>& f,
                               std::span<Parameter* const> params, double h = 1e-5);

}  // namespace wf::num

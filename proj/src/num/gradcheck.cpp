#include "wordforge/num/gradcheck.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace wf::num {

namespace {

double eval_scalar(const std::function<Value(Tape&)>& f) {
  Tape tape;
  Value v = f(tape);
  double x = tape.val(v).item();
  if (!std::isfinite(x)) {
    throw std::runtime_error("gradient_check: function non-finite at perturbed point");
  }
  return x;
}

}  // namespace

GradCheckResult gradient_check(const std::function<Value(Tape&)>& f,
                               std::span<Parameter* const> params, double h) {
  std::vector<Tensor> analytic;
  {
    Tape tape;
    Value loss = f(tape);
    tape.backward(loss);
    for (const Parameter* p : params) analytic.push_back(tape.grad_of(*p));
  }

  GradCheckResult res;
  for (size_t pi = 0; pi < params.size(); ++pi) {
    Parameter& p = *params[pi];
    for (int64_t j = 0; j < p.value.size(); ++j) {
      double saved = p.value.at(j);
      p.value.at(j) = saved + h;
      double fp = eval_scalar(f);
      p.value.at(j) = saved - h;
      double fm = eval_scalar(f);
      p.value.at(j) = saved;
      double fd = (fp - fm) / (2.0 * h);
      double ad = analytic[pi].at(j);
      double rel = std::abs(ad - fd) / (std::abs(ad) + std::abs(fd) + 1e-8);
      if (rel > res.max_rel_err) {
        res.max_rel_err = rel;
        res.worst = p.name + "[" + std::to_string(j) + "]";
      }
    }
  }
  return res;
}

}  // namespace wf::num

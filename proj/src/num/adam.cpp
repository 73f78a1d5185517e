#include "wordforge/num/adam.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace wf::num {

void Adam::step(std::span<Parameter* const> params, const Tape& tape) {
  std::vector<Tensor> grads;
  grads.reserve(params.size());
  for (const Parameter* p : params) grads.push_back(tape.grad_of(*p));
  step(params, grads);
}

void Adam::step(std::span<Parameter* const> params, std::span<const Tensor> grads) {
  if (params.size() != grads.size()) {
    throw std::invalid_argument("adam: " + std::to_string(params.size()) +
                                " params vs " + std::to_string(grads.size()) +
                                " gradients");
  }
  ++step_count_;
  double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_count_));
  double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_count_));

  for (size_t i = 0; i < params.size(); ++i) {
    Parameter& p = *params[i];
    const Tensor& g = grads[i];
    if (!g.same_shape(p.value)) {
      throw std::invalid_argument("adam: gradient shape " + shape_str(g.shape()) +
                                  " != parameter '" + p.name + "' shape " +
                                  shape_str(p.value.shape()));
    }
    if (!g.all_finite()) {
      throw std::runtime_error("adam: non-finite gradient for parameter '" + p.name +
                               "'");
    }
    Slot& s = slots_[&p];
    if (s.m.size() == 0) {
      s.m = Tensor(p.value.shape());
      s.v = Tensor(p.value.shape());
    }
    for (int64_t j = 0; j < p.value.size(); ++j) {
      double gj = g.at(j);
      s.m.at(j) = cfg_.beta1 * s.m.at(j) + (1.0 - cfg_.beta1) * gj;
      s.v.at(j) = cfg_.beta2 * s.v.at(j) + (1.0 - cfg_.beta2) * gj * gj;
      double mhat = s.m.at(j) / bc1;
      double vhat = s.v.at(j) / bc2;
      p.value.at(j) -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.epsilon);
    }
  }
}

}  // namespace wf::num

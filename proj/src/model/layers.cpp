#include "wordforge/model/layers.hpp"

#include <cmath>

namespace wf::model {

namespace {

Tensor glorot_rows(int rows, int cols, int fan_in, Rng& rng) {
  const double k = 1.0 / std::sqrt(static_cast<double>(fan_in));
  return Tensor::uniform({rows, cols}, -k, k, rng);
}

}  // namespace

Embedding::Embedding(const std::string& name, int rows, int d, Rng& rng)
    : table(name + ".table", glorot_rows(rows, d, d, rng)) {}

Value Embedding::rows_for(Tape& t, std::span<const int32_t> ids) const {
  return num::embedding_lookup(t.watch(table), ids);
}

Linear::Linear(const std::string& name, int in, int out, Rng& rng)
    : w(name + ".w", glorot_rows(in, out, in, rng)), b(name + ".b", Tensor({1, out})) {}

Value Linear::apply(Tape& t, Value x) const { return num::matmul(x, t.watch(w)) + t.watch(b); }

GruCell::GruCell(const std::string& name, int in, int hidden, Rng& rng)
    : w_xr(name + ".w_xr", glorot_rows(in, hidden, in, rng)),
      w_hr(name + ".w_hr", glorot_rows(hidden, hidden, hidden, rng)),
      b_r(name + ".b_r", Tensor({1, hidden})),
      w_xz(name + ".w_xz", glorot_rows(in, hidden, in, rng)),
      w_hz(name + ".w_hz", glorot_rows(hidden, hidden, hidden, rng)),
      b_z(name + ".b_z", Tensor({1, hidden})),
      w_xn(name + ".w_xn", glorot_rows(in, hidden, in, rng)),
      b_xn(name + ".b_xn", Tensor({1, hidden})),
      w_hn(name + ".w_hn", glorot_rows(hidden, hidden, hidden, rng)),
      b_hn(name + ".b_hn", Tensor({1, hidden})) {}

Value GruCell::step(Tape& t, Value x, Value h_prev) const {
  Value r = num::sigmoid(num::matmul(x, t.watch(w_xr)) + num::matmul(h_prev, t.watch(w_hr)) +
                         t.watch(b_r));
  Value z = num::sigmoid(num::matmul(x, t.watch(w_xz)) + num::matmul(h_prev, t.watch(w_hz)) +
                         t.watch(b_z));
  Value n = num::tanh(num::matmul(x, t.watch(w_xn)) + t.watch(b_xn) +
                      r * (num::matmul(h_prev, t.watch(w_hn)) + t.watch(b_hn)));
  return n + z * (h_prev - n);
}

Value GruCell::masked_step(Tape& t, Value x, Value h_prev, Value mask_col) const {
  Value h_next = step(t, x, h_prev);
  return h_prev + mask_col * (h_next - h_prev);
}

void collect(std::vector<Parameter*>& out, Embedding& e) { out.push_back(&e.table); }

void collect(std::vector<Parameter*>& out, Linear& l) {
  out.push_back(&l.w);
  out.push_back(&l.b);
}

void collect(std::vector<Parameter*>& out, GruCell& g) {
  for (Parameter* p : {&g.w_xr, &g.w_hr, &g.b_r, &g.w_xz, &g.w_hz, &g.b_z, &g.w_xn, &g.b_xn,
                       &g.w_hn, &g.b_hn}) {
    out.push_back(p);
  }
}

}  // namespace wf::model

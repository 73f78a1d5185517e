#pragma once

#include "wordforge/num/rng.hpp"
#include "wordforge/num/tape.hpp"

#include <string>
#include <vector>

namespace wf::model {

using num::Parameter;
using num::Rng;
using num::Tape;
using num::Tensor;
using num::Value;

// Lookup table of d-dimensional rows, one per alphabet index.
struct Embedding {
  Parameter table;  // rows × d

  Embedding() = default;
  Embedding(const std::string& name, int rows, int d, Rng& rng);

  Value rows_for(Tape& t, std::span<const int32_t> ids) const;
  int dim() const { return static_cast<int>(table.value.cols()); }
  int row_count() const { return static_cast<int>(table.value.rows()); }
};

// y = x W + b with W: in × out, b broadcast over rows.
struct Linear {
  Parameter w;
  Parameter b;

  Linear() = default;
  Linear(const std::string& name, int in, int out, Rng& rng);

  Value apply(Tape& t, Value x) const;
  int in_dim() const { return static_cast<int>(w.value.rows()); }
  int out_dim() const { return static_cast<int>(w.value.cols()); }
};

// Gated recurrent unit:
//   r = σ(x W_xr + h W_hr + b_r)
//   z = σ(x W_xz + h W_hz + b_z)
//   n = tanh(x W_xn + b_xn + r ⊙ (h W_hn + b_hn))
//   h' = n + z ⊙ (h − n)
struct GruCell {
  Parameter w_xr, w_hr, b_r;
  Parameter w_xz, w_hz, b_z;
  Parameter w_xn, b_xn, w_hn, b_hn;

  GruCell() = default;
  GruCell(const std::string& name, int in, int hidden, Rng& rng);

  // x: B × in, h_prev: B × hidden → B × hidden.
  Value step(Tape& t, Value x, Value h_prev) const;

  // Masked recurrence: rows whose mask entry is 0 keep their previous state,
  // so PAD positions never advance the hidden state.
  // mask_col: B × 1 of {0,1}.
  Value masked_step(Tape& t, Value x, Value h_prev, Value mask_col) const;

  int in_dim() const { return static_cast<int>(w_xr.value.rows()); }
  int hidden_dim() const { return static_cast<int>(w_xr.value.cols()); }
};

// Parameter registration helpers; every model exposes its trainables this way
// for the optimizer and for checkpointing.
void collect(std::vector<Parameter*>& out, Embedding& e);
void collect(std::vector<Parameter*>& out, Linear& l);
void collect(std::vector<Parameter*>& out, GruCell& g);

}  // namespace wf::model

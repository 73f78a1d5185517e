#include "wordforge/num/tape.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

namespace wf::num {

namespace {

[[noreturn]] void shape_error(const char* op, const Tensor& a, const Tensor& b) {
  throw std::invalid_argument(std::string(op) + ": incompatible shapes " +
                              shape_str(a.shape()) + " vs " + shape_str(b.shape()));
}

[[noreturn]] void shape_error(const char* op, const Tensor& a, const std::string& what) {
  throw std::invalid_argument(std::string(op) + ": " + what + " (got " +
                              shape_str(a.shape()) + ")");
}

// Effective (rows, cols) view used by the broadcasting elementwise ops.
struct Dims {
  int64_t r, c;
};

Dims dims_of(const Tensor& t) {
  if (t.rank() == 2) return {t.shape()[0], t.shape()[1]};
  if (t.rank() == 1) return {1, t.shape()[0]};
  return {1, 1};
}

bool bcast_ok(int64_t a, int64_t out) { return a == out || a == 1; }

// matmul kernel, ikj order over contiguous rows
void matmul_acc(const double* a, const double* b, double* out, int64_t m, int64_t k,
                int64_t n) {
  for (int64_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    double* orow = out + i * n;
    for (int64_t p = 0; p < k; ++p) {
      double av = arow[p];
      if (av == 0.0) continue;
      const double* brow = b + p * n;
      for (int64_t j = 0; j < n; ++j) orow[j] += av * brow[j];
    }
  }
}

// out += a^T * b  where a is (m x k), b is (m x n), out is (k x n)
void matmul_at_b_acc(const double* a, const double* b, double* out, int64_t m,
                     int64_t k, int64_t n) {
  for (int64_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    const double* brow = b + i * n;
    for (int64_t p = 0; p < k; ++p) {
      double av = arow[p];
      if (av == 0.0) continue;
      double* orow = out + p * n;
      for (int64_t j = 0; j < n; ++j) orow[j] += av * brow[j];
    }
  }
}

// out += a * b^T  where a is (m x k), b is (n x k), out is (m x n)
void matmul_a_bt_acc(const double* a, const double* b, double* out, int64_t m,
                     int64_t k, int64_t n) {
  for (int64_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    double* orow = out + i * n;
    for (int64_t j = 0; j < n; ++j) {
      const double* brow = b + j * k;
      double acc = 0.0;
      for (int64_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
      orow[j] += acc;
    }
  }
}

}  // namespace

int Tape::push(Node n) {
  if (backward_done_) {
    // Building on a consumed tape is almost always a bug; require a fresh
    // forward pass after backward.
    throw std::logic_error("tape: op recorded after backward(); clear() first");
  }
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

const Tape::Node& Tape::node(Value v) const {
  if (v.tape != this) throw std::logic_error("tape: value belongs to another tape");
  if (v.id < 0 || v.id >= static_cast<int>(nodes_.size())) {
    throw std::logic_error("tape: invalid value id");
  }
  return nodes_[static_cast<size_t>(v.id)];
}

void Tape::check_same_tape(Value v, const char* op) const {
  if (v.tape != this) {
    throw std::logic_error(std::string(op) + ": value belongs to another tape");
  }
}

Value Tape::constant(Tensor t) {
  Node n;
  n.op = Op::kLeaf;
  n.out = std::move(t);
  n.requires_grad = false;
  return out_of(push(std::move(n)));
}

Value Tape::leaf(Tensor t) {
  Node n;
  n.op = Op::kLeaf;
  n.requires_grad = t.requires_grad();
  n.out = std::move(t);
  return out_of(push(std::move(n)));
}

Value Tape::watch(const Parameter& p, bool trainable) {
  auto it = watched_.find(&p);
  if (it != watched_.end()) return out_of(it->second);
  Node n;
  n.op = Op::kLeaf;
  n.out = p.value;
  n.requires_grad = trainable;
  int id = push(std::move(n));
  watched_.emplace(&p, id);
  return out_of(id);
}

const Tensor& Tape::val(Value v) const { return node(v).out; }

Tensor Tape::grad(Value v) const {
  const Node& n = node(v);
  const Tensor& g = grads_[static_cast<size_t>(v.id)];
  if (g.size() == 0 && n.out.size() != 0) return Tensor(n.out.shape());
  return g;
}

Tensor Tape::grad_of(const Parameter& p) const {
  auto it = watched_.find(&p);
  if (it == watched_.end()) return Tensor(p.value.shape());
  return grad(Value{const_cast<Tape*>(this), it->second});
}

bool Tape::watched(const Parameter& p) const { return watched_.count(&p) != 0; }

void Tape::clear() {
  nodes_.clear();
  grads_.clear();
  watched_.clear();
  backward_done_ = false;
}

Tensor& Tape::grad_buf(int id, const Shape& shape) {
  Tensor& g = grads_[static_cast<size_t>(id)];
  if (g.size() == 0 && shape_numel(shape) != 0) g = Tensor(shape);
  return g;
}

// ---------------------------------------------------------------------------
// forward ops

Value Tape::matmul(Value a, Value b) {
  check_same_tape(a, "matmul");
  check_same_tape(b, "matmul");
  const Tensor& ta = node(a).out;
  const Tensor& tb = node(b).out;
  if (ta.rank() != 2 || tb.rank() != 2) shape_error("matmul", ta, tb);
  if (ta.shape()[1] != tb.shape()[0]) shape_error("matmul", ta, tb);
  int64_t m = ta.shape()[0], k = ta.shape()[1], n = tb.shape()[1];
  Node nd;
  nd.op = Op::kMatmul;
  nd.inputs = {a.id, b.id};
  nd.requires_grad = node(a).requires_grad || node(b).requires_grad;
  nd.out = Tensor({m, n});
  matmul_acc(ta.data(), tb.data(), nd.out.data(), m, k, n);
  return out_of(push(std::move(nd)));
}

namespace {
enum class EwKind { kAdd, kSub, kMul };
}

// The three broadcasting elementwise ops share one implementation; the
// public methods below dispatch into it.
static void ew_forward(EwKind kind, const Tensor& ta, const Tensor& tb, Tensor& out,
                       const char* name) {
  Dims da = dims_of(ta), db = dims_of(tb);
  Dims d{std::max(da.r, db.r), std::max(da.c, db.c)};
  if (!bcast_ok(da.r, d.r) || !bcast_ok(da.c, d.c) || !bcast_ok(db.r, d.r) ||
      !bcast_ok(db.c, d.c)) {
    shape_error(name, ta, tb);
  }
  Shape oshape;
  if (ta.same_shape(tb)) {
    oshape = ta.shape();
  } else if (ta.rank() <= 1 && tb.rank() <= 1 && d.r == 1) {
    oshape = {d.c};
  } else {
    oshape = {d.r, d.c};
  }
  out = Tensor(std::move(oshape));
  const double* pa = ta.data();
  const double* pb = tb.data();
  double* po = out.data();
  for (int64_t r = 0; r < d.r; ++r) {
    const double* ra = pa + (da.r == 1 ? 0 : r * da.c);
    const double* rb = pb + (db.r == 1 ? 0 : r * db.c);
    double* ro = po + r * d.c;
    for (int64_t c = 0; c < d.c; ++c) {
      double va = ra[da.c == 1 ? 0 : c];
      double vb = rb[db.c == 1 ? 0 : c];
      switch (kind) {
        case EwKind::kAdd: ro[c] = va + vb; break;
        case EwKind::kSub: ro[c] = va - vb; break;
        case EwKind::kMul: ro[c] = va * vb; break;
      }
    }
  }
}

Value Tape::add(Value a, Value b) {
  check_same_tape(a, "add");
  check_same_tape(b, "add");
  Node nd;
  nd.op = Op::kAdd;
  nd.inputs = {a.id, b.id};
  nd.requires_grad = node(a).requires_grad || node(b).requires_grad;
  ew_forward(EwKind::kAdd, node(a).out, node(b).out, nd.out, "add");
  return out_of(push(std::move(nd)));
}

Value Tape::sub(Value a, Value b) {
  check_same_tape(a, "sub");
  check_same_tape(b, "sub");
  Node nd;
  nd.op = Op::kSub;
  nd.inputs = {a.id, b.id};
  nd.requires_grad = node(a).requires_grad || node(b).requires_grad;
  ew_forward(EwKind::kSub, node(a).out, node(b).out, nd.out, "sub");
  return out_of(push(std::move(nd)));
}

Value Tape::mul(Value a, Value b) {
  check_same_tape(a, "mul");
  check_same_tape(b, "mul");
  Node nd;
  nd.op = Op::kMul;
  nd.inputs = {a.id, b.id};
  nd.requires_grad = node(a).requires_grad || node(b).requires_grad;
  ew_forward(EwKind::kMul, node(a).out, node(b).out, nd.out, "mul");
  return out_of(push(std::move(nd)));
}

Value Tape::scale(Value a, double s) {
  check_same_tape(a, "scale");
  Node nd;
  nd.op = Op::kScale;
  nd.inputs = {a.id};
  nd.d0 = s;
  nd.requires_grad = node(a).requires_grad;
  nd.out = node(a).out;
  for (int64_t i = 0; i < nd.out.size(); ++i) nd.out.at(i) *= s;
  return out_of(push(std::move(nd)));
}

Value Tape::add_const(Value a, double c) {
  check_same_tape(a, "add_const");
  Node nd;
  nd.op = Op::kAddConst;
  nd.inputs = {a.id};
  nd.d0 = c;
  nd.requires_grad = node(a).requires_grad;
  nd.out = node(a).out;
  for (int64_t i = 0; i < nd.out.size(); ++i) nd.out.at(i) += c;
  return out_of(push(std::move(nd)));
}

Value Tape::tanh_op(Value a) {
  check_same_tape(a, "tanh");
  Node nd;
  nd.op = Op::kTanh;
  nd.inputs = {a.id};
  nd.requires_grad = node(a).requires_grad;
  nd.out = node(a).out;
  for (int64_t i = 0; i < nd.out.size(); ++i) nd.out.at(i) = std::tanh(nd.out.at(i));
  return out_of(push(std::move(nd)));
}

Value Tape::sigmoid_op(Value a) {
  check_same_tape(a, "sigmoid");
  Node nd;
  nd.op = Op::kSigmoid;
  nd.inputs = {a.id};
  nd.requires_grad = node(a).requires_grad;
  nd.out = node(a).out;
  for (int64_t i = 0; i < nd.out.size(); ++i) {
    double x = nd.out.at(i);
    // branch keeps exp() argument non-positive
    nd.out.at(i) = x >= 0 ? 1.0 / (1.0 + std::exp(-x))
                          : std::exp(x) / (1.0 + std::exp(x));
  }
  return out_of(push(std::move(nd)));
}

Value Tape::relu_op(Value a) {
  check_same_tape(a, "relu");
  Node nd;
  nd.op = Op::kRelu;
  nd.inputs = {a.id};
  nd.requires_grad = node(a).requires_grad;
  nd.out = node(a).out;
  for (int64_t i = 0; i < nd.out.size(); ++i) nd.out.at(i) = std::max(0.0, nd.out.at(i));
  return out_of(push(std::move(nd)));
}

Value Tape::softmax_rows(Value a) {
  check_same_tape(a, "softmax");
  const Tensor& ta = node(a).out;
  if (ta.rank() < 1 || ta.rank() > 2) shape_error("softmax", ta, "expected rank 1 or 2");
  Node nd;
  nd.op = Op::kSoftmaxRows;
  nd.inputs = {a.id};
  nd.requires_grad = node(a).requires_grad;
  nd.out = ta;
  int64_t rows = ta.rows(), cols = ta.cols();
  if (cols == 0) shape_error("softmax", ta, "empty rows");
  for (int64_t r = 0; r < rows; ++r) {
    double* row = nd.out.data() + r * cols;
    double mx = row[0];
    for (int64_t c = 1; c < cols; ++c) mx = std::max(mx, row[c]);
    double sum = 0.0;
    for (int64_t c = 0; c < cols; ++c) {
      row[c] = std::exp(row[c] - mx);
      sum += row[c];
    }
    for (int64_t c = 0; c < cols; ++c) row[c] /= sum;
  }
  return out_of(push(std::move(nd)));
}

Value Tape::concat_rows(std::span<const Value> parts) {
  if (parts.empty()) throw std::invalid_argument("concat_rows: no inputs");
  int64_t cols = -1, rows = 0;
  bool rg = false;
  for (Value v : parts) {
    check_same_tape(v, "concat_rows");
    const Tensor& t = node(v).out;
    if (cols < 0) cols = t.cols();
    if (t.cols() != cols) {
      shape_error("concat_rows", t, "column count differs from first input");
    }
    rows += t.rows();
    rg = rg || node(v).requires_grad;
  }
  Node nd;
  nd.op = Op::kConcatRows;
  nd.requires_grad = rg;
  nd.out = Tensor({rows, cols});
  int64_t r = 0;
  for (Value v : parts) {
    nd.inputs.push_back(v.id);
    const Tensor& t = node(v).out;
    std::memcpy(nd.out.data() + r * cols, t.data(),
                sizeof(double) * static_cast<size_t>(t.size()));
    r += t.rows();
  }
  return out_of(push(std::move(nd)));
}

Value Tape::concat_cols(std::span<const Value> parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols: no inputs");
  int64_t rows = -1, cols = 0;
  bool rg = false;
  for (Value v : parts) {
    check_same_tape(v, "concat_cols");
    const Tensor& t = node(v).out;
    if (rows < 0) rows = t.rows();
    if (t.rows() != rows) {
      shape_error("concat_cols", t, "row count differs from first input");
    }
    cols += t.cols();
    rg = rg || node(v).requires_grad;
  }
  Node nd;
  nd.op = Op::kConcatCols;
  nd.requires_grad = rg;
  nd.out = Tensor({rows, cols});
  int64_t off = 0;
  for (Value v : parts) {
    nd.inputs.push_back(v.id);
    const Tensor& t = node(v).out;
    int64_t tc = t.cols();
    for (int64_t r = 0; r < rows; ++r) {
      std::memcpy(nd.out.data() + r * cols + off, t.data() + r * tc,
                  sizeof(double) * static_cast<size_t>(tc));
    }
    off += tc;
  }
  return out_of(push(std::move(nd)));
}

Value Tape::slice_rows(Value a, int64_t r0, int64_t r1) {
  check_same_tape(a, "slice_rows");
  const Tensor& ta = node(a).out;
  if (r0 < 0 || r1 > ta.rows() || r0 >= r1) {
    shape_error("slice_rows", ta,
                "bad row range [" + std::to_string(r0) + "," + std::to_string(r1) + ")");
  }
  Node nd;
  nd.op = Op::kSliceRows;
  nd.inputs = {a.id};
  nd.i0 = r0;
  nd.i1 = r1;
  nd.requires_grad = node(a).requires_grad;
  int64_t cols = ta.cols();
  nd.out = Tensor({r1 - r0, cols});
  std::memcpy(nd.out.data(), ta.data() + r0 * cols,
              sizeof(double) * static_cast<size_t>((r1 - r0) * cols));
  return out_of(push(std::move(nd)));
}

Value Tape::slice_cols(Value a, int64_t c0, int64_t c1) {
  check_same_tape(a, "slice_cols");
  const Tensor& ta = node(a).out;
  if (c0 < 0 || c1 > ta.cols() || c0 >= c1) {
    shape_error("slice_cols", ta,
                "bad col range [" + std::to_string(c0) + "," + std::to_string(c1) + ")");
  }
  Node nd;
  nd.op = Op::kSliceCols;
  nd.inputs = {a.id};
  nd.i0 = c0;
  nd.i1 = c1;
  nd.requires_grad = node(a).requires_grad;
  int64_t rows = ta.rows(), cols = ta.cols(), w = c1 - c0;
  nd.out = Tensor({rows, w});
  for (int64_t r = 0; r < rows; ++r) {
    std::memcpy(nd.out.data() + r * w, ta.data() + r * cols + c0,
                sizeof(double) * static_cast<size_t>(w));
  }
  return out_of(push(std::move(nd)));
}

Value Tape::reshape(Value a, Shape shape) {
  check_same_tape(a, "reshape");
  const Tensor& ta = node(a).out;
  if (shape_numel(shape) != ta.size()) {
    shape_error("reshape", ta, "target shape " + shape_str(shape) + " changes size");
  }
  Node nd;
  nd.op = Op::kReshape;
  nd.inputs = {a.id};
  nd.requires_grad = node(a).requires_grad;
  nd.out = Tensor(std::move(shape),
                  std::vector<double>(ta.data(), ta.data() + ta.size()));
  return out_of(push(std::move(nd)));
}

Value Tape::embedding_lookup(Value table, std::span<const int32_t> ids) {
  check_same_tape(table, "embedding_lookup");
  const Tensor& tt = node(table).out;
  if (tt.rank() != 2) shape_error("embedding_lookup", tt, "table must be rank 2");
  int64_t v = tt.shape()[0], d = tt.shape()[1];
  Node nd;
  nd.op = Op::kEmbed;
  nd.inputs = {table.id};
  nd.requires_grad = node(table).requires_grad;
  nd.idx.assign(ids.begin(), ids.end());
  nd.out = Tensor({static_cast<int64_t>(ids.size()), d});
  for (size_t i = 0; i < ids.size(); ++i) {
    int32_t id = ids[i];
    if (id < 0 || id >= v) {
      throw std::out_of_range("embedding_lookup: index " + std::to_string(id) +
                              " out of range for table " + shape_str(tt.shape()));
    }
    std::memcpy(nd.out.data() + static_cast<int64_t>(i) * d, tt.data() + id * d,
                sizeof(double) * static_cast<size_t>(d));
  }
  return out_of(push(std::move(nd)));
}

Value Tape::cross_entropy_sum(Value logits, std::span<const int32_t> targets,
                              std::span<const double> weights) {
  check_same_tape(logits, "cross_entropy");
  const Tensor& tl = node(logits).out;
  if (tl.rank() != 2) shape_error("cross_entropy", tl, "logits must be rank 2");
  int64_t rows = tl.rows(), cols = tl.cols();
  if (static_cast<int64_t>(targets.size()) != rows ||
      static_cast<int64_t>(weights.size()) != rows) {
    shape_error("cross_entropy", tl,
                "targets/weights length " + std::to_string(targets.size()) + "/" +
                    std::to_string(weights.size()) + " != row count");
  }
  Node nd;
  nd.op = Op::kCrossEntropySum;
  nd.inputs = {logits.id};
  nd.requires_grad = node(logits).requires_grad;
  nd.idx.assign(targets.begin(), targets.end());
  nd.aux.resize(static_cast<size_t>(rows * cols) + weights.size());
  std::copy(weights.begin(), weights.end(), nd.aux.begin() + rows * cols);
  double total = 0.0;
  for (int64_t r = 0; r < rows; ++r) {
    int32_t t = targets[static_cast<size_t>(r)];
    if (t < 0 || t >= cols) {
      throw std::out_of_range("cross_entropy: target " + std::to_string(t) +
                              " out of range for " + std::to_string(cols) + " classes");
    }
    const double* row = tl.data() + r * cols;
    double* prow = nd.aux.data() + r * cols;
    double mx = row[0];
    for (int64_t c = 1; c < cols; ++c) mx = std::max(mx, row[c]);
    double sum = 0.0;
    for (int64_t c = 0; c < cols; ++c) {
      prow[c] = std::exp(row[c] - mx);
      sum += prow[c];
    }
    for (int64_t c = 0; c < cols; ++c) prow[c] /= sum;
    double lse = mx + std::log(sum);
    total += weights[static_cast<size_t>(r)] * (lse - row[t]);
  }
  nd.out = Tensor::scalar(total);
  return out_of(push(std::move(nd)));
}

Value Tape::bce_with_logits_sum(Value logits, std::span<const double> targets) {
  check_same_tape(logits, "bce_with_logits");
  const Tensor& tl = node(logits).out;
  if (tl.size() != static_cast<int64_t>(targets.size())) {
    shape_error("bce_with_logits", tl,
                "targets length " + std::to_string(targets.size()) + " != element count");
  }
  Node nd;
  nd.op = Op::kBceLogitsSum;
  nd.inputs = {logits.id};
  nd.requires_grad = node(logits).requires_grad;
  nd.aux.assign(targets.begin(), targets.end());
  double total = 0.0;
  for (int64_t i = 0; i < tl.size(); ++i) {
    double x = tl.at(i), t = targets[static_cast<size_t>(i)];
    total += std::max(x, 0.0) - x * t + std::log1p(std::exp(-std::abs(x)));
  }
  nd.out = Tensor::scalar(total);
  return out_of(push(std::move(nd)));
}

Value Tape::mean_all(Value a) {
  check_same_tape(a, "mean");
  const Tensor& ta = node(a).out;
  if (ta.size() == 0) shape_error("mean", ta, "empty tensor");
  Node nd;
  nd.op = Op::kMean;
  nd.inputs = {a.id};
  nd.requires_grad = node(a).requires_grad;
  double s = 0.0;
  for (int64_t i = 0; i < ta.size(); ++i) s += ta.at(i);
  nd.out = Tensor::scalar(s / static_cast<double>(ta.size()));
  return out_of(push(std::move(nd)));
}

Value Tape::sum_all(Value a) {
  check_same_tape(a, "sum");
  const Tensor& ta = node(a).out;
  Node nd;
  nd.op = Op::kSum;
  nd.inputs = {a.id};
  nd.requires_grad = node(a).requires_grad;
  double s = 0.0;
  for (int64_t i = 0; i < ta.size(); ++i) s += ta.at(i);
  nd.out = Tensor::scalar(s);
  return out_of(push(std::move(nd)));
}

Value Tape::max_over_rows(Value a) {
  check_same_tape(a, "max_over_rows");
  const Tensor& ta = node(a).out;
  if (ta.rank() != 2 || ta.rows() == 0) {
    shape_error("max_over_rows", ta, "expected non-empty rank-2 tensor");
  }
  int64_t rows = ta.rows(), cols = ta.cols();
  Node nd;
  nd.op = Op::kMaxOverRows;
  nd.inputs = {a.id};
  nd.requires_grad = node(a).requires_grad;
  nd.out = Tensor({cols});
  nd.idx.resize(static_cast<size_t>(cols));
  for (int64_t c = 0; c < cols; ++c) {
    int64_t best = 0;
    double bv = ta.at(0, c);
    for (int64_t r = 1; r < rows; ++r) {
      if (ta.at(r, c) > bv) {
        bv = ta.at(r, c);
        best = r;
      }
    }
    nd.out.at(c) = bv;
    nd.idx[static_cast<size_t>(c)] = static_cast<int32_t>(best);
  }
  return out_of(push(std::move(nd)));
}

// ---------------------------------------------------------------------------
// backward

namespace {

// Accumulates g (shaped like the op output) into the gradient of input `t`,
// summing over broadcast dimensions.
void ew_reduce_acc(const Tensor& g, const Tensor& t, Tensor& gt, double sign) {
  Dims dg = dims_of(g), dt = dims_of(t);
  for (int64_t r = 0; r < dg.r; ++r) {
    const double* grow = g.data() + r * dg.c;
    double* trow = gt.data() + (dt.r == 1 ? 0 : r * dt.c);
    for (int64_t c = 0; c < dg.c; ++c) {
      trow[dt.c == 1 ? 0 : c] += sign * grow[c];
    }
  }
}

// Same, with an elementwise factor taken from `other` (already broadcast).
void ew_reduce_acc_mul(const Tensor& g, const Tensor& t, const Tensor& other,
                       Tensor& gt) {
  Dims dg = dims_of(g), dt = dims_of(t), dx = dims_of(other);
  for (int64_t r = 0; r < dg.r; ++r) {
    const double* grow = g.data() + r * dg.c;
    const double* orow = other.data() + (dx.r == 1 ? 0 : r * dx.c);
    double* trow = gt.data() + (dt.r == 1 ? 0 : r * dt.c);
    for (int64_t c = 0; c < dg.c; ++c) {
      trow[dt.c == 1 ? 0 : c] += grow[c] * orow[dx.c == 1 ? 0 : c];
    }
  }
}

}  // namespace

void Tape::backward(Value loss) {
  check_same_tape(loss, "backward");
  if (backward_done_) {
    throw std::logic_error("backward: called twice on one tape; re-run forward first");
  }
  const Node& ln = node(loss);
  if (ln.out.size() != 1) {
    throw std::invalid_argument("backward: loss must be scalar, got shape " +
                                shape_str(ln.out.shape()));
  }
  backward_done_ = true;
  grads_.assign(nodes_.size(), Tensor());
  grad_buf(loss.id, ln.out.shape()).at(0) = 1.0;

  for (int id = loss.id; id >= 0; --id) {
    Node& n = nodes_[static_cast<size_t>(id)];
    if (!n.requires_grad) continue;
    Tensor& g = grads_[static_cast<size_t>(id)];
    if (g.size() == 0) continue;  // not reached from the loss

    auto in = [&](size_t k) -> Node& { return nodes_[static_cast<size_t>(n.inputs[k])]; };
    auto ing = [&](size_t k) -> Tensor& {
      return grad_buf(n.inputs[k], in(k).out.shape());
    };

    switch (n.op) {
      case Op::kLeaf:
        break;
      case Op::kMatmul: {
        const Tensor& ta = in(0).out;
        const Tensor& tb = in(1).out;
        int64_t m = ta.shape()[0], k = ta.shape()[1], nn = tb.shape()[1];
        if (in(0).requires_grad) {
          matmul_a_bt_acc(g.data(), tb.data(), ing(0).data(), m, nn, k);
        }
        if (in(1).requires_grad) {
          matmul_at_b_acc(ta.data(), g.data(), ing(1).data(), m, k, nn);
        }
        break;
      }
      case Op::kAdd:
      case Op::kSub: {
        double sb = n.op == Op::kSub ? -1.0 : 1.0;
        if (in(0).requires_grad) ew_reduce_acc(g, in(0).out, ing(0), 1.0);
        if (in(1).requires_grad) ew_reduce_acc(g, in(1).out, ing(1), sb);
        break;
      }
      case Op::kMul: {
        if (in(0).requires_grad) ew_reduce_acc_mul(g, in(0).out, in(1).out, ing(0));
        if (in(1).requires_grad) ew_reduce_acc_mul(g, in(1).out, in(0).out, ing(1));
        break;
      }
      case Op::kScale: {
        Tensor& gi = ing(0);
        for (int64_t i = 0; i < g.size(); ++i) gi.at(i) += g.at(i) * n.d0;
        break;
      }
      case Op::kAddConst: {
        Tensor& gi = ing(0);
        for (int64_t i = 0; i < g.size(); ++i) gi.at(i) += g.at(i);
        break;
      }
      case Op::kTanh: {
        Tensor& gi = ing(0);
        for (int64_t i = 0; i < g.size(); ++i) {
          gi.at(i) += g.at(i) * (1.0 - n.out.at(i) * n.out.at(i));
        }
        break;
      }
      case Op::kSigmoid: {
        Tensor& gi = ing(0);
        for (int64_t i = 0; i < g.size(); ++i) {
          gi.at(i) += g.at(i) * n.out.at(i) * (1.0 - n.out.at(i));
        }
        break;
      }
      case Op::kRelu: {
        Tensor& gi = ing(0);
        const Tensor& x = in(0).out;
        for (int64_t i = 0; i < g.size(); ++i) {
          if (x.at(i) > 0.0) gi.at(i) += g.at(i);
        }
        break;
      }
      case Op::kSoftmaxRows: {
        Tensor& gi = ing(0);
        int64_t rows = n.out.rows(), cols = n.out.cols();
        for (int64_t r = 0; r < rows; ++r) {
          const double* y = n.out.data() + r * cols;
          const double* gr = g.data() + r * cols;
          double dot = 0.0;
          for (int64_t c = 0; c < cols; ++c) dot += gr[c] * y[c];
          double* gir = gi.data() + r * cols;
          for (int64_t c = 0; c < cols; ++c) gir[c] += y[c] * (gr[c] - dot);
        }
        break;
      }
      case Op::kConcatRows: {
        int64_t r = 0, cols = n.out.cols();
        for (size_t k = 0; k < n.inputs.size(); ++k) {
          int64_t pr = in(k).out.rows();
          if (in(k).requires_grad) {
            Tensor& gi = ing(k);
            const double* src = g.data() + r * cols;
            for (int64_t i = 0; i < pr * cols; ++i) gi.at(i) += src[i];
          }
          r += pr;
        }
        break;
      }
      case Op::kConcatCols: {
        int64_t off = 0, rows = n.out.rows(), cols = n.out.cols();
        for (size_t k = 0; k < n.inputs.size(); ++k) {
          int64_t pc = in(k).out.cols();
          if (in(k).requires_grad) {
            Tensor& gi = ing(k);
            for (int64_t r = 0; r < rows; ++r) {
              const double* src = g.data() + r * cols + off;
              double* dst = gi.data() + r * pc;
              for (int64_t c = 0; c < pc; ++c) dst[c] += src[c];
            }
          }
          off += pc;
        }
        break;
      }
      case Op::kSliceRows: {
        Tensor& gi = ing(0);
        int64_t cols = n.out.cols();
        double* dst = gi.data() + n.i0 * cols;
        for (int64_t i = 0; i < g.size(); ++i) dst[i] += g.at(i);
        break;
      }
      case Op::kSliceCols: {
        Tensor& gi = ing(0);
        int64_t rows = n.out.rows(), w = n.out.cols(), cols = in(0).out.cols();
        for (int64_t r = 0; r < rows; ++r) {
          const double* src = g.data() + r * w;
          double* dst = gi.data() + r * cols + n.i0;
          for (int64_t c = 0; c < w; ++c) dst[c] += src[c];
        }
        break;
      }
      case Op::kReshape: {
        Tensor& gi = ing(0);
        for (int64_t i = 0; i < g.size(); ++i) gi.at(i) += g.at(i);
        break;
      }
      case Op::kEmbed: {
        Tensor& gi = ing(0);
        int64_t d = n.out.cols();
        for (size_t i = 0; i < n.idx.size(); ++i) {
          const double* src = g.data() + static_cast<int64_t>(i) * d;
          double* dst = gi.data() + n.idx[i] * d;
          for (int64_t c = 0; c < d; ++c) dst[c] += src[c];
        }
        break;
      }
      case Op::kCrossEntropySum: {
        Tensor& gi = ing(0);
        int64_t rows = in(0).out.rows(), cols = in(0).out.cols();
        const double* probs = n.aux.data();
        const double* w = n.aux.data() + rows * cols;
        double gs = g.at(0);
        for (int64_t r = 0; r < rows; ++r) {
          double wr = w[r] * gs;
          const double* prow = probs + r * cols;
          double* girow = gi.data() + r * cols;
          for (int64_t c = 0; c < cols; ++c) girow[c] += wr * prow[c];
          girow[n.idx[static_cast<size_t>(r)]] -= wr;
        }
        break;
      }
      case Op::kBceLogitsSum: {
        Tensor& gi = ing(0);
        const Tensor& x = in(0).out;
        double gs = g.at(0);
        for (int64_t i = 0; i < x.size(); ++i) {
          double xv = x.at(i);
          double sig = xv >= 0 ? 1.0 / (1.0 + std::exp(-xv))
                               : std::exp(xv) / (1.0 + std::exp(xv));
          gi.at(i) += gs * (sig - n.aux[static_cast<size_t>(i)]);
        }
        break;
      }
      case Op::kMean: {
        Tensor& gi = ing(0);
        double gs = g.at(0) / static_cast<double>(gi.size());
        for (int64_t i = 0; i < gi.size(); ++i) gi.at(i) += gs;
        break;
      }
      case Op::kSum: {
        Tensor& gi = ing(0);
        double gs = g.at(0);
        for (int64_t i = 0; i < gi.size(); ++i) gi.at(i) += gs;
        break;
      }
      case Op::kMaxOverRows: {
        Tensor& gi = ing(0);
        int64_t cols = in(0).out.cols();
        for (int64_t c = 0; c < cols; ++c) {
          gi.at(n.idx[static_cast<size_t>(c)], c) += g.at(c);
        }
        break;
      }
    }
    // Intermediates can be large (batched hidden states); free the gradient
    // as soon as it has been propagated. Leaves keep theirs.
    if (n.op != Op::kLeaf) g = Tensor();
  }
}

// ---------------------------------------------------------------------------
// free functions

Value matmul(Value a, Value b) { return a.tape->matmul(a, b); }
Value operator+(Value a, Value b) { return a.tape->add(a, b); }
Value operator-(Value a, Value b) { return a.tape->sub(a, b); }
Value operator*(Value a, Value b) { return a.tape->mul(a, b); }
Value tanh(Value a) { return a.tape->tanh_op(a); }
Value sigmoid(Value a) { return a.tape->sigmoid_op(a); }
Value relu(Value a) { return a.tape->relu_op(a); }
Value softmax_rows(Value a) { return a.tape->softmax_rows(a); }
Value concat_rows(std::span<const Value> p) { return p[0].tape->concat_rows(p); }
Value concat_cols(std::span<const Value> p) { return p[0].tape->concat_cols(p); }
Value slice_rows(Value a, int64_t r0, int64_t r1) { return a.tape->slice_rows(a, r0, r1); }
Value slice_cols(Value a, int64_t c0, int64_t c1) { return a.tape->slice_cols(a, c0, c1); }
Value reshape(Value a, Shape s) { return a.tape->reshape(a, std::move(s)); }
Value embedding_lookup(Value t, std::span<const int32_t> ids) {
  return t.tape->embedding_lookup(t, ids);
}
Value cross_entropy_sum(Value l, std::span<const int32_t> t, std::span<const double> w) {
  return l.tape->cross_entropy_sum(l, t, w);
}
Value bce_with_logits_sum(Value l, std::span<const double> t) {
  return l.tape->bce_with_logits_sum(l, t);
}
Value mean_all(Value a) { return a.tape->mean_all(a); }
Value sum_all(Value a) { return a.tape->sum_all(a); }
Value max_over_rows(Value a) { return a.tape->max_over_rows(a); }
Value scale(Value a, double s) { return a.tape->scale(a, s); }
Value add_const(Value a, double c) { return a.tape->add_const(a, c); }

}  // namespace wf::num

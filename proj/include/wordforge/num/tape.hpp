#pragma once

#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "wordforge/num/tensor.hpp"

namespace wf::num {

class Tape;

// Named trainable array. Models own their parameters; tapes reference them
// for the duration of one forward/backward pass.
struct Parameter {
  std::string name;
  Tensor value;

  Parameter() = default;
  Parameter(std::string n, Tensor v) : name(std::move(n)), value(std::move(v)) {
    value.set_requires_grad(true);
  }
};

// Handle to a node on a tape.
struct Value {
  Tape* tape = nullptr;
  int id = -1;

  bool valid() const { return tape != nullptr && id >= 0; }
};

// Records the forward computation so backward() can replay it in reverse.
// Single-threaded; independent training runs use independent tapes.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaves. constant() never receives gradient; leaf() follows the tensor's
  // requires_grad flag; watch() binds a Parameter (deduped by address) so
  // its gradient can be fetched after backward.
  Value constant(Tensor t);
  Value leaf(Tensor t);
  Value watch(const Parameter& p, bool trainable = true);

  const Tensor& val(Value v) const;
  // Gradient of a leaf after backward(); zero tensor if the leaf was never
  // reached by the backward sweep.
  Tensor grad(Value v) const;
  Tensor grad_of(const Parameter& p) const;
  bool watched(const Parameter& p) const;

  // Reverse sweep from a scalar loss. Errors if loss is not scalar or if
  // called twice without rebuilding the graph.
  void backward(Value loss);
  bool backward_done() const { return backward_done_; }

  size_t num_nodes() const { return nodes_.size(); }

  // Drops all recorded ops, saved intermediates, and gradients.
  void clear();

  // --- primitive ops ---
  Value matmul(Value a, Value b);
  Value add(Value a, Value b);
  Value sub(Value a, Value b);
  Value mul(Value a, Value b);
  Value scale(Value a, double s);
  Value add_const(Value a, double c);
  Value tanh_op(Value a);
  Value sigmoid_op(Value a);
  Value relu_op(Value a);
  Value softmax_rows(Value a);
  Value concat_rows(std::span<const Value> parts);
  Value concat_cols(std::span<const Value> parts);
  Value slice_rows(Value a, int64_t r0, int64_t r1);
  Value slice_cols(Value a, int64_t c0, int64_t c1);
  Value reshape(Value a, Shape shape);
  Value embedding_lookup(Value table, std::span<const int32_t> ids);
  // sum_i weights[i] * (logsumexp(logits[i,:]) - logits[i, targets[i]])
  Value cross_entropy_sum(Value logits, std::span<const int32_t> targets,
                          std::span<const double> weights);
  // sum_i bce(sigmoid(logits_i), targets_i), computed from logits for
  // numerical stability
  Value bce_with_logits_sum(Value logits, std::span<const double> targets);
  Value mean_all(Value a);
  Value sum_all(Value a);
  Value max_over_rows(Value a);

 private:
  enum class Op : uint8_t {
    kLeaf,
    kMatmul,
    kAdd,
    kSub,
    kMul,
    kScale,
    kAddConst,
    kTanh,
    kSigmoid,
    kRelu,
    kSoftmaxRows,
    kConcatRows,
    kConcatCols,
    kSliceRows,
    kSliceCols,
    kReshape,
    kEmbed,
    kCrossEntropySum,
    kBceLogitsSum,
    kMean,
    kSum,
    kMaxOverRows,
  };

  struct Node {
    Op op;
    std::vector<int> inputs;
    Tensor out;
    bool requires_grad = false;
    // op-specific payload
    int64_t i0 = 0, i1 = 0;
    double d0 = 0.0;
    std::vector<int32_t> idx;
    std::vector<double> aux;
  };

  int push(Node n);
  Value out_of(int id) { return Value{this, id}; }
  const Node& node(Value v) const;
  Tensor& grad_buf(int id, const Shape& shape);

  void check_same_tape(Value v, const char* op) const;

  std::vector<Node> nodes_;
  std::vector<Tensor> grads_;
  std::unordered_map<const Parameter*, int> watched_;
  bool backward_done_ = false;
};

// Free-function sugar so model code reads as math.
Value matmul(Value a, Value b);
Value operator+(Value a, Value b);
Value operator-(Value a, Value b);
Value operator*(Value a, Value b);  // elementwise with broadcasting
Value tanh(Value a);
Value sigmoid(Value a);
Value relu(Value a);
Value softmax_rows(Value a);
Value concat_rows(std::span<const Value> parts);
Value concat_cols(std::span<const Value> parts);
Value slice_rows(Value a, int64_t r0, int64_t r1);
Value slice_cols(Value a, int64_t c0, int64_t c1);
Value reshape(Value a, Shape shape);
Value embedding_lookup(Value table, std::span<const int32_t> ids);
Value cross_entropy_sum(Value logits, std::span<const int32_t> targets,
                        std::span<const double> weights);
Value bce_with_logits_sum(Value logits, std::span<const double> targets);
Value mean_all(Value a);
Value sum_all(Value a);
Value max_over_rows(Value a);
Value scale(Value a, double s);
Value add_const(Value a, double c);

}  // namespace wf::num

#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "hga/params.hpp"
#include "hga/tensor.hpp"

namespace hga {

// Handle to a value recorded on a Tape.
struct Var {
  std::size_t id = 0;
};

// Records a computation as a sequence of primitive ops and replays it in
// reverse to accumulate gradients. A tape is single-use and single-threaded;
// parameter leaves reference the ParamStore tensors without copying, so the
// store must outlive the tape and stay unmodified until backward() returns.
class Tape {
 public:
  enum class Mode { kRecord, kInference };

  explicit Tape(Mode mode = Mode::kRecord) : mode_(mode) { nodes_.reserve(256); }

  Var constant(Tensor value);
  Var param(const ParamStore& store, const std::string& name);

  const Tensor& value(Var v) const;
  std::size_t size() const { return nodes_.size(); }
  bool recording() const { return mode_ == Mode::kRecord; }

  // Linear algebra.
  Var matmul(Var a, Var b);
  Var matmul_nt(Var a, Var b);  // a · bᵀ
  Var add(Var a, Var b);
  Var add_row(Var a, Var bias);  // bias of shape {cols} broadcast over rows
  Var mul(Var a, Var b);
  Var scale(Var a, double s);
  // Inverted dropout: zeroes each element with probability `rate` and scales
  // survivors by 1/(1-rate). Identity when rate is 0.
  Var dropout(Var a, double rate, std::mt19937_64& rng);

  // Elementwise nonlinearities.
  Var tanh(Var a);
  Var gelu(Var a);

  // Row-wise ops over the last axis.
  Var softmax_rows(Var a);
  Var layer_norm(Var x, Var gain, Var bias, double eps = 1e-5);
  Var masked_fill(Var a, std::vector<std::uint8_t> mask, double fill);

  Var embedding(Var table, std::span<const int> ids);
  Var rotary(Var x, std::span<const int> positions, double base);
  Var slice_cols(Var x, std::size_t begin, std::size_t count);
  Var concat_cols(std::span<const Var> parts);

  // Scalar log(1 + sum over selected cells of exp(sign * x)).
  Var log1p_sum_exp(Var x, std::vector<std::uint8_t> selected, double sign);
  // Mean token cross-entropy of softmax(logits) against targets; a target
  // of -1 excludes the row. Returns 0 when every row is excluded.
  Var cross_entropy_rows(Var logits, std::span<const int> targets);

  Var sum(Var a);
  Var mean(Var a);

  // Reverse sweep from a scalar; returns gradients of every parameter leaf.
  GradMap backward(Var loss);

 private:
  using Backward = std::function<void(Tape&, std::size_t)>;

  struct Node {
    const Tensor* ref = nullptr;
    Tensor owned;
    Tensor grad;
    bool has_grad = false;
    bool requires_grad = false;
    std::string param;
    const char* op = "";
    Backward backward;
  };

  const Tensor& val(std::size_t id) const;
  Tensor& grad(std::size_t id);
  bool needs(Var v) const { return nodes_[v.id].requires_grad; }
  Var push(const char* op, Tensor value, bool requires_grad, Backward backward);

  Mode mode_;
  std::vector<Node> nodes_;
};

}  // namespace hga

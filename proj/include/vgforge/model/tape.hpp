#pragma once

// Reverse-mode autodiff over dense row-major matrices. One tape per
// forward/backward pass; a tape is not shared between threads.

#include <Eigen/Dense>
#include <functional>
#include <utility>
#include <vector>

namespace vgforge::model {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Var {
  int id = -1;
};

class Tape {
 public:
  /// Input that receives no gradient.
  Var constant(Matrix value);

  /// Leaf whose gradient is added into `*grad_sink` by backward(). The sink
  /// must have the value's shape and outlive the backward call.
  Var param(const Matrix& value, Matrix* grad_sink);

  const Matrix& value(Var v) const { return nodes_[static_cast<std::size_t>(v.id)].value; }
  const Matrix& grad(Var v) const { return nodes_[static_cast<std::size_t>(v.id)].grad; }
  std::size_t size() const noexcept { return nodes_.size(); }

  /// Seeds d(loss)/d(loss) = 1 for a 1x1 node and propagates.
  void backward(Var loss);

  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  /// a (n x m) plus a 1 x m row broadcast to every row.
  Var add_row(Var a, Var row);
  Var scale(Var a, double s);
  /// tanh approximation.
  Var gelu(Var a);
  /// Row-wise normalization with 1 x m gain and bias.
  Var layer_norm(Var x, Var gamma, Var beta, double eps = 1e-5);
  /// Scaled dot-product attention split over `heads` column blocks of q, k, v.
  Var attention(Var q, Var k, Var v, int heads);
  Var vstack(const std::vector<Var>& parts);
  Var row(Var a, int r);
  /// (G*K) x m -> G x m, max over each block of K consecutive rows.
  Var group_max(Var a, int group);
  /// Mean softmax cross-entropy of logits (B x C) against labels, with optional
  /// label smoothing. Returns a 1x1 node.
  Var softmax_cross_entropy(Var logits, const std::vector<int>& labels, double smoothing = 0.0);
  /// sum_k w_k * s_k over 1x1 nodes.
  Var weighted_sum(const std::vector<std::pair<Var, double>>& terms);

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool needs_grad = false;
    Matrix* sink = nullptr;
    std::function<void(Tape&, const Matrix&)> back;
  };

  Var push(Matrix value, bool needs_grad, std::function<void(Tape&, const Matrix&)> back);
  bool needs(Var v) const { return nodes_[static_cast<std::size_t>(v.id)].needs_grad; }
  void accumulate(Var v, const Matrix& g);

  std::vector<Node> nodes_;
};

/// Row-wise softmax.
Matrix softmax_rows(const Matrix& logits);

}  // namespace vgforge::model

#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "posekit/matrix.hpp"

namespace posekit {

class Tape;

/// Handle to a node on a Tape.
struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;

  const Matrix& value() const;
  const Matrix& grad() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
};

/// Reverse-mode tape. Nodes are appended in evaluation order and backward()
/// walks them in reverse.
class Tape {
 public:
  using Backward = std::function<void(Tape&, std::size_t)>;

  Var constant(Matrix value);
  Var parameter(Matrix value);

  /// Seeds d(loss)/d(loss) = 1; loss must be 1x1.
  void backward(Var loss);

  const Matrix& value(std::size_t id) const { return nodes_[id].value; }
  /// Zero-sized when no gradient reached the node.
  const Matrix& grad(std::size_t id) const { return nodes_[id].grad; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  std::size_t size() const { return nodes_.size(); }

  Var record(Matrix value, std::initializer_list<Var> inputs, Backward backward);
  /// grad[id] += g
  void accumulate(std::size_t id, const Matrix& g);

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    Backward backward;
  };
  std::vector<Node> nodes_;
};

namespace ops {

Var matmul(Var a, Var b);
/// a * b^T
Var matmul_nt(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
/// Adds a 1xC row to every row of a.
Var add_row(Var a, Var row);
Var scale(Var a, double s);
/// Elementwise product.
Var mul(Var a, Var b);
Var tanh(Var a);
Var softmax_rows(Var a);
/// Row-wise normalization followed by gain and bias rows (1xC each).
Var layer_norm_rows(Var a, Var gain, Var bias, double eps);
Var slice_cols(Var a, std::size_t begin, std::size_t count);
Var concat_cols(Var a, Var b);
/// Adaptive average pooling over rows down to out_rows.
Var pool_rows(Var a, std::size_t out_rows);
/// Mean over rows, giving 1xC.
Var mean_rows(Var a);
Var sum_squares(Var a);
/// Mean of squared differences.
Var mse(Var a, Var b);

}  // namespace ops

}  // namespace posekit

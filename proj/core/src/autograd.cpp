#include "posekit/autograd.hpp"

#include <algorithm>
#include <cmath>

#include "posekit/error.hpp"

namespace posekit {

const Matrix& Var::value() const { return tape->value(id); }
const Matrix& Var::grad() const { return tape->grad(id); }

Var Tape::constant(Matrix value) {
  nodes_.push_back({std::move(value), Matrix(), false, nullptr});
  return {this, nodes_.size() - 1};
}

Var Tape::parameter(Matrix value) {
  nodes_.push_back({std::move(value), Matrix(), true, nullptr});
  return {this, nodes_.size() - 1};
}

Var Tape::record(Matrix value, std::initializer_list<Var> inputs, Backward backward) {
  bool needs = false;
  for (const Var& v : inputs) {
    if (v.tape != this) throw ShapeError("operand belongs to another tape");
    needs = needs || nodes_[v.id].requires_grad;
  }
  nodes_.push_back({std::move(value), Matrix(), needs, needs ? std::move(backward) : nullptr});
  return {this, nodes_.size() - 1};
}

void Tape::accumulate(std::size_t id, const Matrix& g) {
  Node& n = nodes_[id];
  if (!n.requires_grad) return;
  if (n.grad.empty()) {
    n.grad = Matrix(n.value.rows(), n.value.cols());
  }
  axpy(n.grad, 1.0, g);
}

void Tape::backward(Var loss) {
  if (loss.tape != this) throw ShapeError("loss belongs to another tape");
  const Matrix& v = nodes_[loss.id].value;
  if (v.rows() != 1 || v.cols() != 1) {
    throw ShapeError("backward needs a 1x1 loss, got " + v.shape_string());
  }
  for (Node& n : nodes_) n.grad = Matrix();
  accumulate(loss.id, Matrix(1, 1, 1.0));
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || !n.backward || n.grad.empty()) continue;
    n.backward(*this, i);
  }
}

namespace ops {
namespace {

void check_same(const Var& a, const Var& b, const char* what) {
  require_same_shape(a.value(), b.value(), what);
}

}  // namespace

Var matmul(Var a, Var b) {
  return a.tape->record(posekit::matmul(a.value(), b.value()), {a, b},
                        [a, b](Tape& t, std::size_t self) {
                          const Matrix& g = t.grad(self);
                          if (t.requires_grad(a.id)) t.accumulate(a.id, matmul_nt(g, b.value()));
                          if (t.requires_grad(b.id)) t.accumulate(b.id, matmul_tn(a.value(), g));
                        });
}

Var matmul_nt(Var a, Var b) {
  return a.tape->record(posekit::matmul_nt(a.value(), b.value()), {a, b},
                        [a, b](Tape& t, std::size_t self) {
                          const Matrix& g = t.grad(self);
                          if (t.requires_grad(a.id)) t.accumulate(a.id, posekit::matmul(g, b.value()));
                          if (t.requires_grad(b.id)) t.accumulate(b.id, matmul_tn(g, a.value()));
                        });
}

Var add(Var a, Var b) {
  check_same(a, b, "add");
  Matrix out = a.value();
  axpy(out, 1.0, b.value());
  return a.tape->record(std::move(out), {a, b}, [a, b](Tape& t, std::size_t self) {
    t.accumulate(a.id, t.grad(self));
    t.accumulate(b.id, t.grad(self));
  });
}

Var sub(Var a, Var b) {
  check_same(a, b, "sub");
  Matrix out = a.value();
  axpy(out, -1.0, b.value());
  return a.tape->record(std::move(out), {a, b}, [a, b](Tape& t, std::size_t self) {
    t.accumulate(a.id, t.grad(self));
    Matrix g = t.grad(self);
    for (double& v : g.values()) v = -v;
    t.accumulate(b.id, g);
  });
}

Var add_row(Var a, Var row) {
  const Matrix& av = a.value();
  const Matrix& rv = row.value();
  if (rv.rows() != 1 || rv.cols() != av.cols()) {
    throw ShapeError("add_row " + av.shape_string() + " with " + rv.shape_string());
  }
  Matrix out = av;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) += rv(0, j);
  }
  return a.tape->record(std::move(out), {a, row}, [a, row](Tape& t, std::size_t self) {
    const Matrix& g = t.grad(self);
    t.accumulate(a.id, g);
    if (t.requires_grad(row.id)) {
      Matrix gr(1, g.cols());
      for (std::size_t i = 0; i < g.rows(); ++i) {
        for (std::size_t j = 0; j < g.cols(); ++j) gr(0, j) += g(i, j);
      }
      t.accumulate(row.id, gr);
    }
  });
}

Var scale(Var a, double s) {
  Matrix out = a.value();
  for (double& v : out.values()) v *= s;
  return a.tape->record(std::move(out), {a}, [a, s](Tape& t, std::size_t self) {
    Matrix g = t.grad(self);
    for (double& v : g.values()) v *= s;
    t.accumulate(a.id, g);
  });
}

Var mul(Var a, Var b) {
  check_same(a, b, "mul");
  Matrix out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  return a.tape->record(std::move(out), {a, b}, [a, b](Tape& t, std::size_t self) {
    const Matrix& g = t.grad(self);
    if (t.requires_grad(a.id)) {
      Matrix ga = g;
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] *= b.value()[i];
      t.accumulate(a.id, ga);
    }
    if (t.requires_grad(b.id)) {
      Matrix gb = g;
      for (std::size_t i = 0; i < gb.size(); ++i) gb[i] *= a.value()[i];
      t.accumulate(b.id, gb);
    }
  });
}

Var tanh(Var a) {
  Matrix out = a.value();
  for (double& v : out.values()) v = std::tanh(v);
  return a.tape->record(std::move(out), {a}, [a](Tape& t, std::size_t self) {
    Matrix g = t.grad(self);
    const Matrix& y = t.value(self);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] *= 1.0 - y[i] * y[i];
    t.accumulate(a.id, g);
  });
}

Var softmax_rows(Var a) {
  Matrix out = a.value();
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto r = out.row(i);
    const double m = *std::max_element(r.begin(), r.end());
    double s = 0.0;
    for (double& v : r) {
      v = std::exp(v - m);
      s += v;
    }
    for (double& v : r) v /= s;
  }
  return a.tape->record(std::move(out), {a}, [a](Tape& t, std::size_t self) {
    Matrix g = t.grad(self);
    const Matrix& y = t.value(self);
    for (std::size_t i = 0; i < g.rows(); ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < g.cols(); ++j) dot += g(i, j) * y(i, j);
      for (std::size_t j = 0; j < g.cols(); ++j) g(i, j) = y(i, j) * (g(i, j) - dot);
    }
    t.accumulate(a.id, g);
  });
}

Var layer_norm_rows(Var a, Var gain, Var bias, double eps) {
  const Matrix& x = a.value();
  const std::size_t n = x.cols();
  if (gain.value().rows() != 1 || gain.value().cols() != n || !gain.value().same_shape(bias.value())) {
    throw ShapeError("layer_norm " + x.shape_string() + " with gain " + gain.value().shape_string());
  }
  Matrix xhat(x.rows(), n);
  std::vector<double> inv(x.rows());
  Matrix out(x.rows(), n);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double mean = 0.0;
    for (std::size_t j = 0; j < n; ++j) mean += x(i, j);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t j = 0; j < n; ++j) var += (x(i, j) - mean) * (x(i, j) - mean);
    var /= static_cast<double>(n);
    inv[i] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < n; ++j) {
      xhat(i, j) = (x(i, j) - mean) * inv[i];
      out(i, j) = gain.value()(0, j) * xhat(i, j) + bias.value()(0, j);
    }
  }
  return a.tape->record(
      std::move(out), {a, gain, bias},
      [a, gain, bias, xhat = std::move(xhat), inv = std::move(inv)](Tape& t, std::size_t self) {
        const Matrix& g = t.grad(self);
        const std::size_t rows = g.rows();
        const std::size_t cols = g.cols();
        if (t.requires_grad(gain.id) || t.requires_grad(bias.id)) {
          Matrix gg(1, cols);
          Matrix gb(1, cols);
          for (std::size_t i = 0; i < rows; ++i) {
            for (std::size_t j = 0; j < cols; ++j) {
              gg(0, j) += g(i, j) * xhat(i, j);
              gb(0, j) += g(i, j);
            }
          }
          t.accumulate(gain.id, gg);
          t.accumulate(bias.id, gb);
        }
        if (t.requires_grad(a.id)) {
          Matrix gx(rows, cols);
          const Matrix& gain_v = gain.value();
          for (std::size_t i = 0; i < rows; ++i) {
            double m1 = 0.0;
            double m2 = 0.0;
            for (std::size_t j = 0; j < cols; ++j) {
              const double d = g(i, j) * gain_v(0, j);
              m1 += d;
              m2 += d * xhat(i, j);
            }
            m1 /= static_cast<double>(cols);
            m2 /= static_cast<double>(cols);
            for (std::size_t j = 0; j < cols; ++j) {
              const double d = g(i, j) * gain_v(0, j);
              gx(i, j) = inv[i] * (d - m1 - xhat(i, j) * m2);
            }
          }
          t.accumulate(a.id, gx);
        }
      });
}

Var slice_cols(Var a, std::size_t begin, std::size_t count) {
  const Matrix& x = a.value();
  if (begin + count > x.cols()) {
    throw ShapeError("slice_cols [" + std::to_string(begin) + ", " + std::to_string(begin + count) +
                     ") of " + x.shape_string());
  }
  Matrix out(x.rows(), count);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < count; ++j) out(i, j) = x(i, begin + j);
  }
  return a.tape->record(std::move(out), {a}, [a, begin, count](Tape& t, std::size_t self) {
    const Matrix& g = t.grad(self);
    Matrix ga(a.value().rows(), a.value().cols());
    for (std::size_t i = 0; i < g.rows(); ++i) {
      for (std::size_t j = 0; j < count; ++j) ga(i, begin + j) = g(i, j);
    }
    t.accumulate(a.id, ga);
  });
}

Var concat_cols(Var a, Var b) {
  const Matrix& x = a.value();
  const Matrix& y = b.value();
  if (x.rows() != y.rows()) {
    throw ShapeError("concat_cols " + x.shape_string() + " with " + y.shape_string());
  }
  Matrix out(x.rows(), x.cols() + y.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < x.cols(); ++j) out(i, j) = x(i, j);
    for (std::size_t j = 0; j < y.cols(); ++j) out(i, x.cols() + j) = y(i, j);
  }
  return a.tape->record(std::move(out), {a, b}, [a, b](Tape& t, std::size_t self) {
    const Matrix& g = t.grad(self);
    const std::size_t ca = a.value().cols();
    const std::size_t cb = b.value().cols();
    if (t.requires_grad(a.id)) {
      Matrix ga(g.rows(), ca);
      for (std::size_t i = 0; i < g.rows(); ++i) {
        for (std::size_t j = 0; j < ca; ++j) ga(i, j) = g(i, j);
      }
      t.accumulate(a.id, ga);
    }
    if (t.requires_grad(b.id)) {
      Matrix gb(g.rows(), cb);
      for (std::size_t i = 0; i < g.rows(); ++i) {
        for (std::size_t j = 0; j < cb; ++j) gb(i, j) = g(i, ca + j);
      }
      t.accumulate(b.id, gb);
    }
  });
}

Var pool_rows(Var a, std::size_t out_rows) {
  const Matrix& x = a.value();
  const std::size_t n = x.rows();
  if (out_rows == 0 || n == 0) throw ShapeError("pool_rows needs non-empty input and output");
  std::vector<std::size_t> lo(out_rows);
  std::vector<std::size_t> hi(out_rows);
  Matrix out(out_rows, x.cols());
  for (std::size_t i = 0; i < out_rows; ++i) {
    lo[i] = i * n / out_rows;
    hi[i] = ((i + 1) * n + out_rows - 1) / out_rows;
    const double w = 1.0 / static_cast<double>(hi[i] - lo[i]);
    for (std::size_t r = lo[i]; r < hi[i]; ++r) {
      for (std::size_t j = 0; j < x.cols(); ++j) out(i, j) += w * x(r, j);
    }
  }
  return a.tape->record(std::move(out), {a},
                        [a, lo = std::move(lo), hi = std::move(hi)](Tape& t, std::size_t self) {
                          const Matrix& g = t.grad(self);
                          Matrix ga(a.value().rows(), a.value().cols());
                          for (std::size_t i = 0; i < g.rows(); ++i) {
                            const double w = 1.0 / static_cast<double>(hi[i] - lo[i]);
                            for (std::size_t r = lo[i]; r < hi[i]; ++r) {
                              for (std::size_t j = 0; j < g.cols(); ++j) ga(r, j) += w * g(i, j);
                            }
                          }
                          t.accumulate(a.id, ga);
                        });
}

Var mean_rows(Var a) { return pool_rows(a, 1); }

Var sum_squares(Var a) {
  double s = 0.0;
  for (double v : a.value().values()) s += v * v;
  return a.tape->record(Matrix(1, 1, s), {a}, [a](Tape& t, std::size_t self) {
    const double g = t.grad(self)(0, 0);
    Matrix ga = a.value();
    for (double& v : ga.values()) v *= 2.0 * g;
    t.accumulate(a.id, ga);
  });
}

Var mse(Var a, Var b) {
  const Var d = sub(a, b);
  const double n = static_cast<double>(d.value().size());
  return scale(sum_squares(d), 1.0 / n);
}

}  // namespace ops
}  // namespace posekit

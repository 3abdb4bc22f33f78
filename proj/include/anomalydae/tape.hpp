#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "anomalydae/activation.hpp"
#include "anomalydae/errors.hpp"
#include "anomalydae/matrix.hpp"
#include "anomalydae/row_mask.hpp"

namespace anomalydae {

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; only valid while the
/// owning tape is alive.
struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;
};

/// Reverse-mode computation record over dense matrices.
///
/// Every op appends a node holding its forward value and a closure that
/// pushes the node's adjoint onto its inputs. `backward` seeds a 1x1 root
/// with 1 and replays the closures in reverse order of recording, so every
/// node reachable from the root and flagged `requires_grad` ends up with a
/// gradient of its own shape. Nodes never reached keep an empty gradient,
/// reported as zeros by `grad`.
class Tape {
 public:
  using Backward = std::function<void(Tape&, const Matrix& adjoint)>;

  Var leaf(Matrix value) { return push(std::move(value), true, {}); }
  Var constant(Matrix value) { return push(std::move(value), false, {}); }

  const Matrix& value(Var v) const { return nodes_.at(v.id).value; }
  bool requires_grad(Var v) const { return nodes_.at(v.id).requires_grad; }
  std::size_t size() const noexcept { return nodes_.size(); }

  Matrix grad(Var v) const {
    const auto& n = nodes_.at(v.id);
    if (n.grad.size() == 0 && n.value.size() != 0) return Matrix(n.value.rows(), n.value.cols());
    return n.grad;
  }

  void backward(Var root) {
    const auto& r = nodes_.at(root.id).value;
    if (r.rows() != 1 || r.cols() != 1) {
      throw ShapeError("backward: root must be 1x1, got " + r.shape_string());
    }
    for (auto& n : nodes_) n.grad = Matrix();
    nodes_[root.id].grad = Matrix(1, 1, 1.0);
    for (std::size_t i = root.id + 1; i-- > 0;) {
      auto& n = nodes_[i];
      if (!n.backward || n.grad.size() == 0) continue;
      // Inputs always have smaller ids, so n.grad is stable during the call.
      n.backward(*this, n.grad);
    }
  }

  /// Records a derived node. `requires_grad` should be the OR over inputs.
  Var push(Matrix value, bool requires_grad, Backward backward) {
    nodes_.push_back(Node{std::move(value), Matrix(), requires_grad,
                          requires_grad ? std::move(backward) : Backward{}});
    return Var{this, nodes_.size() - 1};
  }

  void accumulate(Var v, const Matrix& delta) {
    auto& n = nodes_.at(v.id);
    if (!n.requires_grad) return;
    if (n.grad.size() == 0) {
      n.grad = delta;
      return;
    }
    for (std::size_t i = 0; i < delta.size(); ++i) n.grad[i] += delta[i];
  }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad;
    Backward backward;
  };
  std::vector<Node> nodes_;
};

namespace detail {

inline Tape& same_tape(Var a, Var b, const char* op) {
  if (a.tape == nullptr || a.tape != b.tape) throw ShapeError(std::string(op) + ": operands on different tapes");
  return *a.tape;
}

inline bool any_grad(Var a) { return a.tape->requires_grad(a); }
inline bool any_grad(Var a, Var b) { return a.tape->requires_grad(a) || b.tape->requires_grad(b); }

}  // namespace detail

inline Var matmul(Var a, Var b) {
  Tape& t = detail::same_tape(a, b, "matmul");
  return t.push(matmul(t.value(a), t.value(b)), detail::any_grad(a, b),
                [a, b](Tape& t, const Matrix& g) {
                  if (t.requires_grad(a)) t.accumulate(a, matmul_nt(g, t.value(b)));
                  if (t.requires_grad(b)) t.accumulate(b, matmul_tn(t.value(a), g));
                });
}

inline Var transpose(Var a) {
  Tape& t = *a.tape;
  return t.push(transpose(t.value(a)), detail::any_grad(a),
                [a](Tape& t, const Matrix& g) { t.accumulate(a, transpose(g)); });
}

inline Var add(Var a, Var b) {
  Tape& t = detail::same_tape(a, b, "add");
  return t.push(add(t.value(a), t.value(b)), detail::any_grad(a, b),
                [a, b](Tape& t, const Matrix& g) {
                  t.accumulate(a, g);
                  t.accumulate(b, g);
                });
}

inline Var sub(Var a, Var b) {
  Tape& t = detail::same_tape(a, b, "sub");
  return t.push(sub(t.value(a), t.value(b)), detail::any_grad(a, b),
                [a, b](Tape& t, const Matrix& g) {
                  t.accumulate(a, g);
                  if (t.requires_grad(b)) t.accumulate(b, scale(g, -1.0));
                });
}

inline Var hadamard(Var a, Var b) {
  Tape& t = detail::same_tape(a, b, "hadamard");
  return t.push(hadamard(t.value(a), t.value(b)), detail::any_grad(a, b),
                [a, b](Tape& t, const Matrix& g) {
                  if (t.requires_grad(a)) t.accumulate(a, hadamard(g, t.value(b)));
                  if (t.requires_grad(b)) t.accumulate(b, hadamard(g, t.value(a)));
                });
}

inline Var scale(Var a, double s) {
  Tape& t = *a.tape;
  return t.push(scale(t.value(a), s), detail::any_grad(a),
                [a, s](Tape& t, const Matrix& g) { t.accumulate(a, scale(g, s)); });
}

inline Var add_row_bias(Var a, Var bias) {
  Tape& t = detail::same_tape(a, bias, "add_row_bias");
  return t.push(add_row_bias(t.value(a), t.value(bias)), detail::any_grad(a, bias),
                [a, bias](Tape& t, const Matrix& g) {
                  t.accumulate(a, g);
                  if (!t.requires_grad(bias)) return;
                  Matrix gb(1, g.cols());
                  for (std::size_t i = 0; i < g.rows(); ++i)
                    for (std::size_t j = 0; j < g.cols(); ++j) gb[j] += g(i, j);
                  t.accumulate(bias, gb);
                });
}

inline Var concat_cols(Var a, Var b) {
  Tape& t = detail::same_tape(a, b, "concat_cols");
  const std::size_t left = t.value(a).cols();
  return t.push(concat_cols(t.value(a), t.value(b)), detail::any_grad(a, b),
                [a, b, left](Tape& t, const Matrix& g) {
                  Matrix ga(g.rows(), left), gb(g.rows(), g.cols() - left);
                  for (std::size_t i = 0; i < g.rows(); ++i) {
                    for (std::size_t j = 0; j < left; ++j) ga(i, j) = g(i, j);
                    for (std::size_t j = left; j < g.cols(); ++j) gb(i, j - left) = g(i, j);
                  }
                  t.accumulate(a, ga);
                  t.accumulate(b, gb);
                });
}

inline Var activation(Var a, Activation kind) {
  Tape& t = *a.tape;
  return t.push(kind.apply(t.value(a)), detail::any_grad(a),
                [a, kind, out_id = t.size()](Tape& t, const Matrix& g) {
                  const Matrix& x = t.value(a);
                  const Matrix& y = t.value(Var{&t, out_id});
                  Matrix d(g.rows(), g.cols());
                  for (std::size_t i = 0; i < g.size(); ++i) d[i] = g[i] * kind.derivative(x[i], y[i]);
                  t.accumulate(a, d);
                });
}

/// Returns a 1x1 node holding sum((residual ⊙ weights)^2). Weights are
/// constants; no gradient flows into them.
inline Var weighted_frobenius_sq(Var residual, const Matrix& weights) {
  Tape& t = *residual.tape;
  return t.push(Matrix(1, 1, weighted_frobenius_sq(t.value(residual), weights)),
                detail::any_grad(residual),
                [residual, weights](Tape& t, const Matrix& g) {
                  const Matrix& r = t.value(residual);
                  Matrix d(r.rows(), r.cols());
                  for (std::size_t i = 0; i < r.size(); ++i) d[i] = 2.0 * g[0] * r[i] * weights[i] * weights[i];
                  t.accumulate(residual, d);
                });
}

/// Per masked entry (i, j): u_i + v_j. u and v are n x 1; result is nnz x 1.
inline Var mask_pair_sum(Var u, Var v, const RowMask& mask) {
  Tape& t = detail::same_tape(u, v, "mask_pair_sum");
  const Matrix& uv = t.value(u);
  const Matrix& vv = t.value(v);
  if (uv.rows() != mask.size() || uv.cols() != 1 || !vv.same_shape(uv)) {
    throw ShapeError("mask_pair_sum: operands " + uv.shape_string() + ", " + vv.shape_string() +
                     " for mask of size " + std::to_string(mask.size()));
  }
  Matrix out(mask.nnz(), 1);
  for (std::size_t i = 0; i < mask.size(); ++i)
    for (std::size_t k = mask.begin(i); k < mask.end(i); ++k) out[k] = uv[i] + vv[mask.cols()[k]];
  return t.push(std::move(out), detail::any_grad(u, v), [u, v, &mask](Tape& t, const Matrix& g) {
    Matrix gu(mask.size(), 1), gv(mask.size(), 1);
    for (std::size_t i = 0; i < mask.size(); ++i) {
      for (std::size_t k = mask.begin(i); k < mask.end(i); ++k) {
        gu[i] += g[k];
        gv[mask.cols()[k]] += g[k];
      }
    }
    t.accumulate(u, gu);
    t.accumulate(v, gv);
  });
}

/// Row softmax over masked entries (nnz x 1). The mask must outlive the tape.
inline Var masked_row_softmax(Var logits, const RowMask& mask) {
  Tape& t = *logits.tape;
  return t.push(masked_row_softmax_entries(t.value(logits), mask), detail::any_grad(logits),
                [logits, &mask, out_id = t.size()](Tape& t, const Matrix& g) {
                  const Matrix& y = t.value(Var{&t, out_id});
                  Matrix d(y.rows(), 1);
                  for (std::size_t i = 0; i < mask.size(); ++i) {
                    double dot = 0.0;
                    for (std::size_t k = mask.begin(i); k < mask.end(i); ++k) dot += g[k] * y[k];
                    for (std::size_t k = mask.begin(i); k < mask.end(i); ++k) d[k] = y[k] * (g[k] - dot);
                  }
                  t.accumulate(logits, d);
                });
}

/// out_i = sum over masked (i, j) of weights_ij * dense_j. weights is nnz x 1,
/// dense is n x c.
inline Var mask_aggregate(Var weights, const RowMask& mask, Var dense) {
  Tape& t = detail::same_tape(weights, dense, "mask_aggregate");
  mask.require_entries(t.value(weights), "mask_aggregate");
  const Matrix& w = t.value(weights);
  const Matrix& x = t.value(dense);
  if (x.rows() != mask.size()) {
    throw ShapeError("mask_aggregate: dense operand " + x.shape_string() + " for mask of size " +
                     std::to_string(mask.size()));
  }
  Matrix out(mask.size(), x.cols());
  for (std::size_t i = 0; i < mask.size(); ++i) {
    auto o = out.row(i);
    for (std::size_t k = mask.begin(i); k < mask.end(i); ++k) {
      auto xr = x.row(mask.cols()[k]);
      for (std::size_t c = 0; c < o.size(); ++c) o[c] += w[k] * xr[c];
    }
  }
  return t.push(std::move(out), detail::any_grad(weights, dense),
                [weights, dense, &mask](Tape& t, const Matrix& g) {
                  const Matrix& w = t.value(weights);
                  const Matrix& x = t.value(dense);
                  Matrix gw(w.rows(), 1), gx(x.rows(), x.cols());
                  for (std::size_t i = 0; i < mask.size(); ++i) {
                    auto gi = g.row(i);
                    for (std::size_t k = mask.begin(i); k < mask.end(i); ++k) {
                      const std::size_t j = mask.cols()[k];
                      auto xr = x.row(j);
                      auto gxr = gx.row(j);
                      double s = 0.0;
                      for (std::size_t c = 0; c < gi.size(); ++c) {
                        s += gi[c] * xr[c];
                        gxr[c] += w[k] * gi[c];
                      }
                      gw[k] = s;
                    }
                  }
                  t.accumulate(weights, gw);
                  t.accumulate(dense, gx);
                });
}

}  // namespace anomalydae

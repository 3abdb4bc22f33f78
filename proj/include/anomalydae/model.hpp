#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "anomalydae/activation.hpp"
#include "anomalydae/errors.hpp"
#include "anomalydae/matrix.hpp"
#include "anomalydae/network.hpp"
#include "anomalydae/row_mask.hpp"
#include "anomalydae/tape.hpp"

namespace anomalydae {

struct HyperParams {
  double alpha = 0.7;
  double eta = 5.0;
  double theta = 40.0;
  std::size_t embed_dim = 128;
  /// Width of the attribute encoder's hidden layer; 0 means 2 * embed_dim.
  std::size_t hidden_dim = 0;
  double learning_rate = 0.001;
  std::size_t iterations = 100;
  Activation encoder_activation = Activation::tanh();
  Activation attention_activation = Activation::leaky_relu(0.2);
  /// Each node attends over itself as well as its neighbors.
  bool self_attention = true;
  /// Scale every attribute row to unit L2 norm before training.
  bool normalize_attributes = false;
  std::uint64_t seed = 0;

  std::size_t hidden() const noexcept { return hidden_dim == 0 ? 2 * embed_dim : hidden_dim; }

  void validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0, 1]");
    if (!(eta > 1.0) || !std::isfinite(eta)) throw ConfigError("eta must be > 1");
    if (!(theta > 1.0) || !std::isfinite(theta)) throw ConfigError("theta must be > 1");
    if (embed_dim < 2 || embed_dim % 2 != 0) throw ConfigError("embed_dim must be even and >= 2");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning_rate must be > 0");
  }
};

/// Learnable weights of both autoencoders. Biases are 1 x width rows; the
/// attention vector is D x 1.
struct ModelParams {
  Matrix w_v1;  // N x D
  Matrix b_v1;  // 1 x D
  Matrix w_v2;  // D/2 x D
  Matrix a;     // D x 1
  Matrix w_a1;  // M x H
  Matrix b_a1;  // 1 x H
  Matrix w_a2;  // H x D
  Matrix b_a2;  // 1 x D

  static constexpr std::size_t count = 8;
  static constexpr std::array<std::string_view, count> names = {"w_v1", "b_v1", "w_v2", "a",
                                                                "w_a1", "b_a1", "w_a2", "b_a2"};

  std::array<Matrix*, count> tensors() { return {&w_v1, &b_v1, &w_v2, &a, &w_a1, &b_a1, &w_a2, &b_a2}; }
  std::array<const Matrix*, count> tensors() const {
    return {&w_v1, &b_v1, &w_v2, &a, &w_a1, &b_a1, &w_a2, &b_a2};
  }

  std::vector<Matrix> to_vector() const {
    std::vector<Matrix> out;
    for (const auto* t : tensors()) out.push_back(*t);
    return out;
  }

  static ModelParams from_vector(std::vector<Matrix> v) {
    if (v.size() != count) throw ShapeError("ModelParams expects " + std::to_string(count) + " tensors");
    ModelParams p;
    auto dst = p.tensors();
    for (std::size_t i = 0; i < count; ++i) *dst[i] = std::move(v[i]);
    return p;
  }

  /// Expected shape of every tensor for (M, N, D, H).
  static std::array<std::pair<std::size_t, std::size_t>, count> shapes(std::size_t m, std::size_t n, std::size_t d,
                                                                       std::size_t h) {
    return {{{n, d}, {1, d}, {d / 2, d}, {d, 1}, {m, h}, {1, h}, {h, d}, {1, d}}};
  }

  void check_shapes(std::size_t m, std::size_t n, std::size_t d, std::size_t h) const {
    const auto expected = shapes(m, n, d, h);
    const auto ts = tensors();
    for (std::size_t i = 0; i < count; ++i) {
      if (ts[i]->rows() != expected[i].first || ts[i]->cols() != expected[i].second) {
        throw ShapeError("parameter " + std::string(names[i]) + " is " + ts[i]->shape_string() + ", expected " +
                         std::to_string(expected[i].first) + "x" + std::to_string(expected[i].second));
      }
    }
  }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Glorot-uniform weights in +-sqrt(6 / (rows + cols)), zero biases.
inline ModelParams init_params(std::size_t m, std::size_t n, const HyperParams& hp) {
  hp.validate();
  const std::size_t d = hp.embed_dim, h = hp.hidden();
  std::mt19937_64 rng(hp.seed);
  ModelParams p;
  auto ts = p.tensors();
  const auto shapes = ModelParams::shapes(m, n, d, h);
  for (std::size_t i = 0; i < ModelParams::count; ++i) {
    auto [r, c] = shapes[i];
    *ts[i] = Matrix(r, c);
    if (ModelParams::names[i].starts_with("b_")) continue;
    const double limit = std::sqrt(6.0 / static_cast<double>(r + c));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (auto& v : ts[i]->values()) v = dist(rng);
  }
  return p;
}

/// Graph-derived constants used by every forward pass: the (optionally
/// normalized) attributes, the dense adjacency, the attention mask, and the
/// penalty matrices (theta where A != 0, eta where X != 0, 1 elsewhere).
struct ModelInputs {
  Matrix x;
  Matrix adjacency;
  RowMask mask;
  Matrix structure_weights;
  Matrix attribute_weights;

  std::size_t node_count() const noexcept { return x.rows(); }
  std::size_t attribute_dim() const noexcept { return x.cols(); }
};

inline Matrix normalize_rows(Matrix x) {
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto r = x.row(i);
    double s = 0.0;
    for (double v : r) s += v * v;
    if (s == 0.0) continue;
    const double inv = 1.0 / std::sqrt(s);
    for (double& v : r) v *= inv;
  }
  return x;
}

inline RowMask attention_mask(const AttributedNetwork& net, bool self_attention) {
  std::vector<std::vector<std::size_t>> rows(net.node_count());
  for (std::size_t i = 0; i < net.node_count(); ++i) {
    rows[i] = net.neighbors(i);
    if (self_attention) rows[i].push_back(i);
    if (rows[i].empty()) {
      throw IsolatedNodeError("node " + std::to_string(i) + " has no neighbors and self-attention is disabled");
    }
  }
  return RowMask(std::move(rows));
}

inline Matrix penalty_weights(const Matrix& target, double penalty) {
  Matrix w(target.rows(), target.cols(), 1.0);
  for (std::size_t i = 0; i < target.size(); ++i)
    if (target[i] != 0.0) w[i] = penalty;
  return w;
}

inline ModelInputs make_inputs(const AttributedNetwork& net, const HyperParams& hp) {
  ModelInputs in;
  in.x = hp.normalize_attributes ? normalize_rows(net.attributes()) : net.attributes();
  in.adjacency = net.adjacency();
  in.mask = attention_mask(net, hp.self_attention);
  in.structure_weights = penalty_weights(in.adjacency, hp.theta);
  in.attribute_weights = penalty_weights(in.x, hp.eta);
  return in;
}

struct ParamVars {
  Var w_v1, b_v1, w_v2, a, w_a1, b_a1, w_a2, b_a2;

  static ParamVars from_span(std::span<const Var> v) {
    if (v.size() != ModelParams::count) throw ShapeError("expected 8 parameter vars");
    return {v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7]};
  }
  std::array<Var, ModelParams::count> all() const { return {w_v1, b_v1, w_v2, a, w_a1, b_a1, w_a2, b_a2}; }
};

inline ParamVars record_params(Tape& tape, const ModelParams& p, bool trainable = true) {
  std::array<Var, ModelParams::count> v;
  const auto ts = p.tensors();
  for (std::size_t i = 0; i < ModelParams::count; ++i) v[i] = trainable ? tape.leaf(*ts[i]) : tape.constant(*ts[i]);
  return ParamVars::from_span(v);
}

// ---------------------------------------------------------------------------
// Recorded (differentiable) forward pass.

struct StructureEncoding {
  Var hidden;     // σ(X W_v1 + b_v1), M x D
  Var attention;  // softmax-normalized weights per masked pair, nnz x 1
  Var embedding;  // Z_v, M x D
};

/// Node embeddings via masked graph attention. `x` is the M x N attribute
/// constant; `in.mask` must outlive the tape.
inline StructureEncoding record_structure_encoder(Var x, const ModelInputs& in, const ParamVars& p,
                                                  const HyperParams& hp) {
  Tape& t = *x.tape;
  const Var hidden = activation(add_row_bias(matmul(x, p.w_v1), p.b_v1), hp.encoder_activation);
  // Rows of `projected` are W_v2 z_i. The attention logit for (i, j) is
  // a^T [W_v2 z_i || W_v2 z_j], split into a source and a target term.
  const Var projected = matmul(hidden, transpose(p.w_v2));
  const Matrix& pv = t.value(projected);
  const Var zeros = t.constant(Matrix(pv.rows(), pv.cols()));
  const Var source = matmul(concat_cols(projected, zeros), p.a);
  const Var target = matmul(concat_cols(zeros, projected), p.a);
  const Var logits = activation(mask_pair_sum(source, target, in.mask), hp.attention_activation);
  const Var attention = masked_row_softmax(logits, in.mask);
  return {hidden, attention, mask_aggregate(attention, in.mask, hidden)};
}

/// Attribute embeddings Z_a (N x D): two layers over X^T, linear output.
inline Var record_attribute_encoder(Var x, const ParamVars& p, const HyperParams& hp) {
  const Var hidden = activation(add_row_bias(matmul(transpose(x), p.w_a1), p.b_a1), hp.encoder_activation);
  return add_row_bias(matmul(hidden, p.w_a2), p.b_a2);
}

inline Var record_structure_decoder(Var z_v) { return activation(matmul(z_v, transpose(z_v)), Activation::sigmoid()); }

inline Var record_attribute_decoder(Var z_v, Var z_a) { return matmul(z_v, transpose(z_a)); }

struct LossVars {
  Var structure;  // α-weighted structure term
  Var attribute;  // (1-α)-weighted attribute term
  Var total;
};

inline LossVars record_loss(Var adjacency, Var a_hat, Var x, Var x_hat, const ModelInputs& in, double alpha) {
  const Var s = scale(weighted_frobenius_sq(sub(adjacency, a_hat), in.structure_weights), alpha);
  const Var a = scale(weighted_frobenius_sq(sub(x, x_hat), in.attribute_weights), 1.0 - alpha);
  return {s, a, add(s, a)};
}

struct ForwardVars {
  StructureEncoding structure;
  Var z_a;
  Var a_hat;
  Var x_hat;
  LossVars loss;
};

inline ForwardVars record_forward(Tape& tape, const ModelInputs& in, const ParamVars& p, const HyperParams& hp) {
  const Var x = tape.constant(in.x);
  const Var adjacency = tape.constant(in.adjacency);
  ForwardVars f;
  f.structure = record_structure_encoder(x, in, p, hp);
  f.z_a = record_attribute_encoder(x, p, hp);
  f.a_hat = record_structure_decoder(f.structure.embedding);
  f.x_hat = record_attribute_decoder(f.structure.embedding, f.z_a);
  f.loss = record_loss(adjacency, f.a_hat, x, f.x_hat, in, hp.alpha);
  return f;
}

// ---------------------------------------------------------------------------
// Value-level operations.

/// Z_v for the given network, parameters and hyperparameters.
inline Matrix structure_encode(const ModelInputs& in, const ModelParams& params, const HyperParams& hp) {
  Tape tape;
  const auto p = record_params(tape, params, false);
  return tape.value(record_structure_encoder(tape.constant(in.x), in, p, hp).embedding);
}

inline Matrix structure_encode(const AttributedNetwork& net, const ModelParams& params, const HyperParams& hp) {
  return structure_encode(make_inputs(net, hp), params, hp);
}

/// Dense M x M attention matrix γ, zero outside each node's attention neighborhood.
inline Matrix attention_weights(const ModelInputs& in, const ModelParams& params, const HyperParams& hp) {
  Tape tape;
  const auto p = record_params(tape, params, false);
  return in.mask.scatter(tape.value(record_structure_encoder(tape.constant(in.x), in, p, hp).attention));
}

inline Matrix structure_decode(const Matrix& z_v) {
  // (i, j) and (j, i) accumulate the same products in the same order.
  return Activation::sigmoid().apply(matmul_nt(z_v, z_v));
}

inline Matrix attribute_encode(const ModelInputs& in, const ModelParams& params, const HyperParams& hp) {
  Tape tape;
  const auto p = record_params(tape, params, false);
  return tape.value(record_attribute_encoder(tape.constant(in.x), p, hp));
}

inline Matrix attribute_encode(const AttributedNetwork& net, const ModelParams& params, const HyperParams& hp) {
  return attribute_encode(make_inputs(net, hp), params, hp);
}

inline Matrix attribute_decode(const Matrix& z_v, const Matrix& z_a) {
  if (z_v.cols() != z_a.cols()) {
    throw ShapeError("attribute_decode: embedding widths differ, " + z_v.shape_string() + " vs " + z_a.shape_string());
  }
  return matmul_nt(z_v, z_a);
}

namespace detail {

inline void require_reconstruction_shapes(const ModelInputs& in, const Matrix& a_hat, const Matrix& x_hat) {
  if (!a_hat.same_shape(in.adjacency)) throw ShapeError("A_hat is " + a_hat.shape_string() + ", expected M x M");
  if (!x_hat.same_shape(in.x)) throw ShapeError("X_hat is " + x_hat.shape_string() + ", expected M x N");
}

}  // namespace detail

inline double loss(const ModelInputs& in, const Matrix& a_hat, const Matrix& x_hat, const HyperParams& hp) {
  detail::require_reconstruction_shapes(in, a_hat, x_hat);
  return hp.alpha * weighted_frobenius_sq(sub(in.adjacency, a_hat), in.structure_weights) +
         (1.0 - hp.alpha) * weighted_frobenius_sq(sub(in.x, x_hat), in.attribute_weights);
}

inline double loss(const AttributedNetwork& net, const Matrix& a_hat, const Matrix& x_hat, const HyperParams& hp) {
  return loss(make_inputs(net, hp), a_hat, x_hat, hp);
}

/// Per-node weighted reconstruction error; sums to `loss`.
inline std::vector<double> anomaly_scores(const ModelInputs& in, const Matrix& a_hat, const Matrix& x_hat,
                                          const HyperParams& hp) {
  detail::require_reconstruction_shapes(in, a_hat, x_hat);
  std::vector<double> s(in.node_count());
  for (std::size_t i = 0; i < s.size(); ++i) {
    double structure = 0.0, attribute = 0.0;
    for (std::size_t j = 0; j < in.adjacency.cols(); ++j) {
      const double r = (in.adjacency(i, j) - a_hat(i, j)) * in.structure_weights(i, j);
      structure += r * r;
    }
    for (std::size_t j = 0; j < in.x.cols(); ++j) {
      const double r = (in.x(i, j) - x_hat(i, j)) * in.attribute_weights(i, j);
      attribute += r * r;
    }
    s[i] = hp.alpha * structure + (1.0 - hp.alpha) * attribute;
  }
  return s;
}

inline std::vector<double> anomaly_scores(const AttributedNetwork& net, const Matrix& a_hat, const Matrix& x_hat,
                                          const HyperParams& hp) {
  return anomaly_scores(make_inputs(net, hp), a_hat, x_hat, hp);
}

struct Evaluation {
  Matrix z_v;
  Matrix z_a;
  Matrix a_hat;
  Matrix x_hat;
  double structure_loss = 0.0;
  double attribute_loss = 0.0;
  double loss = 0.0;
  std::vector<double> scores;
};

/// Full forward pass plus scoring, without recording gradients.
inline Evaluation evaluate(const ModelInputs& in, const ModelParams& params, const HyperParams& hp) {
  Evaluation e;
  e.z_v = structure_encode(in, params, hp);
  e.z_a = attribute_encode(in, params, hp);
  e.a_hat = structure_decode(e.z_v);
  e.x_hat = attribute_decode(e.z_v, e.z_a);
  e.structure_loss = hp.alpha * weighted_frobenius_sq(sub(in.adjacency, e.a_hat), in.structure_weights);
  e.attribute_loss = (1.0 - hp.alpha) * weighted_frobenius_sq(sub(in.x, e.x_hat), in.attribute_weights);
  e.loss = e.structure_loss + e.attribute_loss;
  e.scores = anomaly_scores(in, e.a_hat, e.x_hat, hp);
  return e;
}

// ---------------------------------------------------------------------------
// Thresholding.

struct ThresholdRule {
  double lambda;
};
struct TopKRule {
  std::size_t k;
};
using ClassifyRule = std::variant<ThresholdRule, TopKRule>;

/// Node ids ordered by descending score; ties go to the lower id.
inline std::vector<std::size_t> rank_nodes(const std::vector<double>& scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

/// The λ a rule resolves to. For top-k it is the k-th largest score.
inline double resolve_threshold(const std::vector<double>& scores, const ClassifyRule& rule) {
  if (const auto* t = std::get_if<ThresholdRule>(&rule)) return t->lambda;
  const std::size_t k = std::get<TopKRule>(rule).k;
  if (k == 0 || k > scores.size()) {
    throw ConfigError("top-k requires 0 < k <= " + std::to_string(scores.size()) + ", got " + std::to_string(k));
  }
  std::vector<double> sorted = scores;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k - 1), sorted.end(),
                   std::greater<>());
  return sorted[k - 1];
}

/// y_i = 1 iff score_i >= λ. Under top-k, every score tied with the k-th
/// largest is labeled 1, so more than k labels can be set.
inline std::vector<int> classify(const std::vector<double>& scores, const ClassifyRule& rule) {
  const double lambda = resolve_threshold(scores, rule);
  std::vector<int> y(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) y[i] = scores[i] >= lambda ? 1 : 0;
  return y;
}

struct ScoreReport {
  std::vector<double> scores;
  std::vector<std::size_t> ranking;
  double threshold = std::numeric_limits<double>::infinity();
  std::vector<int> labels;
};

inline ScoreReport make_score_report(std::vector<double> scores, const ClassifyRule& rule) {
  ScoreReport r;
  r.threshold = resolve_threshold(scores, rule);
  r.labels = classify(scores, rule);
  r.ranking = rank_nodes(scores);
  r.scores = std::move(scores);
  return r;
}

}  // namespace anomalydae

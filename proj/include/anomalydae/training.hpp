#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "anomalydae/errors.hpp"
#include "anomalydae/matrix.hpp"
#include "anomalydae/model.hpp"
#include "anomalydae/network.hpp"
#include "anomalydae/tape.hpp"

namespace anomalydae {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// First/second moment accumulators shaped like ModelParams, plus step count.
struct AdamState {
  ModelParams m;
  ModelParams v;
  std::size_t t = 0;

  static AdamState zeros_like(const ModelParams& p) {
    AdamState s;
    auto src = p.tensors();
    auto dm = s.m.tensors();
    auto dv = s.v.tensors();
    for (std::size_t i = 0; i < ModelParams::count; ++i) {
      *dm[i] = Matrix(src[i]->rows(), src[i]->cols());
      *dv[i] = Matrix(src[i]->rows(), src[i]->cols());
    }
    return s;
  }

  friend bool operator==(const AdamState&, const AdamState&) = default;
};

/// One bias-corrected Adam update of every parameter tensor.
inline void adam_step(ModelParams& params, const ModelParams& grads, AdamState& state, double lr,
                      const AdamConfig& cfg = {}) {
  if (!(lr > 0.0)) throw ConfigError("learning rate must be > 0");
  auto p = params.tensors();
  auto g = grads.tensors();
  auto m = state.m.tensors();
  auto v = state.v.tensors();
  for (std::size_t i = 0; i < ModelParams::count; ++i) {
    if (!p[i]->same_shape(*g[i]) || !p[i]->same_shape(*m[i]) || !p[i]->same_shape(*v[i])) {
      throw ShapeError("adam_step: shape mismatch on " + std::string(ModelParams::names[i]));
    }
    for (std::size_t k = 0; k < g[i]->size(); ++k) {
      if (!std::isfinite((*g[i])[k])) {
        throw NumericError("non-finite gradient in " + std::string(ModelParams::names[i]) + "[" + std::to_string(k) + "]");
      }
    }
  }

  state.t += 1;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < ModelParams::count; ++i) {
    auto pv = p[i]->values();
    auto gv = g[i]->values();
    auto mv = m[i]->values();
    auto vv = v[i]->values();
    for (std::size_t k = 0; k < pv.size(); ++k) {
      mv[k] = cfg.beta1 * mv[k] + (1.0 - cfg.beta1) * gv[k];
      vv[k] = cfg.beta2 * vv[k] + (1.0 - cfg.beta2) * gv[k] * gv[k];
      const double m_hat = mv[k] / c1;
      const double v_hat = vv[k] / c2;
      pv[k] -= lr * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
  }
}

struct LossRecord {
  double total = 0.0;
  double structure = 0.0;
  double attribute = 0.0;
};

/// One record per completed iteration; each holds the loss evaluated before
/// that iteration's update.
using TrainHistory = std::vector<LossRecord>;

/// Loss and gradients at `params`.
struct Gradient {
  LossRecord loss;
  ModelParams grads;
};

inline Gradient compute_gradient(const ModelInputs& in, const ModelParams& params, const HyperParams& hp) {
  Tape tape;
  const ParamVars vars = record_params(tape, params);
  const ForwardVars f = record_forward(tape, in, vars, hp);
  Gradient out;
  out.loss = {tape.value(f.loss.total)[0], tape.value(f.loss.structure)[0], tape.value(f.loss.attribute)[0]};
  tape.backward(f.loss.total);
  auto dst = out.grads.tensors();
  const auto all = vars.all();
  for (std::size_t i = 0; i < ModelParams::count; ++i) *dst[i] = tape.grad(all[i]);
  return out;
}

struct TrainState {
  ModelParams params;
  AdamState adam;
  TrainHistory history;
};

/// Called after every iteration with the iteration index (0-based, counted
/// from the start of this call) and its loss record.
using IterationObserver = std::function<void(std::size_t, const LossRecord&)>;

/// Runs `iterations` full-graph forward/backward/Adam cycles on `state`,
/// appending to its history.
inline void continue_training(const ModelInputs& in, const HyperParams& hp, TrainState& state, std::size_t iterations,
                              const IterationObserver& observer = {}) {
  hp.validate();
  state.params.check_shapes(in.node_count(), in.attribute_dim(), hp.embed_dim, hp.hidden());
  for (std::size_t it = 0; it < iterations; ++it) {
    const long global = static_cast<long>(state.adam.t);
    Gradient g = compute_gradient(in, state.params, hp);
    if (!std::isfinite(g.loss.total)) throw NumericError("non-finite loss", global);
    try {
      adam_step(state.params, g.grads, state.adam, hp.learning_rate);
    } catch (const NumericError& e) {
      throw NumericError(e.what(), global);
    }
    for (const auto* t : state.params.tensors()) {
      if (!t->all_finite()) throw NumericError("non-finite parameter after update", global);
    }
    state.history.push_back(g.loss);
    if (observer) observer(it, g.loss);
  }
}

inline TrainState initial_state(const ModelInputs& in, const HyperParams& hp) {
  TrainState s;
  s.params = init_params(in.node_count(), in.attribute_dim(), hp);
  s.adam = AdamState::zeros_like(s.params);
  return s;
}

/// Seeds parameters from hp.seed and trains for hp.iterations.
inline TrainState train(const AttributedNetwork& net, const HyperParams& hp, const IterationObserver& observer = {}) {
  hp.validate();
  const ModelInputs in = make_inputs(net, hp);
  TrainState s = initial_state(in, hp);
  continue_training(in, hp, s, hp.iterations, observer);
  return s;
}

}  // namespace anomalydae

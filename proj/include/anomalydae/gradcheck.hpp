#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "anomalydae/errors.hpp"
#include "anomalydae/matrix.hpp"
#include "anomalydae/tape.hpp"

namespace anomalydae {

struct GradCheckOptions {
  double epsilon = 1e-5;
  /// At least this many coordinates are checked (all of them if fewer exist).
  std::size_t min_samples = 200;
  /// Each parameter block contributes at least this many coordinates.
  std::size_t min_per_block = 8;
  std::uint64_t seed = 0;
};

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t coordinates_checked = 0;
  std::size_t worst_block = 0;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

/// Compares reverse-mode gradients against central differences.
///
/// `build(tape, vars)` must record a scalar (1x1) loss on `tape` from the leaf
/// vars, one per entry of `params`, and return it. The relative error of each
/// checked coordinate is |g - n| / max(|g|, |n|, 1e-8).
template <class Build>
GradCheckResult finite_difference_check(Build&& build, std::vector<Matrix> params,
                                        const GradCheckOptions& options = {}) {
  if (!(options.epsilon > 0.0)) throw ConfigError("finite_difference_check: epsilon must be > 0");

  auto evaluate = [&](bool with_grad, std::vector<Matrix>* grads) {
    Tape tape;
    std::vector<Var> vars;
    vars.reserve(params.size());
    for (const auto& p : params) vars.push_back(with_grad ? tape.leaf(p) : tape.constant(p));
    const Var loss = build(tape, std::span<const Var>(vars));
    const Matrix& v = tape.value(loss);
    if (v.rows() != 1 || v.cols() != 1) throw ShapeError("finite_difference_check: loss is not 1x1");
    if (!std::isfinite(v[0])) throw NumericError("finite_difference_check: non-finite loss");
    if (with_grad) {
      tape.backward(loss);
      grads->clear();
      for (const auto& var : vars) grads->push_back(tape.grad(var));
    }
    return v[0];
  };

  std::vector<Matrix> analytic;
  evaluate(true, &analytic);

  std::size_t total = 0;
  for (const auto& p : params) total += p.size();

  // Coordinates to check, as (block, index) pairs.
  std::vector<std::pair<std::size_t, std::size_t>> coords;
  if (total <= options.min_samples) {
    for (std::size_t b = 0; b < params.size(); ++b)
      for (std::size_t i = 0; i < params[b].size(); ++i) coords.emplace_back(b, i);
  } else {
    std::mt19937_64 rng(options.seed);
    for (std::size_t b = 0; b < params.size(); ++b) {
      const std::size_t n = params[b].size();
      const auto share = static_cast<std::size_t>(
          std::ceil(static_cast<double>(options.min_samples) * static_cast<double>(n) / static_cast<double>(total)));
      const std::size_t take = std::min(n, std::max(share, options.min_per_block));
      std::vector<std::size_t> idx(n);
      std::iota(idx.begin(), idx.end(), std::size_t{0});
      std::shuffle(idx.begin(), idx.end(), rng);
      for (std::size_t i = 0; i < take; ++i) coords.emplace_back(b, idx[i]);
    }
  }

  GradCheckResult result;
  const double eps = options.epsilon;
  for (auto [b, i] : coords) {
    const double original = params[b][i];
    params[b][i] = original + eps;
    const double up = evaluate(false, nullptr);
    params[b][i] = original - eps;
    const double down = evaluate(false, nullptr);
    params[b][i] = original;

    const double numeric = (up - down) / (2.0 * eps);
    const double g = analytic[b][i];
    const double denom = std::max({std::abs(g), std::abs(numeric), 1e-8});
    const double rel = std::abs(g - numeric) / denom;
    ++result.coordinates_checked;
    if (rel > result.max_relative_error) {
      result.max_relative_error = rel;
      result.worst_block = b;
      result.worst_index = i;
      result.worst_analytic = g;
      result.worst_numeric = numeric;
    }
  }
  return result;
}

}  // namespace anomalydae

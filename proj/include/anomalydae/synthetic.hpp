#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "anomalydae/errors.hpp"
#include "anomalydae/matrix.hpp"
#include "anomalydae/network.hpp"

namespace anomalydae {

/// Planted-partition graph with module-aligned Gaussian attributes.
struct SyntheticSpec {
  std::size_t module_count = 5;
  std::size_t nodes_per_module = 60;
  double p_in = 0.8;
  double p_out = 0.02;
  std::size_t attr_dim = 32;
  /// Standard deviation of the per-module attribute means; noise is unit variance.
  double mean_spread = 1.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (module_count == 0 || nodes_per_module == 0) throw ConfigError("synthetic graph needs at least one node");
    if (attr_dim == 0) throw ConfigError("attr_dim must be >= 1");
    if (!(p_out >= 0.0 && p_out < p_in && p_in <= 1.0)) {
      throw ConfigError("require 0 <= p_out < p_in <= 1, got p_in=" + std::to_string(p_in) +
                        " p_out=" + std::to_string(p_out));
    }
    if (!(mean_spread >= 0.0) || !std::isfinite(mean_spread)) throw ConfigError("mean_spread must be >= 0");
  }
};

struct InjectionSpec {
  std::size_t clique_count = 5;
  std::size_t clique_size = 6;
  /// Candidate pool size k for the attribute swap.
  std::size_t candidate_pool = 50;
  std::uint64_t seed = 0;

  void validate(std::size_t node_count) const {
    if (clique_size < 2) throw ConfigError("clique_size must be >= 2");
    if (candidate_pool < 1) throw ConfigError("candidate_pool must be >= 1");
    if (clique_count * clique_size * 2 > node_count) {
      throw CapacityError("clique_count * clique_size * 2 = " + std::to_string(clique_count * clique_size * 2) +
                          " exceeds node count " + std::to_string(node_count));
    }
  }
};

inline AttributedNetwork generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  const std::size_t m = spec.module_count * spec.nodes_per_module;
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Matrix means(spec.module_count, spec.attr_dim);
  for (auto& v : means.values()) v = spec.mean_spread * normal(rng);

  Matrix x(m, spec.attr_dim);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t module = i / spec.nodes_per_module;
    for (std::size_t j = 0; j < spec.attr_dim; ++j) x(i, j) = means(module, j) + normal(rng);
  }

  AttributedNetwork net(std::move(x));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      const bool same = i / spec.nodes_per_module == j / spec.nodes_per_module;
      if (unit(rng) < (same ? spec.p_in : spec.p_out)) net.add_edge(i, j);
    }
  }
  net.mutable_labels();
  return net;
}

namespace detail {

/// `count` distinct unlabeled nodes, drawn uniformly without replacement.
inline std::vector<std::size_t> sample_unlabeled(const AttributedNetwork& net, std::size_t count, std::mt19937_64& rng) {
  std::vector<std::size_t> pool;
  const auto& labels = net.labels();
  for (std::size_t i = 0; i < net.node_count(); ++i)
    if (!labels || (*labels)[i] == 0) pool.push_back(i);
  if (pool.size() < count) {
    throw CapacityError("need " + std::to_string(count) + " unlabeled nodes, only " + std::to_string(pool.size()) +
                        " available");
  }
  std::shuffle(pool.begin(), pool.end(), rng);
  pool.resize(count);
  return pool;
}

}  // namespace detail

/// Adds `clique_count` disjoint fully connected groups of `clique_size`
/// previously unlabeled nodes and labels them 1.
inline AttributedNetwork inject_structural_anomalies(AttributedNetwork net, const InjectionSpec& spec) {
  spec.validate(net.node_count());
  std::mt19937_64 rng(spec.seed);
  const auto chosen = detail::sample_unlabeled(net, spec.clique_count * spec.clique_size, rng);
  auto& labels = net.mutable_labels();
  for (std::size_t c = 0; c < spec.clique_count; ++c) {
    const auto first = chosen.begin() + static_cast<std::ptrdiff_t>(c * spec.clique_size);
    std::vector<std::size_t> group(first, first + static_cast<std::ptrdiff_t>(spec.clique_size));
    for (std::size_t a = 0; a < group.size(); ++a) {
      labels[group[a]] = 1;
      for (std::size_t b = a + 1; b < group.size(); ++b) net.add_edge(group[a], group[b]);
    }
  }
  return net;
}

/// For each of `node_budget` unlabeled nodes, samples k other nodes and copies
/// the attributes of the one farthest (Euclidean) from the node's own
/// attributes; ties go to the lowest candidate index. Candidates are read from
/// the attributes as they were before this call.
inline AttributedNetwork inject_attribute_anomalies(AttributedNetwork net, std::size_t node_budget,
                                                    const InjectionSpec& spec) {
  if (spec.candidate_pool < 1) throw ConfigError("candidate_pool must be >= 1");
  if (net.node_count() < 2 && node_budget > 0) throw CapacityError("attribute swap needs at least two nodes");
  std::mt19937_64 rng(spec.seed ^ 0x9e3779b97f4a7c15ULL);
  const auto chosen = detail::sample_unlabeled(net, node_budget, rng);
  const Matrix original = net.attributes();
  auto& labels = net.mutable_labels();

  std::vector<std::size_t> others(net.node_count() - 1);
  for (auto i : chosen) {
    std::iota(others.begin(), others.begin() + static_cast<std::ptrdiff_t>(i), std::size_t{0});
    std::iota(others.begin() + static_cast<std::ptrdiff_t>(i), others.end(), i + 1);
    std::shuffle(others.begin(), others.end(), rng);
    const std::size_t k = std::min(spec.candidate_pool, others.size());
    std::vector<std::size_t> pool(others.begin(), others.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(pool.begin(), pool.end());

    std::size_t best = pool.front();
    double best_dist = -1.0;
    for (auto c : pool) {
      double d = 0.0;
      for (std::size_t j = 0; j < original.cols(); ++j) {
        const double diff = original(i, j) - original(c, j);
        d += diff * diff;
      }
      if (d > best_dist) {
        best_dist = d;
        best = c;
      }
    }
    auto dst = net.attributes().row(i);
    auto src = original.row(best);
    std::copy(src.begin(), src.end(), dst.begin());
    labels[i] = 1;
  }
  return net;
}

}  // namespace anomalydae

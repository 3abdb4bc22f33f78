#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "anomalydae/errors.hpp"
#include "anomalydae/matrix.hpp"

namespace anomalydae {

/// Undirected attributed graph: M nodes, an M x N attribute matrix and optional
/// 0/1 ground-truth labels. Adjacency is stored as sorted neighbor lists and
/// is symmetric by construction; self-loops are rejected.
class AttributedNetwork {
 public:
  AttributedNetwork() = default;
  explicit AttributedNetwork(Matrix attributes)
      : attributes_(std::move(attributes)), neighbors_(attributes_.rows()) {}

  std::size_t node_count() const noexcept { return neighbors_.size(); }
  std::size_t attribute_dim() const noexcept { return attributes_.cols(); }
  std::size_t edge_count() const noexcept {
    std::size_t twice = 0;
    for (const auto& n : neighbors_) twice += n.size();
    return twice / 2;
  }

  const Matrix& attributes() const noexcept { return attributes_; }
  Matrix& attributes() noexcept { return attributes_; }

  const std::vector<std::size_t>& neighbors(std::size_t i) const { return neighbors_.at(i); }
  std::size_t degree(std::size_t i) const { return neighbors_.at(i).size(); }

  bool has_edge(std::size_t i, std::size_t j) const {
    const auto& n = neighbors_.at(i);
    return std::binary_search(n.begin(), n.end(), j);
  }

  /// Returns false if the edge already existed.
  bool add_edge(std::size_t i, std::size_t j) {
    check_node(i);
    check_node(j);
    if (i == j) throw ConfigError("self-loop on node " + std::to_string(i));
    if (has_edge(i, j)) return false;
    insert_sorted(neighbors_[i], j);
    insert_sorted(neighbors_[j], i);
    return true;
  }

  /// Each undirected edge once, as (i, j) with i < j, in lexicographic order.
  std::vector<std::pair<std::size_t, std::size_t>> edges() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t i = 0; i < neighbors_.size(); ++i)
      for (auto j : neighbors_[i])
        if (i < j) out.emplace_back(i, j);
    return out;
  }

  /// Dense 0/1 adjacency matrix.
  Matrix adjacency() const {
    Matrix a(node_count(), node_count());
    for (std::size_t i = 0; i < node_count(); ++i)
      for (auto j : neighbors_[i]) a(i, j) = 1.0;
    return a;
  }

  const std::optional<std::vector<int>>& labels() const noexcept { return labels_; }

  void set_labels(std::vector<int> labels) {
    if (labels.size() != node_count()) {
      throw ShapeError("labels length " + std::to_string(labels.size()) + " != node count " +
                       std::to_string(node_count()));
    }
    for (int v : labels)
      if (v != 0 && v != 1) throw ConfigError("label values must be 0 or 1");
    labels_ = std::move(labels);
  }

  /// Labels, created as all-zero on first use.
  std::vector<int>& mutable_labels() {
    if (!labels_) labels_ = std::vector<int>(node_count(), 0);
    return *labels_;
  }

  void clear_labels() { labels_.reset(); }

  /// Re-checks every invariant; throws on violation.
  void validate() const {
    if (attributes_.rows() != neighbors_.size()) throw ShapeError("attribute rows != node count");
    for (std::size_t i = 0; i < neighbors_.size(); ++i) {
      const auto& n = neighbors_[i];
      if (!std::is_sorted(n.begin(), n.end()) || std::adjacent_find(n.begin(), n.end()) != n.end()) {
        throw ConfigError("neighbor list of node " + std::to_string(i) + " not strictly sorted");
      }
      for (auto j : n) {
        if (j >= node_count()) throw ConfigError("neighbor index out of range");
        if (j == i) throw ConfigError("self-loop on node " + std::to_string(i));
        if (!has_edge(j, i)) throw ConfigError("asymmetric edge " + std::to_string(i) + "-" + std::to_string(j));
      }
    }
    if (labels_) {
      if (labels_->size() != node_count()) throw ShapeError("labels length != node count");
      for (int v : *labels_)
        if (v != 0 && v != 1) throw ConfigError("label values must be 0 or 1");
    }
  }

 private:
  void check_node(std::size_t i) const {
    if (i >= node_count()) {
      throw ConfigError("node index " + std::to_string(i) + " out of range [0, " + std::to_string(node_count()) + ")");
    }
  }
  static void insert_sorted(std::vector<std::size_t>& v, std::size_t x) {
    v.insert(std::lower_bound(v.begin(), v.end(), x), x);
  }

  Matrix attributes_;
  std::vector<std::vector<std::size_t>> neighbors_;
  std::optional<std::vector<int>> labels_;
};

}  // namespace anomalydae

#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "anomalydae/matrix.hpp"
#include "anomalydae/network.hpp"

namespace testing_support {

using anomalydae::AttributedNetwork;
using anomalydae::Matrix;

inline Matrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(r, c);
  for (auto& v : m.values()) v = u(rng);
  return m;
}

/// Erdos-Renyi graph with uniform [-1, 1] attributes. Some attribute entries
/// are zeroed so both penalty weights are exercised.
inline AttributedNetwork random_network(std::size_t m, std::size_t n, double p, std::mt19937_64& rng) {
  Matrix x = random_matrix(m, n, rng);
  std::bernoulli_distribution zero(0.25), edge(p);
  for (auto& v : x.values())
    if (zero(rng)) v = 0.0;
  AttributedNetwork net(std::move(x));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j)
      if (edge(rng)) net.add_edge(i, j);
  return net;
}

inline AttributedNetwork star(std::size_t m, Matrix x) {
  AttributedNetwork net(std::move(x));
  for (std::size_t i = 1; i < m; ++i) net.add_edge(0, i);
  return net;
}

inline AttributedNetwork path(std::size_t m, Matrix x) {
  AttributedNetwork net(std::move(x));
  for (std::size_t i = 0; i + 1 < m; ++i) net.add_edge(i, i + 1);
  return net;
}

inline AttributedNetwork clique(std::size_t m, Matrix x) {
  AttributedNetwork net(std::move(x));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) net.add_edge(i, j);
  return net;
}

/// Fresh, empty scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("anomalydae_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Pairwise definition: P(pos > neg) + 0.5 P(pos == neg).
inline double brute_force_auc(const std::vector<double>& s, const std::vector<int>& y) {
  double wins = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] != 1) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j] != 0) continue;
      ++pairs;
      if (s[i] > s[j]) wins += 1.0;
      else if (s[i] == s[j]) wins += 0.5;
    }
  }
  return wins / static_cast<double>(pairs);
}

}  // namespace testing_support

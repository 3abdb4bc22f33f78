#pragma once

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "anomalydae/errors.hpp"
#include "anomalydae/matrix.hpp"
#include "anomalydae/network.hpp"

namespace anomalydae {

// File formats
//
//   edges       one undirected edge per line, "src<TAB>dst", 0-indexed. Lines
//               starting with '#' are comments. The writer emits a leading
//               "# nodes: M" comment, which the reader honors so that
//               trailing isolated nodes survive a round trip; without it M is
//               max index + 1.
//   attributes  CSV, row i = node i, N real columns.
//   labels      one 0/1 integer per line.

namespace io {

inline std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return in;
}

inline std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::optional<std::uint64_t> parse_index(std::string_view s) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

inline std::optional<double> parse_real(std::string_view s) {
  std::string buf(trim(s));
  if (buf.empty()) return std::nullopt;
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(buf.c_str(), &end);
  if (end != buf.c_str() + buf.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

/// Shortest decimal text that round-trips to the same double.
inline std::string format_real(double v) {
  char buf[64];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace io

struct EdgeList {
  std::optional<std::size_t> declared_nodes;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
};

inline EdgeList read_edge_list(const std::filesystem::path& path) {
  auto in = io::open_in(path);
  EdgeList out;
  std::string line;
  std::size_t lineno = 0;
  const std::string src = path.string();
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = io::trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      constexpr std::string_view directive = "# nodes:";
      if (t.starts_with(directive)) {
        auto n = io::parse_index(io::trim(t.substr(directive.size())));
        if (!n) throw ParseError(src, lineno, "malformed node-count comment");
        out.declared_nodes = static_cast<std::size_t>(*n);
      }
      continue;
    }
    const auto sep = t.find_first_of(" \t");
    if (sep == std::string_view::npos) throw ParseError(src, lineno, "expected 'src<TAB>dst'");
    auto a = io::parse_index(t.substr(0, sep));
    auto b = io::parse_index(io::trim(t.substr(sep)));
    if (!a || !b) throw ParseError(src, lineno, "malformed edge '" + std::string(t) + "'");
    if (*a == *b) throw ParseError(src, lineno, "self-loop on node " + std::to_string(*a));
    if (out.declared_nodes && (*a >= *out.declared_nodes || *b >= *out.declared_nodes)) {
      throw ParseError(src, lineno, "node index out of range [0, " + std::to_string(*out.declared_nodes) + ")");
    }
    out.edges.emplace_back(static_cast<std::size_t>(*a), static_cast<std::size_t>(*b));
  }
  return out;
}

inline Matrix read_attributes(const std::filesystem::path& path) {
  auto in = io::open_in(path);
  std::vector<double> data;
  std::size_t cols = 0, rows = 0, lineno = 0;
  std::string line;
  const std::string src = path.string();
  while (std::getline(in, line)) {
    ++lineno;
    if (io::trim(line).empty()) continue;
    const auto cells = io::split(io::trim(line), ',');
    if (rows == 0) cols = cells.size();
    if (cells.size() != cols) {
      throw ParseError(src, lineno, "expected " + std::to_string(cols) + " columns, got " + std::to_string(cells.size()));
    }
    for (auto c : cells) {
      auto v = io::parse_real(c);
      if (!v) throw ParseError(src, lineno, "malformed value '" + std::string(c) + "'");
      data.push_back(*v);
    }
    ++rows;
  }
  return Matrix(rows, cols, std::move(data));
}

inline std::vector<int> read_labels(const std::filesystem::path& path) {
  auto in = io::open_in(path);
  std::vector<int> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = io::trim(line);
    if (t.empty()) continue;
    if (t == "0") out.push_back(0);
    else if (t == "1") out.push_back(1);
    else throw ParseError(path.string(), lineno, "label must be 0 or 1, got '" + std::string(t) + "'");
  }
  return out;
}

/// Loads and validates a network. Duplicate edges (in either orientation)
/// collapse to one.
inline AttributedNetwork load_network(const std::filesystem::path& edge_path,
                                      const std::filesystem::path& attr_path,
                                      const std::optional<std::filesystem::path>& label_path = std::nullopt) {
  const EdgeList el = read_edge_list(edge_path);
  Matrix x = read_attributes(attr_path);

  std::size_t m = 0;
  if (el.declared_nodes) {
    m = *el.declared_nodes;
  } else {
    for (auto [a, b] : el.edges) m = std::max({m, a + 1, b + 1});
  }
  if (x.rows() != m) {
    throw ParseError(attr_path.string(), x.rows(),
                     "attribute row count " + std::to_string(x.rows()) + " != node count " + std::to_string(m));
  }

  AttributedNetwork net(std::move(x));
  for (auto [a, b] : el.edges) net.add_edge(a, b);
  if (label_path) {
    auto labels = read_labels(*label_path);
    if (labels.size() != m) {
      throw ParseError(label_path->string(), labels.size(),
                       "label count " + std::to_string(labels.size()) + " != node count " + std::to_string(m));
    }
    net.set_labels(std::move(labels));
  }
  net.validate();
  return net;
}

inline void write_edge_list(const AttributedNetwork& net, const std::filesystem::path& path) {
  auto out = io::open_out(path);
  out << "# nodes: " << net.node_count() << '\n';
  for (auto [a, b] : net.edges()) out << a << '\t' << b << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

inline void write_attributes(const Matrix& x, const std::filesystem::path& path) {
  auto out = io::open_out(path);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < x.cols(); ++j) {
      if (j) out << ',';
      out << io::format_real(x(i, j));
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

inline void write_labels(const std::vector<int>& labels, const std::filesystem::path& path) {
  auto out = io::open_out(path);
  for (int v : labels) out << v << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

inline void write_network(const AttributedNetwork& net, const std::filesystem::path& edge_path,
                          const std::filesystem::path& attr_path,
                          const std::optional<std::filesystem::path>& label_path = std::nullopt) {
  write_edge_list(net, edge_path);
  write_attributes(net.attributes(), attr_path);
  if (label_path) {
    write_labels(net.labels() ? *net.labels() : std::vector<int>(net.node_count(), 0), *label_path);
  }
}

}  // namespace anomalydae

#pragma once

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "anomalydae/errors.hpp"
#include "anomalydae/io.hpp"

namespace anomalydae {

namespace detail {

inline void require_same_length(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size()) {
    throw ShapeError("scores (" + std::to_string(scores.size()) + ") and labels (" + std::to_string(labels.size()) +
                     ") differ in length");
  }
}

}  // namespace detail

/// Rank-based ROC-AUC (Mann-Whitney U) with average ranks for ties, i.e.
/// P(pos > neg) + P(pos == neg) / 2.
inline double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  detail::require_same_length(scores, labels);
  const std::size_t n = scores.size();
  std::size_t pos = 0;
  for (int l : labels) pos += l == 1 ? 1 : 0;
  const std::size_t neg = n - pos;
  if (pos == 0 || neg == 0) throw UndefinedMetricError("AUC needs at least one positive and one negative label");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Ranks are doubled so that tie averages stay integral: a tie group
  // spanning 1-based ranks [i+1, j] has doubled average rank i + j + 1.
  std::size_t doubled_rank_sum = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const std::size_t doubled = i + j + 1;
    for (std::size_t k = i; k < j; ++k)
      if (labels[order[k]] == 1) doubled_rank_sum += doubled;
    i = j;
  }
  // 2U = doubled rank sum - pos (pos + 1)
  const std::size_t doubled_u = doubled_rank_sum - pos * (pos + 1);
  return static_cast<double>(doubled_u) / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
}

/// Fraction of the k top-scored nodes (ties broken by lower index) labeled 1.
inline double precision_at_k(const std::vector<double>& scores, const std::vector<int>& labels, std::size_t k) {
  detail::require_same_length(scores, labels);
  if (k == 0 || k > scores.size()) {
    throw ConfigError("precision@k requires 1 <= k <= " + std::to_string(scores.size()) + ", got " + std::to_string(k));
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::size_t hits = 0;
  for (std::size_t i = 0; i < k; ++i) hits += labels[order[i]] == 1 ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(k);
}

struct RocPoint {
  double false_positive_rate;
  double true_positive_rate;
  double threshold;
};

/// ROC curve points, one per distinct score (descending), starting at (0, 0).
inline std::vector<RocPoint> roc_curve(const std::vector<double>& scores, const std::vector<int>& labels) {
  detail::require_same_length(scores, labels);
  std::size_t pos = 0;
  for (int l : labels) pos += l == 1 ? 1 : 0;
  const std::size_t neg = labels.size() - pos;
  if (pos == 0 || neg == 0) throw UndefinedMetricError("ROC needs at least one positive and one negative label");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<RocPoint> out{{0.0, 0.0, std::numeric_limits<double>::infinity()}};
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    for (; i < order.size() && scores[order[i]] == s; ++i) (labels[order[i]] == 1 ? tp : fp) += 1;
    out.push_back({static_cast<double>(fp) / static_cast<double>(neg), static_cast<double>(tp) / static_cast<double>(pos), s});
  }
  return out;
}

struct EvalReport {
  double auc = 0.0;
  std::map<std::size_t, double> precision_at_k;
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

/// AUC plus precision@k for each requested k (values > M are skipped) and,
/// always, for k = number of positives.
inline EvalReport evaluate_scores(const std::vector<double>& scores, const std::vector<int>& labels,
                                  const std::vector<std::size_t>& ks = {}) {
  EvalReport r;
  r.auc = auc(scores, labels);
  for (int l : labels) (l == 1 ? r.positives : r.negatives) += 1;
  for (auto k : ks)
    if (k >= 1 && k <= scores.size()) r.precision_at_k[k] = precision_at_k(scores, labels, k);
  r.precision_at_k[r.positives] = precision_at_k(scores, labels, r.positives);
  return r;
}

/// Line-delimited "metric<TAB>value" records.
inline void write_report_lines(const EvalReport& r, std::ostream& out) {
  out << "auc\t" << io::format_real(r.auc) << '\n';
  for (const auto& [k, p] : r.precision_at_k) out << "precision@" << k << '\t' << io::format_real(p) << '\n';
  out << "positives\t" << r.positives << '\n';
  out << "negatives\t" << r.negatives << '\n';
}

inline nlohmann::json report_json(const EvalReport& r) {
  nlohmann::json j;
  j["auc"] = r.auc;
  j["positives"] = r.positives;
  j["negatives"] = r.negatives;
  auto& p = j["precision_at_k"] = nlohmann::json::object();
  for (const auto& [k, v] : r.precision_at_k) p[std::to_string(k)] = v;
  return j;
}

// Score file: CSV with header "node_id,score", one row per node, sorted by id.

inline void write_scores(const std::vector<double>& scores, const std::filesystem::path& path) {
  auto out = io::open_out(path);
  out << "node_id,score\n";
  for (std::size_t i = 0; i < scores.size(); ++i) out << i << ',' << io::format_real(scores[i]) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

inline std::vector<double> read_scores(const std::filesystem::path& path) {
  auto in = io::open_in(path);
  std::string line;
  std::size_t lineno = 0;
  std::vector<double> out;
  const std::string src = path.string();
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = io::trim(line);
    if (t.empty()) continue;
    if (lineno == 1 && t == "node_id,score") continue;
    const auto cells = io::split(t, ',');
    if (cells.size() != 2) throw ParseError(src, lineno, "expected 'node_id,score'");
    auto id = io::parse_index(io::trim(cells[0]));
    auto v = io::parse_real(cells[1]);
    if (!id || !v) throw ParseError(src, lineno, "malformed score row");
    if (*id != out.size()) throw ParseError(src, lineno, "node ids must be consecutive from 0");
    out.push_back(*v);
  }
  return out;
}

}  // namespace anomalydae

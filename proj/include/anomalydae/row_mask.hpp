#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "anomalydae/errors.hpp"
#include "anomalydae/matrix.hpp"

namespace anomalydae {

/// Sparse boolean square matrix in CSR form. Entry k of a per-entry vector
/// belongs to row `row_of(k)` and column `cols()[k]`.
class RowMask {
 public:
  RowMask() = default;

  /// `rows[i]` lists the masked columns of row i; duplicates are removed.
  explicit RowMask(std::vector<std::vector<std::size_t>> rows) {
    n_ = rows.size();
    offsets_.assign(n_ + 1, 0);
    for (std::size_t i = 0; i < n_; ++i) {
      auto& r = rows[i];
      std::sort(r.begin(), r.end());
      r.erase(std::unique(r.begin(), r.end()), r.end());
      for (auto c : r) {
        if (c >= n_) {
          throw ShapeError("mask column " + std::to_string(c) + " out of range for " +
                           std::to_string(n_) + " rows");
        }
      }
      offsets_[i + 1] = offsets_[i] + r.size();
      cols_.insert(cols_.end(), r.begin(), r.end());
    }
  }

  static RowMask dense(std::size_t n) {
    std::vector<std::vector<std::size_t>> rows(n);
    for (auto& r : rows)
      for (std::size_t j = 0; j < n; ++j) r.push_back(j);
    return RowMask(std::move(rows));
  }

  std::size_t size() const noexcept { return n_; }
  std::size_t nnz() const noexcept { return cols_.size(); }
  std::size_t begin(std::size_t row) const { return offsets_[row]; }
  std::size_t end(std::size_t row) const { return offsets_[row + 1]; }
  std::span<const std::size_t> row(std::size_t r) const {
    return {cols_.data() + offsets_[r], offsets_[r + 1] - offsets_[r]};
  }
  std::span<const std::size_t> cols() const noexcept { return cols_; }

  bool contains(std::size_t r, std::size_t c) const {
    auto rr = row(r);
    return std::binary_search(rr.begin(), rr.end(), c);
  }

  /// Gathers the masked entries of a dense n x n matrix into an nnz x 1 column.
  Matrix gather(const Matrix& dense) const {
    if (dense.rows() != n_ || dense.cols() != n_) {
      throw ShapeError("mask gather: expected " + std::to_string(n_) + "x" + std::to_string(n_) +
                       ", got " + dense.shape_string());
    }
    Matrix out(nnz(), 1);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t k = begin(i); k < end(i); ++k) out[k] = dense(i, cols_[k]);
    return out;
  }

  /// Scatters an nnz x 1 column into a dense n x n matrix, zero off-mask.
  Matrix scatter(const Matrix& entries) const {
    require_entries(entries, "mask scatter");
    Matrix out(n_, n_);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t k = begin(i); k < end(i); ++k) out(i, cols_[k]) = entries[k];
    return out;
  }

  void require_entries(const Matrix& entries, const char* op) const {
    if (entries.rows() != nnz() || entries.cols() != 1) {
      throw ShapeError(std::string(op) + ": expected " + std::to_string(nnz()) + "x1 entries, got " +
                       entries.shape_string());
    }
  }

 private:
  std::size_t n_ = 0;
  std::vector<std::size_t> offsets_{0};
  std::vector<std::size_t> cols_;
};

/// Row-wise softmax over the masked entries (nnz x 1 in, nnz x 1 out), with
/// per-row max subtraction. Throws IsolatedNodeError on an empty row.
inline Matrix masked_row_softmax_entries(const Matrix& logits, const RowMask& mask) {
  mask.require_entries(logits, "masked_row_softmax");
  Matrix out(mask.nnz(), 1);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    const std::size_t b = mask.begin(i), e = mask.end(i);
    if (b == e) throw IsolatedNodeError("masked_row_softmax: row " + std::to_string(i) + " has an empty mask");
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t k = b; k < e; ++k) mx = std::max(mx, logits[k]);
    double z = 0.0;
    for (std::size_t k = b; k < e; ++k) {
      out[k] = std::exp(logits[k] - mx);
      z += out[k];
    }
    for (std::size_t k = b; k < e; ++k) out[k] /= z;
  }
  return out;
}

/// Dense form: logits is n x n, result is n x n with exact zeros off-mask.
inline Matrix masked_row_softmax(const Matrix& logits, const RowMask& mask) {
  return mask.scatter(masked_row_softmax_entries(mask.gather(logits), mask));
}

}  // namespace anomalydae

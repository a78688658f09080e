#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "restruct/error.hpp"

namespace restruct {

struct Triplet {
    std::int64_t row = 0;
    std::int64_t col = 0;
    double value = 0.0;
};

/// Compressed-sparse-row matrix of nonnegative reals. Column indices are
/// sorted and unique within each row.
class SparseMatrix {
public:
    SparseMatrix() : row_ptr_(1, 0) {}
    SparseMatrix(std::int64_t rows, std::int64_t cols)
        : rows_(rows), cols_(cols), row_ptr_(static_cast<std::size_t>(rows) + 1, 0) {}

    /// Binary 0/1 matrix from (row, col) pairs; repeated pairs collapse to one entry.
    static SparseMatrix from_pairs(std::int64_t rows, std::int64_t cols,
                                   std::vector<std::pair<std::int64_t, std::int64_t>> pairs) {
        std::vector<Triplet> t;
        t.reserve(pairs.size());
        for (auto [r, c] : pairs) t.push_back({r, c, 1.0});
        auto m = from_triplets(rows, cols, std::move(t));
        std::fill(m.values_.begin(), m.values_.end(), 1.0);
        return m;
    }

    /// Duplicate (row, col) entries are summed.
    static SparseMatrix from_triplets(std::int64_t rows, std::int64_t cols, std::vector<Triplet> t) {
        for (const auto& e : t)
            if (e.row < 0 || e.row >= rows || e.col < 0 || e.col >= cols)
                throw DataError("matrix entry (" + std::to_string(e.row) + "," + std::to_string(e.col) +
                                ") outside " + std::to_string(rows) + "x" + std::to_string(cols));
        std::sort(t.begin(), t.end(), [](const Triplet& a, const Triplet& b) {
            return a.row != b.row ? a.row < b.row : a.col < b.col;
        });
        SparseMatrix m(rows, cols);
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (!m.col_idx_.empty() && i > 0 && t[i].row == t[i - 1].row && t[i].col == t[i - 1].col) {
                m.values_.back() += t[i].value;
                continue;
            }
            m.col_idx_.push_back(t[i].col);
            m.values_.push_back(t[i].value);
            ++m.row_ptr_[static_cast<std::size_t>(t[i].row) + 1];
        }
        for (std::size_t r = 0; r < static_cast<std::size_t>(rows); ++r) m.row_ptr_[r + 1] += m.row_ptr_[r];
        return m;
    }

    static SparseMatrix identity(std::int64_t n) {
        SparseMatrix m(n, n);
        for (std::int64_t i = 0; i < n; ++i) {
            m.col_idx_.push_back(i);
            m.values_.push_back(1.0);
            m.row_ptr_[static_cast<std::size_t>(i) + 1] = static_cast<std::size_t>(i) + 1;
        }
        return m;
    }

    std::int64_t rows() const { return rows_; }
    std::int64_t cols() const { return cols_; }
    std::size_t nnz() const { return values_.size(); }

    std::span<const std::int64_t> row_cols(std::int64_t r) const {
        const auto b = row_ptr_[static_cast<std::size_t>(r)], e = row_ptr_[static_cast<std::size_t>(r) + 1];
        return {col_idx_.data() + b, e - b};
    }
    std::span<const double> row_values(std::int64_t r) const {
        const auto b = row_ptr_[static_cast<std::size_t>(r)], e = row_ptr_[static_cast<std::size_t>(r) + 1];
        return {values_.data() + b, e - b};
    }

    double at(std::int64_t r, std::int64_t c) const {
        const auto cols = row_cols(r);
        const auto it = std::lower_bound(cols.begin(), cols.end(), c);
        if (it == cols.end() || *it != c) return 0.0;
        return row_values(r)[static_cast<std::size_t>(it - cols.begin())];
    }

    std::vector<Triplet> triplets() const {
        std::vector<Triplet> out;
        out.reserve(nnz());
        for (std::int64_t r = 0; r < rows_; ++r) {
            const auto cs = row_cols(r);
            const auto vs = row_values(r);
            for (std::size_t k = 0; k < cs.size(); ++k) out.push_back({r, cs[k], vs[k]});
        }
        return out;
    }

    SparseMatrix transpose() const {
        auto t = triplets();
        for (auto& e : t) std::swap(e.row, e.col);
        return from_triplets(cols_, rows_, std::move(t));
    }

    /// Sub-matrix made of the listed rows, in the listed order.
    SparseMatrix select_rows(std::span<const std::int64_t> rows) const {
        SparseMatrix m(static_cast<std::int64_t>(rows.size()), cols_);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto cs = row_cols(rows[i]);
            const auto vs = row_values(rows[i]);
            m.col_idx_.insert(m.col_idx_.end(), cs.begin(), cs.end());
            m.values_.insert(m.values_.end(), vs.begin(), vs.end());
            m.row_ptr_[i + 1] = m.col_idx_.size();
        }
        return m;
    }

    /// Sparse product with row-wise accumulation. Throws once the result would
    /// hold more than `nnz_budget` entries.
    SparseMatrix multiply(const SparseMatrix& rhs,
                          std::size_t nnz_budget = std::numeric_limits<std::size_t>::max()) const {
        if (cols_ != rhs.rows_)
            throw DataError("dimension mismatch: " + shape() + " times " + rhs.shape());
        SparseMatrix out(rows_, rhs.cols_);
        std::vector<double> acc(static_cast<std::size_t>(rhs.cols_), 0.0);
        std::vector<char> seen(static_cast<std::size_t>(rhs.cols_), 0);
        std::vector<std::int64_t> touched;
        for (std::int64_t r = 0; r < rows_; ++r) {
            touched.clear();
            const auto cs = row_cols(r);
            const auto vs = row_values(r);
            for (std::size_t k = 0; k < cs.size(); ++k) {
                const auto rc = rhs.row_cols(cs[k]);
                const auto rv = rhs.row_values(cs[k]);
                for (std::size_t q = 0; q < rc.size(); ++q) {
                    const auto c = static_cast<std::size_t>(rc[q]);
                    if (!seen[c]) {
                        seen[c] = 1;
                        touched.push_back(rc[q]);
                    }
                    acc[c] += vs[k] * rv[q];
                }
            }
            std::sort(touched.begin(), touched.end());
            if (out.col_idx_.size() + touched.size() > nnz_budget)
                throw DataError("matrix blowup: product exceeds nonzero budget of " + std::to_string(nnz_budget));
            for (auto c : touched) {
                const auto uc = static_cast<std::size_t>(c);
                out.col_idx_.push_back(c);
                out.values_.push_back(acc[uc]);
                acc[uc] = 0.0;
                seen[uc] = 0;
            }
            out.row_ptr_[static_cast<std::size_t>(r) + 1] = out.col_idx_.size();
        }
        return out;
    }

    /// Each nonzero row scaled to sum to 1; empty rows stay empty.
    SparseMatrix row_normalized() const {
        SparseMatrix m = *this;
        for (std::int64_t r = 0; r < rows_; ++r) {
            const auto b = row_ptr_[static_cast<std::size_t>(r)], e = row_ptr_[static_cast<std::size_t>(r) + 1];
            double sum = 0.0;
            for (auto k = b; k < e; ++k) sum += values_[k];
            if (sum > 0.0)
                for (auto k = b; k < e; ++k) m.values_[k] = values_[k] / sum;
        }
        return m;
    }

    /// Elementwise product; the sparsity pattern is the intersection.
    SparseMatrix hadamard(const SparseMatrix& other) const {
        if (rows_ != other.rows_ || cols_ != other.cols_)
            throw DataError("dimension mismatch: " + shape() + " vs " + other.shape());
        SparseMatrix out(rows_, cols_);
        for (std::int64_t r = 0; r < rows_; ++r) {
            const auto ac = row_cols(r), bc = other.row_cols(r);
            const auto av = row_values(r), bv = other.row_values(r);
            std::size_t i = 0, j = 0;
            while (i < ac.size() && j < bc.size()) {
                if (ac[i] < bc[j]) {
                    ++i;
                } else if (bc[j] < ac[i]) {
                    ++j;
                } else {
                    const double v = av[i] * bv[j];
                    if (v != 0.0) {
                        out.col_idx_.push_back(ac[i]);
                        out.values_.push_back(v);
                    }
                    ++i;
                    ++j;
                }
            }
            out.row_ptr_[static_cast<std::size_t>(r) + 1] = out.col_idx_.size();
        }
        return out;
    }

    bool operator==(const SparseMatrix&) const = default;

    std::string shape() const { return std::to_string(rows_) + "x" + std::to_string(cols_); }

private:
    std::int64_t rows_ = 0;
    std::int64_t cols_ = 0;
    std::vector<std::size_t> row_ptr_;
    std::vector<std::int64_t> col_idx_;
    std::vector<double> values_;
};

} // namespace restruct

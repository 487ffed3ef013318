#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hipad/linalg.hpp"

namespace hipad {

/// Sample matrix X (N x m, one sample per row) with labels in {-1, +1}.
///
/// Labels may be absent (prediction inputs); every training entry point
/// checks `has_labels()`.
class DataMatrix {
public:
    DataMatrix() = default;
    /// Throws InvalidArgument unless `labels` is empty or has one +-1 entry per row.
    DataMatrix(SparseMatrix x, Vector labels);

    const SparseMatrix& x() const noexcept { return x_; }
    std::span<const double> y() const noexcept { return y_; }
    bool has_labels() const noexcept { return !y_.empty() || x_.rows() == 0; }

    std::size_t samples() const noexcept { return x_.rows(); }
    std::size_t features() const noexcept { return x_.cols(); }

    /// Same samples restricted to `columns` (renumbered in the given order).
    DataMatrix select_features(std::span<const std::size_t> columns) const;
    DataMatrix select_samples(std::span<const std::size_t> rows) const;
    /// Pads (or truncates, dropping stored entries past the end) to `m` columns.
    DataMatrix with_feature_count(std::size_t m) const;

    friend bool operator==(const DataMatrix&, const DataMatrix&) = default;

private:
    SparseMatrix x_;
    Vector y_;
};

/// Linear-implication knowledge:
///   B x <= d  =>  w^T x + b >= +1   (B is k1 x m)
///   D x <= g  =>  w^T x + b <= -1   (D is k2 x m)
/// Either side may be empty (k1 = 0 or k2 = 0), which drops that implication.
struct KnowledgeSet {
    SparseMatrix b;  // k1 x m
    Vector d;        // k1
    SparseMatrix dn; // k2 x m
    Vector g;        // k2

    KnowledgeSet() = default;
    /// Throws DimensionError on inconsistent shapes.
    KnowledgeSet(SparseMatrix b, Vector d, SparseMatrix dn, Vector g);
    static KnowledgeSet empty(std::size_t m);

    /// Premise rows of the positive-class implication.
    std::size_t k1() const noexcept { return b.rows(); }
    /// Premise rows of the negative-class implication.
    std::size_t k2() const noexcept { return dn.rows(); }
    std::size_t features() const noexcept { return b.cols(); }
    bool is_empty() const noexcept { return b.rows() == 0 && dn.rows() == 0; }

    friend bool operator==(const KnowledgeSet&, const KnowledgeSet&) = default;
};

} // namespace hipad

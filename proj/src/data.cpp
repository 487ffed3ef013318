#include "hipad/data.hpp"

#include <string>

#include "hipad/error.hpp"

namespace hipad {

DataMatrix::DataMatrix(SparseMatrix x, Vector labels) : x_(std::move(x)), y_(std::move(labels))
{
    if (!y_.empty() && y_.size() != x_.rows()) {
        throw InvalidArgument("DataMatrix: " + std::to_string(y_.size()) + " labels for " +
                              std::to_string(x_.rows()) + " samples");
    }
    for (std::size_t i = 0; i < y_.size(); ++i) {
        if (y_[i] != 1.0 && y_[i] != -1.0) {
            throw InvalidArgument("DataMatrix: label of sample " + std::to_string(i) + " is not +1 or -1");
        }
    }
}

DataMatrix DataMatrix::select_features(std::span<const std::size_t> columns) const
{
    return DataMatrix(x_.select_columns(columns), y_);
}

DataMatrix DataMatrix::select_samples(std::span<const std::size_t> rows) const
{
    Vector y;
    if (!y_.empty()) {
        y.reserve(rows.size());
        for (std::size_t r : rows) y.push_back(y_.at(r));
    }
    return DataMatrix(x_.select_rows(rows), std::move(y));
}

DataMatrix DataMatrix::with_feature_count(std::size_t m) const
{
    std::vector<std::vector<SparseMatrix::Entry>> rows(x_.rows());
    for (std::size_t i = 0; i < x_.rows(); ++i) {
        auto idx = x_.row_indices(i);
        auto val = x_.row_values(i);
        for (std::size_t p = 0; p < idx.size(); ++p) {
            if (idx[p] < m) rows[i].emplace_back(idx[p], val[p]);
        }
    }
    return DataMatrix(SparseMatrix::from_rows(m, rows), y_);
}

KnowledgeSet::KnowledgeSet(SparseMatrix b_, Vector d_, SparseMatrix dn_, Vector g_)
    : b(std::move(b_)), d(std::move(d_)), dn(std::move(dn_)), g(std::move(g_))
{
    if (b.rows() != d.size()) throw DimensionError("KnowledgeSet: B has " + std::to_string(b.rows()) +
                                                   " rows but d has " + std::to_string(d.size()) + " entries");
    if (dn.rows() != g.size()) throw DimensionError("KnowledgeSet: D has " + std::to_string(dn.rows()) +
                                                    " rows but g has " + std::to_string(g.size()) + " entries");
    if (b.cols() != dn.cols()) throw DimensionError("KnowledgeSet: B and D column counts differ");
}

KnowledgeSet KnowledgeSet::empty(std::size_t m)
{
    return KnowledgeSet(SparseMatrix(0, m), {}, SparseMatrix(0, m), {});
}

} // namespace hipad

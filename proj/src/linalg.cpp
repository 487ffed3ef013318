#include "hipad/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hipad/error.hpp"

namespace hipad {

namespace {

void require_size(std::size_t got, std::size_t want, const char* what)
{
    if (got != want) {
        throw DimensionError(std::string(what) + ": expected length " + std::to_string(want) +
                             ", got " + std::to_string(got));
    }
}

} // namespace

double dot(std::span<const double> x, std::span<const double> y)
{
    require_size(y.size(), x.size(), "dot");
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

double norm2(std::span<const double> x)
{
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

double norm_inf(std::span<const double> x)
{
    double m = 0.0;
    for (double v : x) m = std::max(m, std::abs(v));
    return m;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y)
{
    require_size(y.size(), x.size(), "axpy");
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

Vector subtract(std::span<const double> x, std::span<const double> y)
{
    require_size(y.size(), x.size(), "subtract");
    Vector out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - y[i];
    return out;
}

bool all_finite(std::span<const double> x)
{
    return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

/*------------------------------------------------------------------------------
 *      SparseMatrix
 *----------------------------------------------------------------------------*/
SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), row_ptr_(rows + 1, 0)
{
}

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_ptr,
                           std::vector<std::size_t> col_idx, std::vector<double> values)
    : rows_(rows), cols_(cols), row_ptr_(std::move(row_ptr)), col_idx_(std::move(col_idx)),
      values_(std::move(values))
{
    if (row_ptr_.size() != rows_ + 1 || row_ptr_.front() != 0) {
        throw InvalidArgument("SparseMatrix: row_ptr must have rows+1 entries starting at 0");
    }
    if (col_idx_.size() != values_.size() || row_ptr_.back() != values_.size()) {
        throw InvalidArgument("SparseMatrix: stored value count does not match row offsets");
    }
    for (std::size_t i = 0; i < rows_; ++i) {
        if (row_ptr_[i + 1] < row_ptr_[i]) {
            throw InvalidArgument("SparseMatrix: row offsets must be nondecreasing");
        }
        for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
            if (col_idx_[p] >= cols_) {
                throw InvalidArgument("SparseMatrix: column index out of range in row " +
                                      std::to_string(i));
            }
            if (p > row_ptr_[i] && col_idx_[p] <= col_idx_[p - 1]) {
                throw InvalidArgument("SparseMatrix: column indices not strictly increasing in row " +
                                      std::to_string(i));
            }
        }
    }
}

SparseMatrix SparseMatrix::from_rows(std::size_t cols, const std::vector<std::vector<Entry>>& rows)
{
    std::vector<std::size_t> row_ptr{0};
    std::vector<std::size_t> col_idx;
    std::vector<double> values;
    row_ptr.reserve(rows.size() + 1);
    for (const auto& row : rows) {
        for (const auto& [j, v] : row) {
            if (v == 0.0) continue;
            col_idx.push_back(j);
            values.push_back(v);
        }
        row_ptr.push_back(values.size());
    }
    return SparseMatrix(rows.size(), cols, std::move(row_ptr), std::move(col_idx), std::move(values));
}

SparseMatrix SparseMatrix::from_dense(std::size_t rows, std::size_t cols, std::span<const double> data)
{
    require_size(data.size(), rows * cols, "SparseMatrix::from_dense");
    std::vector<std::size_t> row_ptr{0};
    std::vector<std::size_t> col_idx;
    std::vector<double> values;
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            double v = data[i * cols + j];
            if (v != 0.0) {
                col_idx.push_back(j);
                values.push_back(v);
            }
        }
        row_ptr.push_back(values.size());
    }
    return SparseMatrix(rows, cols, std::move(row_ptr), std::move(col_idx), std::move(values));
}

SparseMatrix SparseMatrix::identity(std::size_t n)
{
    std::vector<std::size_t> row_ptr(n + 1);
    std::vector<std::size_t> col_idx(n);
    for (std::size_t i = 0; i <= n; ++i) row_ptr[i] = i;
    for (std::size_t i = 0; i < n; ++i) col_idx[i] = i;
    return SparseMatrix(n, n, std::move(row_ptr), std::move(col_idx), Vector(n, 1.0));
}

std::span<const std::size_t> SparseMatrix::row_indices(std::size_t i) const
{
    return {col_idx_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
}

std::span<const double> SparseMatrix::row_values(std::size_t i) const
{
    return {values_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
}

double SparseMatrix::row_dot(std::size_t i, std::span<const double> x) const
{
    double s = 0.0;
    for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) s += values_[p] * x[col_idx_[p]];
    return s;
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> out) const
{
    require_size(x.size(), cols_, "spmv");
    require_size(out.size(), rows_, "spmv output");
    for (std::size_t i = 0; i < rows_; ++i) out[i] = row_dot(i, x);
}

void SparseMatrix::multiply_transpose(std::span<const double> x, std::span<double> out) const
{
    require_size(x.size(), rows_, "spmv_t");
    require_size(out.size(), cols_, "spmv_t output");
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t i = 0; i < rows_; ++i) {
        const double xi = x[i];
        if (xi == 0.0) continue;
        for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) out[col_idx_[p]] += values_[p] * xi;
    }
}

SparseMatrix SparseMatrix::select_columns(std::span<const std::size_t> columns) const
{
    constexpr std::size_t absent = static_cast<std::size_t>(-1);
    std::vector<std::size_t> remap(cols_, absent);
    for (std::size_t k = 0; k < columns.size(); ++k) {
        if (columns[k] >= cols_) throw DimensionError("select_columns: column index out of range");
        remap[columns[k]] = k;
    }
    std::vector<std::vector<Entry>> rows(rows_);
    for (std::size_t i = 0; i < rows_; ++i) {
        auto idx = row_indices(i);
        auto val = row_values(i);
        for (std::size_t p = 0; p < idx.size(); ++p) {
            if (remap[idx[p]] != absent) rows[i].emplace_back(remap[idx[p]], val[p]);
        }
        std::sort(rows[i].begin(), rows[i].end());
    }
    return from_rows(columns.size(), rows);
}

SparseMatrix SparseMatrix::select_rows(std::span<const std::size_t> rows) const
{
    std::vector<std::size_t> row_ptr{0};
    std::vector<std::size_t> col_idx;
    std::vector<double> values;
    for (std::size_t r : rows) {
        if (r >= rows_) throw DimensionError("select_rows: row index out of range");
        auto idx = row_indices(r);
        auto val = row_values(r);
        col_idx.insert(col_idx.end(), idx.begin(), idx.end());
        values.insert(values.end(), val.begin(), val.end());
        row_ptr.push_back(values.size());
    }
    return SparseMatrix(rows.size(), cols_, std::move(row_ptr), std::move(col_idx), std::move(values));
}

SparseMatrix SparseMatrix::transpose() const
{
    std::vector<std::size_t> counts(cols_ + 1, 0);
    for (std::size_t j : col_idx_) ++counts[j + 1];
    for (std::size_t j = 0; j < cols_; ++j) counts[j + 1] += counts[j];
    std::vector<std::size_t> row_ptr = counts;
    std::vector<std::size_t> col_idx(nnz());
    Vector values(nnz());
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
            std::size_t dst = counts[col_idx_[p]]++;
            col_idx[dst] = i;
            values[dst] = values_[p];
        }
    }
    return SparseMatrix(cols_, rows_, std::move(row_ptr), std::move(col_idx), std::move(values));
}

Vector SparseMatrix::column_squared_norms() const
{
    Vector out(cols_, 0.0);
    for (std::size_t p = 0; p < nnz(); ++p) out[col_idx_[p]] += values_[p] * values_[p];
    return out;
}

Vector SparseMatrix::column_sums() const
{
    Vector out(cols_, 0.0);
    for (std::size_t p = 0; p < nnz(); ++p) out[col_idx_[p]] += values_[p];
    return out;
}

DenseMatrix SparseMatrix::gram_rows() const
{
    DenseMatrix g(rows_, rows_);
    Vector scratch(cols_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) {
        auto idx = row_indices(i);
        auto val = row_values(i);
        for (std::size_t p = 0; p < idx.size(); ++p) scratch[idx[p]] = val[p];
        for (std::size_t j = 0; j <= i; ++j) {
            double s = row_dot(j, scratch);
            g(i, j) = s;
            g(j, i) = s;
        }
        for (std::size_t c : idx) scratch[c] = 0.0;
    }
    return g;
}

DenseMatrix SparseMatrix::to_dense() const
{
    DenseMatrix d(rows_, cols_);
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) d(i, col_idx_[p]) = values_[p];
    }
    return d;
}

Vector spmv(const SparseMatrix& m, std::span<const double> x)
{
    Vector out(m.rows());
    m.multiply(x, out);
    return out;
}

Vector spmv_t(const SparseMatrix& m, std::span<const double> x)
{
    Vector out(m.cols());
    m.multiply_transpose(x, out);
    return out;
}

/*------------------------------------------------------------------------------
 *      DenseMatrix / Cholesky
 *----------------------------------------------------------------------------*/
DenseMatrix DenseMatrix::identity(std::size_t n)
{
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Vector DenseMatrix::multiply(std::span<const double> x) const
{
    require_size(x.size(), cols_, "DenseMatrix::multiply");
    Vector out(rows_);
    for (std::size_t i = 0; i < rows_; ++i) {
        double s = 0.0;
        const double* r = data_.data() + i * cols_;
        for (std::size_t j = 0; j < cols_; ++j) s += r[j] * x[j];
        out[i] = s;
    }
    return out;
}

void DenseMatrix::add_outer(double alpha, std::span<const double> u)
{
    require_size(u.size(), rows_, "DenseMatrix::add_outer");
    require_size(cols_, rows_, "DenseMatrix::add_outer (square)");
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t j = 0; j < cols_; ++j) (*this)(i, j) += alpha * u[i] * u[j];
    }
}

void DenseMatrix::add_diagonal(double alpha)
{
    for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) (*this)(i, i) += alpha;
}

double DenseMatrix::max_asymmetry() const
{
    double m = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t j = 0; j < i && j < cols_; ++j) m = std::max(m, std::abs((*this)(i, j) - (*this)(j, i)));
    }
    return m;
}

Cholesky::Cholesky(const DenseMatrix& a) : factor_(a.rows(), a.rows())
{
    if (a.rows() != a.cols()) throw DimensionError("Cholesky: matrix must be square");
    const std::size_t n = a.rows();
    DenseMatrix& l = factor_;
    for (std::size_t j = 0; j < n; ++j) {
        double d = a(j, j);
        auto lj = l.row(j);
        for (std::size_t k = 0; k < j; ++k) d -= lj[k] * lj[k];
        if (!(d > 0.0) || !std::isfinite(d)) {
            throw NumericalError("Cholesky: non-positive pivot " + std::to_string(d) + " at column " +
                                 std::to_string(j) + " (matrix not positive definite)");
        }
        const double ljj = std::sqrt(d);
        lj[j] = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            auto li = l.row(i);
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= li[k] * lj[k];
            li[j] = s / ljj;
        }
    }
}

void Cholesky::solve_in_place(std::span<double> x) const
{
    const std::size_t n = order();
    require_size(x.size(), n, "Cholesky::solve");
    for (std::size_t i = 0; i < n; ++i) {
        auto li = factor_.row(i);
        double s = x[i];
        for (std::size_t k = 0; k < i; ++k) s -= li[k] * x[k];
        x[i] = s / li[i];
    }
    for (std::size_t i = n; i-- > 0;) {
        double s = x[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= factor_(k, i) * x[k];
        x[i] = s / factor_(i, i);
    }
}

Vector Cholesky::solve(std::span<const double> rhs) const
{
    Vector x(rhs.begin(), rhs.end());
    solve_in_place(x);
    return x;
}

Vector cholesky_solve(const DenseMatrix& a, std::span<const double> rhs)
{
    if (rhs.size() != a.rows()) throw DimensionError("cholesky_solve: rhs length does not match order");
    return Cholesky(a).solve(rhs);
}

/*------------------------------------------------------------------------------
 *      Operators and PCG
 *----------------------------------------------------------------------------*/
Vector LinearOperator::operator()(std::span<const double> x) const
{
    require_size(x.size(), dimension, "LinearOperator");
    Vector out(dimension);
    apply(x, out);
    return out;
}

LinearOperator identity_operator(std::size_t n)
{
    return {n, [](std::span<const double> x, std::span<double> out) { std::copy(x.begin(), x.end(), out.begin()); }};
}

LinearOperator diagonal_operator(Vector diag)
{
    const std::size_t n = diag.size();
    return {n, [d = std::move(diag)](std::span<const double> x, std::span<double> out) {
                for (std::size_t i = 0; i < d.size(); ++i) out[i] = d[i] * x[i];
            }};
}

LinearOperator inverse_diagonal_operator(const Vector& diag)
{
    Vector inv(diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) {
        if (!(diag[i] > 0.0)) throw InvalidArgument("inverse_diagonal_operator: diagonal must be positive");
        inv[i] = 1.0 / diag[i];
    }
    return diagonal_operator(std::move(inv));
}

PcgResult pcg_solve(const LinearOperator& a, std::span<const double> rhs, const LinearOperator& precond,
                    const PcgOptions& options, std::span<const double> x0)
{
    const std::size_t n = a.dimension;
    require_size(rhs.size(), n, "pcg_solve rhs");
    require_size(precond.dimension, n, "pcg_solve preconditioner");
    if (!(options.tol > 0.0)) throw InvalidArgument("pcg_solve: tol must be positive");

    PcgResult result;
    result.x = x0.empty() ? Vector(n, 0.0) : Vector(x0.begin(), x0.end());
    require_size(result.x.size(), n, "pcg_solve initial guess");
    Vector& x = result.x;

    const double rhs_norm = norm2(rhs);
    if (rhs_norm == 0.0) {
        std::fill(x.begin(), x.end(), 0.0);
        result.converged = true;
        return result;
    }
    const double target = options.tol * rhs_norm;

    Vector r(n), z(n), p(n), q(n);
    auto true_residual = [&] {
        a.apply(x, q);
        for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - q[i];
        return norm2(r);
    };

    double res = true_residual();
    int iter = 0;
    // The recurrence residual can drift from the true one; restart from an
    // explicit residual until both agree or the budget runs out.
    while (res > target && iter < options.max_iter) {
        precond.apply(r, z);
        double rz = dot(r, z);
        if (!(rz > 0.0)) throw NumericalError("pcg_solve: breakdown, preconditioner is not positive definite");
        p = z;
        while (iter < options.max_iter) {
            a.apply(p, q);
            const double curvature = dot(p, q);
            if (!(curvature > 0.0)) {
                throw NumericalError("pcg_solve: breakdown, non-positive curvature " + std::to_string(curvature) +
                                     " (operator is not positive definite)");
            }
            const double alpha = rz / curvature;
            axpy(alpha, p, x);
            axpy(-alpha, q, r);
            ++iter;
            if (norm2(r) <= target) break;
            precond.apply(r, z);
            const double rz_next = dot(r, z);
            if (!(rz_next > 0.0)) throw NumericalError("pcg_solve: breakdown, preconditioner is not positive definite");
            const double beta = rz_next / rz;
            rz = rz_next;
            for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
        }
        res = true_residual();
    }

    result.iterations = iter;
    result.relative_residual = res / rhs_norm;
    result.converged = res <= target;
    return result;
}

} // namespace hipad

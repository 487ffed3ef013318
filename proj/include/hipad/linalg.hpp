#pragma once

// Sparse/dense kernels used by the ADMM and interior-point solvers.
//
// Everything here is single-threaded with a fixed accumulation order, so the
// same inputs always give bitwise-identical outputs.

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace hipad {

using Vector = std::vector<double>;

double dot(std::span<const double> x, std::span<const double> y);
double norm2(std::span<const double> x);
double norm_inf(std::span<const double> x);
/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
/// Returns x - y.
Vector subtract(std::span<const double> x, std::span<const double> y);
bool all_finite(std::span<const double> x);

class DenseMatrix;

/// Row-compressed sparse matrix.
///
/// Column indices are strictly increasing within a row and every stored
/// value is addressable through `row_indices(i)` / `row_values(i)`.
class SparseMatrix {
public:
    using Entry = std::pair<std::size_t, double>;

    SparseMatrix() = default;
    /// All-zero matrix of the given shape.
    SparseMatrix(std::size_t rows, std::size_t cols);
    /// Takes ownership of CSR arrays; throws InvalidArgument if they are inconsistent.
    SparseMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_ptr,
                 std::vector<std::size_t> col_idx, std::vector<double> values);

    /// Builds from per-row (column, value) lists. Rows must already be sorted
    /// by column without duplicates; explicit zeros are dropped.
    static SparseMatrix from_rows(std::size_t cols, const std::vector<std::vector<Entry>>& rows);
    /// Row-major dense input; zeros are not stored.
    static SparseMatrix from_dense(std::size_t rows, std::size_t cols, std::span<const double> data);
    static SparseMatrix identity(std::size_t n);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t nnz() const noexcept { return values_.size(); }

    std::span<const std::size_t> row_indices(std::size_t i) const;
    std::span<const double> row_values(std::size_t i) const;
    double row_dot(std::size_t i, std::span<const double> x) const;

    /// out = M x
    void multiply(std::span<const double> x, std::span<double> out) const;
    /// out = M^T x
    void multiply_transpose(std::span<const double> x, std::span<double> out) const;

    /// Keeps `columns` (in the given order) and renumbers them 0..k-1.
    SparseMatrix select_columns(std::span<const std::size_t> columns) const;
    SparseMatrix select_rows(std::span<const std::size_t> rows) const;
    SparseMatrix transpose() const;
    /// Squared Euclidean norm of every column.
    Vector column_squared_norms() const;
    /// Sum of every column, i.e. M^T e.
    Vector column_sums() const;
    /// M M^T as a dense matrix.
    DenseMatrix gram_rows() const;
    DenseMatrix to_dense() const;

    friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<std::size_t> row_ptr_{0};
    std::vector<std::size_t> col_idx_;
    std::vector<double> values_;
};

/// y = M x
Vector spmv(const SparseMatrix& m, std::span<const double> x);
/// y = M^T x
Vector spmv_t(const SparseMatrix& m, std::span<const double> x);

/// Row-major dense matrix.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill)
    {
    }

    static DenseMatrix identity(std::size_t n);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> data() const noexcept { return data_; }

    Vector multiply(std::span<const double> x) const;
    /// this += alpha * u u^T
    void add_outer(double alpha, std::span<const double> u);
    void add_diagonal(double alpha);
    double max_asymmetry() const;

    friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Dense Cholesky factor L L^T of a symmetric positive definite matrix.
/// Only the lower triangle of the input is read.
class Cholesky {
public:
    /// Throws NumericalError on a non-positive pivot.
    explicit Cholesky(const DenseMatrix& a);

    std::size_t order() const noexcept { return factor_.rows(); }
    Vector solve(std::span<const double> rhs) const;
    void solve_in_place(std::span<double> x) const;

private:
    DenseMatrix factor_;
};

/// One-shot factor-and-solve for a small SPD system.
Vector cholesky_solve(const DenseMatrix& a, std::span<const double> rhs);

/// A square operator known only through its action on vectors.
struct LinearOperator {
    std::size_t dimension = 0;
    std::function<void(std::span<const double>, std::span<double>)> apply;

    Vector operator()(std::span<const double> x) const;
};

LinearOperator identity_operator(std::size_t n);
/// x -> diag .* x
LinearOperator diagonal_operator(Vector diag);
/// x -> x ./ diag (Jacobi preconditioner from a positive diagonal)
LinearOperator inverse_diagonal_operator(const Vector& diag);

struct PcgOptions {
    double tol = 1e-8;
    int max_iter = 200;
};

struct PcgResult {
    Vector x;
    int iterations = 0;
    /// ||A x - rhs|| / ||rhs||, evaluated from an explicit product at exit.
    double relative_residual = 0.0;
    bool converged = false;
};

/// Preconditioned conjugate gradients for SPD `a`.
///
/// `x0` (optional) is the initial guess. Reaching `max_iter` is reported via
/// `converged == false` and the last iterate is returned. A non-positive
/// curvature p^T A p or r^T M r throws NumericalError.
PcgResult pcg_solve(const LinearOperator& a, std::span<const double> rhs,
                    const LinearOperator& precond, const PcgOptions& options = {},
                    std::span<const double> x0 = {});

} // namespace hipad

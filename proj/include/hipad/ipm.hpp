#pragma once

// Phase-2 solver: primal-dual interior-point method for convex QPs
//
//   min  1/2 x^T H x + c^T x   s.t.  A x = b,  l <= x <= u,
//
// with H = diag(h) + V^T V (V sparse, r x n). Any PSD matrix fits this form;
// the SVM problems produce it directly (V = (YX)^T for the dual, stacked
// identity/knowledge blocks for the knowledge primal). Bounds may be infinite.

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hipad/data.hpp"
#include "hipad/linalg.hpp"

namespace hipad {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct QpProblem {
    Vector hdiag;        // n, nonnegative
    SparseMatrix hfactor; // r x n
    Vector linear;       // n
    SparseMatrix eq;     // p x n
    Vector eq_rhs;       // p
    Vector lower;        // n, may hold -inf
    Vector upper;        // n, may hold +inf

    std::size_t variables() const noexcept { return linear.size(); }
    std::size_t equalities() const noexcept { return eq_rhs.size(); }

    /// Throws DimensionError / InvalidArgument when the fields disagree.
    void validate() const;
    /// H x without forming H.
    Vector apply_quadratic(std::span<const double> x) const;
    double objective(std::span<const double> x) const;
    /// H as a dense matrix (for tests and small problems).
    DenseMatrix dense_quadratic() const;
};

enum class QpStatus { optimal, max_iter, numerical_failure };

std::string_view to_string(QpStatus status);

struct QpSolution {
    Vector x;
    Vector y;        // equality multipliers: H x + c - A^T y - z_lower + z_upper = 0
    Vector z_lower;  // zero where the lower bound is infinite
    Vector z_upper;  // zero where the upper bound is infinite
    QpStatus status = QpStatus::numerical_failure;
    /// ||A x - b||_inf
    double primal_residual = 0.0;
    /// ||H x + c - A^T y - z_lower + z_upper||_inf
    double dual_residual = 0.0;
    /// Largest bound complementarity product (x - l) z_lower or (u - x) z_upper.
    double complementarity = 0.0;
    double objective = 0.0;
    int iterations = 0;
    /// Centering target sigma * mu used at each step.
    std::vector<double> barrier_history;
    /// Diagnostic for non-optimal exits.
    std::string message;
};

struct SvmDualConfig {
    /// Hinge penalty c of the primal, box bound of the dual.
    double svm_cost = 1.0;
    double kkt_tol = 1e-8;
    int max_iter = 100;

    void validate() const;
};

/// Mehrotra predictor-corrector. `warm_start` (optional) is clipped strictly
/// inside the bounds before use. Never throws for numerical trouble; that is
/// reported through `status`.
QpSolution ipm_solve(const QpProblem& qp, std::span<const double> warm_start, const SvmDualConfig& cfg);

/// The kernel-free SVM dual over alpha in [0, c]^N:
///   min 1/2 alpha^T (YX)(YX)^T alpha - e^T alpha  s.t.  y^T alpha = 0.
QpProblem assemble_svm_dual(const DataMatrix& data, const SvmDualConfig& cfg);

/// Dual warm start from a primal guess: c * clip(1 - y_i (x_i^T w + b), 0, 1),
/// averaged with the box center c/2 so every entry is strictly interior.
Vector svm_dual_warm_start(const DataMatrix& data, std::span<const double> w, double b, const SvmDualConfig& cfg);

struct LinearModel {
    Vector w;
    double b = 0.0;
};

/// w = sum_i alpha_i y_i x_i; b averaged over free support vectors, or the
/// midpoint of the interval allowed by the bound-active samples when no
/// support vector is free. Throws DegenerateModelError if every alpha is zero.
LinearModel recover_primal(const QpSolution& solution, const DataMatrix& data, const SvmDualConfig& cfg);

/// 1/2 |w|^2 + c sum_i (1 - y_i (x_i^T w + b))_+
double svm_primal_objective(const DataMatrix& data, const SvmDualConfig& cfg, std::span<const double> w, double b);

/// Knowledge-augmented primal on a (reduced) feature space.
struct KsvmPrimalParams {
    double rho1 = 1.0;
    double rho2 = 1.0;
    double rho3 = 1.0;
    double rho4 = 1.0;
};

/// Warm values from Phase 1, all in the reduced coordinates.
struct KsvmWarmStart {
    Vector w;
    double b = 0.0;
    Vector u;
    Vector v;
};

/// Column ranges of the stacked variable
///   [w | b | u | v | eta_u | eta_v | xi | s | s_u | s_v]
/// where xi are hinge slacks, s the margin surplus, s_u/s_v the surplus of
/// the two knowledge inequalities. Empty sides drop their u/eta/s_u blocks.
struct KsvmLayout {
    std::size_t features = 0;
    std::size_t samples = 0;
    std::size_t k1 = 0;
    std::size_t k2 = 0;

    std::size_t w() const noexcept { return 0; }
    std::size_t b() const noexcept { return features; }
    std::size_t u() const noexcept { return features + 1; }
    std::size_t v() const noexcept { return u() + k1; }
    /// Index of eta_u; meaningful only when k1 > 0.
    std::size_t eta_u() const noexcept { return v() + k2; }
    std::size_t eta_v() const noexcept { return eta_u() + (k1 > 0 ? 1 : 0); }
    std::size_t xi() const noexcept { return eta_v() + (k2 > 0 ? 1 : 0); }
    std::size_t s() const noexcept { return xi() + samples; }
    std::size_t s_u() const noexcept { return s() + samples; }
    std::size_t s_v() const noexcept { return s_u() + (k1 > 0 ? 1 : 0); }
    std::size_t total() const noexcept { return s_v() + (k2 > 0 ? 1 : 0); }
};

struct KsvmPrimalQp {
    QpProblem qp;
    KsvmLayout layout;
    /// Phase-1 values mapped into the stacked variable (not yet clipped).
    Vector warm;
};

/// Builds the knowledge primal
///
///   min 1/2|w|^2 + c e^T xi + rho1/2 |B^T u + w|^2 + rho2 eta_u + rho3/2 |D^T v - w|^2 + rho4 eta_v
///   s.t. Y(Xw + be) + xi >= e,  d^T u - b + 1 <= eta_u,  g^T v + b + 1 <= eta_v,  xi, u, v, eta >= 0
///
/// over the features of `data`. `knowledge` and `outside` together hold the
/// full knowledge matrices: `knowledge` restricted to the same columns as
/// `data`, `outside` the remaining columns (w is zero there, so they only
/// contribute |B_out^T u|^2 and |D_out^T v|^2). `outside` may be empty.
KsvmPrimalQp assemble_ksvm_primal(const DataMatrix& data, const KnowledgeSet& knowledge, const KnowledgeSet& outside,
                                  const KsvmWarmStart& warm, const KsvmPrimalParams& params, const SvmDualConfig& cfg);

/// Objective of the knowledge primal at (w, b, u, v), with xi, eta at their optimal values.
double ksvm_primal_objective(const DataMatrix& data, const KnowledgeSet& knowledge, const KnowledgeSet& outside,
                             const KsvmPrimalParams& params, const SvmDualConfig& cfg, std::span<const double> w,
                             double b, std::span<const double> u, std::span<const double> v);

} // namespace hipad

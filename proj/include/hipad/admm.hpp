#pragma once

// Phase-1 solvers: ADMM on the elastic-net SVM
//
//   min_{w,b}  1/N sum_i (1 - y_i (x_i^T w + b))_+ + lambda1 |w|_1 + lambda2/2 |w|^2
//
// split as a = e - Y(Xw + be), c = w, and its knowledge-augmented variant
// (ENK) where implication rules enter through quadratic and hinge penalties
// on auxiliary multipliers u, v.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "hipad/data.hpp"
#include "hipad/linalg.hpp"

namespace hipad {

struct EnsvmParams {
    double lambda1 = 1e-2;
    double lambda2 = 1.0;
    double mu1 = 1.0;
    double mu2 = 1.0;
    /// Objective-change and feasibility tolerance.
    double eps1 = 1e-5;
    /// Relative iterate-change tolerance.
    double eps2 = 1e-3;
    /// Phase-1 to Phase-2 transition tolerance on ||dw|| / max(||w||, 1).
    double eps_tol = 1e-2;
    /// Consecutive iterations the eps_tol test must pass, with a nonempty
    /// support, before Phase 1 stops. Early iterations often stall near w = 0.
    int transition_patience = 2;
    int max_iter = 2000;
    PcgOptions pcg{};

    /// Throws InvalidArgument when a tolerance or penalty is not positive.
    void validate() const;
};

struct EnkParams : EnsvmParams {
    double rho1 = 1.0;
    double rho2 = 1.0;
    double rho3 = 1.0;
    double rho4 = 1.0;
    double mu3 = 1.0;
    double mu4 = 1.0;
    double mu5 = 1.0;
    double mu6 = 1.0;

    /// All rho's set to `rho` and mu3..mu6 set to `mu`.
    static EnkParams uniform(const EnsvmParams& base, double rho, double mu);
    void validate() const;
};

struct EnsvmState {
    Vector w;
    double b = 0.0;
    Vector a;      // hinge split, length N
    Vector c;      // L1 split, length m
    Vector gamma1; // length N
    Vector gamma2; // length m
    int iter = 0;

    static EnsvmState zeros(std::size_t samples, std::size_t features);
    void check_dimensions(std::size_t samples, std::size_t features) const;
};

struct EnkState : EnsvmState {
    Vector u;      // length k1
    Vector v;      // length k2
    Vector s;      // nonnegative copy of u
    Vector t;      // nonnegative copy of v
    double p = 0.0;
    double q = 0.0;
    double gamma3 = 0.0;
    double gamma4 = 0.0;
    Vector gamma5; // length k1
    Vector gamma6; // length k2

    static EnkState zeros(std::size_t samples, std::size_t features, std::size_t k1, std::size_t k2);
    void check_dimensions(std::size_t samples, std::size_t features, std::size_t k1, std::size_t k2) const;
};

enum class StopReason { transition, converged, iteration_limit };

std::string_view to_string(StopReason reason);

/// Per-iteration diagnostics passed to the optional trace callback.
struct TraceRecord {
    int iteration = 0;
    double objective = 0.0;
    double relative_objective_change = 0.0;
    /// ||a - (e - Y(Xw + be))||
    double hinge_residual = 0.0;
    /// ||c - w||
    double l1_residual = 0.0;
    /// ||dw|| / max(||w_prev||, 1), the transition statistic.
    double transition_change = 0.0;
    /// Largest of ||u - s||, ||v - t||, |d^T u - b + 1 - q|, |g^T v + b + 1 - p| (ENK only).
    double knowledge_residual = 0.0;
    std::size_t support_size = 0;
    int pcg_iterations = 0;
};

using TraceCallback = std::function<void(const TraceRecord&)>;

template <class State>
struct AdmmOutcome {
    State state;
    StopReason reason = StopReason::iteration_limit;
    /// Objective at the returned (w, b) (and u, v for ENK).
    double objective = 0.0;
    /// Indices of the nonzero entries of c.
    std::vector<std::size_t> support;
};

/// Indices of the exactly-nonzero entries.
std::vector<std::size_t> nonzero_support(std::span<const double> c);

/// The elastic-net SVM objective at (w, b).
double ensvm_objective(const DataMatrix& data, const EnsvmParams& params, std::span<const double> w, double b);

/// The knowledge-augmented objective F(w, b, u, v).
double enk_objective(const DataMatrix& data, const KnowledgeSet& knowledge, const EnkParams& params,
                     std::span<const double> w, double b, std::span<const double> u, std::span<const double> v);

/// The (w, b) block system shared by both ADMM variants:
///
///   [ kappa1 I + mu1 X^T X    mu1 X^T e       ] [w]   [r_w]
///   [ mu1 e^T X               mu1 N + kappa2  ] [b] = [r_b]
///
/// applied matrix-free and solved by Jacobi-preconditioned CG.
class WbSystem {
public:
    WbSystem(const SparseMatrix& x, double kappa1, double kappa2, double mu1);

    std::size_t dimension() const noexcept { return x_->cols() + 1; }
    const LinearOperator& op() const noexcept { return op_; }
    const LinearOperator& preconditioner() const noexcept { return precond_; }

    /// Solves for the stacked [w; b]; `warm` (optional) is the initial guess.
    PcgResult solve(std::span<const double> rhs, const PcgOptions& options,
                    std::span<const double> warm = {}) const;

private:
    const SparseMatrix* x_;
    LinearOperator op_;
    LinearOperator precond_;
};

/// ADMM for the elastic-net SVM. Holds the data-dependent precomputation so
/// repeated steps do not redo it.
class EnsvmSolver {
public:
    /// `data` must outlive the solver.
    EnsvmSolver(const DataMatrix& data, const EnsvmParams& params);

    /// One ADMM sweep: (w, b) solve, a, c, then both multipliers.
    /// Returns the PCG iteration count of the block solve.
    int step(EnsvmState& state) const;

    AdmmOutcome<EnsvmState> run(EnsvmState init, bool stop_on_transition, const TraceCallback& trace = {}) const;

    double objective(std::span<const double> w, double b) const;

private:
    const DataMatrix* data_;
    EnsvmParams params_;
    WbSystem system_;
};

/// ADMM for the knowledge-augmented elastic-net SVM. The two small knowledge
/// systems are factorized once at construction.
class EnkSolver {
public:
    /// `data` and `knowledge` must outlive the solver. Throws NumericalError if
    /// a knowledge system is not positive definite.
    EnkSolver(const DataMatrix& data, const KnowledgeSet& knowledge, const EnkParams& params);

    int step(EnkState& state) const;

    AdmmOutcome<EnkState> run(EnkState init, bool stop_on_transition, const TraceCallback& trace = {}) const;

    double objective(const EnkState& state) const;

    /// rho1 B B^T + mu3 d d^T + mu5 I (empty when k1 = 0).
    const DenseMatrix& positive_system() const noexcept { return pos_matrix_; }
    /// rho3 D D^T + mu4 g g^T + mu6 I (empty when k2 = 0).
    const DenseMatrix& negative_system() const noexcept { return neg_matrix_; }

private:
    const DataMatrix* data_;
    const KnowledgeSet* knowledge_;
    EnkParams params_;
    WbSystem system_;
    DenseMatrix pos_matrix_;
    DenseMatrix neg_matrix_;
    std::optional<Cholesky> pos_factor_;
    std::optional<Cholesky> neg_factor_;
};

EnsvmState admm_ensvm_step(const EnsvmState& state, const DataMatrix& data, const EnsvmParams& params);

AdmmOutcome<EnsvmState> admm_ensvm_run(const DataMatrix& data, const EnsvmParams& params, EnsvmState init,
                                       bool stop_on_transition, const TraceCallback& trace = {});

EnkState admm_enk_step(const EnkState& state, const DataMatrix& data, const KnowledgeSet& knowledge,
                       const EnkParams& params);

AdmmOutcome<EnkState> admm_enk_run(const DataMatrix& data, const KnowledgeSet& knowledge, const EnkParams& params,
                                   EnkState init, bool stop_on_transition, const TraceCallback& trace = {});

} // namespace hipad

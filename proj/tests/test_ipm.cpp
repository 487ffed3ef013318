#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hipad/error.hpp"
#include "hipad/ipm.hpp"
#include "hipad/random.hpp"
#include "oracles.hpp"

using namespace hipad;

namespace {

DataMatrix two_points()
{
    return DataMatrix(SparseMatrix::from_dense(2, 2, std::vector<double>{1.0, 0.0, -1.0, 0.0}), Vector{1.0, -1.0});
}

QpProblem box_qp(std::size_t n, double cap)
{
    QpProblem qp;
    qp.hdiag.assign(n, 1.0);
    qp.hfactor = SparseMatrix(0, n);
    qp.linear.assign(n, -1.0);
    qp.eq = SparseMatrix(0, n);
    qp.lower.assign(n, 0.0);
    qp.upper.assign(n, cap);
    return qp;
}

/// Strictly convex QP with `p` equalities, feasible by construction. Every
/// fourth variable has no upper bound.
QpProblem random_qp(Rng& rng, std::size_t n, std::size_t p)
{
    QpProblem qp;
    qp.hdiag.resize(n);
    for (double& h : qp.hdiag) h = rng.uniform(0.1, 1.0);
    qp.hfactor = oracle::random_sparse(rng, 8, n, 0.4);
    qp.linear.resize(n);
    for (double& c : qp.linear) c = rng.uniform(-2.0, 2.0);
    qp.lower.resize(n);
    qp.upper.resize(n);
    Vector inside(n);
    for (std::size_t i = 0; i < n; ++i) {
        qp.lower[i] = rng.uniform(-1.0, 0.0);
        qp.upper[i] = i % 4 == 3 ? kInfinity : rng.uniform(0.5, 2.0);
        const double hi = std::isfinite(qp.upper[i]) ? qp.upper[i] : 1.0;
        inside[i] = qp.lower[i] + rng.uniform(0.1, 0.9) * (hi - qp.lower[i]);
    }
    qp.eq = oracle::random_sparse(rng, p, n, 0.5);
    qp.eq_rhs = spmv(qp.eq, inside);
    return qp;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b)
{
    REQUIRE(a.size() == b.size());
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

DataMatrix scaled(const DataMatrix& data, double factor)
{
    const DenseMatrix d = data.x().to_dense();
    Vector vals(d.data().begin(), d.data().end());
    for (double& v : vals) v *= factor;
    return DataMatrix(SparseMatrix::from_dense(d.rows(), d.cols(), vals), Vector(data.y().begin(), data.y().end()));
}

} // namespace

TEST_CASE("separable box QP")
{
    for (double cap : {0.5, 1.0, 3.0}) {
        const QpSolution sol = ipm_solve(box_qp(6, cap), {}, SvmDualConfig{});
        REQUIRE(sol.status == QpStatus::optimal);
        // At cap = 1 the optimum sits on the bound with a zero multiplier, so
        // the iterate is only accurate to about sqrt(complementarity).
        const double tol = cap == 1.0 ? 2.0 * std::sqrt(sol.complementarity) : 1e-7;
        for (double x : sol.x) CHECK(std::abs(x - std::min(1.0, cap)) <= tol);
        CHECK(sol.objective == doctest::Approx(-3.0 * std::min(1.0, cap) * (2.0 - std::min(1.0, cap))).epsilon(1e-8));
        CHECK(sol.primal_residual <= 1e-8);
        CHECK(sol.dual_residual <= 1e-8);
        CHECK(sol.complementarity <= 1e-8);
    }
}

TEST_CASE("two-sample SVM dual")
{
    SvmDualConfig cfg;
    cfg.svm_cost = 10.0;
    const DataMatrix data = two_points();
    const QpProblem qp = assemble_svm_dual(data, cfg);

    const DenseMatrix q = qp.dense_quadratic();
    CHECK(q(0, 0) == 1.0);
    CHECK(q(0, 1) == 1.0);
    CHECK(q(1, 0) == 1.0);
    CHECK(q(1, 1) == 1.0);
    CHECK(qp.linear == Vector{-1.0, -1.0});
    CHECK(qp.eq_rhs == Vector{0.0});
    CHECK(qp.upper == Vector{10.0, 10.0});

    const QpSolution sol = ipm_solve(qp, {}, cfg);
    REQUIRE(sol.status == QpStatus::optimal);
    CHECK(std::abs(sol.x[0] - 0.5) <= 1e-6);
    CHECK(std::abs(sol.x[1] - 0.5) <= 1e-6);

    const LinearModel lin = recover_primal(sol, data, cfg);
    CHECK(std::abs(lin.w[0] - 1.0) <= 1e-6);
    CHECK(std::abs(lin.w[1]) <= 1e-6);
    CHECK(std::abs(lin.b) <= 1e-6);
}

TEST_CASE("single-sample dual has alpha = 0 and no model")
{
    const DataMatrix one(SparseMatrix::from_dense(1, 2, std::vector<double>{3.0, 4.0}), Vector{1.0});
    const SvmDualConfig cfg;
    const QpProblem qp = assemble_svm_dual(one, cfg);
    CHECK(qp.dense_quadratic()(0, 0) == 25.0);
    const QpSolution sol = ipm_solve(qp, {}, cfg);
    REQUIRE(sol.status == QpStatus::optimal);
    CHECK(std::abs(sol.x[0]) <= 1e-8);

    QpSolution zero = sol;
    zero.x.assign(1, 0.0);
    CHECK_THROWS_AS(recover_primal(zero, one, cfg), DegenerateModelError);
}

TEST_CASE("random QPs agree with projected gradient")
{
    Rng rng(314);
    const SvmDualConfig cfg;
    for (int trial = 0; trial < 10; ++trial) {
        const QpProblem qp = random_qp(rng, 20, 3);
        const QpSolution sol = ipm_solve(qp, {}, cfg);
        REQUIRE(sol.status == QpStatus::optimal);

        const oracle::KktResiduals kkt = oracle::kkt_residuals(qp, sol);
        CHECK(kkt.primal <= 1e-8);
        CHECK(kkt.dual <= 1e-8);
        CHECK(kkt.complementarity <= 1e-8);
        CHECK(kkt.sign_violation <= 0.0);

        const oracle::QpReference ref = oracle::projected_gradient_qp(qp);
        CHECK(ref.infeasibility <= 1e-9);
        CHECK(std::abs(sol.objective - ref.objective) <= 1e-5);
    }
}

TEST_CASE("dependent equality rows are dropped")
{
    Rng rng(55);
    QpProblem qp = random_qp(rng, 12, 2);
    // Append a zero row and a combination of the first two.
    std::vector<std::vector<SparseMatrix::Entry>> rows(4);
    for (std::size_t i = 0; i < 2; ++i) {
        const auto idx = qp.eq.row_indices(i);
        const auto val = qp.eq.row_values(i);
        for (std::size_t q = 0; q < idx.size(); ++q) rows[i].emplace_back(idx[q], val[q]);
    }
    const DenseMatrix d = qp.eq.to_dense();
    for (std::size_t j = 0; j < 12; ++j) {
        const double v = 2.0 * d(0, j) - d(1, j);
        if (v != 0.0) rows[3].emplace_back(j, v);
    }
    const QpSolution full = ipm_solve(qp, {}, SvmDualConfig{});
    REQUIRE(full.status == QpStatus::optimal);

    QpProblem dep = qp;
    dep.eq = SparseMatrix::from_rows(12, rows);
    dep.eq_rhs = {qp.eq_rhs[0], qp.eq_rhs[1], 0.0, 2.0 * qp.eq_rhs[0] - qp.eq_rhs[1]};
    const QpSolution sol = ipm_solve(dep, {}, SvmDualConfig{});
    REQUIRE(sol.status == QpStatus::optimal);
    CHECK(sol.y.size() == 4);
    CHECK(std::abs(sol.objective - full.objective) <= 1e-8);
    const oracle::KktResiduals kkt = oracle::kkt_residuals(dep, sol);
    CHECK(kkt.primal <= 1e-8);
    CHECK(kkt.dual <= 1e-8);

    dep.eq_rhs[2] = 1.0;
    const QpSolution bad = ipm_solve(dep, {}, SvmDualConfig{});
    CHECK(bad.status == QpStatus::numerical_failure);
    CHECK(bad.message.find("inconsistent") != std::string::npos);
}

TEST_CASE("matrix-free dual quadratic matches the dense construction")
{
    Rng rng(55);
    const DataMatrix data = oracle::random_data(rng, 50, 30, 0.3);
    const QpProblem qp = assemble_svm_dual(data, SvmDualConfig{});
    const DenseMatrix x = data.x().to_dense();
    DenseMatrix q(50, 50);
    for (std::size_t i = 0; i < 50; ++i) {
        for (std::size_t j = 0; j < 50; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < 30; ++k) s += x(i, k) * x(j, k);
            q(i, j) = data.y()[i] * data.y()[j] * s;
        }
    }
    for (int trial = 0; trial < 5; ++trial) {
        Vector a(50);
        for (double& e : a) e = rng.uniform(-1.0, 1.0);
        CHECK(max_abs_diff(qp.apply_quadratic(a), q.multiply(a)) <= 1e-10);
    }
}

TEST_CASE("strong duality between the SVM primal and dual")
{
    Rng rng(77);
    for (int trial = 0; trial < 5; ++trial) {
        // Separable: labels from a random hyperplane with margin.
        const SparseMatrix x = oracle::random_sparse(rng, 40, 10, 0.8);
        Vector h(10);
        for (double& e : h) e = rng.uniform(-1.0, 1.0);
        Vector y(40);
        const Vector f = spmv(x, h);
        for (std::size_t i = 0; i < 40; ++i) y[i] = f[i] >= 0.0 ? 1.0 : -1.0;
        const DataMatrix data(x, y);

        SvmDualConfig cfg;
        cfg.svm_cost = 5.0;
        const QpSolution sol = ipm_solve(assemble_svm_dual(data, cfg), {}, cfg);
        REQUIRE(sol.status == QpStatus::optimal);
        const LinearModel lin = recover_primal(sol, data, cfg);
        const double primal = svm_primal_objective(data, cfg, lin.w, lin.b);
        const double dual = -sol.objective;
        CHECK(std::abs(primal - dual) <= 1e-6 * std::max(1.0, std::abs(dual)));
    }
}

TEST_CASE("scaling the data with a matching cost keeps the training signs")
{
    Rng rng(91);
    const DataMatrix data = oracle::random_data(rng, 30, 8, 0.7);
    SvmDualConfig cfg;
    cfg.svm_cost = 2.0;
    SvmDualConfig cfg2 = cfg;
    // X -> 2X with w -> w/2 leaves every margin alone; the |w|^2 term drops by 4.
    cfg2.svm_cost = cfg.svm_cost / 4.0;
    const DataMatrix big = scaled(data, 2.0);

    const LinearModel a = recover_primal(ipm_solve(assemble_svm_dual(data, cfg), {}, cfg), data, cfg);
    const LinearModel b = recover_primal(ipm_solve(assemble_svm_dual(big, cfg2), {}, cfg2), big, cfg2);
    for (std::size_t i = 0; i < 30; ++i) {
        const double fa = data.x().row_dot(i, a.w) + a.b;
        const double fb = big.x().row_dot(i, b.w) + b.b;
        CHECK((fa >= 0.0) == (fb >= 0.0));
    }
}

TEST_CASE("warm starts are strictly interior")
{
    const DataMatrix data = two_points();
    SvmDualConfig cfg;
    cfg.svm_cost = 4.0;
    const Vector w{5.0, 0.0};
    const Vector a0 = svm_dual_warm_start(data, w, 0.0, cfg);
    for (double a : a0) {
        CHECK(a > 0.0);
        CHECK(a < cfg.svm_cost);
    }
    const QpSolution sol = ipm_solve(assemble_svm_dual(data, cfg), a0, cfg);
    CHECK(sol.status == QpStatus::optimal);
}

TEST_CASE("iteration cap and invalid problems")
{
    SvmDualConfig cfg;
    cfg.max_iter = 1;
    const QpSolution sol = ipm_solve(assemble_svm_dual(two_points(), SvmDualConfig{}), {}, cfg);
    CHECK(sol.status == QpStatus::max_iter);
    CHECK(sol.iterations == 1);
    CHECK(sol.barrier_history.size() == 1);

    QpProblem bad = box_qp(3, 1.0);
    bad.lower[1] = 2.0;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
    bad = box_qp(3, 1.0);
    bad.linear.pop_back();
    CHECK_THROWS_AS(bad.validate(), DimensionError);

    SvmDualConfig neg;
    neg.svm_cost = -1.0;
    CHECK_THROWS_AS(neg.validate(), InvalidArgument);
}

TEST_CASE("knowledge primal without rules matches the dual path")
{
    Rng rng(101);
    for (int trial = 0; trial < 3; ++trial) {
        const DataMatrix data = oracle::random_data(rng, 30, 6, 0.8);
        SvmDualConfig cfg;
        cfg.svm_cost = 0.5;
        const QpSolution dual = ipm_solve(assemble_svm_dual(data, cfg), {}, cfg);
        REQUIRE(dual.status == QpStatus::optimal);
        const LinearModel lin = recover_primal(dual, data, cfg);

        const KnowledgeSet none = KnowledgeSet::empty(6);
        const KsvmWarmStart warm{Vector(6, 0.0), 0.0, {}, {}};
        const KsvmPrimalQp kqp = assemble_ksvm_primal(data, none, KnowledgeSet::empty(0), warm, {}, cfg);
        CHECK(kqp.layout.total() == 6 + 1 + 2 * 30);
        const QpSolution prim = ipm_solve(kqp.qp, kqp.warm, cfg);
        REQUIRE(prim.status == QpStatus::optimal);
        for (std::size_t j = 0; j < 6; ++j) CHECK(std::abs(prim.x[j] - lin.w[j]) <= 1e-5);
        CHECK(std::abs(prim.x[kqp.layout.b()] - lin.b) <= 1e-5);
    }
}

TEST_CASE("knowledge primal on a one-rule toy satisfies KKT")
{
    // m = 2, k1 = 1: x1 <= -4 ... written as B = (1, 0), d = -4.
    const DataMatrix data(SparseMatrix::from_dense(4, 2, std::vector<double>{1.0, 0.2, 0.5, -1.0, -1.0, 0.3, -0.4, 1.0}),
                          Vector{1.0, 1.0, -1.0, -1.0});
    const KnowledgeSet k(SparseMatrix::from_dense(1, 2, std::vector<double>{1.0, 0.0}), Vector{-4.0},
                         SparseMatrix(0, 2), Vector{});
    SvmDualConfig cfg;
    cfg.svm_cost = 1.0;
    const KsvmPrimalParams params{2.0, 1.5, 1.0, 1.0};
    const KsvmWarmStart warm{Vector{0.0, 0.0}, 0.0, Vector{0.0}, {}};
    const KsvmPrimalQp kqp = assemble_ksvm_primal(data, k, KnowledgeSet(), warm, params, cfg);

    // eta_u = d^T u - b + 1 = 0 - 0 + 1 at the warm point.
    CHECK(kqp.warm[kqp.layout.eta_u()] == 1.0);

    const QpSolution sol = ipm_solve(kqp.qp, kqp.warm, cfg);
    REQUIRE(sol.status == QpStatus::optimal);
    const oracle::KktResiduals kkt = oracle::kkt_residuals(kqp.qp, sol);
    CHECK(kkt.primal <= 1e-6);
    CHECK(kkt.dual <= 1e-6);
    CHECK(kkt.complementarity <= 1e-6);

    const Vector w(sol.x.begin(), sol.x.begin() + 2);
    const Vector u{sol.x[kqp.layout.u()]};
    const double f = ksvm_primal_objective(data, k, KnowledgeSet(), params, cfg, w, sol.x[kqp.layout.b()], u, {});
    CHECK(f == doctest::Approx(sol.objective).epsilon(1e-6));
    CHECK(u[0] >= -1e-12);
}

TEST_CASE("knowledge primal rejects mismatched shapes")
{
    const DataMatrix data = two_points();
    const KnowledgeSet k(SparseMatrix::from_dense(1, 3, std::vector<double>{1.0, 0.0, 0.0}), Vector{-4.0},
                         SparseMatrix(0, 3), Vector{});
    const KsvmWarmStart warm{Vector{0.0, 0.0}, 0.0, Vector{0.0}, {}};
    CHECK_THROWS_AS(assemble_ksvm_primal(data, k, KnowledgeSet(), warm, {}, SvmDualConfig{}), DimensionError);
}

#include "hipad/ipm.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include "hipad/error.hpp"

namespace hipad {

namespace {

void require_length(std::size_t actual, std::size_t expected, const char* name)
{
    if (actual != expected) {
        throw DimensionError(std::string(name) + " has length " + std::to_string(actual) + ", expected " +
                             std::to_string(expected));
    }
}

/// Rows of `eq` that are linearly independent of the rows before them,
/// by Gram-Schmidt with reorthogonalization.
std::vector<std::size_t> independent_rows(const SparseMatrix& eq)
{
    const std::size_t n = eq.cols();
    std::vector<Vector> basis;
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < eq.rows(); ++i) {
        Vector r(n, 0.0);
        const auto idx = eq.row_indices(i);
        const auto val = eq.row_values(i);
        for (std::size_t q = 0; q < idx.size(); ++q) r[idx[q]] = val[q];
        const double scale = norm2(r);
        if (scale == 0.0) continue;
        for (int pass = 0; pass < 2; ++pass) {
            for (const Vector& b : basis) axpy(-dot(b, r), b, r);
        }
        const double left = norm2(r);
        if (left <= 1e-10 * scale) continue;
        for (double& v : r) v /= left;
        basis.push_back(std::move(r));
        keep.push_back(i);
    }
    return keep;
}

/// A symmetric positive definite factor that short-circuits diagonal input.
class SpdFactor {
public:
    void factor(const DenseMatrix& a)
    {
        const std::size_t n = a.rows();
        bool diagonal = true;
        for (std::size_t i = 0; i < n && diagonal; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (i != j && a(i, j) != 0.0) {
                    diagonal = false;
                    break;
                }
            }
        }
        chol_.reset();
        diag_.clear();
        if (diagonal) {
            diag_.resize(n);
            for (std::size_t i = 0; i < n; ++i) {
                if (!(a(i, i) > 0.0)) throw NumericalError("non-positive pivot in the reduced Newton system");
                diag_[i] = a(i, i);
            }
        } else {
            chol_.emplace(a);
        }
    }

    void solve_in_place(std::span<double> x) const
    {
        if (chol_) {
            chol_->solve_in_place(x);
        } else {
            for (std::size_t i = 0; i < x.size(); ++i) x[i] /= diag_[i];
        }
    }

private:
    Vector diag_;
    std::optional<Cholesky> chol_;
};

/// Solves the Newton system
///
///   (diag(k) + V^T V) dx - A^T dy = rho,    A dx = -r_p
///
/// by splitting the variables into a coupled set D (touched by V, or with a
/// zero diagonal) and a purely diagonal set G. When every equality row
/// touches G, the multipliers are eliminated through E = A_G K_G^-1 A_G^T
/// and a dense system in D remains; otherwise K_D is factorized directly and
/// the multipliers come from the Schur complement A K^-1 A^T.
class NewtonSystem {
public:
    NewtonSystem(const QpProblem& qp, std::span<const bool> bounded) : qp_(&qp)
    {
        const std::size_t n = qp.variables();
        const std::size_t p = qp.equalities();
        const SparseMatrix vt = qp.hfactor.transpose(); // n x r
        slot_.assign(n, 0);
        in_d_.assign(n, false);
        for (std::size_t j = 0; j < n; ++j) {
            const bool coupled = vt.row_indices(j).size() > 0;
            const bool has_diag = bounded[j] || qp.hdiag[j] > 0.0;
            in_d_[j] = coupled || !has_diag;
            if (in_d_[j]) {
                slot_[j] = dset_.size();
                dset_.push_back(j);
            } else {
                slot_[j] = gset_.size();
                gset_.push_back(j);
            }
        }

        gram_dd_ = vt.select_rows(dset_).gram_rows();

        a_d_ = DenseMatrix(p, dset_.size());
        std::vector<std::vector<SparseMatrix::Entry>> gcols(gset_.size());
        std::vector<bool> row_touches_g(p, false);
        for (std::size_t i = 0; i < p; ++i) {
            const auto idx = qp.eq.row_indices(i);
            const auto val = qp.eq.row_values(i);
            for (std::size_t q = 0; q < idx.size(); ++q) {
                const std::size_t j = idx[q];
                if (in_d_[j]) {
                    a_d_(i, slot_[j]) = val[q];
                } else {
                    gcols[slot_[j]].emplace_back(i, val[q]);
                    row_touches_g[i] = true;
                }
            }
        }
        a_g_t_ = SparseMatrix::from_rows(p, gcols);
        // E = A_G K_G^-1 A_G^T is only invertible when A_G has full row rank.
        eliminate_multipliers_ = p > 0 && std::all_of(row_touches_g.begin(), row_touches_g.end(), [](bool t) { return t; }) &&
                                 independent_rows(a_g_t_.transpose()).size() == p;
    }

    void factor(std::span<const double> kdiag)
    {
        const std::size_t nd = dset_.size();
        const std::size_t ng = gset_.size();
        const std::size_t p = qp_->equalities();

        kgg_.resize(ng);
        for (std::size_t k = 0; k < ng; ++k) {
            kgg_[k] = kdiag[gset_[k]];
            if (!(kgg_[k] > 0.0)) throw NumericalError("non-positive diagonal in the Newton system");
        }

        DenseMatrix e(p, p);
        for (std::size_t k = 0; k < ng; ++k) {
            const auto rows = a_g_t_.row_indices(k);
            const auto vals = a_g_t_.row_values(k);
            for (std::size_t s = 0; s < rows.size(); ++s) {
                for (std::size_t t = 0; t < rows.size(); ++t) e(rows[s], rows[t]) += vals[s] * vals[t] / kgg_[k];
            }
        }

        DenseMatrix kdd = gram_dd_;
        for (std::size_t q = 0; q < nd; ++q) kdd(q, q) += kdiag[dset_[q]];

        Vector col(std::max(p, nd));
        if (eliminate_multipliers_) {
            e_.factor(e);
            // M = K_D + A_D^T E^-1 A_D
            DenseMatrix einv_ad(p, nd);
            std::span<double> c = std::span<double>(col).first(p);
            for (std::size_t q = 0; q < nd; ++q) {
                for (std::size_t i = 0; i < p; ++i) c[i] = a_d_(i, q);
                e_.solve_in_place(c);
                for (std::size_t i = 0; i < p; ++i) einv_ad(i, q) = c[i];
            }
            for (std::size_t r = 0; r < nd; ++r) {
                for (std::size_t i = 0; i < p; ++i) {
                    const double a = a_d_(i, r);
                    if (a == 0.0) continue;
                    auto out = kdd.row(r);
                    const auto src = einv_ad.row(i);
                    for (std::size_t q = 0; q < nd; ++q) out[q] += a * src[q];
                }
            }
            // Symmetrize against rounding before factorizing.
            for (std::size_t r = 0; r < nd; ++r) {
                for (std::size_t q = r + 1; q < nd; ++q) kdd(q, r) = kdd(r, q) = 0.5 * (kdd(r, q) + kdd(q, r));
            }
            kd_.emplace(kdd);
        } else {
            kd_.emplace(kdd);
            if (p > 0) {
                // S = E + A_D K_D^-1 A_D^T
                DenseMatrix kinv_adt(nd, p);
                std::span<double> c = std::span<double>(col).first(nd);
                for (std::size_t i = 0; i < p; ++i) {
                    for (std::size_t q = 0; q < nd; ++q) c[q] = a_d_(i, q);
                    kd_->solve_in_place(c);
                    for (std::size_t q = 0; q < nd; ++q) kinv_adt(q, i) = c[q];
                }
                for (std::size_t i = 0; i < p; ++i) {
                    for (std::size_t q = 0; q < nd; ++q) {
                        const double a = a_d_(i, q);
                        if (a == 0.0) continue;
                        auto out = e.row(i);
                        const auto src = kinv_adt.row(q);
                        for (std::size_t t = 0; t < p; ++t) out[t] += a * src[t];
                    }
                }
                for (std::size_t r = 0; r < p; ++r) {
                    for (std::size_t q = r + 1; q < p; ++q) e(q, r) = e(r, q) = 0.5 * (e(r, q) + e(q, r));
                }
                e_.factor(e);
            }
        }
    }

    void solve(std::span<const double> rho, std::span<const double> rp, Vector& dx, Vector& dy) const
    {
        const std::size_t n = qp_->variables();
        const std::size_t p = qp_->equalities();
        const std::size_t nd = dset_.size();
        const std::size_t ng = gset_.size();
        dx.assign(n, 0.0);
        dy.assign(p, 0.0);

        Vector rho_d(nd), rho_g(ng);
        for (std::size_t q = 0; q < nd; ++q) rho_d[q] = rho[dset_[q]];
        for (std::size_t k = 0; k < ng; ++k) rho_g[k] = rho[gset_[k]];

        // t = A_G K_G^-1 rho_G
        Vector t(p, 0.0);
        for (std::size_t k = 0; k < ng; ++k) {
            const double s = rho_g[k] / kgg_[k];
            const auto rows = a_g_t_.row_indices(k);
            const auto vals = a_g_t_.row_values(k);
            for (std::size_t q = 0; q < rows.size(); ++q) t[rows[q]] += vals[q] * s;
        }

        Vector dxd;
        if (eliminate_multipliers_) {
            for (std::size_t i = 0; i < p; ++i) t[i] += rp[i];
            Vector et = t;
            e_.solve_in_place(et);
            dxd = rho_d;
            for (std::size_t i = 0; i < p; ++i) {
                for (std::size_t q = 0; q < nd; ++q) dxd[q] -= a_d_(i, q) * et[i];
            }
            kd_->solve_in_place(dxd);
            for (std::size_t i = 0; i < p; ++i) {
                double s = t[i];
                for (std::size_t q = 0; q < nd; ++q) s += a_d_(i, q) * dxd[q];
                dy[i] = -s;
            }
            e_.solve_in_place(dy);
        } else {
            Vector kr = rho_d;
            if (nd > 0) kd_->solve_in_place(kr);
            if (p > 0) {
                for (std::size_t i = 0; i < p; ++i) {
                    double s = rp[i] + t[i];
                    for (std::size_t q = 0; q < nd; ++q) s += a_d_(i, q) * kr[q];
                    dy[i] = -s;
                }
                e_.solve_in_place(dy);
            }
            dxd = rho_d;
            for (std::size_t i = 0; i < p; ++i) {
                for (std::size_t q = 0; q < nd; ++q) dxd[q] += a_d_(i, q) * dy[i];
            }
            if (nd > 0) kd_->solve_in_place(dxd);
        }

        for (std::size_t q = 0; q < nd; ++q) dx[dset_[q]] = dxd[q];
        for (std::size_t k = 0; k < ng; ++k) {
            double s = rho_g[k];
            const auto rows = a_g_t_.row_indices(k);
            const auto vals = a_g_t_.row_values(k);
            for (std::size_t q = 0; q < rows.size(); ++q) s += vals[q] * dy[rows[q]];
            dx[gset_[k]] = s / kgg_[k];
        }
    }

private:
    const QpProblem* qp_;
    std::vector<std::size_t> dset_;
    std::vector<std::size_t> gset_;
    std::vector<std::size_t> slot_;
    std::vector<bool> in_d_;
    DenseMatrix gram_dd_;
    DenseMatrix a_d_;     // p x |D|
    SparseMatrix a_g_t_;  // |G| x p
    bool eliminate_multipliers_ = false;

    Vector kgg_;
    SpdFactor e_;
    std::optional<Cholesky> kd_;
};

struct Residuals {
    double primal = 0.0;
    double dual = 0.0;
    double comp_max = 0.0;
    double comp_mean = 0.0;
};

struct Iterate {
    Vector x, y, zl, zu;
};

/// Largest step in (0, 1] keeping v + step * dv >= 0 on the masked entries.
double max_step(std::span<const double> v, std::span<const double> dv, std::span<const bool> mask)
{
    double a = 1.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (mask[i] && dv[i] < 0.0) a = std::min(a, -v[i] / dv[i]);
    }
    return a;
}

} // namespace

void QpProblem::validate() const
{
    const std::size_t n = variables();
    require_length(hdiag.size(), n, "quadratic diagonal");
    require_length(lower.size(), n, "lower bounds");
    require_length(upper.size(), n, "upper bounds");
    if (hfactor.cols() != n) throw DimensionError("quadratic factor has the wrong column count");
    if (eq.cols() != n || eq.rows() != equalities()) throw DimensionError("equality matrix shape does not match");
    if (equalities() > n) throw InvalidArgument("more equality constraints than variables");
    for (std::size_t j = 0; j < n; ++j) {
        if (!(hdiag[j] >= 0.0) || !std::isfinite(hdiag[j])) throw InvalidArgument("quadratic diagonal must be nonnegative");
        if (!std::isfinite(linear[j])) throw InvalidArgument("linear term must be finite");
        if (std::isnan(lower[j]) || std::isnan(upper[j]) || lower[j] > upper[j] || lower[j] == kInfinity ||
            upper[j] == -kInfinity) {
            throw InvalidArgument("bounds must satisfy lower <= upper at variable " + std::to_string(j));
        }
    }
    if (!all_finite(eq_rhs)) throw InvalidArgument("equality right-hand side must be finite");
}

Vector QpProblem::apply_quadratic(std::span<const double> x) const
{
    require_length(x.size(), variables(), "x");
    Vector out = spmv_t(hfactor, spmv(hfactor, x));
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += hdiag[j] * x[j];
    return out;
}

double QpProblem::objective(std::span<const double> x) const
{
    const Vector hx = apply_quadratic(x);
    return 0.5 * dot(x, hx) + dot(linear, x);
}

DenseMatrix QpProblem::dense_quadratic() const
{
    DenseMatrix h = hfactor.transpose().gram_rows();
    for (std::size_t j = 0; j < variables(); ++j) h(j, j) += hdiag[j];
    return h;
}

std::string_view to_string(QpStatus status)
{
    switch (status) {
    case QpStatus::optimal: return "optimal";
    case QpStatus::max_iter: return "max-iter";
    case QpStatus::numerical_failure: return "numerical-failure";
    }
    return "unknown";
}

void SvmDualConfig::validate() const
{
    if (!(svm_cost > 0.0) || !std::isfinite(svm_cost)) throw InvalidArgument("svm_cost must be positive and finite");
    if (!(kkt_tol > 0.0)) throw InvalidArgument("kkt_tol must be positive");
    if (max_iter < 0) throw InvalidArgument("max_iter must be nonnegative");
}

namespace {

QpSolution solve_full_rank(const QpProblem& qp, std::span<const double> warm_start, const SvmDualConfig& cfg);

} // namespace

QpSolution ipm_solve(const QpProblem& qp, std::span<const double> warm_start, const SvmDualConfig& cfg)
{
    qp.validate();
    cfg.validate();
    if (!warm_start.empty()) require_length(warm_start.size(), qp.variables(), "warm start");
    const std::vector<std::size_t> keep = independent_rows(qp.eq);
    if (keep.size() == qp.equalities()) return solve_full_rank(qp, warm_start, cfg);

    // Drop dependent equality rows; they get zero multipliers. A dropped row
    // that the solution does not satisfy means the equalities are inconsistent.
    QpProblem reduced = qp;
    reduced.eq = qp.eq.select_rows(keep);
    reduced.eq_rhs.clear();
    for (std::size_t i : keep) reduced.eq_rhs.push_back(qp.eq_rhs[i]);
    QpSolution sol = solve_full_rank(reduced, warm_start, cfg);

    Vector y(qp.equalities(), 0.0);
    for (std::size_t k = 0; k < keep.size(); ++k) y[keep[k]] = sol.y[k];
    sol.y = std::move(y);
    Vector rp = spmv(qp.eq, sol.x);
    for (std::size_t i = 0; i < rp.size(); ++i) rp[i] -= qp.eq_rhs[i];
    sol.primal_residual = norm_inf(rp);
    if (sol.status == QpStatus::optimal && sol.primal_residual > cfg.kkt_tol) {
        sol.status = QpStatus::numerical_failure;
        sol.message = "equality constraints are inconsistent (residual " + std::to_string(sol.primal_residual) + ")";
    }
    return sol;
}

namespace {

QpSolution solve_full_rank(const QpProblem& qp, std::span<const double> warm_start, const SvmDualConfig& cfg)
{
    const std::size_t n = qp.variables();
    const std::size_t p = qp.equalities();

    std::vector<bool> has_l(n), has_u(n);
    std::unique_ptr<bool[]> bounded(new bool[n]);
    std::size_t n_bounds = 0;
    for (std::size_t j = 0; j < n; ++j) {
        has_l[j] = std::isfinite(qp.lower[j]);
        has_u[j] = std::isfinite(qp.upper[j]);
        bounded[j] = has_l[j] || has_u[j];
        n_bounds += has_l[j] + has_u[j];
    }
    std::unique_ptr<bool[]> lmask(new bool[n]), umask(new bool[n]);
    for (std::size_t j = 0; j < n; ++j) {
        lmask[j] = has_l[j];
        umask[j] = has_u[j];
    }
    const std::span<const bool> lm(lmask.get(), n), um(umask.get(), n);

    // Starting point: the warm start (or bound midpoints, unit offsets from a
    // single bound, zero for free variables), pulled strictly inside.
    Iterate it;
    it.x.assign(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        const double l = qp.lower[j];
        const double u = qp.upper[j];
        double v;
        if (!warm_start.empty()) {
            v = warm_start[j];
        } else if (has_l[j] && has_u[j]) {
            v = 0.5 * (l + u);
        } else if (has_l[j]) {
            v = l + 1.0;
        } else if (has_u[j]) {
            v = u - 1.0;
        } else {
            v = 0.0;
        }
        if (has_l[j] && has_u[j]) {
            const double margin = 1e-2 * (u - l);
            v = std::clamp(v, l + margin, u - margin);
            if (u == l) v = l;
        } else if (has_l[j]) {
            v = std::max(v, l + 1e-2);
        } else if (has_u[j]) {
            v = std::min(v, u - 1e-2);
        }
        it.x[j] = v;
    }
    it.y.assign(p, 0.0);
    it.zl.assign(n, 0.0);
    it.zu.assign(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        if (has_l[j]) it.zl[j] = 1.0;
        if (has_u[j]) it.zu[j] = 1.0;
    }

    NewtonSystem newton(qp, std::span<const bool>(bounded.get(), n));
    QpSolution sol;

    auto slacks = [&](const Iterate& s, Vector& sl, Vector& su) {
        sl.assign(n, 0.0);
        su.assign(n, 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            if (has_l[j]) sl[j] = s.x[j] - qp.lower[j];
            if (has_u[j]) su[j] = qp.upper[j] - s.x[j];
        }
    };
    auto residuals = [&](const Iterate& s, Vector& rd, Vector& rp) {
        rd = qp.apply_quadratic(s.x);
        const Vector aty = spmv_t(qp.eq, s.y);
        for (std::size_t j = 0; j < n; ++j) rd[j] += qp.linear[j] - aty[j] - s.zl[j] + s.zu[j];
        rp = spmv(qp.eq, s.x);
        for (std::size_t i = 0; i < p; ++i) rp[i] -= qp.eq_rhs[i];
        Vector sl, su;
        slacks(s, sl, su);
        Residuals r;
        r.primal = norm_inf(rp);
        r.dual = norm_inf(rd);
        double total = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (has_l[j]) {
                const double c = sl[j] * s.zl[j];
                total += c;
                r.comp_max = std::max(r.comp_max, c);
            }
            if (has_u[j]) {
                const double c = su[j] * s.zu[j];
                total += c;
                r.comp_max = std::max(r.comp_max, c);
            }
        }
        r.comp_mean = n_bounds ? total / static_cast<double>(n_bounds) : 0.0;
        return r;
    };

    Iterate best = it;
    double best_merit = kInfinity;
    Residuals best_res;
    auto finish = [&](const Iterate& s, const Residuals& r, QpStatus status, int iters) {
        sol.x = s.x;
        sol.y = s.y;
        sol.z_lower = s.zl;
        sol.z_upper = s.zu;
        sol.status = status;
        sol.primal_residual = r.primal;
        sol.dual_residual = r.dual;
        sol.complementarity = r.comp_max;
        sol.objective = qp.objective(s.x);
        sol.iterations = iters;
        return sol;
    };

    Vector rd, rp, sl, su, dx, dy, dx_aff, dy_aff, rho(n);
    Vector dzl(n), dzu(n), dzl_aff(n), dzu_aff(n), cl(n), cu(n);
    for (int k = 0;; ++k) {
        const Residuals res = residuals(it, rd, rp);
        const double merit = std::max({res.primal, res.dual, res.comp_max});
        if (!std::isfinite(merit)) {
            sol.message = "non-finite iterate at iteration " + std::to_string(k);
            return finish(best, best_res, QpStatus::numerical_failure, k);
        }
        if (merit < best_merit) {
            best_merit = merit;
            best = it;
            best_res = res;
        }
        if (res.primal <= cfg.kkt_tol && res.dual <= cfg.kkt_tol && res.comp_max <= cfg.kkt_tol) {
            return finish(it, res, QpStatus::optimal, k);
        }
        if (k >= cfg.max_iter) {
            sol.message = "iteration limit " + std::to_string(cfg.max_iter) + " reached";
            return finish(best, best_res, QpStatus::max_iter, k);
        }

        slacks(it, sl, su);
        Vector kdiag(qp.hdiag);
        for (std::size_t j = 0; j < n; ++j) {
            if (has_l[j]) kdiag[j] += it.zl[j] / sl[j];
            if (has_u[j]) kdiag[j] += it.zu[j] / su[j];
        }
        try {
            newton.factor(kdiag);
        } catch (const NumericalError& e) {
            sol.message = std::string(e.what()) + " at iteration " + std::to_string(k) + " (primal " +
                          std::to_string(res.primal) + ", dual " + std::to_string(res.dual) + ", complementarity " +
                          std::to_string(res.comp_max) + ")";
            return finish(best, best_res, QpStatus::numerical_failure, k);
        }

        // Given complementarity targets cl, cu: solve and recover dz.
        auto direction = [&](Vector& ddx, Vector& ddy, Vector& ddzl, Vector& ddzu) {
            for (std::size_t j = 0; j < n; ++j) {
                double r = -rd[j];
                if (has_l[j]) r += cl[j] / sl[j];
                if (has_u[j]) r -= cu[j] / su[j];
                rho[j] = r;
            }
            newton.solve(rho, rp, ddx, ddy);
            for (std::size_t j = 0; j < n; ++j) {
                ddzl[j] = has_l[j] ? (cl[j] - it.zl[j] * ddx[j]) / sl[j] : 0.0;
                ddzu[j] = has_u[j] ? (cu[j] + it.zu[j] * ddx[j]) / su[j] : 0.0;
            }
        };
        auto step_lengths = [&](const Vector& ddx, const Vector& ddzl, const Vector& ddzu) {
            Vector dsu(n);
            for (std::size_t j = 0; j < n; ++j) dsu[j] = -ddx[j];
            const double ap = std::min(max_step(sl, ddx, lm), max_step(su, dsu, um));
            const double ad = std::min(max_step(it.zl, ddzl, lm), max_step(it.zu, ddzu, um));
            return std::pair{ap, ad};
        };

        // Predictor.
        for (std::size_t j = 0; j < n; ++j) {
            cl[j] = has_l[j] ? -sl[j] * it.zl[j] : 0.0;
            cu[j] = has_u[j] ? -su[j] * it.zu[j] : 0.0;
        }
        direction(dx_aff, dy_aff, dzl_aff, dzu_aff);
        const auto [ap_aff, ad_aff] = step_lengths(dx_aff, dzl_aff, dzu_aff);

        const double mu = res.comp_mean;
        double tau = 0.0;
        if (n_bounds > 0) {
            double total = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (has_l[j]) total += (sl[j] + ap_aff * dx_aff[j]) * (it.zl[j] + ad_aff * dzl_aff[j]);
                if (has_u[j]) total += (su[j] - ap_aff * dx_aff[j]) * (it.zu[j] + ad_aff * dzu_aff[j]);
            }
            const double mu_aff = std::max(0.0, total / static_cast<double>(n_bounds));
            const double sigma = mu > 0.0 ? std::min(1.0, std::pow(mu_aff / mu, 3)) : 0.0;
            tau = sigma * mu;
        }

        // Corrector with the second-order term of the predictor.
        for (std::size_t j = 0; j < n; ++j) {
            cl[j] = has_l[j] ? tau - sl[j] * it.zl[j] - dx_aff[j] * dzl_aff[j] : 0.0;
            cu[j] = has_u[j] ? tau - su[j] * it.zu[j] + dx_aff[j] * dzu_aff[j] : 0.0;
        }
        direction(dx, dy, dzl, dzu);
        const auto [ap, ad] = step_lengths(dx, dzl, dzu);
        const double alpha = std::min(1.0, 0.995 * std::min(ap, ad));

        axpy(alpha, dx, it.x);
        axpy(alpha, dy, it.y);
        axpy(alpha, dzl, it.zl);
        axpy(alpha, dzu, it.zu);
        sol.barrier_history.push_back(tau);
    }
}

} // namespace

QpProblem assemble_svm_dual(const DataMatrix& data, const SvmDualConfig& cfg)
{
    cfg.validate();
    if (!data.has_labels()) throw InvalidArgument("the SVM dual needs labeled data");
    const auto& x = data.x();
    const auto y = data.y();
    const std::size_t n = x.rows();

    std::vector<std::vector<SparseMatrix::Entry>> rows(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto idx = x.row_indices(i);
        const auto val = x.row_values(i);
        rows[i].reserve(idx.size());
        for (std::size_t q = 0; q < idx.size(); ++q) rows[i].emplace_back(idx[q], y[i] * val[q]);
    }

    QpProblem qp;
    qp.hdiag.assign(n, 0.0);
    qp.hfactor = SparseMatrix::from_rows(x.cols(), rows).transpose();
    qp.linear.assign(n, -1.0);
    std::vector<std::vector<SparseMatrix::Entry>> eq(1);
    for (std::size_t i = 0; i < n; ++i) eq[0].emplace_back(i, y[i]);
    qp.eq = SparseMatrix::from_rows(n, eq);
    qp.eq_rhs = {0.0};
    qp.lower.assign(n, 0.0);
    qp.upper.assign(n, cfg.svm_cost);
    return qp;
}

Vector svm_dual_warm_start(const DataMatrix& data, std::span<const double> w, double b, const SvmDualConfig& cfg)
{
    require_length(w.size(), data.features(), "w");
    const auto y = data.y();
    const double c = cfg.svm_cost;
    constexpr double blend = 0.1;
    Vector alpha(data.samples());
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        const double violation = std::clamp(1.0 - y[i] * (data.x().row_dot(i, w) + b), 0.0, 1.0);
        alpha[i] = (1.0 - blend) * c * violation + blend * 0.5 * c;
    }
    return alpha;
}

LinearModel recover_primal(const QpSolution& solution, const DataMatrix& data, const SvmDualConfig& cfg)
{
    const auto& x = data.x();
    const auto y = data.y();
    const std::size_t n = x.rows();
    require_length(solution.x.size(), n, "alpha");
    const double c = cfg.svm_cost;
    const double tiny = 1e-3 * c;

    LinearModel model;
    Vector ya(n);
    bool any = false;
    for (std::size_t i = 0; i < n; ++i) {
        ya[i] = y[i] * solution.x[i];
        any = any || solution.x[i] > tiny;
    }
    if (!any) throw DegenerateModelError("no support vectors: every dual variable is zero");
    model.w = spmv_t(x, ya);

    double sum = 0.0;
    std::size_t free_count = 0;
    double lo = -kInfinity, hi = kInfinity;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = solution.x[i];
        const double gap = y[i] - x.row_dot(i, model.w); // b on the margin
        if (a > tiny && a < c - tiny) {
            sum += gap;
            ++free_count;
        } else if (a <= tiny) {
            // y_i (x_i^T w + b) >= 1
            if (y[i] > 0) lo = std::max(lo, gap);
            else hi = std::min(hi, gap);
        } else {
            // y_i (x_i^T w + b) <= 1
            if (y[i] > 0) hi = std::min(hi, gap);
            else lo = std::max(lo, gap);
        }
    }
    if (free_count > 0) {
        model.b = sum / static_cast<double>(free_count);
    } else if (std::isfinite(lo) && std::isfinite(hi)) {
        model.b = 0.5 * (lo + hi);
    } else if (std::isfinite(lo)) {
        model.b = lo;
    } else if (std::isfinite(hi)) {
        model.b = hi;
    }
    return model;
}

double svm_primal_objective(const DataMatrix& data, const SvmDualConfig& cfg, std::span<const double> w, double b)
{
    require_length(w.size(), data.features(), "w");
    const auto y = data.y();
    double hinge = 0.0;
    for (std::size_t i = 0; i < data.samples(); ++i) hinge += std::max(0.0, 1.0 - y[i] * (data.x().row_dot(i, w) + b));
    return 0.5 * dot(w, w) + cfg.svm_cost * hinge;
}

namespace {

void check_outside(const KnowledgeSet& knowledge, const KnowledgeSet& outside)
{
    if (outside.k1() == 0 && outside.k2() == 0) return;
    if (outside.k1() != knowledge.k1() || outside.k2() != knowledge.k2()) {
        throw DimensionError("off-support knowledge must have the same rule counts as the reduced knowledge");
    }
}

} // namespace

KsvmPrimalQp assemble_ksvm_primal(const DataMatrix& data, const KnowledgeSet& knowledge, const KnowledgeSet& outside,
                                  const KsvmWarmStart& warm, const KsvmPrimalParams& params, const SvmDualConfig& cfg)
{
    cfg.validate();
    if (!data.has_labels()) throw InvalidArgument("the knowledge primal needs labeled data");
    if (knowledge.features() != data.features()) {
        throw DimensionError("knowledge has " + std::to_string(knowledge.features()) +
                             " columns but the reduced data has " + std::to_string(data.features()));
    }
    check_outside(knowledge, outside);
    for (double r : {params.rho1, params.rho2, params.rho3, params.rho4}) {
        if (!(r >= 0.0) || !std::isfinite(r)) throw InvalidArgument("knowledge weights must be nonnegative");
    }

    KsvmLayout lay;
    lay.features = data.features();
    lay.samples = data.samples();
    lay.k1 = knowledge.k1();
    lay.k2 = knowledge.k2();
    require_length(warm.w.size(), lay.features, "warm w");
    require_length(warm.u.size(), lay.k1, "warm u");
    require_length(warm.v.size(), lay.k2, "warm v");

    const std::size_t n = lay.total();
    const std::size_t ms = lay.features;
    const auto& x = data.x();
    const auto y = data.y();

    KsvmPrimalQp out;
    out.layout = lay;
    QpProblem& qp = out.qp;
    qp.hdiag.assign(n, 0.0);
    for (std::size_t j = 0; j < ms; ++j) qp.hdiag[lay.w() + j] = 1.0;

    // Quadratic penalties as rows of V: sqrt(rho1) (w_j + (B^T u)_j) and
    // sqrt(rho3) ((D^T v)_j - w_j), plus the off-support parts of B^T u, D^T v.
    std::vector<std::vector<SparseMatrix::Entry>> vrows;
    auto add_rule_rows = [&](const SparseMatrix& rules, const SparseMatrix& rules_out, std::size_t offset, double rho,
                             double w_sign) {
        if (rules.rows() == 0 || rho == 0.0) return;
        const double r = std::sqrt(rho);
        const SparseMatrix rt = rules.transpose(); // ms x k
        for (std::size_t j = 0; j < ms; ++j) {
            std::vector<SparseMatrix::Entry> row;
            row.emplace_back(lay.w() + j, w_sign * r);
            const auto idx = rt.row_indices(j);
            const auto val = rt.row_values(j);
            for (std::size_t q = 0; q < idx.size(); ++q) row.emplace_back(offset + idx[q], r * val[q]);
            vrows.push_back(std::move(row));
        }
        if (rules_out.rows() == 0) return;
        const SparseMatrix ot = rules_out.transpose();
        for (std::size_t j = 0; j < ot.rows(); ++j) {
            const auto idx = ot.row_indices(j);
            if (idx.empty()) continue;
            const auto val = ot.row_values(j);
            std::vector<SparseMatrix::Entry> row;
            for (std::size_t q = 0; q < idx.size(); ++q) row.emplace_back(offset + idx[q], r * val[q]);
            vrows.push_back(std::move(row));
        }
    };
    const bool has_out = outside.k1() > 0 || outside.k2() > 0;
    add_rule_rows(knowledge.b, has_out ? outside.b : SparseMatrix(), lay.u(), params.rho1, 1.0);
    add_rule_rows(knowledge.dn, has_out ? outside.dn : SparseMatrix(), lay.v(), params.rho3, -1.0);
    qp.hfactor = SparseMatrix::from_rows(n, vrows);

    qp.linear.assign(n, 0.0);
    for (std::size_t i = 0; i < lay.samples; ++i) qp.linear[lay.xi() + i] = cfg.svm_cost;
    if (lay.k1 > 0) qp.linear[lay.eta_u()] = params.rho2;
    if (lay.k2 > 0) qp.linear[lay.eta_v()] = params.rho4;

    qp.lower.assign(n, 0.0);
    qp.upper.assign(n, kInfinity);
    for (std::size_t j = 0; j <= ms; ++j) qp.lower[j] = -kInfinity; // w and b are free

    // Equalities: margin rows, then one row per nonempty knowledge side.
    std::vector<std::vector<SparseMatrix::Entry>> eq;
    for (std::size_t i = 0; i < lay.samples; ++i) {
        std::vector<SparseMatrix::Entry> row;
        const auto idx = x.row_indices(i);
        const auto val = x.row_values(i);
        for (std::size_t q = 0; q < idx.size(); ++q) row.emplace_back(lay.w() + idx[q], y[i] * val[q]);
        row.emplace_back(lay.b(), y[i]);
        row.emplace_back(lay.xi() + i, 1.0);
        row.emplace_back(lay.s() + i, -1.0);
        eq.push_back(std::move(row));
    }
    if (lay.k1 > 0) {
        // eta_u - d^T u + b - s_u = 1
        std::vector<SparseMatrix::Entry> row;
        row.emplace_back(lay.b(), 1.0);
        for (std::size_t i = 0; i < lay.k1; ++i) row.emplace_back(lay.u() + i, -knowledge.d[i]);
        row.emplace_back(lay.eta_u(), 1.0);
        row.emplace_back(lay.s_u(), -1.0);
        eq.push_back(std::move(row));
    }
    if (lay.k2 > 0) {
        // eta_v - g^T v - b - s_v = 1
        std::vector<SparseMatrix::Entry> row;
        row.emplace_back(lay.b(), -1.0);
        for (std::size_t i = 0; i < lay.k2; ++i) row.emplace_back(lay.v() + i, -knowledge.g[i]);
        row.emplace_back(lay.eta_v(), 1.0);
        row.emplace_back(lay.s_v(), -1.0);
        eq.push_back(std::move(row));
    }
    qp.eq = SparseMatrix::from_rows(n, eq);
    qp.eq_rhs.assign(eq.size(), 1.0);

    // Warm values. eta starts at the knowledge margin d^T u - b + 1 (resp.
    // g^T v + b + 1); slacks are set so the equalities hold where possible.
    Vector& wv = out.warm;
    wv.assign(n, 0.0);
    std::copy(warm.w.begin(), warm.w.end(), wv.begin());
    wv[lay.b()] = warm.b;
    for (std::size_t i = 0; i < lay.k1; ++i) wv[lay.u() + i] = std::max(0.0, warm.u[i]);
    for (std::size_t i = 0; i < lay.k2; ++i) wv[lay.v() + i] = std::max(0.0, warm.v[i]);
    for (std::size_t i = 0; i < lay.samples; ++i) {
        const double margin = y[i] * (x.row_dot(i, warm.w) + warm.b);
        const double xi = std::max(0.0, 1.0 - margin);
        wv[lay.xi() + i] = xi;
        wv[lay.s() + i] = margin + xi - 1.0;
    }
    if (lay.k1 > 0) {
        const double eta = dot(knowledge.d, std::span<const double>(wv).subspan(lay.u(), lay.k1)) - warm.b + 1.0;
        wv[lay.eta_u()] = eta;
        wv[lay.s_u()] = std::max(eta, 0.0) - eta;
    }
    if (lay.k2 > 0) {
        const double eta = dot(knowledge.g, std::span<const double>(wv).subspan(lay.v(), lay.k2)) + warm.b + 1.0;
        wv[lay.eta_v()] = eta;
        wv[lay.s_v()] = std::max(eta, 0.0) - eta;
    }
    qp.validate();
    return out;
}

double ksvm_primal_objective(const DataMatrix& data, const KnowledgeSet& knowledge, const KnowledgeSet& outside,
                             const KsvmPrimalParams& params, const SvmDualConfig& cfg, std::span<const double> w,
                             double b, std::span<const double> u, std::span<const double> v)
{
    check_outside(knowledge, outside);
    double f = svm_primal_objective(data, cfg, w, b);
    const bool has_out = outside.k1() > 0 || outside.k2() > 0;
    if (knowledge.k1() > 0) {
        Vector r = spmv_t(knowledge.b, u);
        axpy(1.0, w, r);
        double q = dot(r, r);
        if (has_out) {
            const Vector ro = spmv_t(outside.b, u);
            q += dot(ro, ro);
        }
        f += 0.5 * params.rho1 * q + params.rho2 * std::max(0.0, dot(knowledge.d, u) - b + 1.0);
    }
    if (knowledge.k2() > 0) {
        Vector r = spmv_t(knowledge.dn, v);
        axpy(-1.0, w, r);
        double q = dot(r, r);
        if (has_out) {
            const Vector ro = spmv_t(outside.dn, v);
            q += dot(ro, ro);
        }
        f += 0.5 * params.rho3 * q + params.rho4 * std::max(0.0, dot(knowledge.g, v) + b + 1.0);
    }
    return f;
}

} // namespace hipad

#include <cmath>
#include <string>

#include "admm_detail.hpp"
#include "hipad/admm.hpp"
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

void require_positive(double value, const char* name)
{
    if (!(value > 0.0) || !std::isfinite(value)) throw InvalidArgument(std::string(name) + " must be positive and finite");
}

// An empty implication side contributes nothing, not even its rho to the w block.
double kappa1_for(const KnowledgeSet& k, const EnkParams& p)
{
    return p.lambda2 + p.mu2 + (k.k1() > 0 ? p.rho1 : 0.0) + (k.k2() > 0 ? p.rho3 : 0.0);
}

double kappa2_for(const KnowledgeSet& k, const EnkParams& p)
{
    return (k.k1() > 0 ? p.mu3 : 0.0) + (k.k2() > 0 ? p.mu4 : 0.0);
}

DenseMatrix knowledge_system(const SparseMatrix& rows, std::span<const double> rhs_vec, double rho, double mu_outer,
                             double mu_diag)
{
    const DenseMatrix g = rows.gram_rows();
    DenseMatrix out(rows.rows(), rows.rows());
    for (std::size_t i = 0; i < rows.rows(); ++i) {
        for (std::size_t j = 0; j < rows.rows(); ++j) out(i, j) = rho * g(i, j);
    }
    out.add_outer(mu_outer, rhs_vec);
    out.add_diagonal(mu_diag);
    return out;
}

struct EnkSweepInfo {
    detail::SplitResiduals residuals;
    double knowledge = 0.0;
    int pcg_iterations = 0;
};

} // namespace

EnkParams EnkParams::uniform(const EnsvmParams& base, double rho, double mu)
{
    EnkParams p;
    static_cast<EnsvmParams&>(p) = base;
    p.rho1 = p.rho2 = p.rho3 = p.rho4 = rho;
    p.mu3 = p.mu4 = p.mu5 = p.mu6 = mu;
    return p;
}

void EnkParams::validate() const
{
    EnsvmParams::validate();
    for (auto [v, name] : {std::pair{rho1, "rho1"}, {rho2, "rho2"}, {rho3, "rho3"}, {rho4, "rho4"}}) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidArgument(std::string(name) + " must be nonnegative and finite");
    }
    require_positive(mu3, "mu3");
    require_positive(mu4, "mu4");
    require_positive(mu5, "mu5");
    require_positive(mu6, "mu6");
}

EnkState EnkState::zeros(std::size_t samples, std::size_t features, std::size_t k1, std::size_t k2)
{
    EnkState st;
    static_cast<EnsvmState&>(st) = EnsvmState::zeros(samples, features);
    st.u.assign(k1, 0.0);
    st.s.assign(k1, 0.0);
    st.gamma5.assign(k1, 0.0);
    st.v.assign(k2, 0.0);
    st.t.assign(k2, 0.0);
    st.gamma6.assign(k2, 0.0);
    return st;
}

void EnkState::check_dimensions(std::size_t samples, std::size_t features, std::size_t k1, std::size_t k2) const
{
    EnsvmState::check_dimensions(samples, features);
    require_length(u.size(), k1, "u");
    require_length(s.size(), k1, "s");
    require_length(gamma5.size(), k1, "gamma5");
    require_length(v.size(), k2, "v");
    require_length(t.size(), k2, "t");
    require_length(gamma6.size(), k2, "gamma6");
}

double enk_objective(const DataMatrix& data, const KnowledgeSet& knowledge, const EnkParams& params,
                     std::span<const double> w, double b, std::span<const double> u, std::span<const double> v)
{
    require_length(u.size(), knowledge.k1(), "u");
    require_length(v.size(), knowledge.k2(), "v");
    double f = ensvm_objective(data, params, w, b);
    if (knowledge.k1() > 0) {
        Vector r = spmv_t(knowledge.b, u); // B^T u + w
        axpy(1.0, w, r);
        f += 0.5 * params.rho1 * dot(r, r) + params.rho2 * std::max(0.0, dot(knowledge.d, u) - b + 1.0);
    }
    if (knowledge.k2() > 0) {
        Vector r = spmv_t(knowledge.dn, v); // D^T v - w
        axpy(-1.0, w, r);
        f += 0.5 * params.rho3 * dot(r, r) + params.rho4 * std::max(0.0, dot(knowledge.g, v) + b + 1.0);
    }
    return f;
}

EnkSolver::EnkSolver(const DataMatrix& data, const KnowledgeSet& knowledge, const EnkParams& params)
    : data_(&data),
      knowledge_(&knowledge),
      params_((params.validate(), params)),
      system_(data.x(), kappa1_for(knowledge, params), kappa2_for(knowledge, params), params.mu1)
{
    if (!data.has_labels()) throw InvalidArgument("training data must be labeled");
    if (knowledge.features() != data.features()) {
        throw DimensionError("knowledge has " + std::to_string(knowledge.features()) + " features, data has " +
                             std::to_string(data.features()));
    }
    if (knowledge.k1() > 0) {
        pos_matrix_ = knowledge_system(knowledge.b, knowledge.d, params.rho1, params.mu3, params.mu5);
        pos_factor_.emplace(pos_matrix_);
    }
    if (knowledge.k2() > 0) {
        neg_matrix_ = knowledge_system(knowledge.dn, knowledge.g, params.rho3, params.mu4, params.mu6);
        neg_factor_.emplace(neg_matrix_);
    }
}

namespace {

EnkSweepInfo enk_sweep(const DataMatrix& data, const KnowledgeSet& kn, const EnkParams& p, const WbSystem& system,
                       const std::optional<Cholesky>& pos, const std::optional<Cholesky>& neg, EnkState& st)
{
    const auto& x = data.x();
    const std::size_t m = x.cols();
    const bool has_pos = kn.k1() > 0;
    const bool has_neg = kn.k2() > 0;

    // (w, b) block, using the previous u, v, p, q and multipliers.
    const Vector tgt = detail::hinge_target(data.y(), st.gamma1, st.a, p.mu1);
    Vector rhs(m + 1, 0.0);
    std::span<double> rhs_w = std::span<double>(rhs).first(m);
    x.multiply_transpose(tgt, rhs_w);
    double rhs_b = 0.0;
    for (double ti : tgt) rhs_b += ti;
    for (std::size_t j = 0; j < m; ++j) rhs_w[j] += p.mu2 * st.c[j] - st.gamma2[j];
    const double du_old = has_pos ? dot(kn.d, st.u) : 0.0;
    const double gv_old = has_neg ? dot(kn.g, st.v) : 0.0;
    if (has_pos) {
        const Vector btu = spmv_t(kn.b, st.u);
        axpy(-p.rho1, btu, rhs_w);
        rhs_b += st.gamma3 + p.mu3 * (du_old + 1.0 - st.q);
    }
    if (has_neg) {
        const Vector dtv = spmv_t(kn.dn, st.v);
        axpy(p.rho3, dtv, rhs_w);
        rhs_b -= st.gamma4 + p.mu4 * (gv_old + 1.0 - st.p);
    }
    rhs[m] = rhs_b;

    Vector warm(st.w);
    warm.push_back(st.b);
    const PcgResult sol = system.solve(rhs, p.pcg, warm);
    std::copy(sol.x.begin(), sol.x.begin() + static_cast<std::ptrdiff_t>(m), st.w.begin());
    st.b = sol.x[m];

    // u and its nonnegative copy s.
    if (has_pos) {
        Vector r = spmv(kn.b, st.w);
        for (std::size_t i = 0; i < r.size(); ++i) {
            r[i] = -p.rho1 * r[i] + p.mu3 * kn.d[i] * (st.b + st.q - 1.0) - st.gamma3 * kn.d[i] + st.gamma5[i] +
                   p.mu5 * st.s[i];
        }
        pos->solve_in_place(r);
        st.u = std::move(r);
        for (std::size_t i = 0; i < st.u.size(); ++i) st.s[i] = std::max(0.0, st.u[i] - st.gamma5[i] / p.mu5);
    }
    if (has_neg) {
        Vector r = spmv(kn.dn, st.w);
        for (std::size_t i = 0; i < r.size(); ++i) {
            r[i] = p.rho3 * r[i] - p.mu4 * kn.g[i] * (st.b + 1.0 - st.p) - st.gamma4 * kn.g[i] + st.gamma6[i] +
                   p.mu6 * st.t[i];
        }
        neg->solve_in_place(r);
        st.v = std::move(r);
        for (std::size_t i = 0; i < st.v.size(); ++i) st.t[i] = std::max(0.0, st.v[i] - st.gamma6[i] / p.mu6);
    }

    EnkSweepInfo info;
    info.pcg_iterations = sol.iterations;
    info.residuals = detail::update_splits(data, p, st);

    // q, p: hinge prox of the scalar knowledge margins at the fresh u, v, b.
    double kres = 0.0;
    if (has_pos) {
        const double du = dot(kn.d, st.u);
        st.q = hinge_prox(ProxThreshold(p.rho2 / p.mu3), du - st.b + 1.0 + st.gamma3 / p.mu3);
        const double r = du - st.b + 1.0 - st.q;
        st.gamma3 += p.mu3 * r;
        const Vector us = subtract(st.s, st.u);
        axpy(p.mu5, us, st.gamma5);
        kres = std::max({kres, std::abs(r), norm2(us)});
    }
    if (has_neg) {
        const double gv = dot(kn.g, st.v);
        st.p = hinge_prox(ProxThreshold(p.rho4 / p.mu4), gv + st.b + 1.0 + st.gamma4 / p.mu4);
        const double r = gv + st.b + 1.0 - st.p;
        st.gamma4 += p.mu4 * r;
        const Vector vt = subtract(st.t, st.v);
        axpy(p.mu6, vt, st.gamma6);
        kres = std::max({kres, std::abs(r), norm2(vt)});
    }
    info.knowledge = kres;
    ++st.iter;
    return info;
}

} // namespace

int EnkSolver::step(EnkState& state) const
{
    state.check_dimensions(data_->samples(), data_->features(), knowledge_->k1(), knowledge_->k2());
    return enk_sweep(*data_, *knowledge_, params_, system_, pos_factor_, neg_factor_, state).pcg_iterations;
}

double EnkSolver::objective(const EnkState& state) const
{
    return enk_objective(*data_, *knowledge_, params_, state.w, state.b, state.u, state.v);
}

AdmmOutcome<EnkState> EnkSolver::run(EnkState init, bool stop_on_transition, const TraceCallback& trace) const
{
    init.check_dimensions(data_->samples(), data_->features(), knowledge_->k1(), knowledge_->k2());
    AdmmOutcome<EnkState> out;
    out.state = std::move(init);
    EnkState& st = out.state;
    double f_old = objective(st);

    int calm = 0; // consecutive iterations passing the transition test
    for (int k = 0; k < params_.max_iter; ++k) {
        const Vector w_old = st.w;
        const EnkSweepInfo info = enk_sweep(*data_, *knowledge_, params_, system_, pos_factor_, neg_factor_, st);
        const double f_new = objective(st);
        if (!std::isfinite(f_new) || !all_finite(st.w) || !std::isfinite(st.b)) {
            throw NumericalError("ADMM iterate became non-finite at iteration " + std::to_string(st.iter));
        }

        TraceRecord rec;
        rec.iteration = st.iter;
        rec.objective = f_new;
        rec.relative_objective_change = detail::relative_objective_change(f_new, f_old);
        rec.hinge_residual = info.residuals.hinge;
        rec.l1_residual = info.residuals.l1;
        rec.transition_change = detail::transition_change(st.w, w_old);
        rec.knowledge_residual = info.knowledge;
        rec.support_size = detail::count_nonzero(st.c);
        rec.pcg_iterations = info.pcg_iterations;
        if (trace) trace(rec);

        const bool converged = rec.relative_objective_change <= params_.eps1 && rec.hinge_residual <= params_.eps1 &&
                               rec.l1_residual <= params_.eps1 && rec.knowledge_residual <= params_.eps1 &&
                               detail::relative_change(st.w, w_old) <= params_.eps2;
        f_old = f_new;
        if (converged) {
            out.reason = StopReason::converged;
            break;
        }
        calm = rec.transition_change < params_.eps_tol && rec.support_size > 0 ? calm + 1 : 0;
        if (stop_on_transition && calm >= params_.transition_patience) {
            out.reason = StopReason::transition;
            break;
        }
    }
    out.objective = f_old;
    out.support = nonzero_support(st.c);
    return out;
}

EnkState admm_enk_step(const EnkState& state, const DataMatrix& data, const KnowledgeSet& knowledge,
                       const EnkParams& params)
{
    EnkState next = state;
    EnkSolver(data, knowledge, params).step(next);
    return next;
}

AdmmOutcome<EnkState> admm_enk_run(const DataMatrix& data, const KnowledgeSet& knowledge, const EnkParams& params,
                                   EnkState init, bool stop_on_transition, const TraceCallback& trace)
{
    return EnkSolver(data, knowledge, params).run(std::move(init), stop_on_transition, trace);
}

} // namespace hipad

#include <cmath>
#include <string>

#include "admm_detail.hpp"
#include "hipad/admm.hpp"
#include "hipad/error.hpp"

namespace hipad {

namespace {

void require_positive(double value, const char* name)
{
    if (!(value > 0.0) || !std::isfinite(value)) throw InvalidArgument(std::string(name) + " must be positive and finite");
}

void require_length(std::size_t actual, std::size_t expected, const char* name)
{
    if (actual != expected) {
        throw DimensionError(std::string(name) + " has length " + std::to_string(actual) + ", expected " +
                             std::to_string(expected));
    }
}

struct SweepInfo {
    detail::SplitResiduals residuals;
    int pcg_iterations = 0;
};

SweepInfo ensvm_sweep(const DataMatrix& data, const EnsvmParams& params, const WbSystem& system, EnsvmState& st)
{
    const auto& x = data.x();
    const std::size_t m = x.cols();

    const Vector t = detail::hinge_target(data.y(), st.gamma1, st.a, params.mu1);
    Vector rhs(m + 1, 0.0);
    x.multiply_transpose(t, std::span<double>(rhs).first(m));
    double sum_t = 0.0;
    for (double ti : t) sum_t += ti;
    for (std::size_t j = 0; j < m; ++j) rhs[j] += params.mu2 * st.c[j] - st.gamma2[j];
    rhs[m] = sum_t;

    Vector warm(st.w);
    warm.push_back(st.b);
    const PcgResult sol = system.solve(rhs, params.pcg, warm);
    std::copy(sol.x.begin(), sol.x.begin() + static_cast<std::ptrdiff_t>(m), st.w.begin());
    st.b = sol.x[m];

    SweepInfo info;
    info.residuals = detail::update_splits(data, params, st);
    info.pcg_iterations = sol.iterations;
    ++st.iter;
    return info;
}

} // namespace

void EnsvmParams::validate() const
{
    if (!(lambda1 >= 0.0) || !std::isfinite(lambda1)) throw InvalidArgument("lambda1 must be nonnegative and finite");
    if (!(lambda2 >= 0.0) || !std::isfinite(lambda2)) throw InvalidArgument("lambda2 must be nonnegative and finite");
    require_positive(mu1, "mu1");
    require_positive(mu2, "mu2");
    require_positive(eps1, "eps1");
    require_positive(eps2, "eps2");
    require_positive(eps_tol, "eps_tol");
    if (max_iter < 0) throw InvalidArgument("max_iter must be nonnegative");
    if (transition_patience < 1) throw InvalidArgument("transition_patience must be at least 1");
    require_positive(pcg.tol, "pcg tolerance");
    if (pcg.max_iter <= 0) throw InvalidArgument("pcg max_iter must be positive");
}

std::string_view to_string(StopReason reason)
{
    switch (reason) {
    case StopReason::transition: return "transition";
    case StopReason::converged: return "converged";
    case StopReason::iteration_limit: return "iteration-limit";
    }
    return "unknown";
}

EnsvmState EnsvmState::zeros(std::size_t samples, std::size_t features)
{
    EnsvmState st;
    st.w.assign(features, 0.0);
    st.c.assign(features, 0.0);
    st.gamma2.assign(features, 0.0);
    st.a.assign(samples, 0.0);
    st.gamma1.assign(samples, 0.0);
    return st;
}

void EnsvmState::check_dimensions(std::size_t samples, std::size_t features) const
{
    require_length(w.size(), features, "w");
    require_length(c.size(), features, "c");
    require_length(gamma2.size(), features, "gamma2");
    require_length(a.size(), samples, "a");
    require_length(gamma1.size(), samples, "gamma1");
}

std::vector<std::size_t> nonzero_support(std::span<const double> c)
{
    std::vector<std::size_t> idx;
    for (std::size_t j = 0; j < c.size(); ++j) {
        if (c[j] != 0.0) idx.push_back(j);
    }
    return idx;
}

double ensvm_objective(const DataMatrix& data, const EnsvmParams& params, std::span<const double> w, double b)
{
    const auto& x = data.x();
    require_length(w.size(), x.cols(), "w");
    const auto y = data.y();
    double hinge = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) hinge += std::max(0.0, 1.0 - y[i] * (x.row_dot(i, w) + b));
    double l1 = 0.0;
    for (double wj : w) l1 += std::abs(wj);
    const double n = static_cast<double>(x.rows());
    return (n > 0 ? hinge / n : 0.0) + params.lambda1 * l1 + 0.5 * params.lambda2 * dot(w, w);
}

WbSystem::WbSystem(const SparseMatrix& x, double kappa1, double kappa2, double mu1) : x_(&x)
{
    const std::size_t m = x.cols();
    const double n = static_cast<double>(x.rows());
    const SparseMatrix* xp = &x;
    op_.dimension = m + 1;
    op_.apply = [xp, m, kappa1, kappa2, mu1](std::span<const double> in, std::span<double> out) {
        // margins = X w + b e
        Vector margins(xp->rows());
        xp->multiply(in.first(m), margins);
        const double b = in[m];
        double sum = 0.0;
        for (double& f : margins) {
            f += b;
            sum += f;
        }
        xp->multiply_transpose(margins, out.first(m));
        for (std::size_t j = 0; j < m; ++j) out[j] = mu1 * out[j] + kappa1 * in[j];
        out[m] = mu1 * sum + kappa2 * b;
    };

    Vector diag = x.column_squared_norms();
    for (double& d : diag) d = kappa1 + mu1 * d;
    diag.push_back(mu1 * n + kappa2);
    precond_ = inverse_diagonal_operator(diag);
}

PcgResult WbSystem::solve(std::span<const double> rhs, const PcgOptions& options, std::span<const double> warm) const
{
    require_length(rhs.size(), dimension(), "rhs");
    return pcg_solve(op_, rhs, precond_, options, warm);
}

EnsvmSolver::EnsvmSolver(const DataMatrix& data, const EnsvmParams& params)
    : data_(&data),
      params_((params.validate(), params)),
      system_(data.x(), params.lambda2 + params.mu2, 0.0, params.mu1)
{
    if (!data.has_labels()) throw InvalidArgument("training data must be labeled");
}

int EnsvmSolver::step(EnsvmState& state) const
{
    state.check_dimensions(data_->samples(), data_->features());
    return ensvm_sweep(*data_, params_, system_, state).pcg_iterations;
}

double EnsvmSolver::objective(std::span<const double> w, double b) const
{
    return ensvm_objective(*data_, params_, w, b);
}

AdmmOutcome<EnsvmState> EnsvmSolver::run(EnsvmState init, bool stop_on_transition, const TraceCallback& trace) const
{
    init.check_dimensions(data_->samples(), data_->features());
    AdmmOutcome<EnsvmState> out;
    out.state = std::move(init);
    EnsvmState& st = out.state;
    double f_old = objective(st.w, st.b);

    int calm = 0; // consecutive iterations passing the transition test
    for (int k = 0; k < params_.max_iter; ++k) {
        const Vector w_old = st.w;
        const SweepInfo info = ensvm_sweep(*data_, params_, system_, st);
        const double f_new = objective(st.w, st.b);
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
        rec.support_size = detail::count_nonzero(st.c);
        rec.pcg_iterations = info.pcg_iterations;
        if (trace) trace(rec);

        const bool converged = rec.relative_objective_change <= params_.eps1 && rec.hinge_residual <= params_.eps1 &&
                               rec.l1_residual <= params_.eps1 &&
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

EnsvmState admm_ensvm_step(const EnsvmState& state, const DataMatrix& data, const EnsvmParams& params)
{
    EnsvmState next = state;
    EnsvmSolver(data, params).step(next);
    return next;
}

AdmmOutcome<EnsvmState> admm_ensvm_run(const DataMatrix& data, const EnsvmParams& params, EnsvmState init,
                                       bool stop_on_transition, const TraceCallback& trace)
{
    return EnsvmSolver(data, params).run(std::move(init), stop_on_transition, trace);
}

} // namespace hipad

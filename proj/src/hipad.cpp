#include "hipad/hipad.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "hipad/error.hpp"

namespace hipad {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void check_training_data(const DataMatrix& data)
{
    if (!data.has_labels()) throw InvalidArgument("training data must be labeled");
    if (data.samples() < 2) throw InvalidArgument("training needs at least two samples");
    const auto y = data.y();
    const bool pos = std::any_of(y.begin(), y.end(), [](double v) { return v > 0; });
    const bool neg = std::any_of(y.begin(), y.end(), [](double v) { return v < 0; });
    if (!pos || !neg) throw InvalidArgument("training data must contain both classes");
}

/// Re-throws solver errors with the phase that raised them.
template <class F>
auto in_phase(const char* phase, F&& f)
{
    try {
        return f();
    } catch (const DegenerateModelError& e) {
        throw DegenerateModelError(std::string(phase) + ": " + e.what());
    } catch (const NumericalError& e) {
        throw NumericalError(std::string(phase) + ": " + e.what());
    }
}

std::vector<std::size_t> complement(std::size_t m, const std::vector<std::size_t>& support)
{
    std::vector<std::size_t> rest;
    rest.reserve(m - support.size());
    std::size_t k = 0;
    for (std::size_t j = 0; j < m; ++j) {
        if (k < support.size() && support[k] == j) {
            ++k;
        } else {
            rest.push_back(j);
        }
    }
    return rest;
}

Vector gather(std::span<const double> v, const std::vector<std::size_t>& idx)
{
    Vector out(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) out[k] = v[idx[k]];
    return out;
}

/// Phase-1 fallback / ADMM-only model: the sparse block c with the bias.
SvmModel phase1_model(const EnsvmState& st, const std::vector<std::size_t>& support, ModelOrigin origin)
{
    SvmModel model;
    model.origin = origin;
    model.support = support;
    model.weights = gather(st.c, support);
    model.bias = st.b;
    return model;
}

void check_qp_status(const QpSolution& sol, SvmModel& model)
{
    if (sol.status == QpStatus::numerical_failure) throw NumericalError("phase 2: " + sol.message);
    if (sol.status == QpStatus::max_iter) {
        model.warnings.push_back("phase 2 stopped at the iteration limit (primal " +
                                 std::to_string(sol.primal_residual) + ", dual " + std::to_string(sol.dual_residual) +
                                 ", complementarity " + std::to_string(sol.complementarity) + ")");
    }
}

} // namespace

std::string_view to_string(ModelOrigin origin)
{
    switch (origin) {
    case ModelOrigin::hipad: return "hipad";
    case ModelOrigin::hipad_enk: return "hipad-enk";
    case ModelOrigin::admm_only: return "admm-only";
    }
    return "unknown";
}

ModelOrigin model_origin_from_string(std::string_view name)
{
    if (name == "hipad") return ModelOrigin::hipad;
    if (name == "hipad-enk") return ModelOrigin::hipad_enk;
    if (name == "admm-only") return ModelOrigin::admm_only;
    throw InvalidArgument("unknown model origin '" + std::string(name) + "'");
}

void SvmModel::validate() const
{
    if (support.size() != weights.size()) throw InvalidArgument("model support and weights differ in length");
    for (std::size_t k = 1; k < support.size(); ++k) {
        if (support[k] <= support[k - 1]) throw InvalidArgument("model support must be strictly increasing");
    }
}

double SvmModel::weight(std::size_t feature) const
{
    const auto it = std::lower_bound(support.begin(), support.end(), feature);
    if (it == support.end() || *it != feature) return 0.0;
    return weights[static_cast<std::size_t>(it - support.begin())];
}

double SvmModel::decision(const SparseMatrix& x, std::size_t row) const
{
    // Merge the sorted row indices with the sorted support.
    const auto idx = x.row_indices(row);
    const auto val = x.row_values(row);
    double f = 0.0;
    std::size_t k = 0;
    for (std::size_t q = 0; q < idx.size() && k < support.size(); ++q) {
        while (k < support.size() && support[k] < idx[q]) ++k;
        if (k < support.size() && support[k] == idx[q]) f += weights[k] * val[q];
    }
    return f + bias;
}

void HipadConfig::validate() const
{
    admm.validate();
    if (svm_cost && !(*svm_cost > 0.0 && std::isfinite(*svm_cost))) {
        throw InvalidArgument("svm_cost must be positive and finite");
    }
    if (!(ipm.kkt_tol > 0.0)) throw InvalidArgument("kkt_tol must be positive");
    if (ipm.max_iter < 0) throw InvalidArgument("ipm max_iter must be nonnegative");
}

SvmDualConfig HipadConfig::phase2_config(std::size_t samples) const
{
    SvmDualConfig out = ipm;
    if (svm_cost) {
        out.svm_cost = *svm_cost;
    } else {
        if (!(admm.lambda2 > 0.0)) throw InvalidArgument("lambda2 = 0 needs an explicit svm_cost");
        out.svm_cost = 1.0 / (static_cast<double>(samples) * admm.lambda2);
    }
    return out;
}

KsvmPrimalParams HipadConfig::phase2_knowledge_params() const
{
    if (phase2_knowledge) return *phase2_knowledge;
    return KsvmPrimalParams{admm.rho1, admm.rho2, admm.rho3, admm.rho4};
}

SvmModel hipad_train(const DataMatrix& data, const HipadConfig& cfg, const TraceCallback& trace)
{
    cfg.validate();
    check_training_data(data);
    const EnsvmParams& p1 = cfg.admm;

    const auto t1 = Clock::now();
    const EnsvmSolver solver(data, p1);
    const auto outcome = in_phase("phase 1", [&] {
        return solver.run(EnsvmState::zeros(data.samples(), data.features()), !cfg.skip_phase2, trace);
    });

    SvmModel model = phase1_model(outcome.state, outcome.support, cfg.skip_phase2 ? ModelOrigin::admm_only : ModelOrigin::hipad);
    model.phase1_iterations = outcome.state.iter;
    model.phase1_reason = std::string(to_string(outcome.reason));
    model.phase1_seconds = seconds_since(t1);
    if (cfg.skip_phase2) return model;
    if (outcome.support.empty()) {
        model.warnings.push_back("phase 1 selected no features; returning the phase-1 model");
        return model;
    }

    const auto t2 = Clock::now();
    const DataMatrix reduced = data.select_features(outcome.support);
    const SvmDualConfig qcfg = cfg.phase2_config(data.samples());
    const QpProblem qp = assemble_svm_dual(reduced, qcfg);
    const Vector w_s = gather(outcome.state.w, outcome.support);
    const Vector alpha0 = svm_dual_warm_start(reduced, w_s, outcome.state.b, qcfg);
    const QpSolution sol = ipm_solve(qp, alpha0, qcfg);
    check_qp_status(sol, model);
    const LinearModel lin = in_phase("phase 2", [&] { return recover_primal(sol, reduced, qcfg); });

    model.weights = lin.w;
    model.bias = lin.b;
    model.phase2_iterations = sol.iterations;
    model.phase2_seconds = seconds_since(t2);
    return model;
}

SvmModel hipad_enk_train(const DataMatrix& data, const KnowledgeSet& knowledge, const HipadConfig& cfg,
                         const TraceCallback& trace)
{
    cfg.validate();
    check_training_data(data);
    if (knowledge.features() != data.features()) {
        throw DimensionError("knowledge has " + std::to_string(knowledge.features()) + " columns, data has " +
                             std::to_string(data.features()) + " features");
    }
    if (knowledge.is_empty()) {
        SvmModel model = hipad_train(data, cfg, trace);
        if (model.origin == ModelOrigin::hipad) model.origin = ModelOrigin::hipad_enk;
        return model;
    }

    const auto t1 = Clock::now();
    const EnkSolver solver(data, knowledge, cfg.admm);
    const auto outcome = in_phase("phase 1", [&] {
        return solver.run(EnkState::zeros(data.samples(), data.features(), knowledge.k1(), knowledge.k2()),
                          !cfg.skip_phase2, trace);
    });
    const EnkState& st = outcome.state;
    const auto& support = outcome.support;

    SvmModel model = phase1_model(st, support, cfg.skip_phase2 ? ModelOrigin::admm_only : ModelOrigin::hipad_enk);
    model.phase1_iterations = st.iter;
    model.phase1_reason = std::string(to_string(outcome.reason));
    model.phase1_seconds = seconds_since(t1);
    if (cfg.skip_phase2) return model;
    if (support.empty()) {
        model.warnings.push_back("phase 1 selected no features; returning the phase-1 model");
        return model;
    }

    // Restrict the rules to the support. A side with no nonzero column left
    // says nothing about the reduced problem and is dropped.
    const std::size_t ms = support.size();
    const std::vector<std::size_t> rest = complement(data.features(), support);
    SparseMatrix b_in = knowledge.b.select_columns(support);
    SparseMatrix d_in = knowledge.dn.select_columns(support);
    SparseMatrix b_out = knowledge.b.select_columns(rest);
    SparseMatrix d_out = knowledge.dn.select_columns(rest);
    Vector dvec = knowledge.d, gvec = knowledge.g, u0 = st.u, v0 = st.v;
    std::vector<std::string> notes;
    if (knowledge.k1() > 0 && b_in.nnz() == 0) {
        notes.push_back("positive-class knowledge has no column on the phase-1 support; dropping it");
        b_in = SparseMatrix(0, ms);
        b_out = SparseMatrix(0, rest.size());
        dvec.clear();
        u0.clear();
    }
    if (knowledge.k2() > 0 && d_in.nnz() == 0) {
        notes.push_back("negative-class knowledge has no column on the phase-1 support; dropping it");
        d_in = SparseMatrix(0, ms);
        d_out = SparseMatrix(0, rest.size());
        gvec.clear();
        v0.clear();
    }
    if (b_in.rows() == 0 && d_in.rows() == 0) {
        notes.push_back("knowledge is vacuous on the phase-1 support; training without it");
        SvmModel plain = hipad_train(data, cfg, trace);
        plain.warnings.insert(plain.warnings.begin(), notes.begin(), notes.end());
        return plain;
    }
    model.warnings.insert(model.warnings.end(), notes.begin(), notes.end());

    const auto t2 = Clock::now();
    const DataMatrix reduced = data.select_features(support);
    const KnowledgeSet k_in(std::move(b_in), dvec, std::move(d_in), gvec);
    const KnowledgeSet k_out(std::move(b_out), dvec, std::move(d_out), gvec);
    const SvmDualConfig qcfg = cfg.phase2_config(data.samples());
    const KsvmWarmStart warm{gather(st.w, support), st.b, u0, v0};
    const KsvmPrimalQp kqp =
        assemble_ksvm_primal(reduced, k_in, k_out, warm, cfg.phase2_knowledge_params(), qcfg);
    const QpSolution sol = ipm_solve(kqp.qp, kqp.warm, qcfg);
    check_qp_status(sol, model);

    model.weights.assign(sol.x.begin(), sol.x.begin() + static_cast<std::ptrdiff_t>(ms));
    model.bias = sol.x[kqp.layout.b()];
    model.phase2_iterations = sol.iterations;
    model.phase2_seconds = seconds_since(t2);
    return model;
}

Vector predict(const SvmModel& model, const DataMatrix& samples)
{
    Vector labels(samples.samples());
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = model.decision(samples.x(), i) >= 0.0 ? 1.0 : -1.0;
    return labels;
}

double accuracy_percent(std::span<const double> predicted, std::span<const double> truth)
{
    if (predicted.size() != truth.size()) throw DimensionError("label vectors differ in length");
    if (truth.empty()) return 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) hits += predicted[i] == truth[i];
    return 100.0 * static_cast<double>(hits) / static_cast<double>(truth.size());
}

SvmModel model_from_dense(std::span<const double> w, double b, ModelOrigin origin)
{
    SvmModel model;
    model.origin = origin;
    for (std::size_t j = 0; j < w.size(); ++j) {
        if (w[j] != 0.0) {
            model.support.push_back(j);
            model.weights.push_back(w[j]);
        }
    }
    model.bias = b;
    return model;
}

} // namespace hipad

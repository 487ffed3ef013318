#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hipad/error.hpp"
#include "hipad/hipad.hpp"
#include "hipad/random.hpp"
#include "oracles.hpp"

using namespace hipad;

namespace {

/// Two clouds in the plane separated by a margin of at least 1 around x1 = 0.
DataMatrix separable_plane(Rng& rng, std::size_t n)
{
    std::vector<double> vals;
    Vector y;
    for (std::size_t i = 0; i < n; ++i) {
        const double label = i % 2 == 0 ? 1.0 : -1.0;
        vals.push_back(label * (1.0 + rng.uniform(0.0, 1.0)));
        vals.push_back(rng.uniform(-2.0, 2.0));
        y.push_back(label);
    }
    return DataMatrix(SparseMatrix::from_dense(n, 2, vals), y);
}

/// Labels from a sparse hyperplane on the first `active` features.
DataMatrix planted(Rng& rng, std::size_t n, std::size_t m, std::size_t active)
{
    const SparseMatrix x = oracle::random_sparse(rng, n, m, 0.5);
    Vector h(m, 0.0);
    for (std::size_t j = 0; j < active; ++j) h[j] = j % 2 == 0 ? 1.0 : -1.0;
    const Vector f = spmv(x, h);
    Vector y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = f[i] >= 0.0 ? 1.0 : -1.0;
    return DataMatrix(x, y);
}

HipadConfig small_config()
{
    HipadConfig cfg;
    cfg.admm.lambda1 = 0.02;
    cfg.admm.lambda2 = 0.5;
    cfg.admm.eps_tol = 1e-3;
    return cfg;
}

DataMatrix permute_columns(const DataMatrix& data, const std::vector<std::size_t>& perm)
{
    // Column j of the result is column perm[j] of the input.
    return data.select_features(perm);
}

} // namespace

TEST_CASE("separable toy data is fit exactly")
{
    Rng rng(1);
    const DataMatrix data = separable_plane(rng, 40);
    HipadConfig cfg;
    cfg.admm.lambda1 = 0.01;
    const SvmModel model = hipad_train(data, cfg);
    CHECK(model.origin == ModelOrigin::hipad);
    CHECK(model.phase2_iterations > 0);
    CHECK(accuracy_percent(predict(model, data), data.y()) == 100.0);
}

TEST_CASE("skip-phase-2 returns the converged ADMM model verbatim")
{
    Rng rng(2);
    const DataMatrix data = planted(rng, 40, 30, 4);
    HipadConfig cfg = small_config();
    cfg.skip_phase2 = true;
    const SvmModel model = hipad_train(data, cfg);

    const auto out = admm_ensvm_run(data, cfg.admm, EnsvmState::zeros(40, 30), false);
    CHECK(model.origin == ModelOrigin::admm_only);
    CHECK(model.support == out.support);
    REQUIRE(model.weights.size() == out.support.size());
    for (std::size_t k = 0; k < out.support.size(); ++k) CHECK(model.weights[k] == out.state.c[out.support[k]]);
    CHECK(model.bias == out.state.b);
    CHECK(model.phase1_iterations == out.state.iter);
    CHECK(model.phase1_reason == to_string(out.reason));
    CHECK(model.phase2_iterations == 0);
}

TEST_CASE("phase 2 works on the transition support")
{
    Rng rng(3);
    const DataMatrix data = planted(rng, 60, 40, 5);
    const HipadConfig cfg = small_config();
    const SvmModel model = hipad_train(data, cfg);
    const auto out = admm_ensvm_run(data, cfg.admm, EnsvmState::zeros(60, 40), true);
    CHECK(model.support == out.support);
    CHECK(model.phase1_iterations == out.state.iter);
    for (std::size_t j : model.support) CHECK(out.state.c[j] != 0.0);
    CHECK_NOTHROW(model.validate());
}

TEST_CASE("empty knowledge delegates to plain training")
{
    Rng rng(4);
    const DataMatrix data = planted(rng, 50, 30, 4);
    const HipadConfig cfg = small_config();
    const SvmModel plain = hipad_train(data, cfg);
    const SvmModel enk = hipad_enk_train(data, KnowledgeSet::empty(30), cfg);
    CHECK(enk.origin == ModelOrigin::hipad_enk);
    REQUIRE(enk.support == plain.support);
    for (std::size_t k = 0; k < plain.weights.size(); ++k) CHECK(std::abs(enk.weights[k] - plain.weights[k]) <= 1e-8);
    CHECK(std::abs(enk.bias - plain.bias) <= 1e-8);
}

TEST_CASE("knowledge on unused features is dropped with a warning")
{
    Rng rng(5);
    // Features 30 and 31 never occur in the data, and the rules on them are
    // too weak to pull those weights past the L1 threshold.
    const DataMatrix data = planted(rng, 50, 30, 4).with_feature_count(32);
    const KnowledgeSet useless(SparseMatrix::from_rows(32, {{{30, 0.01}}}), Vector{10.0},
                               SparseMatrix::from_rows(32, {{{31, 0.01}}}), Vector{10.0});
    const HipadConfig cfg = small_config();

    const SvmModel enk = hipad_enk_train(data, useless, cfg);
    const SvmModel plain = hipad_train(data, cfg);
    const bool warned = std::any_of(enk.warnings.begin(), enk.warnings.end(),
                                    [](const std::string& w) { return w.find("vacuous") != std::string::npos; });
    CHECK(warned);
    CHECK(enk.support == plain.support);
    CHECK(enk.weights == plain.weights);
    CHECK(enk.bias == plain.bias);
}

TEST_CASE("knowledge dimensions must match the data")
{
    Rng rng(6);
    const DataMatrix data = planted(rng, 20, 10, 2);
    CHECK_THROWS_AS(hipad_enk_train(data, KnowledgeSet::empty(11), small_config()), DimensionError);
}

TEST_CASE("training needs both classes")
{
    const DataMatrix one_class(SparseMatrix::from_dense(3, 1, std::vector<double>{1.0, 2.0, 3.0}), Vector(3, 1.0));
    CHECK_THROWS_AS(hipad_train(one_class, HipadConfig{}), InvalidArgument);
    const DataMatrix unlabeled(SparseMatrix::from_dense(2, 1, std::vector<double>{1.0, 2.0}), Vector{});
    CHECK_THROWS_AS(hipad_train(unlabeled, HipadConfig{}), InvalidArgument);
}

TEST_CASE("an empty phase-1 support falls back to the phase-1 model")
{
    Rng rng(7);
    const DataMatrix data = planted(rng, 30, 10, 3);
    HipadConfig cfg;
    cfg.admm.lambda1 = 50.0;
    const SvmModel model = hipad_train(data, cfg);
    CHECK(model.support.empty());
    CHECK(model.phase2_iterations == 0);
    CHECK_FALSE(model.warnings.empty());
}

TEST_CASE("feature permutation permutes the model")
{
    Rng rng(8);
    const DataMatrix data = planted(rng, 60, 25, 5);
    std::vector<std::size_t> perm(25);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(perm));
    const DataMatrix shuffled = permute_columns(data, perm);

    HipadConfig cfg = small_config();
    cfg.admm.pcg.tol = 1e-12;
    const SvmModel a = hipad_train(data, cfg);
    const SvmModel b = hipad_train(shuffled, cfg);

    std::vector<std::size_t> mapped;
    for (std::size_t j : b.support) mapped.push_back(perm[j]);
    std::sort(mapped.begin(), mapped.end());
    REQUIRE(mapped == a.support);
    for (std::size_t k = 0; k < b.support.size(); ++k) {
        CHECK(std::abs(b.weights[k] - a.weight(perm[b.support[k]])) <= 1e-8);
    }
    CHECK(std::abs(a.bias - b.bias) <= 1e-8);
}

TEST_CASE("predict examples")
{
    SvmModel m;
    m.support = {0};
    m.weights = {1.0};
    const DataMatrix x(SparseMatrix::from_dense(1, 3, std::vector<double>{2.0, -7.0, 1.0}), Vector{});
    CHECK(predict(m, x) == Vector{1.0});

    SvmModel constant;
    constant.bias = -1.0;
    const DataMatrix many(SparseMatrix::from_dense(3, 2, std::vector<double>{1, 2, 3, 4, 5, 6}), Vector{});
    CHECK(predict(constant, many) == Vector{-1.0, -1.0, -1.0});

    // Zero decision value maps to +1.
    SvmModel tie;
    tie.support = {1};
    tie.weights = {1.0};
    tie.bias = -2.0;
    const DataMatrix on_plane(SparseMatrix::from_dense(1, 2, std::vector<double>{0.0, 2.0}), Vector{});
    CHECK(predict(tie, on_plane) == Vector{1.0});

    // Features beyond the model's range contribute nothing.
    SvmModel narrow;
    narrow.support = {0};
    narrow.weights = {-1.0};
    const DataMatrix wide(SparseMatrix::from_dense(1, 5, std::vector<double>{1.0, 0.0, 0.0, 0.0, 100.0}), Vector{});
    CHECK(predict(narrow, wide) == Vector{-1.0});
}

TEST_CASE("model from the two-sample dual classifies its training points")
{
    const DataMatrix data(SparseMatrix::from_dense(2, 2, std::vector<double>{1.0, 0.0, -1.0, 0.0}), Vector{1.0, -1.0});
    SvmDualConfig cfg;
    cfg.svm_cost = 10.0;
    const LinearModel lin = recover_primal(ipm_solve(assemble_svm_dual(data, cfg), {}, cfg), data, cfg);
    const SvmModel m = model_from_dense(lin.w, lin.b, ModelOrigin::hipad);
    CHECK(m.support == std::vector<std::size_t>{0});
    CHECK(predict(m, data) == Vector{1.0, -1.0});
}

TEST_CASE("model invariants and helpers")
{
    SvmModel m;
    m.support = {3, 1};
    m.weights = {1.0, 2.0};
    CHECK_THROWS_AS(m.validate(), InvalidArgument);
    m.support = {1, 3};
    m.weights = {1.0};
    CHECK_THROWS_AS(m.validate(), InvalidArgument);
    m.weights = {1.0, 2.0};
    CHECK(m.weight(3) == 2.0);
    CHECK(m.weight(2) == 0.0);

    CHECK(model_origin_from_string("hipad-enk") == ModelOrigin::hipad_enk);
    CHECK(to_string(ModelOrigin::admm_only) == "admm-only");
    CHECK_THROWS_AS(model_origin_from_string("svm"), InvalidArgument);

    CHECK(accuracy_percent(Vector{1, -1, 1, 1}, Vector{1, 1, 1, -1}) == 50.0);
    CHECK_THROWS_AS(accuracy_percent(Vector{1}, Vector{1, 1}), DimensionError);
}

TEST_CASE("phase-2 cost defaults to 1 / (N lambda2)")
{
    HipadConfig cfg;
    cfg.admm.lambda2 = 0.25;
    CHECK(cfg.phase2_config(8).svm_cost == 0.5);
    cfg.svm_cost = 3.0;
    CHECK(cfg.phase2_config(8).svm_cost == 3.0);
    cfg.svm_cost.reset();
    cfg.admm.lambda2 = 0.0;
    CHECK_THROWS_AS(cfg.phase2_config(8), InvalidArgument);
}

TEST_CASE("training is deterministic")
{
    Rng rng(9);
    const DataMatrix data = planted(rng, 50, 40, 5);
    const SparseMatrix b = SparseMatrix::from_rows(40, {{{0, -0.5}, {2, -0.5}}});
    const KnowledgeSet k(b, Vector{-1.0}, SparseMatrix(0, 40), Vector{});
    const HipadConfig cfg = small_config();
    const SvmModel m1 = hipad_enk_train(data, k, cfg);
    const SvmModel m2 = hipad_enk_train(data, k, cfg);
    CHECK(m1.support == m2.support);
    CHECK(m1.weights == m2.weights);
    CHECK(m1.bias == m2.bias);
    CHECK(m1.phase1_iterations == m2.phase1_iterations);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "hipad/error.hpp"
#include "hipad/hipad.hpp"
#include "hipad/io.hpp"
#include "hipad/random.hpp"
#include "hipad/synthetic.hpp"

using namespace hipad;

TEST_CASE("rng derived draws are pinned")
{
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());

    Rng r(7);
    for (int i = 0; i < 1000; ++i) {
        const double u = r.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        CHECK(r.below(7) < 7);
    }
    const auto s = r.subset(100, 10);
    CHECK(s.size() == 10);
    CHECK(std::is_sorted(s.begin(), s.end()));
    CHECK(std::adjacent_find(s.begin(), s.end()) == s.end());
    CHECK(r.subset(5, 5) == std::vector<std::size_t>{0, 1, 2, 3, 4});

    // Normal draws have roughly unit variance.
    Rng n(9);
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < 20000; ++i) {
        const double z = n.normal();
        sum += z;
        sq += z * z;
    }
    CHECK(std::abs(sum / 20000.0) < 0.03);
    CHECK(std::abs(sq / 20000.0 - 1.0) < 0.04);
}

TEST_CASE("same spec, same bytes")
{
    SyntheticSpec spec;
    spec.m = 2000;
    spec.seed = 123;
    const SyntheticDataset a = generate_knowledge_synthetic(spec);
    const SyntheticDataset b = generate_knowledge_synthetic(spec);
    CHECK(a.train == b.train);
    CHECK(a.test == b.test);
    CHECK(a.knowledge == b.knowledge);

    std::ostringstream ta, tb;
    write_libsvm(ta, a.test);
    write_libsvm(tb, b.test);
    CHECK(ta.str() == tb.str());

    spec.seed = 124;
    CHECK_FALSE(generate_knowledge_synthetic(spec).train == a.train);
}

TEST_CASE("presets")
{
    const SyntheticSpec s10 = SyntheticSpec::preset("ksvm-s-10k", 1);
    CHECK(s10.n_train == 200);
    CHECK(s10.n_test == 400);
    CHECK(s10.m == 10000);
    CHECK(s10.block_length == 50);
    const SyntheticSpec s50 = SyntheticSpec::preset("ksvm-s-50k", 1);
    CHECK(s50.n_train == 500);
    CHECK(s50.n_test == 1000);
    CHECK(s50.m == 50000);
    CHECK_THROWS_AS(SyntheticSpec::preset("ksvm-s-1m", 1), InvalidArgument);
}

TEST_CASE("generator settings validation")
{
    SyntheticSpec s;
    s.m = 150;
    CHECK_THROWS_AS(s.validate(), InvalidArgument);
    s = {};
    s.noise_max = 1.5;
    CHECK_THROWS_AS(s.validate(), InvalidArgument);
    s = {};
    s.correlation = 1.0;
    CHECK_THROWS_AS(s.validate(), InvalidArgument);
}

TEST_CASE("knowledge shape")
{
    SyntheticSpec spec;
    spec.n_train = 2;
    spec.n_test = 2;
    const KnowledgeSet k = generate_knowledge_synthetic(spec).knowledge;
    REQUIRE(k.k1() == 1);
    REQUIRE(k.k2() == 1);
    CHECK(k.features() == 10000);
    CHECK(k.d == Vector{-4.0});
    CHECK(k.g == Vector{-3.0});
    const auto bi = k.b.row_indices(0);
    const auto bv = k.b.row_values(0);
    REQUIRE(bi.size() == 50);
    for (std::size_t j = 0; j < 50; ++j) {
        CHECK(bi[j] == j);
        CHECK(bv[j] == -1.0 / 50.0);
    }
    const auto di = k.dn.row_indices(0);
    REQUIRE(di.size() == 50);
    CHECK(di.front() == 150);
    CHECK(di.back() == 199);
}

TEST_CASE("block layout and noise fraction")
{
    SyntheticSpec spec;
    spec.n_train = 100;
    spec.n_test = 100;
    spec.seed = 4;
    const SyntheticDataset ds = generate_knowledge_synthetic(spec);
    const std::size_t rest = 10000 - 200;
    for (std::size_t i = 0; i < 100; ++i) {
        std::size_t k2k3 = 0, other_blocks = 0, noise = 0;
        for (std::size_t j : ds.train.x().row_indices(i)) {
            if (j >= 50 && j < 150) ++k2k3;
            else if (j < 200) ++other_blocks;
            else ++noise;
        }
        CHECK(k2k3 == 100);
        CHECK(other_blocks == 0);
        CHECK(noise >= static_cast<std::size_t>(0.05 * rest) - 1);
        CHECK(noise <= static_cast<std::size_t>(0.10 * rest) + 1);

        std::size_t blocks = 0;
        for (std::size_t j : ds.test.x().row_indices(i)) blocks += j < 200;
        CHECK(blocks == 200);
    }
    std::size_t pos = 0;
    for (double y : ds.train.y()) pos += y > 0;
    CHECK(pos == 50);
}

TEST_CASE("block means match the specified distribution")
{
    SyntheticSpec spec;
    spec.n_train = 2;
    spec.n_test = 1000;
    spec.m = 400;
    spec.seed = 77;
    const SyntheticDataset ds = generate_knowledge_synthetic(spec);
    const double len = 50.0;
    const double expected[4] = {2.0, 0.5, -0.2, -1.0};
    for (std::size_t blk = 0; blk < 4; ++blk) {
        double sum = 0.0;
        std::size_t n = 0;
        for (std::size_t i = 0; i < 1000; ++i) {
            if (ds.test.y()[i] < 0) continue;
            const auto idx = ds.test.x().row_indices(i);
            const auto val = ds.test.x().row_values(i);
            double s = 0.0;
            for (std::size_t q = 0; q < idx.size(); ++q) {
                if (idx[q] >= blk * 50 && idx[q] < (blk + 1) * 50) s += val[q];
            }
            sum += s / len;
            ++n;
        }
        // A block average has variance (0.2 + 0.8 L) / L under the compound-symmetric covariance.
        const double se = std::sqrt((0.2 + 0.8 * len) / len / static_cast<double>(n));
        CHECK(std::abs(sum / static_cast<double>(n) - expected[blk]) <= 4.0 * se);
    }
}

TEST_CASE("within-block correlation")
{
    SyntheticSpec spec;
    spec.n_train = 2;
    spec.n_test = 4000;
    spec.m = 400;
    spec.seed = 3;
    const SyntheticDataset ds = generate_knowledge_synthetic(spec);
    // Coordinates 60 and 61 (block K2), centered by the class mean.
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < 4000; ++i) {
        const DenseMatrix row = ds.test.x().select_rows(std::vector<std::size_t>{i}).to_dense();
        const double mu = ds.test.y()[i] * 0.5;
        const double a = row(0, 60) - mu, b = row(0, 61) - mu;
        sxy += a * b;
        sxx += a * a;
        syy += b * b;
    }
    CHECK(std::abs(sxy / std::sqrt(sxx * syy) - 0.8) < 0.03);
    CHECK(std::abs(sxx / 4000.0 - 1.0) < 0.08);
}

TEST_CASE("planted generator")
{
    PlantedSpec spec;
    spec.n_train = 20;
    spec.n_test = 10;
    spec.m = 300;
    spec.support = 10;
    spec.seed = 5;
    const PlantedDataset a = generate_planted_sparse(spec);
    const PlantedDataset b = generate_planted_sparse(spec);
    CHECK(a.train == b.train);
    CHECK(a.support == b.support);
    CHECK(a.support.size() == 10);
    CHECK(a.train.features() == 300);
    CHECK(a.test.samples() == 10);
    spec.support = 301;
    CHECK_THROWS_AS(generate_planted_sparse(spec), InvalidArgument);
}

TEST_CASE("the training split is hard without knowledge")
{
    const SyntheticDataset ds = generate_knowledge_synthetic(SyntheticSpec::ksvm_s_10k(11));

    // Plain linear SVM on every feature, cost 1.
    SvmDualConfig plain;
    plain.svm_cost = 1.0;
    const QpSolution sol = ipm_solve(assemble_svm_dual(ds.train, plain), {}, plain);
    REQUIRE(sol.status == QpStatus::optimal);
    const LinearModel lin = recover_primal(sol, ds.train, plain);
    const SvmModel svm = model_from_dense(lin.w, lin.b, ModelOrigin::hipad);
    const double svm_acc = accuracy_percent(predict(svm, ds.test), ds.test.y());

    HipadConfig cfg;
    cfg.admm = EnkParams::uniform(cfg.admm, 1.0, 1.0);
    cfg.admm.lambda1 = 0.06;
    cfg.admm.lambda2 = 0.01;
    cfg.admm.rho1 = 100.0;
    cfg.admm.rho3 = 30.0;
    cfg.admm.eps_tol = 1e-4;
    cfg.svm_cost = 1.0 / (3.0 * 200.0);
    cfg.phase2_knowledge = KsvmPrimalParams{100.0, 1.0, 1.0, 1.0};
    const SvmModel enk = hipad_enk_train(ds.train, ds.knowledge, cfg);
    const double enk_acc = accuracy_percent(predict(enk, ds.test), ds.test.y());

    MESSAGE("plain SVM " << svm_acc << "%, HIPAD-ENK " << enk_acc << "%");
    CHECK(enk_acc - svm_acc >= 5.0);
}

#include "hipad/synthetic.hpp"

#include <cmath>

#include "hipad/error.hpp"
#include "hipad/random.hpp"

namespace hipad {

namespace {

/// n labels, ceil(n/2) of them +1, in random order.
Vector balanced_labels(std::size_t n, Rng& rng)
{
    Vector y(n, -1.0);
    for (std::size_t i = 0; i < n; i += 2) y[i] = 1.0;
    rng.shuffle(std::span<double>(y));
    return y;
}

DataMatrix knowledge_samples(const SyntheticSpec& spec, std::size_t n, const std::array<bool, 4>& blocks, Rng& rng)
{
    const std::size_t len = spec.block_length;
    const std::size_t rest = spec.m - 4 * len;
    // Sigma = (1 - r) I + r e e^T has the symmetric square root
    // sqrt(1 - r) I + ((sqrt(1 - r + r L) - sqrt(1 - r)) / L) e e^T.
    const double r = spec.correlation;
    const double diag_root = std::sqrt(1.0 - r);
    const double ones_root = (std::sqrt(1.0 - r + r * static_cast<double>(len)) - diag_root) / static_cast<double>(len);

    Vector y = balanced_labels(n, rng);
    std::vector<std::vector<SparseMatrix::Entry>> rows(n);
    Vector z(len);
    for (std::size_t i = 0; i < n; ++i) {
        auto& row = rows[i];
        for (std::size_t k = 0; k < 4; ++k) {
            if (!blocks[k]) continue;
            double sum = 0.0;
            for (double& zj : z) {
                zj = rng.normal();
                sum += zj;
            }
            const double mean = y[i] * spec.block_means[k];
            for (std::size_t j = 0; j < len; ++j) row.emplace_back(k * len + j, mean + diag_root * z[j] + ones_root * sum);
        }
        const double fraction = rng.uniform(spec.noise_min, spec.noise_max);
        const auto count = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(rest)));
        for (std::size_t j : rng.subset(rest, count)) row.emplace_back(4 * len + j, rng.normal());
    }
    return DataMatrix(SparseMatrix::from_rows(spec.m, rows), std::move(y));
}

SparseMatrix block_rule(std::size_t m, std::size_t len, std::size_t block)
{
    std::vector<std::vector<SparseMatrix::Entry>> rows(1);
    for (std::size_t j = 0; j < len; ++j) rows[0].emplace_back(block * len + j, -1.0 / static_cast<double>(len));
    return SparseMatrix::from_rows(m, rows);
}

} // namespace

void SyntheticSpec::validate() const
{
    if (block_length == 0) throw InvalidArgument("block length must be positive");
    if (4 * block_length > m) throw InvalidArgument("four blocks of length L need m >= 4L");
    if (!(correlation >= 0.0 && correlation < 1.0)) throw InvalidArgument("block correlation must be in [0, 1)");
    if (!(noise_min >= 0.0 && noise_min <= noise_max && noise_max <= 1.0)) {
        throw InvalidArgument("noise fraction range must satisfy 0 <= min <= max <= 1");
    }
    for (double mu : block_means) {
        if (!std::isfinite(mu)) throw InvalidArgument("block means must be finite");
    }
}

SyntheticSpec SyntheticSpec::ksvm_s_10k(std::uint64_t seed)
{
    SyntheticSpec s;
    s.seed = seed;
    return s;
}

SyntheticSpec SyntheticSpec::ksvm_s_50k(std::uint64_t seed)
{
    SyntheticSpec s;
    s.n_train = 500;
    s.n_test = 1000;
    s.m = 50000;
    s.seed = seed;
    return s;
}

SyntheticSpec SyntheticSpec::preset(const std::string& name, std::uint64_t seed)
{
    if (name == "ksvm-s-10k") return ksvm_s_10k(seed);
    if (name == "ksvm-s-50k") return ksvm_s_50k(seed);
    throw InvalidArgument("unknown preset '" + name + "' (expected ksvm-s-10k or ksvm-s-50k)");
}

std::vector<std::size_t> block_features(const SyntheticSpec& spec)
{
    std::vector<std::size_t> idx(4 * spec.block_length);
    for (std::size_t j = 0; j < idx.size(); ++j) idx[j] = j;
    return idx;
}

SyntheticDataset generate_knowledge_synthetic(const SyntheticSpec& spec)
{
    spec.validate();
    Rng rng(spec.seed);
    SyntheticDataset out;
    out.train = knowledge_samples(spec, spec.n_train, spec.train_blocks, rng);
    out.test = knowledge_samples(spec, spec.n_test, spec.test_blocks, rng);
    out.knowledge = KnowledgeSet(block_rule(spec.m, spec.block_length, 0), Vector{-4.0},
                                 block_rule(spec.m, spec.block_length, 3), Vector{-3.0});
    return out;
}

void PlantedSpec::validate() const
{
    if (support > m) throw InvalidArgument("planted support cannot exceed the feature count");
    if (!std::isfinite(shift)) throw InvalidArgument("shift must be finite");
}

PlantedDataset generate_planted_sparse(const PlantedSpec& spec)
{
    spec.validate();
    Rng rng(spec.seed);
    PlantedDataset out;
    out.support = rng.subset(spec.m, spec.support);
    Vector mask(spec.m, 0.0);
    for (std::size_t j : out.support) mask[j] = spec.shift;

    auto draw = [&](std::size_t n) {
        Vector y = balanced_labels(n, rng);
        Vector dense(n * spec.m);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < spec.m; ++j) dense[i * spec.m + j] = y[i] * mask[j] + rng.normal();
        }
        return DataMatrix(SparseMatrix::from_dense(n, spec.m, dense), std::move(y));
    };
    out.train = draw(spec.n_train);
    out.test = draw(spec.n_test);
    return out;
}

} // namespace hipad

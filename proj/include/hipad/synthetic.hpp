#pragma once

// Synthetic benchmark generators.
//
// Knowledge benchmark: four Gaussian feature blocks K1..K4 of length L occupy
// coordinates [0, 4L). Within a block the covariance is 1 on the diagonal and
// `correlation` elsewhere; the mean is +mean[k] for the positive class and
// -mean[k] for the negative class. Each sample also gets standard normal
// noise on a random 5-10% of the coordinates outside the blocks. Training
// samples populate only some blocks (K2, K3 by default), which makes the
// problem hard without the two implication rules
//
//   mean of K1 >= 4  =>  positive,     mean of K4 >= 3  =>  negative,
//
// encoded as B = -(1/L) e^T on K1, d = -4 and D = -(1/L) e^T on K4, g = -3.

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "hipad/data.hpp"

namespace hipad {

struct SyntheticSpec {
    std::size_t n_train = 200;
    std::size_t n_test = 400;
    std::size_t m = 10000;
    std::size_t block_length = 50;
    /// Positive-class block means; the negative class uses the negated values.
    std::array<double, 4> block_means{2.0, 0.5, -0.2, -1.0};
    double correlation = 0.8;
    double noise_min = 0.05;
    double noise_max = 0.10;
    std::uint64_t seed = 1;
    std::array<bool, 4> train_blocks{false, true, true, false};
    std::array<bool, 4> test_blocks{true, true, true, true};

    /// Throws InvalidArgument on inconsistent fields.
    void validate() const;

    /// 200 train / 400 test samples, 10,000 features.
    static SyntheticSpec ksvm_s_10k(std::uint64_t seed);
    /// 500 train / 1,000 test samples, 50,000 features.
    static SyntheticSpec ksvm_s_50k(std::uint64_t seed);
    /// Looks up a preset by name ("ksvm-s-10k", "ksvm-s-50k").
    static SyntheticSpec preset(const std::string& name, std::uint64_t seed);
};

struct SyntheticDataset {
    DataMatrix train;
    DataMatrix test;
    KnowledgeSet knowledge;
};

/// Deterministic in `spec` (including its seed).
SyntheticDataset generate_knowledge_synthetic(const SyntheticSpec& spec);

/// Indices of the 4L block features.
std::vector<std::size_t> block_features(const SyntheticSpec& spec);

/// Planted sparse-support problem without knowledge: x | y ~ N(y * shift * 1_S, I)
/// with S a random set of `support` coordinates. Samples are dense.
struct PlantedSpec {
    std::size_t n_train = 200;
    std::size_t n_test = 1000;
    std::size_t m = 5000;
    std::size_t support = 100;
    double shift = 0.25;
    std::uint64_t seed = 1;

    void validate() const;
};

struct PlantedDataset {
    DataMatrix train;
    DataMatrix test;
    /// Planted coordinates, ascending.
    std::vector<std::size_t> support;
};

PlantedDataset generate_planted_sparse(const PlantedSpec& spec);

} // namespace hipad

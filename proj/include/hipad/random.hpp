#pragma once

// Portable seeded random source.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the C++
// standard. Everything layered on top (uniforms, normals, bounded integers,
// subsets) is implemented here rather than through <random> distributions,
// whose algorithms are implementation-defined. Datasets therefore reproduce
// byte-for-byte across compilers and platforms.
//
//   uniform()  : top 53 bits of one draw, scaled by 2^-53, in [0, 1)
//   normal()   : Box-Muller on (1 - u1, u2), both outputs used in turn
//   below(n)   : rejection sampling on the largest multiple of n below 2^64
//   subset(n,k): first k slots of a partial Fisher-Yates shuffle of 0..n-1,
//                returned in ascending order

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace hipad {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal();
    /// Uniform integer in [0, n); n must be positive.
    std::uint64_t below(std::uint64_t n);
    /// k distinct values from [0, n), sorted ascending.
    std::vector<std::size_t> subset(std::size_t n, std::size_t k);

    template <class T>
    void shuffle(std::span<T> items)
    {
        for (std::size_t i = items.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    std::optional<double> spare_normal_;
};

} // namespace hipad

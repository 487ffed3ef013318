#include "hipad/proximal.hpp"

#include <cmath>
#include <string>

#include "hipad/error.hpp"

namespace hipad {

ProxThreshold::ProxThreshold(double lambda) : lambda_(lambda)
{
    if (!(lambda >= 0.0)) {
        throw InvalidArgument("prox threshold must be nonnegative, got " + std::to_string(lambda));
    }
}

double hinge_prox(ProxThreshold lambda, double omega)
{
    const double l = lambda.value();
    if (omega > l) return omega - l;
    if (omega >= 0.0) return 0.0;
    return omega;
}

double soft_threshold(ProxThreshold lambda, double omega)
{
    const double shrunk = std::abs(omega) - lambda.value();
    if (!(shrunk > 0.0)) return 0.0;
    return omega > 0.0 ? shrunk : -shrunk;
}

void hinge_prox(ProxThreshold lambda, std::span<const double> in, std::span<double> out)
{
    if (in.size() != out.size()) throw DimensionError("hinge_prox: input/output length mismatch");
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = hinge_prox(lambda, in[i]);
}

void soft_threshold(ProxThreshold lambda, std::span<const double> in, std::span<double> out)
{
    if (in.size() != out.size()) throw DimensionError("soft_threshold: input/output length mismatch");
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = soft_threshold(lambda, in[i]);
}

} // namespace hipad

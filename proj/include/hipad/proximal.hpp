#pragma once

#include <span>

namespace hipad {

/// Nonnegative threshold of a shrinkage operator.
class ProxThreshold {
public:
    /// Throws InvalidArgument if `lambda` is negative or NaN.
    explicit ProxThreshold(double lambda);

    double value() const noexcept { return lambda_; }

private:
    double lambda_;
};

/// Proximal map of lambda * max(a, 0):
///   omega - lambda  if omega > lambda
///   0               if 0 <= omega <= lambda
///   omega           if omega < 0
double hinge_prox(ProxThreshold lambda, double omega);

/// sgn(omega) * max(0, |omega| - lambda), the proximal map of lambda * |c|.
double soft_threshold(ProxThreshold lambda, double omega);

/// Elementwise forms; `out` may alias `in`.
void hinge_prox(ProxThreshold lambda, std::span<const double> in, std::span<double> out);
void soft_threshold(ProxThreshold lambda, std::span<const double> in, std::span<double> out);

} // namespace hipad

#pragma once

// Pieces shared by the ENSVM and ENK ADMM sweeps.

#include <cmath>
#include <limits>
#include <span>

#include "hipad/admm.hpp"
#include "hipad/proximal.hpp"

namespace hipad::detail {

/// t = Y (gamma1 + mu1 (e - a)); X^T t and e^T t form the data part of the (w, b) right-hand side.
inline Vector hinge_target(std::span<const double> y, std::span<const double> gamma1, std::span<const double> a,
                           double mu1)
{
    Vector t(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) t[i] = y[i] * (gamma1[i] + mu1 * (1.0 - a[i]));
    return t;
}

struct SplitResiduals {
    double hinge = 0.0; // ||a - (e - Y(Xw + be))||
    double l1 = 0.0;    // ||c - w||
};

/// Given fresh (w, b): a <- S_{1/(N mu1)}(e + gamma1/mu1 - Y(Xw + be)), c <- T_{lambda1/mu2}(gamma2/mu2 + w),
/// then the gamma1 / gamma2 ascent steps. Returns the post-update split residuals.
inline SplitResiduals update_splits(const DataMatrix& data, const EnsvmParams& params, EnsvmState& st)
{
    const auto& x = data.x();
    const auto y = data.y();
    const std::size_t n = x.rows();
    const std::size_t m = x.cols();
    const ProxThreshold hinge_lambda(1.0 / (static_cast<double>(n) * params.mu1));
    const ProxThreshold l1_lambda(params.lambda1 / params.mu2);

    SplitResiduals res;
    double hinge_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double margin_gap = 1.0 - y[i] * (x.row_dot(i, st.w) + st.b); // e - Y(Xw + be)
        st.a[i] = hinge_prox(hinge_lambda, margin_gap + st.gamma1[i] / params.mu1);
        const double r = margin_gap - st.a[i];
        st.gamma1[i] += params.mu1 * r;
        hinge_sq += r * r;
    }
    double l1_sq = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        st.c[j] = soft_threshold(l1_lambda, st.gamma2[j] / params.mu2 + st.w[j]);
        const double r = st.w[j] - st.c[j];
        st.gamma2[j] += params.mu2 * r;
        l1_sq += r * r;
    }
    res.hinge = std::sqrt(hinge_sq);
    res.l1 = std::sqrt(l1_sq);
    return res;
}

/// ||w_new - w_old|| / ||w_old||, with 0/0 read as no change.
inline double relative_change(std::span<const double> w_new, std::span<const double> w_old)
{
    const double diff = norm2(subtract(w_new, w_old));
    const double base = norm2(w_old);
    if (base > 0.0) return diff / base;
    return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

/// ||w_new - w_old|| / max(||w_old||, 1)
inline double transition_change(std::span<const double> w_new, std::span<const double> w_old)
{
    return norm2(subtract(w_new, w_old)) / std::max(norm2(w_old), 1.0);
}

inline double relative_objective_change(double f_new, double f_old)
{
    return std::abs(f_new - f_old) / std::max(1.0, std::abs(f_old));
}

inline std::size_t count_nonzero(std::span<const double> c)
{
    std::size_t k = 0;
    for (double v : c) k += (v != 0.0);
    return k;
}

} // namespace hipad::detail

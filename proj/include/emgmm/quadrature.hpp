#pragma once

#include <cmath>
#include <map>
#include <mutex>
#include <string>
#include <utility>

#include "emgmm/errors.hpp"
#include "emgmm/linalg.hpp"

namespace emgmm {

namespace detail {

/// Orthonormal Hermite recurrence at z, renormalized on the fly: raw values
/// reach e^{z^2/2} near the outer roots, which overflows doubles for
/// n beyond ~700. On return p1 holds the (scaled) polynomial value, pp the
/// equally scaled derivative, and log_scale the log of the removed factor.
/// The Newton correction p1/pp is scale-invariant; weights only need
/// log-magnitudes.
inline void hermite_eval(int n, double z, double& p1, double& pp, double& log_scale) {
    constexpr double pim4 = 0.7511255444649425;  // pi^{-1/4}
    log_scale = 0.0;
    p1 = pim4;
    double p2 = 0.0;
    for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / j) * p2 - std::sqrt((j - 1.0) / j) * p3;
        if (std::abs(p1) > 1e150 || std::abs(p2) > 1e150) {
            p1 *= 1e-150;
            p2 *= 1e-150;
            log_scale += 150.0 * std::log(10.0);
        }
    }
    pp = std::sqrt(2.0 * n) * p2;
}

/// Gauss-Hermite nodes/weights for weight function e^{-x^2}: Newton
/// iteration on the orthonormal Hermite recurrence, marching from the
/// largest root inward. Successive roots are one half-period of the WKB
/// phase apart, so the next guess steps by pi / sqrt(2n+1 - z^2) evaluated
/// at the midpoint; this keeps every guess within the Newton basin for
/// arbitrary n (the classic polynomial extrapolation guesses skip roots
/// beyond a few hundred nodes). Roots fill in symmetric pairs.
inline void gauss_hermite(int n, Vec& x, Vec& w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    const int m = (n + 1) / 2;
    const double turning_point = 2.0 * n + 1.0;
    const double pi = std::acos(-1.0);
    double z = 0.0;
    for (int i = 0; i < m; ++i) {
        if (i == 0) {
            z = std::sqrt(turning_point) - 1.85575 * std::pow(turning_point, -0.16667);
        } else {
            const double s0 = std::sqrt(std::max(turning_point - z * z, 1.0));
            const double mid = z - 0.5 * pi / s0;
            const double s1 = std::sqrt(std::max(turning_point - mid * mid, 1.0));
            z -= pi / s1;
        }
        bool settled = false;
        for (int its = 0; its < 60; ++its) {
            double p1, pp, log_scale;
            hermite_eval(n, z, p1, pp, log_scale);
            const double z1 = z;
            z = z1 - p1 / pp;
            // Newton converges quadratically and then limit-cycles within a
            // few ulps; the tolerance must sit above that cycle amplitude.
            if (z == z1 || std::abs(z - z1) <= 1e-13 * std::max(1.0, std::abs(z))) {
                settled = true;
                break;
            }
        }
        if (!settled)
            throw QuadratureNotConverged("gauss_hermite: Newton iteration stalled at n = " +
                                         std::to_string(n));
        // The innermost root of an odd table is exactly 0 by parity; Newton
        // may stop a few ulps off it, on either side.
        if (i == n - 1 - i || (z < 0.0 && z > -1e-12)) z = 0.0;
        if (z < 0.0 || (i > 0 && z >= x[i - 1]))
            throw QuadratureNotConverged(
                "gauss_hermite: root ordering broke down at n = " + std::to_string(n));
        double p1, pp, log_scale;
        hermite_eval(n, z, p1, pp, log_scale);
        x[i] = z;
        // True weight 2/pp_true^2 with log|pp_true| = log|pp| + log_scale;
        // outer-node weights below double range flush to zero, which is
        // exact to double resolution for integrands bounded by 1.
        w[i] = (log_scale == 0.0)
                   ? 2.0 / (pp * pp)
                   : std::exp(std::log(2.0) - 2.0 * (std::log(std::abs(pp)) + log_scale));
        if (i != n - 1 - i) {
            x[n - 1 - i] = -z;
            w[n - 1 - i] = w[i];
        }
    }
}

/// Cached node tables (computing them is O(n^2) and they never change).
inline const std::pair<Vec, Vec>& gauss_hermite_cached(int n) {
    static std::mutex mutex;
    static std::map<int, std::pair<Vec, Vec>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(n);
    if (it == cache.end()) {
        std::pair<Vec, Vec> table;
        gauss_hermite(n, table.first, table.second);
        it = cache.emplace(n, std::move(table)).first;
    }
    return it->second;
}

/// The logistic factor 1/(1 + alpha e^{At+B}), evaluated as a sigmoid so
/// neither branch ever overflows.
inline double logistic_integrand(double log_alpha, double a, double b, double t) {
    const double z = log_alpha + a * t + b;
    if (z > 0.0) {
        const double e = std::exp(-z);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(z));
}

inline double logistic_gaussian_eval(double a, double b, double alpha, int n) {
    const auto& [x, w] = gauss_hermite_cached(n);
    const double log_alpha = std::log(alpha);
    const double sqrt2 = std::sqrt(2.0);
    KahanSum acc;
    // Substituting t = sqrt(2) u maps the standard normal weight onto the
    // Gauss-Hermite weight e^{-u^2}, up to the 1/sqrt(pi) factor below.
    for (int i = 0; i < n; ++i)
        acc.add(w[i] * logistic_integrand(log_alpha, a, b, sqrt2 * x[i]));
    return acc.value() / std::sqrt(std::acos(-1.0));
}

}  // namespace detail

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    int nodes = 0;
};

/// Integral of (2*pi)^{-1/2} (1 + alpha e^{At+B})^{-1} e^{-t^2/2} dt over the
/// real line by Gauss-Hermite quadrature, doubling the node count from 200
/// until two successive evaluations agree to 1e-10 absolute.
inline QuadratureResult logistic_gaussian_integral_full(double a, double b, double alpha) {
    if (!(alpha > 0.0) || !std::isfinite(a) || !std::isfinite(b) || !std::isfinite(alpha))
        throw DomainError("logistic_gaussian_integral: need finite A, B and alpha > 0");
    double prev = detail::logistic_gaussian_eval(a, b, alpha, 200);
    for (int n = 400; n <= 25600; n *= 2) {
        const double cur = detail::logistic_gaussian_eval(a, b, alpha, n);
        const double diff = std::abs(cur - prev);
        if (diff < 1e-10) return {cur, diff, n};
        prev = cur;
    }
    throw QuadratureNotConverged(
        "logistic_gaussian_integral: 1e-10 not reached by 25600 nodes");
}

inline double logistic_gaussian_integral(double a, double b, double alpha) {
    return logistic_gaussian_integral_full(a, b, alpha).value;
}

}  // namespace emgmm

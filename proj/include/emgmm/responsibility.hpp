#pragma once

#include <cmath>
#include <vector>

#include "emgmm/errors.hpp"
#include "emgmm/linalg.hpp"
#include "emgmm/model.hpp"

namespace emgmm {

namespace detail {

/// Posterior component probabilities in log space with max subtraction:
///   w_i = exp(log pi_i - ||x - mu_i||^2 / 2 - logsumexp(...)).
/// Stable for squared distances up to ~1e6; w doubles as the scratch buffer.
inline void responsibilities_logspace(const Mat& means, const Vec& log_weights,
                                      const double* x, double* w) {
    const std::size_t k = means.rows;
    const std::size_t d = means.cols;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < k; ++i) {
        w[i] = log_weights[i] - 0.5 * squared_distance(x, means.row(i), d);
        if (w[i] > best) best = w[i];
    }
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        w[i] = std::exp(w[i] - best);
        total += w[i];
    }
    for (std::size_t i = 0; i < k; ++i) w[i] /= total;
}

inline Vec log_weights_of(const Vec& weights) {
    Vec lw(weights.size());
    for (std::size_t i = 0; i < weights.size(); ++i) lw[i] = std::log(weights[i]);
    return lw;
}

}  // namespace detail

/// Responsibilities w_i(x, mu): posterior component probabilities
/// of x under candidate centers mu with known weights.
inline Vec responsibilities(const Vec& x, const MeansEstimate& estimate,
                            const Vec& weights) {
    if (x.size() != estimate.means.cols || weights.size() != estimate.means.rows)
        throw ShapeMismatch("responsibilities: x/estimate/weights shapes disagree");
    detail::require_finite(x, "x");
    detail::require_finite(estimate.means.a, "estimate");
    detail::require_finite(weights, "weights");
    Vec w(weights.size());
    detail::responsibilities_logspace(estimate.means, detail::log_weights_of(weights),
                                      x.data(), w.data());
    return w;
}

/// Gradient of w_i with respect to each center, one block per component:
///   d w_i / d mu_i = -w_i (1 - w_i) (mu_i - x)
///   d w_i / d mu_j =  w_i w_j (mu_j - x),  j != i.
/// Returns K blocks, each a vector in R^d.
inline std::vector<Vec> responsibility_gradient(const Vec& x,
                                                const MeansEstimate& estimate,
                                                const Vec& weights, int i) {
    const int k = estimate.k();
    const int d = estimate.d();
    if (i < 0 || i >= k) throw DomainError("responsibility_gradient: bad component index");
    const Vec w = responsibilities(x, estimate, weights);
    std::vector<Vec> blocks(k, Vec(d));
    for (int j = 0; j < k; ++j) {
        const double factor = (j == i) ? -w[i] * (1.0 - w[i]) : w[i] * w[j];
        const double* mu_j = estimate.means.row(j);
        for (int c = 0; c < d; ++c) blocks[j][c] = factor * (mu_j[c] - x[c]);
    }
    return blocks;
}

}  // namespace emgmm

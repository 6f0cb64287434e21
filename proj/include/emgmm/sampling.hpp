#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "emgmm/errors.hpp"
#include "emgmm/model.hpp"
#include "emgmm/rng.hpp"

namespace emgmm {

/// A flat, cache-friendly batch of labeled samples: point l occupies
/// points[l*d .. l*d+d) and labels[l] records its generative component.
struct SampleBlock {
    int d = 0;
    Vec points;                   // n * d doubles, row per sample
    std::vector<int> labels;      // n generative labels (diagnostics only)

    std::size_t size() const { return labels.size(); }
    double* point(std::size_t l) { return points.data() + l * static_cast<std::size_t>(d); }
    const double* point(std::size_t l) const {
        return points.data() + l * static_cast<std::size_t>(d);
    }
    LabeledSample at(std::size_t l) const {
        LabeledSample s;
        s.point.assign(point(l), point(l) + d);
        s.label = labels[l];
        return s;
    }
};

/// Draw n labeled samples from the mixture: label from the categorical
/// distribution over the weights, then the label's mean plus standard normal
/// noise per coordinate. Bit-deterministic in (model, n, seed).
inline SampleBlock sample(const MixtureModel& model, std::size_t n, std::uint64_t seed) {
    if (n < 1) throw DomainError("sample: n must be >= 1");
    SampleBlock block;
    block.d = model.d;
    block.points.resize(n * static_cast<std::size_t>(model.d));
    block.labels.resize(n);
    Rng rng(derive_stream(seed, "sample"));
    for (std::size_t l = 0; l < n; ++l) {
        const double u = rng.uniform();
        int label = 0;
        double cdf = model.weights[0];
        while (u >= cdf && label + 1 < model.k) cdf += model.weights[++label];
        block.labels[l] = label;
        const double* mu = model.means.row(label);
        double* x = block.point(l);
        for (int c = 0; c < model.d; ++c) x[c] = mu[c] + rng.normal();
    }
    return block;
}

namespace detail {

/// Uniform direction on the unit sphere in R^d (sign for d = 1).
inline void unit_sphere_direction(Rng& rng, double* u, int d) {
    double nrm;
    do {
        for (int c = 0; c < d; ++c) u[c] = rng.normal();
        nrm = norm(u, static_cast<std::size_t>(d));
    } while (nrm < 1e-12);
    for (int c = 0; c < d; ++c) u[c] /= nrm;
}

inline void check_region_lambda(double lambda) {
    if (!(lambda > 0.0 && lambda < 0.5))
        throw DomainError("initializer: lambda must lie in (0, 1/2)");
}

}  // namespace detail

/// Initializer of the Figure 1a protocol: mu_i = mu*_i + lambda * R_i * u_i
/// with u_i uniform on the unit sphere; lands exactly on the U_lambda
/// boundary. Each component draws from its own derived sub-stream.
inline MeansEstimate init_sphere(const MixtureModel& model, double lambda,
                                 std::uint64_t seed) {
    if (model.k <= 1) throw DomainError("init_sphere: requires K > 1");
    detail::check_region_lambda(lambda);
    const SeparationStats s = separation_stats(model);
    MeansEstimate est;
    est.means = Mat(model.k, model.d);
    Vec u(model.d);
    for (int i = 0; i < model.k; ++i) {
        Rng rng(derive_stream(seed, "init_sphere", static_cast<std::uint64_t>(i)));
        detail::unit_sphere_direction(rng, u.data(), model.d);
        const double radius = lambda * s.per_component[i];
        for (int c = 0; c < model.d; ++c)
            est.means(i, c) = model.means(i, c) + radius * u[c];
    }
    return est;
}

/// Initializer of the Figure 1b protocol: mu_1 and mu_2 placed on the line
/// joining mu*_1 and mu*_2 at distance lambda * R_i from their targets
/// (facing each other); remaining centers via the sphere initializer.
inline MeansEstimate init_line_pair(const MixtureModel& model, double lambda,
                                    std::uint64_t seed) {
    if (model.k < 2) throw DomainError("init_line_pair: requires K >= 2");
    detail::check_region_lambda(lambda);
    const SeparationStats s = separation_stats(model);
    MeansEstimate est;
    est.means = Mat(model.k, model.d);
    Vec u(model.d);
    for (int i = 2; i < model.k; ++i) {
        Rng rng(derive_stream(seed, "init_sphere", static_cast<std::uint64_t>(i)));
        detail::unit_sphere_direction(rng, u.data(), model.d);
        const double radius = lambda * s.per_component[i];
        for (int c = 0; c < model.d; ++c)
            est.means(i, c) = model.means(i, c) + radius * u[c];
    }
    const double r12 = s.pairwise(0, 1);
    for (int c = 0; c < model.d; ++c) {
        const double step = (model.means(1, c) - model.means(0, c)) / r12;
        est.means(0, c) = model.means(0, c) + lambda * s.per_component[0] * step;
        est.means(1, c) = model.means(1, c) - lambda * s.per_component[1] * step;
    }
    return est;
}

/// A random estimate drawn uniformly from the ball interior of U_lambda:
/// mu_i = mu*_i + lambda * R_i * r^(1/d) * u_i with r ~ U[0,1).
inline MeansEstimate random_estimate_in_region(const MixtureModel& model, double lambda,
                                               std::uint64_t seed) {
    if (model.k <= 1) throw DomainError("random_estimate_in_region: requires K > 1");
    detail::check_region_lambda(lambda);
    const SeparationStats s = separation_stats(model);
    MeansEstimate est;
    est.means = Mat(model.k, model.d);
    Vec u(model.d);
    for (int i = 0; i < model.k; ++i) {
        Rng rng(derive_stream(seed, "init_ball", static_cast<std::uint64_t>(i)));
        detail::unit_sphere_direction(rng, u.data(), model.d);
        const double frac = std::pow(rng.uniform(), 1.0 / model.d);
        const double radius = lambda * s.per_component[i] * frac;
        for (int c = 0; c < model.d; ++c)
            est.means(i, c) = model.means(i, c) + radius * u[c];
    }
    return est;
}

}  // namespace emgmm

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "emgmm/errors.hpp"
#include "emgmm/linalg.hpp"

namespace emgmm {

/// Ground-truth spherical GMM with identity covariance and known weights.
/// Immutable after construction; safe to share across threads.
struct MixtureModel {
    int d = 0;       // ambient dimension
    int k = 0;       // number of components
    Vec weights;     // K mixing weights, strictly positive, sum to 1
    Mat means;       // K x d true centers
};

/// Pairwise and per-component separation statistics of a model (plus the
/// weight ratio theta and the effective dimension d0 = min(d, 2K)).
struct SeparationStats {
    Mat pairwise;        // K x K matrix of ||mu*_i - mu*_j||
    Vec per_component;   // R_i = min_{j != i} R_ij (+inf when K = 1)
    double r_min = 0.0;
    double r_max = 0.0;
    double pi_min = 0.0;
    double pi_max = 0.0;
    double theta = 1.0;  // pi_max / pi_min
    int d0 = 0;          // min(d, 2K)
};

/// A candidate set of K center estimates, compared against a model by index.
struct MeansEstimate {
    Mat means;  // K x d

    int k() const { return static_cast<int>(means.rows); }
    int d() const { return static_cast<int>(means.cols); }
};

/// One draw from the mixture; the generative label is kept for diagnostics
/// only and never feeds an estimator.
struct LabeledSample {
    Vec point;
    int label = 0;
};

namespace detail {

inline void require_finite(const Vec& v, const char* what) {
    for (double x : v)
        if (!std::isfinite(x)) throw NonFiniteInput(std::string(what) + ": non-finite value");
}

inline void require_same_shape(const MeansEstimate& estimate, const MixtureModel& model) {
    if (estimate.k() != model.k || estimate.d() != model.d)
        throw ShapeMismatch("estimate is " + std::to_string(estimate.k()) + "x" +
                            std::to_string(estimate.d()) + ", model is " +
                            std::to_string(model.k) + "x" + std::to_string(model.d));
}

}  // namespace detail

/// Validate and assemble a mixture model from a K x d means matrix and a
/// K-vector of mixing weights.
inline MixtureModel build_model(Mat means, Vec weights) {
    const std::size_t k = means.rows;
    const std::size_t d = means.cols;
    if (k == 0 || d == 0) throw ShapeMismatch("build_model: empty means matrix");
    if (weights.size() != k)
        throw ShapeMismatch("build_model: " + std::to_string(k) + " means but " +
                            std::to_string(weights.size()) + " weights");
    detail::require_finite(means.a, "means");
    detail::require_finite(weights, "weights");
    double sum = 0.0;
    for (double w : weights) {
        if (w <= 0.0) throw NonPositiveWeight("build_model: weight " + std::to_string(w));
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw WeightsNotNormalized("build_model: weights sum to " + std::to_string(sum));
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j)
            if (squared_distance(means.row(i), means.row(j), d) == 0.0)
                throw DuplicateMeans("build_model: means " + std::to_string(i) + " and " +
                                     std::to_string(j) + " coincide");
    MixtureModel m;
    m.d = static_cast<int>(d);
    m.k = static_cast<int>(k);
    m.weights = std::move(weights);
    m.means = std::move(means);
    return m;
}

/// All separation statistics of a model. For K = 1 the separations are
/// reported as +infinity (no other component exists).
inline SeparationStats separation_stats(const MixtureModel& model) {
    const int k = model.k;
    const double inf = std::numeric_limits<double>::infinity();
    SeparationStats s;
    s.pairwise = Mat(k, k);
    s.per_component.assign(k, inf);
    s.pi_min = *std::min_element(model.weights.begin(), model.weights.end());
    s.pi_max = *std::max_element(model.weights.begin(), model.weights.end());
    s.theta = s.pi_max / s.pi_min;
    s.d0 = std::min(model.d, 2 * k);
    if (k == 1) {
        s.r_min = inf;
        s.r_max = inf;
        return s;
    }
    s.r_min = inf;
    s.r_max = 0.0;
    for (int i = 0; i < k; ++i) {
        for (int j = i + 1; j < k; ++j) {
            const double r = std::sqrt(
                squared_distance(model.means.row(i), model.means.row(j), model.d));
            s.pairwise(i, j) = r;
            s.pairwise(j, i) = r;
            s.per_component[i] = std::min(s.per_component[i], r);
            s.per_component[j] = std::min(s.per_component[j], r);
            s.r_min = std::min(s.r_min, r);
            s.r_max = std::max(s.r_max, r);
        }
    }
    return s;
}

/// Per-component errors ||mu_i - mu*_i|| (index matching, no permutation).
inline Vec per_component_errors(const MeansEstimate& estimate, const MixtureModel& model) {
    detail::require_same_shape(estimate, model);
    Vec e(model.k);
    for (int i = 0; i < model.k; ++i)
        e[i] = std::sqrt(squared_distance(estimate.means.row(i), model.means.row(i),
                                          model.d));
    return e;
}

/// Error measure E(mu) = max_i ||mu_i - mu*_i||.
inline double estimate_error(const MeansEstimate& estimate, const MixtureModel& model) {
    const Vec e = per_component_errors(estimate, model);
    return *std::max_element(e.begin(), e.end());
}

/// Membership in the closed region U_lambda:
/// ||mu_i - mu*_i|| <= lambda * R_i for every component.
/// The region is closed, and several constructions (sphere initializers,
/// adversarial pair displacements) land exactly on its boundary; a relative
/// slack of a few ulps keeps such points inside despite rounding in the
/// norm computation.
inline bool in_region(const MeansEstimate& estimate, const MixtureModel& model,
                      double lambda) {
    if (model.k <= 1) throw DomainError("in_region: requires K > 1");
    if (!(lambda > 0.0 && lambda < 0.5))
        throw DomainError("in_region: lambda must lie in (0, 1/2)");
    const SeparationStats s = separation_stats(model);
    const Vec e = per_component_errors(estimate, model);
    for (int i = 0; i < model.k; ++i)
        if (e[i] > lambda * s.per_component[i] * (1.0 + 1e-12)) return false;
    return true;
}

enum class CenterScheme { simplex, equispaced_1d, scaled_basis };

/// Standard center layouts used by the experiments:
///  - simplex: rows e_1..e_K (unit basis; all pairwise distances sqrt(2))
///  - equispaced_1d: 0, scale, 2*scale, ... on the line (d must be 1)
///  - scaled_basis: rows scale * e_i
inline Mat make_centers(CenterScheme scheme, int k, int d, double scale = 1.0) {
    if (k < 1 || d < 1) throw DomainError("make_centers: K and d must be positive");
    Mat m(k, d);
    switch (scheme) {
        case CenterScheme::simplex:
            if (d < k) throw DimensionTooSmall("make_centers: simplex needs d >= K");
            for (int i = 0; i < k; ++i) m(i, i) = 1.0;
            break;
        case CenterScheme::equispaced_1d:
            if (d != 1) throw DimensionTooSmall("make_centers: equispaced_1d needs d = 1");
            for (int i = 0; i < k; ++i) m(i, 0) = scale * static_cast<double>(i);
            break;
        case CenterScheme::scaled_basis:
            if (d < k) throw DimensionTooSmall("make_centers: scaled_basis needs d >= K");
            for (int i = 0; i < k; ++i) m(i, i) = scale;
            break;
    }
    return m;
}

/// K centers in R^d with every pairwise distance exactly r (regular simplex
/// geometry; requires K <= d+1). Construction: the scaled unit-basis simplex
/// (r/sqrt(2)) e_i in R^K is re-expressed in an orthonormal frame of its own
/// affine span via Gram-Schmidt, then zero-padded to d coordinates. Distances
/// are preserved to roundoff because the re-expression is an isometry.
inline Mat equidistant_centers(int k, int d, double r) {
    if (k < 1 || d < 1) throw DomainError("equidistant_centers: K and d must be positive");
    if (!(r > 0.0) || !std::isfinite(r))
        throw DomainError("equidistant_centers: separation must be positive and finite");
    if (d < k - 1)
        throw DimensionTooSmall("equidistant_centers: K centers need d >= K-1");
    Mat out(k, d);
    if (k == 1) return out;  // single center at the origin
    const double s = r / std::sqrt(2.0);
    // Difference vectors v_j = s (e_j - e_0), j = 1..k-1, in R^k.
    Mat basis(k - 1, k);  // orthonormal rows spanning the simplex's affine span
    for (int j = 1; j < k; ++j) {
        double* q = basis.row(j - 1);
        q[0] = -s;
        q[j] = s;
        // Modified Gram-Schmidt against the rows already settled.
        for (int p = 0; p < j - 1; ++p) {
            const double proj = dot(q, basis.row(p), k);
            for (int c = 0; c < k; ++c) q[c] -= proj * basis.row(p)[c];
        }
        const double len = norm(q, static_cast<std::size_t>(k));
        for (int c = 0; c < k; ++c) q[c] /= len;
    }
    // Coordinates of u_i - u_0 = s (e_i - e_0) in the orthonormal frame.
    Vec v(k);
    for (int i = 1; i < k; ++i) {
        std::fill(v.begin(), v.end(), 0.0);
        v[0] = -s;
        v[i] = s;
        for (int j = 0; j < k - 1; ++j) out(i, j) = dot(v.data(), basis.row(j), k);
    }
    return out;
}

}  // namespace emgmm

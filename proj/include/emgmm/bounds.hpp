#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "emgmm/errors.hpp"
#include "emgmm/linalg.hpp"
#include "emgmm/model.hpp"

namespace emgmm {

/// Knobs for the universal constants that the finite-sample guarantees leave
/// unspecified. Unspecified constants default to 1; constants with a
/// suggested workable value default to that value.
struct ConstantsConfig {
    double c_universal = 1.0;   ///< multiplier on both sample-size thresholds
    double c1_universal = 1.0;  ///< multiplier on both statistical-error terms
    double c_cross_covariance = 14.0;  ///< constant in the cross-covariance ceilings
    double c_cross_moment = 14.0;      ///< constant in the fourth-moment ceiling
};

namespace detail {

inline void check_lambda(double lambda, const char* who) {
    if (!(lambda > 0.0 && lambda < 0.5))
        throw DomainError(std::string(who) + ": lambda must lie in (0, 1/2)");
}

inline void check_theta(double theta, const char* who) {
    if (!(theta >= 1.0)) throw DomainError(std::string(who) + ": theta must be >= 1");
}

inline void check_constants(const ConstantsConfig& c) {
    if (!(c.c_universal > 0.0 && c.c1_universal > 0.0 && c.c_cross_covariance > 0.0 &&
          c.c_cross_moment > 0.0))
        throw DomainError("ConstantsConfig: all constants must be positive");
}

}  // namespace detail

/// Rate constant c(lambda) = (1/8)((1-2 lambda)/(1+2 lambda))^2 governing how
/// fast cross-component responsibilities decay with separation. Strictly
/// decreasing from 1/8 (lambda -> 0) to 0 (lambda -> 1/2).
inline double c_lambda(double lambda) {
    detail::check_lambda(lambda, "c_lambda");
    const double r = (1.0 - 2.0 * lambda) / (1.0 + 2.0 * lambda);
    return 0.125 * r * r;
}

/// Smallest R_min at which one population EM step is guaranteed to halve the
/// worst-case center error for every estimate in U_lambda. Evaluated in log
/// space so tiny pi_min cannot overflow the inner argument.
inline double min_separation_threshold(double lambda, int k, double theta, double pi_min) {
    detail::check_lambda(lambda, "min_separation_threshold");
    detail::check_theta(theta, "min_separation_threshold");
    if (k < 2) throw DomainError("min_separation_threshold: need k >= 2");
    if (!(pi_min > 0.0 && pi_min <= 1.0 / k + 1e-12))
        throw DomainError("min_separation_threshold: need 0 < pi_min <= 1/k");
    const double c = c_lambda(lambda);
    const double log_arg = std::log(32.0) + std::log(k - 1.0) +
                           0.5 * std::log(14.0 * (1.0 + theta)) - std::log(3.0) -
                           std::log(pi_min) - std::log(c);
    return std::sqrt(4.0 / c * log_arg);
}

/// Upper bound on the responsibility mass E_i[w_j] that the wrong component
/// j claims from samples of component i, valid for every estimate in
/// U_lambda: (1 + pi_j/pi_i) e^{-c(lambda) r_ij^2}.
inline double cross_responsibility_bound(double lambda, double pi_i, double pi_j,
                                         double r_ij) {
    detail::check_lambda(lambda, "cross_responsibility_bound");
    if (!(pi_i > 0.0 && pi_j > 0.0))
        throw DomainError("cross_responsibility_bound: weights must be positive");
    if (!(r_ij > 0.0)) throw DomainError("cross_responsibility_bound: need r_ij > 0");
    return (1.0 + pi_j / pi_i) * std::exp(-c_lambda(lambda) * r_ij * r_ij);
}

/// Separation precondition for cross_responsibility_bound:
/// R_min >= sqrt((2/(1-2 lambda)) log theta). Zero for balanced mixtures.
inline double cross_responsibility_min_separation(double lambda, double theta) {
    detail::check_lambda(lambda, "cross_responsibility_min_separation");
    detail::check_theta(theta, "cross_responsibility_min_separation");
    return std::sqrt(2.0 / (1.0 - 2.0 * lambda) * std::log(theta));
}

/// Lower bound on the self-responsibility mass E_i[w_i] under the same
/// precondition: 1 - (k-1)(1+theta) e^{-c(lambda) r_i^2}.
inline double self_responsibility_lower(double lambda, int k, double theta, double r_i) {
    detail::check_lambda(lambda, "self_responsibility_lower");
    detail::check_theta(theta, "self_responsibility_lower");
    if (k < 2) throw DomainError("self_responsibility_lower: need k >= 2");
    if (!(r_i > 0.0)) throw DomainError("self_responsibility_lower: need r_i > 0");
    return 1.0 - (k - 1.0) * (1.0 + theta) * std::exp(-c_lambda(lambda) * r_i * r_i);
}

/// Separation at which the EM denominator E_X[w_i] is guaranteed to stay at
/// or above (3/4) pi_i throughout U_lambda:
/// sqrt(c(lambda)^{-1} log(15 (k-1)(1+theta))).
inline double denominator_separation_threshold(double lambda, int k, double theta) {
    detail::check_lambda(lambda, "denominator_separation_threshold");
    detail::check_theta(theta, "denominator_separation_threshold");
    if (k < 2) throw DomainError("denominator_separation_threshold: need k >= 2");
    return std::sqrt(std::log(15.0 * (k - 1.0) * (1.0 + theta)) / c_lambda(lambda));
}

struct CrossCovarianceBounds {
    double same = 0.0;   ///< ceiling for the i == j form with w_i(1 - w_i)
    double cross = 0.0;  ///< ceiling for the i != j form with w_i w_j
};

/// Closed-form ceilings for cross_covariance_norm with constant c_cc
/// (suggested workable value 14):
///   same : sqrt(c_cc (k-1)(1+theta)) max(d0, r_i^2) e^{-c(lambda) r_i^2 / 2}
///   cross: sqrt(c_cc (1+theta)) max(d0, r^2) e^{-c(lambda) r^2 / 2},
/// where r = max(r_i, r_j).
inline CrossCovarianceBounds cross_covariance_bounds(double lambda, int k, double theta,
                                                     double d0, double r_i, double r_j,
                                                     double c_cc = 14.0) {
    detail::check_lambda(lambda, "cross_covariance_bounds");
    detail::check_theta(theta, "cross_covariance_bounds");
    if (k < 1) throw DomainError("cross_covariance_bounds: need k >= 1");
    if (!(d0 > 0.0 && r_i > 0.0 && r_j > 0.0 && c_cc > 0.0))
        throw DomainError("cross_covariance_bounds: need positive d0, r_i, r_j, c_cc");
    const double c = c_lambda(lambda);
    const double r = std::max(r_i, r_j);
    CrossCovarianceBounds out;
    out.same = std::sqrt(c_cc * (k - 1.0) * (1.0 + theta)) * std::max(d0, r_i * r_i) *
               std::exp(-0.5 * c * r_i * r_i);
    out.cross = std::sqrt(c_cc * (1.0 + theta)) * std::max(d0, r * r) *
                std::exp(-0.5 * c * r * r);
    return out;
}

/// Ceiling on the cross second moment E_source[||X - v_i||^2 ||X - mu_j||^2]
/// for any two estimates in U_lambda, with constant c0 (suggested workable
/// value 14). The scale term depends on how the source component relates to
/// the two indices:
///   source == i == j           : max(d^2, r_i^4)
///   source != i, source != j   : max(d^2, r_{i,source}^2 r_{j,source}^2)
///   source in {i, j}, i != j   : max(d^2, r_ij^4)
/// For K = 1 the separations are infinite and so is the ceiling (vacuous).
inline double cross_moment_bound(int d, const SeparationStats& stats, int source, int i,
                                 int j, double c0 = 14.0) {
    const int k = static_cast<int>(stats.per_component.size());
    if (d < 1) throw DomainError("cross_moment_bound: need d >= 1");
    if (!(c0 > 0.0)) throw DomainError("cross_moment_bound: need c0 > 0");
    if (source < 0 || source >= k || i < 0 || i >= k || j < 0 || j >= k)
        throw DomainError("cross_moment_bound: component index out of range");
    const double d2 = static_cast<double>(d) * static_cast<double>(d);
    double scale;
    if (i == j && source == i) {
        const double r = stats.per_component[i];
        scale = r * r * r * r;
    } else if (source != i && source != j) {
        const double ri = stats.pairwise(i, source);
        const double rj = stats.pairwise(j, source);
        scale = ri * ri * rj * rj;
    } else {  // source coincides with exactly one of two distinct indices
        const double r = stats.pairwise(i, j);
        scale = r * r * r * r;
    }
    return c0 * std::max(d2, scale);
}

struct SampleThresholds {
    double em = 0.0;    ///< required n / log n for the EM guarantee
    double grad = 0.0;  ///< required n / log n for the gradient EM guarantee
    double tilde_c_em = 0.0;
    double tilde_c_grad = 0.0;
};

/// Sample-size conditions of the finite-sample guarantees, as thresholds on
/// n / log n, together with the log-argument scale constants
///   tilde_c_em   = 100 k^2 r_max (sqrt(d) + 2 r_max)^2,
///   tilde_c_grad =  36 k^2 r_max (sqrt(d) + 2 r_max)^2.
/// EM:       (C k d log(tilde_c_em/delta)/pi_min)
///             * max(1, 1/((1-2 lambda)^2 lambda^2 pi_min r_min^2)).
/// Gradient: (C k d log(tilde_c_grad/delta)/pi_min^2)
///             * max_i [ max(lambda^2 r_i^2, (1-2 lambda)^{-2}) / (lambda^2 r_i^2) ].
inline SampleThresholds sample_size_thresholds(double lambda, double delta, int k, int d,
                                               double pi_min, double r_min, double r_max,
                                               const Vec& r_i,
                                               const ConstantsConfig& constants = {}) {
    detail::check_lambda(lambda, "sample_size_thresholds");
    detail::check_constants(constants);
    if (!(delta > 0.0 && delta < 1.0))
        throw DomainError("sample_size_thresholds: need 0 < delta < 1");
    if (k < 2 || d < 1) throw DomainError("sample_size_thresholds: need k >= 2, d >= 1");
    if (!(pi_min > 0.0 && pi_min <= 1.0))
        throw DomainError("sample_size_thresholds: need 0 < pi_min <= 1");
    if (!(r_min > 0.0 && r_max >= r_min))
        throw DomainError("sample_size_thresholds: need 0 < r_min <= r_max");
    if (static_cast<int>(r_i.size()) != k)
        throw ShapeMismatch("sample_size_thresholds: r_i must have one entry per component");
    const double shape = std::sqrt(static_cast<double>(d)) + 2.0 * r_max;
    SampleThresholds out;
    out.tilde_c_em = 100.0 * k * k * r_max * shape * shape;
    out.tilde_c_grad = 36.0 * k * k * r_max * shape * shape;
    const double one_minus = 1.0 - 2.0 * lambda;
    const double kd = static_cast<double>(k) * d;
    out.em = constants.c_universal * kd * std::log(out.tilde_c_em / delta) / pi_min *
             std::max(1.0, 1.0 / (one_minus * one_minus * lambda * lambda * pi_min *
                                  r_min * r_min));
    double worst = 0.0;
    for (double r : r_i) {
        if (!(r > 0.0)) throw DomainError("sample_size_thresholds: need r_i > 0");
        const double lr2 = lambda * lambda * r * r;
        worst = std::max(worst, std::max(lr2, 1.0 / (one_minus * one_minus)) / lr2);
    }
    out.grad = constants.c_universal * kd * std::log(out.tilde_c_grad / delta) /
               (pi_min * pi_min) * worst;
    return out;
}

/// Smallest integer n >= 2 with n / log n strictly above the threshold
/// (natural log). Doubling bracket plus bisection; n / log n is increasing
/// from n = 3 on, and n = 2 is handled directly.
inline long long minimal_n_for_ratio(double threshold) {
    if (!(threshold > 0.0) || !std::isfinite(threshold))
        throw DomainError("minimal_n_for_ratio: need a positive finite threshold");
    const auto ratio = [](long long n) {
        return static_cast<double>(n) / std::log(static_cast<double>(n));
    };
    if (ratio(2) > threshold) return 2;
    long long hi = 4;
    while (ratio(hi) <= threshold) {
        if (hi > (1LL << 61))
            throw DomainError("minimal_n_for_ratio: threshold too large to invert");
        hi *= 2;
    }
    long long lo = 2;
    while (hi - lo > 1) {
        const long long mid = lo + (hi - lo) / 2;
        if (ratio(mid) > threshold)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

struct StatisticalErrors {
    Vec em;    ///< per-component statistical error floor, EM
    Vec grad;  ///< per-component statistical error floor, gradient EM
};

/// Per-component statistical error floors of the finite-sample guarantees:
///   em_i   = (C1 / ((1-2 lambda) pi_i)) sqrt(k d log(tilde_c_em n/delta) / n)
///   grad_i = (C1 / pi_i) max(1/(1-2 lambda), lambda r_i)
///              * sqrt(k d log(tilde_c_grad n/delta) / n)
inline StatisticalErrors statistical_errors(double lambda, double delta, int k, int d,
                                            long long n, const Vec& weights, double r_max,
                                            const Vec& r_i,
                                            const ConstantsConfig& constants = {}) {
    detail::check_lambda(lambda, "statistical_errors");
    detail::check_constants(constants);
    if (!(delta > 0.0 && delta < 1.0))
        throw DomainError("statistical_errors: need 0 < delta < 1");
    if (k < 2 || d < 1) throw DomainError("statistical_errors: need k >= 2, d >= 1");
    if (n < 2) throw DomainError("statistical_errors: need n >= 2");
    if (!(r_max > 0.0)) throw DomainError("statistical_errors: need r_max > 0");
    if (static_cast<int>(weights.size()) != k || static_cast<int>(r_i.size()) != k)
        throw ShapeMismatch("statistical_errors: weights and r_i must have k entries");
    const double shape = std::sqrt(static_cast<double>(d)) + 2.0 * r_max;
    const double tilde_c_em = 100.0 * k * k * r_max * shape * shape;
    const double tilde_c_grad = 36.0 * k * k * r_max * shape * shape;
    const double kd = static_cast<double>(k) * d;
    const double nn = static_cast<double>(n);
    const double em_core = std::sqrt(kd * std::log(tilde_c_em * nn / delta) / nn);
    const double grad_core = std::sqrt(kd * std::log(tilde_c_grad * nn / delta) / nn);
    const double one_minus = 1.0 - 2.0 * lambda;
    StatisticalErrors out;
    out.em.resize(k);
    out.grad.resize(k);
    for (int i = 0; i < k; ++i) {
        if (!(weights[i] > 0.0))
            throw NonPositiveWeight("statistical_errors: weights must be positive");
        out.em[i] = constants.c1_universal / (one_minus * weights[i]) * em_core;
        out.grad[i] = constants.c1_universal / weights[i] *
                      std::max(1.0 / one_minus, lambda * r_i[i]) * grad_core;
    }
    return out;
}

/// Gradient EM contraction factor gamma = 1 - (3/8) s pi_min, defined for
/// step sizes in (0, 1/pi_min); always in (5/8, 1).
inline double contraction_gamma(double step_size, double pi_min) {
    if (!(pi_min > 0.0 && pi_min <= 1.0))
        throw DomainError("contraction_gamma: need 0 < pi_min <= 1");
    if (!(step_size > 0.0 && step_size < 1.0 / pi_min))
        throw DomainError("contraction_gamma: step size must lie in (0, 1/pi_min)");
    return 1.0 - 0.375 * step_size * pi_min;
}

struct SubgaussianBounds {
    double truth_centered = 0.0;     ///< ceiling for w_i(X)(X - mu*_i)
    double estimate_centered = 0.0;  ///< ceiling for w_i(X)(X - mu_i)
};

/// psi2-norm ceilings for the responsibility-weighted residuals:
/// 16/(1-2 lambda) when centered at the true mean, and
/// 24 max(1/(1-2 lambda), lambda r_i) when centered at the estimate.
inline SubgaussianBounds subgaussian_bounds(double lambda, double r_i) {
    detail::check_lambda(lambda, "subgaussian_bounds");
    if (!(r_i >= 0.0)) throw DomainError("subgaussian_bounds: need r_i >= 0");
    const double one_minus = 1.0 - 2.0 * lambda;
    return {16.0 / one_minus, 24.0 * std::max(1.0 / one_minus, lambda * r_i)};
}

/// Separation precondition for the psi2 ceilings:
/// sqrt(max((4/(1-2 lambda)) log(4 log(3/2) theta^2 (1-2 lambda)/c(lambda)),
///          (4/c(lambda)) log 2)).
inline double subgaussian_min_separation(double lambda, double theta) {
    detail::check_lambda(lambda, "subgaussian_min_separation");
    detail::check_theta(theta, "subgaussian_min_separation");
    const double c = c_lambda(lambda);
    const double one_minus = 1.0 - 2.0 * lambda;
    const double first =
        4.0 / one_minus * std::log(4.0 * std::log(1.5) * theta * theta * one_minus / c);
    const double second = 4.0 / c * std::log(2.0);
    return std::sqrt(std::max(first, second));
}

/// Every threshold, rate, and ceiling the convergence theory attaches to one
/// (model, lambda, n, delta, step size) instance, fully evaluated.
/// Single-component models have no separation requirements: the
/// separation-dependent fields stay at their zero defaults and all
/// predicates hold vacuously.
struct BoundReport {
    int k = 0;
    int d = 0;
    double d0 = 0.0;
    double lambda = 0.0;
    long long n = 0;
    double delta = 0.0;
    double step_size = 0.0;
    double r_min = 0.0;
    double r_max = 0.0;
    double theta = 1.0;
    double c_lambda = 0.0;
    double min_separation = 0.0;  ///< required R_min for the halving guarantee
    bool separation_ok = true;
    double sample_ratio_em = 0.0;    ///< required n / log n, EM
    double sample_ratio_grad = 0.0;  ///< required n / log n, gradient EM
    long long minimal_n_em = 0;
    long long minimal_n_grad = 0;
    bool sample_size_ok_em = true;
    bool sample_size_ok_grad = true;
    Vec statistical_error_em;
    Vec statistical_error_grad;
    double gamma = 0.0;
    Mat cross_responsibility;  ///< K x K ceilings on E_i[w_j], zero diagonal
    Vec self_responsibility;   ///< per-component floors on E_i[w_i]
    double denominator_separation = 0.0;
    Mat cross_covariance;  ///< K x K ceilings; diagonal holds the same-index form
    Vec subgauss_truth;
    Vec subgauss_estimate;
    double tilde_c_em = 0.0;
    double tilde_c_grad = 0.0;
};

inline BoundReport build_report(const MixtureModel& model, double lambda, long long n,
                                double delta, double step_size,
                                const ConstantsConfig& constants = {}) {
    detail::check_lambda(lambda, "build_report");
    detail::check_constants(constants);
    if (!(delta > 0.0 && delta < 1.0)) throw DomainError("build_report: need 0 < delta < 1");
    if (n < 2) throw DomainError("build_report: need n >= 2");
    const SeparationStats stats = separation_stats(model);
    BoundReport r;
    r.k = model.k;
    r.d = model.d;
    r.d0 = static_cast<double>(stats.d0);
    r.lambda = lambda;
    r.n = n;
    r.delta = delta;
    r.step_size = step_size;
    r.theta = stats.theta;
    r.c_lambda = c_lambda(lambda);
    r.cross_responsibility = Mat(model.k, model.k);
    r.self_responsibility.assign(model.k, 1.0);
    r.cross_covariance = Mat(model.k, model.k);
    r.subgauss_truth.assign(model.k, 16.0 / (1.0 - 2.0 * lambda));
    r.subgauss_estimate.assign(model.k, 0.0);
    r.statistical_error_em.assign(model.k, 0.0);
    r.statistical_error_grad.assign(model.k, 0.0);
    if (model.k == 1) return r;

    if (!(step_size > 0.0 && step_size < 1.0 / stats.pi_min))
        throw DomainError("build_report: step size must lie in (0, 1/pi_min)");
    r.r_min = stats.r_min;
    r.r_max = stats.r_max;
    r.min_separation =
        min_separation_threshold(lambda, model.k, stats.theta, stats.pi_min);
    r.separation_ok = stats.r_min >= r.min_separation;
    const SampleThresholds th =
        sample_size_thresholds(lambda, delta, model.k, model.d, stats.pi_min, stats.r_min,
                               stats.r_max, stats.per_component, constants);
    r.sample_ratio_em = th.em;
    r.sample_ratio_grad = th.grad;
    r.tilde_c_em = th.tilde_c_em;
    r.tilde_c_grad = th.tilde_c_grad;
    r.minimal_n_em = minimal_n_for_ratio(th.em);
    r.minimal_n_grad = minimal_n_for_ratio(th.grad);
    const double n_ratio = static_cast<double>(n) / std::log(static_cast<double>(n));
    r.sample_size_ok_em = n_ratio > th.em;
    r.sample_size_ok_grad = n_ratio > th.grad;
    const StatisticalErrors se =
        statistical_errors(lambda, delta, model.k, model.d, n, model.weights, stats.r_max,
                           stats.per_component, constants);
    r.statistical_error_em = se.em;
    r.statistical_error_grad = se.grad;
    r.gamma = contraction_gamma(step_size, stats.pi_min);
    for (int i = 0; i < model.k; ++i) {
        const double r_i = stats.per_component[i];
        r.self_responsibility[i] =
            self_responsibility_lower(lambda, model.k, stats.theta, r_i);
        r.subgauss_estimate[i] = subgaussian_bounds(lambda, r_i).estimate_centered;
        for (int j = 0; j < model.k; ++j) {
            if (i == j) {
                r.cross_covariance(i, j) =
                    cross_covariance_bounds(lambda, model.k, stats.theta, r.d0, r_i, r_i,
                                            constants.c_cross_covariance)
                        .same;
            } else {
                r.cross_responsibility(i, j) = cross_responsibility_bound(
                    lambda, model.weights[i], model.weights[j], stats.pairwise(i, j));
                r.cross_covariance(i, j) =
                    cross_covariance_bounds(lambda, model.k, stats.theta, r.d0, r_i,
                                            stats.per_component[j],
                                            constants.c_cross_covariance)
                        .cross;
            }
        }
    }
    r.denominator_separation =
        denominator_separation_threshold(lambda, model.k, stats.theta);
    return r;
}

}  // namespace emgmm

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "emgmm/errors.hpp"
#include "emgmm/linalg.hpp"
#include "emgmm/mc.hpp"
#include "emgmm/model.hpp"
#include "emgmm/responsibility.hpp"
#include "emgmm/rng.hpp"
#include "emgmm/sampling.hpp"

namespace emgmm {

/// Result of one Monte Carlo population update: new means plus a standard
/// error per component (L2-propagated across coordinates).
struct PopulationStep {
    MeansEstimate means;
    Vec std_error;  // per component
    long long n_used = 0;
    std::uint64_t seed = 0;
};

/// Which point anchors the left factor (X - anchor_i) of a cross-covariance
/// or cross moment: the current estimate mu_i or the true center mu*_i.
enum class AnchorChoice { estimate, truth };
enum class CenterChoice { truth, estimate };

/// Coefficients of the 1-D reduction of E_i[w_j]: along the line through
/// mu_i and mu_j the responsibility w_j collapses to the logistic form
/// 1/(1 + alpha e^{At+B}) in a scalar standard normal t. Holds the observed
/// A and B for an estimate against the extremal values over all estimates
/// with ||xi_i||, ||xi_j|| <= lambda R_ij: A* = (1+2lambda) R_ij and
/// B* = ((1-2lambda)/2) R_ij^2.
struct ABPair {
    double a = 0.0;
    double b = 0.0;
    double a_star = 0.0;
    double b_star = 0.0;
    double alpha = 1.0;  // pi_i / pi_j
};

namespace detail {

inline void check_population_inputs(const MixtureModel& model,
                                    const MeansEstimate& estimate) {
    require_same_shape(estimate, model);
    require_finite(estimate.means.a, "estimate");
}

}  // namespace detail

/// Monte Carlo population EM step: mu+_i = E[w_i X] / E[w_i], both
/// expectations on one shared stratified draw (common random numbers), with
/// per-component standard errors propagated by the delta method.
inline PopulationStep population_em_step(const MixtureModel& model,
                                         const MeansEstimate& estimate,
                                         const McConfig& mc) {
    detail::check_population_inputs(model, estimate);
    const int k = model.k;
    const int d = model.d;
    const Vec log_weights = detail::log_weights_of(model.weights);
    const std::size_t m = static_cast<std::size_t>(k) * (d + 1);
    Vec w(k);
    const auto table = detail::mixture_batches(
        model, mc, m, [&](const double* x, int, double* out) {
            detail::responsibilities_logspace(estimate.means, log_weights, x, w.data());
            for (int i = 0; i < k; ++i) {
                double* row = out + static_cast<std::size_t>(i) * (d + 1);
                for (int c = 0; c < d; ++c) row[c] = w[i] * x[c];
                row[d] = w[i];
            }
        });

    PopulationStep step;
    step.means.means = Mat(k, d);
    step.std_error.assign(k, 0.0);
    step.n_used = table.n_used;
    step.seed = mc.seed;
    for (int i = 0; i < k; ++i) {
        const std::size_t base = static_cast<std::size_t>(i) * (d + 1);
        const double den = table.value[base + d];
        const double den_se = table.std_error(base + d);
        // Negated form also rejects a denominator that underflowed to exactly
        // zero (where the batch spread is zero too) instead of emitting 0/0.
        if (!(den > 10.0 * den_se))
            throw DegenerateComponent(
                i, "population_em_step: E[w_" + std::to_string(i) +
                       "] indistinguishable from zero at this n_mc");
        double var_total = 0.0;
        for (int c = 0; c < d; ++c) {
            const double num = table.value[base + c];
            step.means.means(i, c) = num / den;
            // Delta method for the ratio N/D from batch-mean (co)variances.
            const double var_n = table.var_of_mean(base + c);
            const double var_d = table.var_of_mean(base + d);
            const double cov_nd = table.cov_of_mean(base + c, base + d);
            const double var_ratio = var_n / (den * den) +
                                     num * num * var_d / (den * den * den * den) -
                                     2.0 * num * cov_nd / (den * den * den);
            var_total += std::max(var_ratio, 0.0);
        }
        step.std_error[i] = std::sqrt(var_total);
    }
    return step;
}

/// Monte Carlo population gradient EM step:
/// mu+_i = mu_i + s * E[w_i (X - mu_i)].
inline PopulationStep population_gradient_em_step(const MixtureModel& model,
                                                  const MeansEstimate& estimate,
                                                  double step_size, const McConfig& mc) {
    detail::check_population_inputs(model, estimate);
    const SeparationStats stats = separation_stats(model);
    if (!(step_size > 0.0 && step_size < 1.0 / stats.pi_min))
        throw DomainError("population_gradient_em_step: s must lie in (0, 1/pi_min)");
    const int k = model.k;
    const int d = model.d;
    const Vec log_weights = detail::log_weights_of(model.weights);
    const std::size_t m = static_cast<std::size_t>(k) * d;
    Vec w(k);
    const auto table = detail::mixture_batches(
        model, mc, m, [&](const double* x, int, double* out) {
            detail::responsibilities_logspace(estimate.means, log_weights, x, w.data());
            for (int i = 0; i < k; ++i) {
                const double* mu = estimate.means.row(i);
                double* row = out + static_cast<std::size_t>(i) * d;
                for (int c = 0; c < d; ++c) row[c] = w[i] * (x[c] - mu[c]);
            }
        });

    PopulationStep step;
    step.means.means = Mat(k, d);
    step.std_error.assign(k, 0.0);
    step.n_used = table.n_used;
    step.seed = mc.seed;
    for (int i = 0; i < k; ++i) {
        double var_total = 0.0;
        for (int c = 0; c < d; ++c) {
            const std::size_t j = static_cast<std::size_t>(i) * d + c;
            step.means.means(i, c) = estimate.means(i, c) + step_size * table.value[j];
            var_total += table.var_of_mean(j);
        }
        step.std_error[i] = step_size * std::sqrt(var_total);
    }
    return step;
}

/// MC estimate of E_k[w_i(X, mu)]: the responsibility mass component i
/// claims from samples of component k.
inline McEstimate expected_responsibility(const MixtureModel& model,
                                          const MeansEstimate& estimate, int source,
                                          int target, const McConfig& mc) {
    detail::check_population_inputs(model, estimate);
    if (target < 0 || target >= model.k)
        throw DomainError("expected_responsibility: bad target index");
    const Vec log_weights = detail::log_weights_of(model.weights);
    Vec w(model.k);
    const auto table = detail::component_batches(
        model, source, mc, 1, [&](const double* x, double* out) {
            detail::responsibilities_logspace(estimate.means, log_weights, x, w.data());
            out[0] = w[target];
        });
    McEstimate est;
    est.value = {table.value[0]};
    est.std_error = {table.std_error(0)};
    est.n_used = table.n_used;
    est.seed = mc.seed;
    return est;
}

/// Observed and extremal (A, B) reduction coefficients for the pair (i, j),
/// with xi_i = mu*_i - mu_i and xi_j = mu*_j - mu_j:
///   A = ||mu*_i - xi_i - mu*_j + xi_j||,
///   B = ||mu*_i - mu*_j + xi_j||^2 / 2 - ||xi_i||^2 / 2.
inline ABPair ab_values(const MixtureModel& model, const MeansEstimate& estimate, int i,
                        int j, double lambda) {
    detail::check_population_inputs(model, estimate);
    if (i < 0 || i >= model.k || j < 0 || j >= model.k || i == j)
        throw DomainError("ab_values: need distinct component indices");
    if (!in_region(estimate, model, lambda))
        throw RegionViolation("ab_values: estimate outside U_lambda");
    const int d = model.d;
    const SeparationStats stats = separation_stats(model);
    const double r_ij = stats.pairwise(i, j);
    double a2 = 0.0, cross2 = 0.0, xi_i2 = 0.0;
    for (int c = 0; c < d; ++c) {
        const double xi_ic = model.means(i, c) - estimate.means(i, c);
        const double xi_jc = model.means(j, c) - estimate.means(j, c);
        const double diff = model.means(i, c) - model.means(j, c);
        const double ta = diff - xi_ic + xi_jc;  // = mu_i - mu_j coordinate-wise
        const double tb = diff + xi_jc;
        a2 += ta * ta;
        cross2 += tb * tb;
        xi_i2 += xi_ic * xi_ic;
    }
    ABPair ab;
    ab.a = std::sqrt(a2);
    ab.b = 0.5 * cross2 - 0.5 * xi_i2;
    ab.a_star = (1.0 + 2.0 * lambda) * r_ij;
    ab.b_star = 0.5 * (1.0 - 2.0 * lambda) * r_ij * r_ij;
    ab.alpha = model.weights[i] / model.weights[j];
    return ab;
}

/// The adversarial pair estimate that attains B = B* exactly: mu_i and mu_j
/// displaced toward each other by lambda * R_ij, every other center exact.
inline MeansEstimate adversarial_pair_estimate(const MixtureModel& model, int i, int j,
                                               double lambda) {
    if (i < 0 || i >= model.k || j < 0 || j >= model.k || i == j)
        throw DomainError("adversarial_pair_estimate: need distinct component indices");
    const SeparationStats stats = separation_stats(model);
    MeansEstimate est;
    est.means = model.means;
    for (int c = 0; c < model.d; ++c) {
        const double diff = model.means(j, c) - model.means(i, c);
        est.means(i, c) += lambda * diff;
        est.means(j, c) -= lambda * diff;
    }
    // Inside U_lambda only when R_ij matches both R_i and R_j; callers use
    // geometries (pairs, equilateral/simplex layouts) where that holds.
    (void)stats;
    return est;
}

/// Operator norm of the responsibility-weighted cross-covariance, by
/// stratified MC:
///   i != j:  || E[w_i w_j (X - v_i)(X - mu_j)^T] ||_op
///   i == j:  || E[w_i (1 - w_i)(X - v_i)(X - mu_i)^T] ||_op
/// where v_i is the estimate's or the truth's i-th center per anchor; std
/// error by 10-way batch means on the norm.
inline McEstimate cross_covariance_norm(const MixtureModel& model,
                                        const MeansEstimate& estimate, AnchorChoice anchor,
                                        int i, int j, const McConfig& mc) {
    detail::check_population_inputs(model, estimate);
    if (i < 0 || i >= model.k || j < 0 || j >= model.k)
        throw DomainError("cross_covariance_norm: bad component index");
    const int k = model.k;
    const int d = model.d;
    const Vec log_weights = detail::log_weights_of(model.weights);
    const double* v_i =
        (anchor == AnchorChoice::estimate) ? estimate.means.row(i) : model.means.row(i);
    const double* mu_j = estimate.means.row(j);
    const std::size_t m = static_cast<std::size_t>(d) * d;
    Vec w(k);
    const auto table = detail::mixture_batches(
        model, mc, m, [&](const double* x, int, double* out) {
            detail::responsibilities_logspace(estimate.means, log_weights, x, w.data());
            const double factor = (i == j) ? w[i] * (1.0 - w[i]) : w[i] * w[j];
            for (int r = 0; r < d; ++r) {
                const double left = factor * (x[r] - v_i[r]);
                for (int c = 0; c < d; ++c)
                    out[static_cast<std::size_t>(r) * d + c] = left * (x[c] - mu_j[c]);
            }
        });

    auto norm_of = [&](const double* entries) {
        Mat mat(d, d);
        std::copy(entries, entries + m, mat.a.begin());
        return operator_norm(mat);
    };
    Vec batch_norms(detail::kBatches);
    for (int b = 0; b < detail::kBatches; ++b)
        batch_norms[b] = norm_of(table.batch_value.data() + static_cast<std::size_t>(b) * m);
    double mean = 0.0;
    for (double bn : batch_norms) mean += bn;
    mean /= detail::kBatches;
    double var = 0.0;
    for (double bn : batch_norms) var += (bn - mean) * (bn - mean);
    var /= (detail::kBatches - 1);

    McEstimate est;
    est.value = {norm_of(table.value.data())};
    est.std_error = {std::sqrt(var / detail::kBatches)};
    est.n_used = table.n_used;
    est.seed = mc.seed;
    return est;
}

/// MC estimate of E_k[ ||X - v_i||^2 * ||X - mu_j||^2 ]: the squared
/// Frobenius / operator norm of the rank-1 matrix (X - v_i)(X - mu_j)^T in
/// expectation under component k.
inline McEstimate cross_moment(const MixtureModel& model, const MeansEstimate& estimate,
                               AnchorChoice anchor, int source, int i, int j,
                               const McConfig& mc) {
    detail::check_population_inputs(model, estimate);
    if (i < 0 || i >= model.k || j < 0 || j >= model.k)
        throw DomainError("cross_moment: bad component index");
    const int d = model.d;
    const double* v_i =
        (anchor == AnchorChoice::estimate) ? estimate.means.row(i) : model.means.row(i);
    const double* mu_j = estimate.means.row(j);
    const auto table = detail::component_batches(
        model, source, mc, 1, [&](const double* x, double* out) {
            out[0] = squared_distance(x, v_i, d) * squared_distance(x, mu_j, d);
        });
    McEstimate est;
    est.value = {table.value[0]};
    est.std_error = {table.std_error(0)};
    est.n_used = table.n_used;
    est.seed = mc.seed;
    return est;
}

/// MC estimate of the population EM denominators E_X[w_i(X, mu)] for all
/// components, with per-component standard errors. X ranges over the whole
/// mixture.
inline McEstimate mixture_responsibility(const MixtureModel& model,
                                         const MeansEstimate& estimate,
                                         const McConfig& mc) {
    detail::check_population_inputs(model, estimate);
    const int k = model.k;
    const Vec log_weights = detail::log_weights_of(model.weights);
    Vec w(k);
    const auto table = detail::mixture_batches(
        model, mc, static_cast<std::size_t>(k), [&](const double* x, int, double* out) {
            detail::responsibilities_logspace(estimate.means, log_weights, x, w.data());
            for (int i = 0; i < k; ++i) out[i] = w[i];
        });
    McEstimate est;
    est.value = table.value;
    est.std_error.resize(k);
    for (int i = 0; i < k; ++i) est.std_error[i] = table.std_error(i);
    est.n_used = table.n_used;
    est.seed = mc.seed;
    return est;
}

/// Per-component check of the EM denominator lower bound: true for
/// component i iff the MC estimate of E_X[w_i] plus 3 standard errors
/// reaches (3/4) pi_i.
inline std::vector<bool> denominator_lower_bound_check(const MixtureModel& model,
                                                       const MeansEstimate& estimate,
                                                       const McConfig& mc) {
    const McEstimate est = mixture_responsibility(model, estimate, mc);
    std::vector<bool> ok(model.k);
    for (int i = 0; i < model.k; ++i)
        ok[i] = est.value[i] + 3.0 * est.std_error[i] >= 0.75 * model.weights[i];
    return ok;
}

namespace detail {

/// Smallest t with average(exp((y/t)^2)) <= 2, where the average runs over
/// strata weighted by stratum_weight. Binary search to 1e-3 relative width;
/// non-finite averages at the upper bracket trigger widening (up to 10
/// doublings) before MomentExplosion.
class Psi2Search {
  public:
    Psi2Search(const Vec& y, const std::vector<std::pair<std::size_t, std::size_t>>& strata,
               const Vec& stratum_weight)
        : y_(y), strata_(strata), weight_(stratum_weight) {}

    double smallest_t() const {
        double y_max = 0.0, y_rms = 0.0;
        for (double v : y_) {
            y_max = std::max(y_max, std::abs(v));
            y_rms += v * v;
        }
        if (y_max == 0.0) return 0.0;
        y_rms = std::sqrt(y_rms / static_cast<double>(y_.size()));
        double hi = std::max(2.0 * y_rms, 1e-12);
        int nonfinite_widenings = 0;
        for (int guard = 0; guard < 200; ++guard) {
            const double e = moment(hi);
            if (!std::isfinite(e)) {
                if (++nonfinite_widenings > 10)
                    throw MomentExplosion(
                        "subgaussian_norm: exponential moment stayed non-finite after 10 "
                        "bracket doublings");
                hi *= 2.0;
                continue;
            }
            if (e <= 2.0) break;
            hi *= 2.0;
        }
        double lo = hi / 2.0;
        while (lo > 1e-30 && moment(lo) <= 2.0) {
            hi = lo;
            lo /= 2.0;
        }
        while (hi - lo > 1e-3 * hi) {
            const double mid = 0.5 * (lo + hi);
            if (moment(mid) <= 2.0)
                hi = mid;
            else
                lo = mid;
        }
        return hi;
    }

  private:
    double moment(double t) const {
        const double inv_t2 = 1.0 / (t * t);
        double total = 0.0;
        for (std::size_t s = 0; s < strata_.size(); ++s) {
            const auto [begin, count] = strata_[s];
            KahanSum acc;
            for (std::size_t l = begin; l < begin + count; ++l)
                acc.add(std::exp(y_[l] * y_[l] * inv_t2));
            total += weight_[s] * acc.value() / static_cast<double>(count);
        }
        return total;
    }

    const Vec& y_;
    const std::vector<std::pair<std::size_t, std::size_t>>& strata_;
    const Vec& weight_;
};

}  // namespace detail

/// psi2 norm of a batch of scalar draws (equal weights); the calibration
/// helper behind subgaussian_norm.
inline double scalar_psi2_norm(const Vec& draws) {
    if (draws.size() < 1000) throw DomainError("scalar_psi2_norm: need >= 1000 draws");
    std::vector<std::pair<std::size_t, std::size_t>> strata{{0, draws.size()}};
    Vec weight{1.0};
    return detail::Psi2Search(draws, strata, weight).smallest_t();
}

/// MC estimate of the sub-Gaussian norm of w_i(X, mu) (X - c_i) along
/// n_directions random unit vectors: per direction, binary-search the
/// smallest t with E[exp((w_i (X-c_i)^T v)^2 / t^2)] <= 2 and return the max
/// over directions. c_i is mu*_i (truth) or mu_i (estimate).
inline double subgaussian_norm(const MixtureModel& model, const MeansEstimate& estimate,
                               int i, CenterChoice center_choice, int n_directions,
                               const McConfig& mc) {
    detail::check_population_inputs(model, estimate);
    detail::validate_mc(mc);
    if (i < 0 || i >= model.k) throw DomainError("subgaussian_norm: bad component index");
    if (n_directions < 1) throw DomainError("subgaussian_norm: need >= 1 direction");
    const int k = model.k;
    const int d = model.d;
    const double* center =
        (center_choice == CenterChoice::truth) ? model.means.row(i) : estimate.means.row(i);
    const Vec log_weights = detail::log_weights_of(model.weights);

    // Materialize one stratified draw of (X - c_i, w_i) shared by all
    // directions and by every binary-search evaluation.
    std::vector<std::pair<std::size_t, std::size_t>> strata;
    Vec stratum_weight;
    std::size_t n_total = 0;
    std::vector<long long> counts(k);
    for (int comp = 0; comp < k; ++comp) {
        counts[comp] = std::max<long long>(1, std::llround(mc.n_mc * model.weights[comp]));
        strata.emplace_back(n_total, static_cast<std::size_t>(counts[comp]));
        stratum_weight.push_back(model.weights[comp]);
        n_total += static_cast<std::size_t>(counts[comp]);
    }
    Vec centered(n_total * static_cast<std::size_t>(d));
    Vec wi(n_total);
    Vec x(d), w(k);
    for (int comp = 0; comp < k; ++comp) {
        Rng rng(derive_stream(mc.seed, "mc_stratum", static_cast<std::uint64_t>(comp)));
        const double* mu = model.means.row(comp);
        const std::size_t begin = strata[comp].first;
        for (long long l = 0; l < counts[comp]; ++l) {
            for (int c = 0; c < d; ++c) x[c] = mu[c] + rng.normal();
            detail::responsibilities_logspace(estimate.means, log_weights, x.data(),
                                              w.data());
            const std::size_t row = begin + static_cast<std::size_t>(l);
            wi[row] = w[i];
            for (int c = 0; c < d; ++c)
                centered[row * static_cast<std::size_t>(d) + c] = x[c] - center[c];
        }
    }

    Rng dir_rng(derive_stream(mc.seed, "subg_dirs"));
    Vec v(d), y(n_total);
    double worst = 0.0;
    for (int dir = 0; dir < n_directions; ++dir) {
        detail::unit_sphere_direction(dir_rng, v.data(), d);
        for (std::size_t l = 0; l < n_total; ++l)
            y[l] = wi[l] * dot(centered.data() + l * static_cast<std::size_t>(d), v.data(),
                               static_cast<std::size_t>(d));
        worst = std::max(worst, detail::Psi2Search(y, strata, stratum_weight).smallest_t());
    }
    return worst;
}

}  // namespace emgmm

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "emgmm/errors.hpp"
#include "emgmm/model.hpp"
#include "emgmm/responsibility.hpp"
#include "emgmm/sampling.hpp"

namespace emgmm {

enum class Algorithm { em, gradient_em };

/// Configuration of a multi-step solver run. The seed is provenance only —
/// the full-batch updates themselves are deterministic.
struct SolverConfig {
    Algorithm algorithm = Algorithm::em;
    double step_size = 1.0;          // gradient_em only
    int max_iters = 1;
    std::uint64_t seed = 0;
    bool record_means = false;
    double early_stop_tol = 0.0;     // 0 disables; needs a reference model
    std::optional<double> region_lambda;  // record U_lambda membership flags
};

/// Per-iteration record of a run: errors include iteration 0, so their
/// length is iterations_run + 1 whenever a reference model was supplied.
struct EmTrajectory {
    std::vector<double> errors;
    std::vector<Vec> per_component_errors;
    std::vector<char> in_region_flags;
    std::vector<Mat> means_history;  // filled only when config.record_means
    MeansEstimate final;
    int iterations_run = 0;
    SolverConfig config;
};

namespace detail {

/// Accumulate per-component responsibility-weighted sums over the batch:
/// num[i] = sum_l w_i(x_l) x_l (d entries) and den[i] = sum_l w_i(x_l).
/// Kahan accumulation in sample order keeps results deterministic and
/// accurate for n ~ 5*10^5.
inline void weighted_sums(const SampleBlock& samples, const Mat& means,
                          const Vec& log_weights, std::vector<KahanSum>& num,
                          std::vector<KahanSum>& den) {
    const std::size_t k = means.rows;
    const std::size_t d = means.cols;
    num.assign(k * d, KahanSum{});
    den.assign(k, KahanSum{});
    Vec w(k);
    for (std::size_t l = 0; l < samples.size(); ++l) {
        const double* x = samples.point(l);
        responsibilities_logspace(means, log_weights, x, w.data());
        for (std::size_t i = 0; i < k; ++i) {
            den[i].add(w[i]);
            KahanSum* row = num.data() + i * d;
            for (std::size_t c = 0; c < d; ++c) row[c].add(w[i] * x[c]);
        }
    }
}

inline void check_solver_shapes(const SampleBlock& samples, const MeansEstimate& estimate,
                                const Vec& weights) {
    if (samples.size() < 1) throw DomainError("solver: empty sample batch");
    if (samples.d != estimate.d() || weights.size() != estimate.means.rows)
        throw ShapeMismatch("solver: sample/estimate/weights shapes disagree");
    require_finite(estimate.means.a, "estimate");
    require_finite(weights, "weights");
}

}  // namespace detail

/// One sample EM step: mu+_i = sum_l w_i(x_l) x_l / sum_l w_i(x_l).
inline MeansEstimate em_step(const SampleBlock& samples, const MeansEstimate& estimate,
                             const Vec& weights) {
    detail::check_solver_shapes(samples, estimate, weights);
    const std::size_t k = estimate.means.rows;
    const std::size_t d = estimate.means.cols;
    std::vector<KahanSum> num, den;
    detail::weighted_sums(samples, estimate.means, detail::log_weights_of(weights), num,
                          den);
    MeansEstimate next;
    next.means = Mat(k, d);
    for (std::size_t i = 0; i < k; ++i) {
        const double total = den[i].value();
        if (total < 1e-300)
            throw DegenerateComponent(static_cast<int>(i),
                                      "em_step: component " + std::to_string(i) +
                                          " received vanishing total responsibility");
        for (std::size_t c = 0; c < d; ++c) next.means(i, c) = num[i * d + c].value() / total;
    }
    return next;
}

/// One sample gradient EM step:
/// mu+_i = mu_i + s * (1/n) * sum_l w_i(x_l) (x_l - mu_i).
inline MeansEstimate gradient_em_step(const SampleBlock& samples,
                                      const MeansEstimate& estimate, const Vec& weights,
                                      double step_size) {
    if (!(step_size > 0.0) || !std::isfinite(step_size))
        throw DomainError("gradient_em_step: step size must be positive");
    detail::check_solver_shapes(samples, estimate, weights);
    const std::size_t k = estimate.means.rows;
    const std::size_t d = estimate.means.cols;
    const Vec log_weights = detail::log_weights_of(weights);
    std::vector<KahanSum> res(k * d);  // sum_l w_i (x_l - mu_i), per component
    Vec w(k);
    for (std::size_t l = 0; l < samples.size(); ++l) {
        const double* x = samples.point(l);
        detail::responsibilities_logspace(estimate.means, log_weights, x, w.data());
        for (std::size_t i = 0; i < k; ++i) {
            const double* mu = estimate.means.row(i);
            KahanSum* row = res.data() + i * d;
            for (std::size_t c = 0; c < d; ++c) row[c].add(w[i] * (x[c] - mu[c]));
        }
    }
    const double scale = step_size / static_cast<double>(samples.size());
    MeansEstimate next;
    next.means = Mat(k, d);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t c = 0; c < d; ++c)
            next.means(i, c) = estimate.means(i, c) + scale * res[i * d + c].value();
    return next;
}

/// Multi-step driver: applies the configured step up to max_iters times,
/// recording E(mu^t) against the reference model when one is provided.
/// Early stop (when enabled) triggers once successive errors differ by less
/// than early_stop_tol.
inline EmTrajectory run(const SampleBlock& samples, const MeansEstimate& init,
                        const Vec& weights, const SolverConfig& config,
                        const MixtureModel* reference = nullptr) {
    if (config.max_iters < 0) throw DomainError("run: max_iters must be >= 0");
    if (config.algorithm == Algorithm::gradient_em && reference != nullptr) {
        const SeparationStats s = separation_stats(*reference);
        if (!(config.step_size > 0.0 && config.step_size < 1.0 / s.pi_min))
            throw DomainError("run: gradient EM step size must lie in (0, 1/pi_min)");
    }
    EmTrajectory traj;
    traj.config = config;
    MeansEstimate current = init;

    auto record = [&](const MeansEstimate& est) {
        if (reference != nullptr) {
            Vec pce = per_component_errors(est, *reference);
            traj.errors.push_back(*std::max_element(pce.begin(), pce.end()));
            traj.per_component_errors.push_back(std::move(pce));
            if (config.region_lambda)
                traj.in_region_flags.push_back(
                    in_region(est, *reference, *config.region_lambda) ? 1 : 0);
        }
        if (config.record_means) traj.means_history.push_back(est.means);
    };

    record(current);
    for (int t = 0; t < config.max_iters; ++t) {
        try {
            current = (config.algorithm == Algorithm::em)
                          ? em_step(samples, current, weights)
                          : gradient_em_step(samples, current, weights, config.step_size);
        } catch (DegenerateComponent& e) {
            e.iteration = t;
            throw;
        }
        ++traj.iterations_run;
        record(current);
        if (config.early_stop_tol > 0.0 && reference != nullptr && traj.errors.size() >= 2) {
            const std::size_t m = traj.errors.size();
            if (std::abs(traj.errors[m - 1] - traj.errors[m - 2]) < config.early_stop_tol)
                break;
        }
    }
    traj.final = std::move(current);
    return traj;
}

}  // namespace emgmm

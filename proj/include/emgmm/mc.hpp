#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "emgmm/errors.hpp"
#include "emgmm/linalg.hpp"
#include "emgmm/model.hpp"
#include "emgmm/rng.hpp"

namespace emgmm {

/// Monte Carlo settings shared by every estimator. With stratify on (the
/// default), exactly round(n_mc * pi_k) samples are drawn per component,
/// which removes label-count variance from per-component expectations.
struct McConfig {
    long long n_mc = 1000000;
    std::uint64_t seed = 0;
    bool stratify = true;
};

/// A Monte Carlo expectation: value(s), standard error(s) from 10-way batch
/// means, and the provenance needed to reproduce it.
struct McEstimate {
    Vec value;
    Vec std_error;
    long long n_used = 0;
    std::uint64_t seed = 0;

    double value1() const { return value.at(0); }
    double se1() const { return std_error.at(0); }
};

namespace detail {

constexpr int kBatches = 10;

inline void validate_mc(const McConfig& mc) {
    if (mc.n_mc < 1000) throw DomainError("McConfig: n_mc must be >= 1000");
}

/// Batch-means table: the combined estimator evaluated on the full sample
/// and once per batch, from which variances/covariances of the mean follow.
struct BatchTable {
    std::size_t m = 0;
    Vec value;              // m entries: full-sample estimate
    Vec batch_value;        // kBatches x m entries
    long long n_used = 0;

    double batch(int b, std::size_t j) const { return batch_value[b * m + j]; }

    double mean_over_batches(std::size_t j) const {
        double s = 0.0;
        for (int b = 0; b < kBatches; ++b) s += batch(b, j);
        return s / kBatches;
    }

    /// Variance of the full-sample mean estimated from batch spread.
    double var_of_mean(std::size_t j) const { return cov_of_mean(j, j); }

    double cov_of_mean(std::size_t j1, std::size_t j2) const {
        const double m1 = mean_over_batches(j1);
        const double m2 = mean_over_batches(j2);
        double s = 0.0;
        for (int b = 0; b < kBatches; ++b) s += (batch(b, j1) - m1) * (batch(b, j2) - m2);
        return s / (kBatches - 1) / kBatches;
    }

    double std_error(std::size_t j) const { return std::sqrt(std::max(var_of_mean(j), 0.0)); }
};

/// Expectation over the mixture of an m-dimensional statistic
/// f(x, source_component, out). Stratified: per-component streams, batch b =
/// draw index mod 10 within each stratum, combined as sum_k pi_k * mean_k.
/// All m outputs share every draw (common random numbers by construction).
template <class F>
BatchTable mixture_batches(const MixtureModel& model, const McConfig& mc, std::size_t m,
                           F&& f) {
    validate_mc(mc);
    const int k = model.k;
    const int d = model.d;
    BatchTable table;
    table.m = m;
    table.value.assign(m, 0.0);
    table.batch_value.assign(static_cast<std::size_t>(kBatches) * m, 0.0);
    Vec x(d), out(m);

    if (mc.stratify) {
        std::vector<KahanSum> sums(static_cast<std::size_t>(kBatches) * k * m);
        std::vector<long long> counts(static_cast<std::size_t>(kBatches) * k, 0);
        for (int comp = 0; comp < k; ++comp) {
            const long long n_comp =
                std::max<long long>(1, std::llround(mc.n_mc * model.weights[comp]));
            Rng rng(derive_stream(mc.seed, "mc_stratum", static_cast<std::uint64_t>(comp)));
            const double* mu = model.means.row(comp);
            for (long long l = 0; l < n_comp; ++l) {
                for (int c = 0; c < d; ++c) x[c] = mu[c] + rng.normal();
                f(x.data(), comp, out.data());
                const int b = static_cast<int>(l % kBatches);
                KahanSum* row = sums.data() + (static_cast<std::size_t>(b) * k + comp) * m;
                for (std::size_t j = 0; j < m; ++j) row[j].add(out[j]);
                ++counts[static_cast<std::size_t>(b) * k + comp];
            }
            table.n_used += n_comp;
        }
        for (std::size_t j = 0; j < m; ++j) {
            for (int comp = 0; comp < k; ++comp) {
                double total = 0.0;
                long long n_comp = 0;
                for (int b = 0; b < kBatches; ++b) {
                    const auto idx = static_cast<std::size_t>(b) * k + comp;
                    total += sums[idx * m + j].value();
                    n_comp += counts[idx];
                }
                table.value[j] += model.weights[comp] * total / static_cast<double>(n_comp);
                for (int b = 0; b < kBatches; ++b) {
                    const auto idx = static_cast<std::size_t>(b) * k + comp;
                    table.batch_value[static_cast<std::size_t>(b) * m + j] +=
                        model.weights[comp] * sums[idx * m + j].value() /
                        static_cast<double>(counts[idx]);
                }
            }
        }
        return table;
    }

    // Plain mixture draws: labels from the categorical distribution.
    std::vector<KahanSum> sums(static_cast<std::size_t>(kBatches) * m);
    std::vector<long long> counts(kBatches, 0);
    Rng rng(derive_stream(mc.seed, "mc_plain"));
    for (long long l = 0; l < mc.n_mc; ++l) {
        const double u = rng.uniform();
        int label = 0;
        double cdf = model.weights[0];
        while (u >= cdf && label + 1 < k) cdf += model.weights[++label];
        const double* mu = model.means.row(label);
        for (int c = 0; c < d; ++c) x[c] = mu[c] + rng.normal();
        f(x.data(), label, out.data());
        const int b = static_cast<int>(l % kBatches);
        for (std::size_t j = 0; j < m; ++j) sums[static_cast<std::size_t>(b) * m + j].add(out[j]);
        ++counts[b];
    }
    table.n_used = mc.n_mc;
    for (std::size_t j = 0; j < m; ++j) {
        double total = 0.0;
        for (int b = 0; b < kBatches; ++b) {
            const double bs = sums[static_cast<std::size_t>(b) * m + j].value();
            total += bs;
            table.batch_value[static_cast<std::size_t>(b) * m + j] =
                bs / static_cast<double>(counts[b]);
        }
        table.value[j] = total / static_cast<double>(mc.n_mc);
    }
    return table;
}

/// Expectation over a single component N(mu*_k, I) of an m-dimensional
/// statistic f(x, out); plain mean with 10-way batch means.
template <class F>
BatchTable component_batches(const MixtureModel& model, int source, const McConfig& mc,
                             std::size_t m, F&& f) {
    validate_mc(mc);
    if (source < 0 || source >= model.k)
        throw DomainError("component expectation: bad component index");
    const int d = model.d;
    BatchTable table;
    table.m = m;
    table.value.assign(m, 0.0);
    table.batch_value.assign(static_cast<std::size_t>(kBatches) * m, 0.0);
    std::vector<KahanSum> sums(static_cast<std::size_t>(kBatches) * m);
    std::vector<long long> counts(kBatches, 0);
    Rng rng(derive_stream(mc.seed, "mc_component", static_cast<std::uint64_t>(source)));
    const double* mu = model.means.row(source);
    Vec x(d), out(m);
    for (long long l = 0; l < mc.n_mc; ++l) {
        for (int c = 0; c < d; ++c) x[c] = mu[c] + rng.normal();
        f(x.data(), out.data());
        const int b = static_cast<int>(l % kBatches);
        for (std::size_t j = 0; j < m; ++j) sums[static_cast<std::size_t>(b) * m + j].add(out[j]);
        ++counts[b];
    }
    table.n_used = mc.n_mc;
    for (std::size_t j = 0; j < m; ++j) {
        double total = 0.0;
        for (int b = 0; b < kBatches; ++b) {
            const double bs = sums[static_cast<std::size_t>(b) * m + j].value();
            total += bs;
            table.batch_value[static_cast<std::size_t>(b) * m + j] =
                bs / static_cast<double>(counts[b]);
        }
        table.value[j] = total / static_cast<double>(mc.n_mc);
    }
    return table;
}

}  // namespace detail

}  // namespace emgmm

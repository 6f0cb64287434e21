#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <vector>

#include "emgmm/bounds.hpp"
#include "emgmm/errors.hpp"
#include "emgmm/model.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using emgmm::Mat;
using emgmm::Vec;

namespace {

Mat make_mat(std::size_t rows, std::size_t cols, std::initializer_list<double> values) {
    Mat m(rows, cols);
    std::copy(values.begin(), values.end(), m.a.begin());
    return m;
}

}  // namespace

TEST_CASE("c_lambda: exact rational values, limits, monotonicity, domain") {
    REQUIRE_THAT(emgmm::c_lambda(1.0 / 16.0), WithinRel(49.0 / 648.0, 1e-15));
    REQUIRE_THAT(emgmm::c_lambda(0.25), WithinRel(1.0 / 72.0, 1e-15));

    REQUIRE_THAT(emgmm::c_lambda(1e-9), WithinRel(0.125, 1e-7));
    REQUIRE(emgmm::c_lambda(0.4999999) < 1e-12);

    double prev = emgmm::c_lambda(0.01);
    for (double lambda : {0.05, 0.1, 0.2, 0.3, 0.4, 0.49}) {
        const double cur = emgmm::c_lambda(lambda);
        REQUIRE(cur < prev);
        prev = cur;
    }

    REQUIRE_THROWS_AS(emgmm::c_lambda(0.0), emgmm::DomainError);
    REQUIRE_THROWS_AS(emgmm::c_lambda(0.5), emgmm::DomainError);
    REQUIRE_THROWS_AS(emgmm::c_lambda(-0.1), emgmm::DomainError);
}

TEST_CASE("separation thresholds: frozen 30-digit anchors") {
    REQUIRE_THAT(emgmm::min_separation_threshold(1.0 / 16.0, 5, 1.0, 0.2),
                 WithinRel(22.5478113234017622205, 1e-12));

    const double denom = emgmm::denominator_separation_threshold(0.25, 2, 1.0);
    REQUIRE_THAT(denom, WithinRel(15.6488405794063601940, 1e-12));
    REQUIRE_THAT(denom, WithinRel(std::sqrt(72.0 * std::log(30.0)), 1e-14));

    REQUIRE_THAT(emgmm::subgaussian_min_separation(0.25, 1.0),
                 WithinRel(14.1289202701856962921, 1e-12));
    REQUIRE_THAT(emgmm::subgaussian_min_separation(0.25, 1.0),
                 WithinRel(std::sqrt(288.0 * std::log(2.0)), 1e-14));

    // Balanced mixtures put no constraint on the cross-responsibility side.
    REQUIRE(emgmm::cross_responsibility_min_separation(0.25, 1.0) == 0.0);
    REQUIRE_THAT(emgmm::cross_responsibility_min_separation(0.25, 4.0),
                 WithinRel(std::sqrt(4.0 * std::log(4.0)), 1e-14));
}

TEST_CASE("responsibility ceilings and floors: closed forms") {
    // (1 + pi_j/pi_i) e^{-c r^2} with c(1/4) = 1/72 and r = 10.
    REQUIRE_THAT(emgmm::cross_responsibility_bound(0.25, 0.5, 0.5, 10.0),
                 WithinRel(0.498704417554592397637, 1e-13));
    REQUIRE_THAT(emgmm::cross_responsibility_bound(0.25, 0.2, 0.8, 10.0),
                 WithinRel(5.0 * std::exp(-100.0 / 72.0), 1e-13));

    REQUIRE_THAT(emgmm::self_responsibility_lower(0.25, 3, 2.0, 12.0),
                 WithinRel(1.0 - 6.0 * std::exp(-2.0), 1e-13));

    REQUIRE_THROWS_AS(emgmm::cross_responsibility_bound(0.25, 0.0, 0.5, 10.0),
                      emgmm::DomainError);
    REQUIRE_THROWS_AS(emgmm::cross_responsibility_bound(0.25, 0.5, 0.5, 0.0),
                      emgmm::DomainError);
    REQUIRE_THROWS_AS(emgmm::self_responsibility_lower(0.25, 1, 1.0, 10.0),
                      emgmm::DomainError);
}

TEST_CASE("cross_covariance_bounds: frozen anchors and shape of the formula") {
    const auto b = emgmm::cross_covariance_bounds(0.4, 3, 1.0, 6.0, 25.0, 25.0);
    REQUIRE_THAT(b.same, WithinRel(2887.58100664019648730, 1e-12));
    REQUIRE_THAT(b.cross, WithinRel(2041.82811102076005164, 1e-12));

    // The cross form uses the larger of the two separations.
    const auto asym = emgmm::cross_covariance_bounds(0.4, 3, 1.0, 6.0, 10.0, 25.0);
    REQUIRE(asym.cross == b.cross);

    // The dimension term takes over once d0 exceeds r^2.
    const auto dim = emgmm::cross_covariance_bounds(0.4, 3, 1.0, 700.0, 25.0, 25.0);
    REQUIRE_THAT(dim.cross, WithinRel(b.cross * 700.0 / 625.0, 1e-13));

    // Constant override scales the ceiling by sqrt(c_cc ratio).
    const auto scaled = emgmm::cross_covariance_bounds(0.4, 3, 1.0, 6.0, 25.0, 25.0, 56.0);
    REQUIRE_THAT(scaled.same, WithinRel(2.0 * b.same, 1e-13));

    REQUIRE_THROWS_AS(emgmm::cross_covariance_bounds(0.4, 0, 1.0, 6.0, 25.0, 25.0),
                      emgmm::DomainError);
    REQUIRE_THROWS_AS(emgmm::cross_covariance_bounds(0.4, 3, 1.0, 6.0, 0.0, 25.0),
                      emgmm::DomainError);
}

TEST_CASE("cross_moment_bound: all three index patterns plus the dimension floor") {
    const emgmm::MixtureModel model = emgmm::build_model(
        make_mat(3, 2, {0.0, 0.0, 10.0, 0.0, 0.0, 20.0}), {0.25, 0.25, 0.5});
    const emgmm::SeparationStats stats = emgmm::separation_stats(model);

    // source == i == j uses the per-component separation R_i.
    REQUIRE_THAT(emgmm::cross_moment_bound(2, stats, 1, 1, 1),
                 WithinRel(14.0 * 1e4, 1e-13));
    // source different from both indices pairs the two source distances.
    REQUIRE_THAT(emgmm::cross_moment_bound(2, stats, 0, 1, 2),
                 WithinRel(14.0 * 100.0 * 400.0, 1e-13));
    // source matching one of two distinct indices uses r_ij (here sqrt(500)).
    REQUIRE_THAT(emgmm::cross_moment_bound(2, stats, 1, 1, 2),
                 WithinRel(14.0 * 500.0 * 500.0, 1e-13));

    // A large ambient dimension floors every pattern at c0 d^2.
    const emgmm::MixtureModel tight = emgmm::build_model(
        make_mat(3, 2, {0.0, 0.0, 1.0, 0.0, 0.0, 2.0}), {0.25, 0.25, 0.5});
    const emgmm::SeparationStats tstats = emgmm::separation_stats(tight);
    for (auto [s, i, j] : {std::tuple{1, 1, 1}, {0, 1, 2}, {1, 1, 2}}) {
        CAPTURE(s, i, j);
        REQUIRE_THAT(emgmm::cross_moment_bound(30, tstats, s, i, j),
                     WithinRel(14.0 * 900.0, 1e-13));
    }

    REQUIRE_THAT(emgmm::cross_moment_bound(2, stats, 1, 1, 1, 2.0),
                 WithinRel(2.0 * 1e4, 1e-13));

    // Single-component models have infinite separations: the ceiling is
    // vacuously infinite.
    const emgmm::MixtureModel single =
        emgmm::build_model(make_mat(1, 5, {0.0, 0.0, 0.0, 0.0, 0.0}), {1.0});
    REQUIRE(std::isinf(
        emgmm::cross_moment_bound(5, emgmm::separation_stats(single), 0, 0, 0)));

    REQUIRE_THROWS_AS(emgmm::cross_moment_bound(0, stats, 0, 0, 0), emgmm::DomainError);
    REQUIRE_THROWS_AS(emgmm::cross_moment_bound(2, stats, 3, 0, 0), emgmm::DomainError);
    REQUIRE_THROWS_AS(emgmm::cross_moment_bound(2, stats, 0, -1, 0), emgmm::DomainError);
    REQUIRE_THROWS_AS(emgmm::cross_moment_bound(2, stats, 0, 0, 0, 0.0),
                      emgmm::DomainError);
}

TEST_CASE("contraction_gamma: value and step-size domain") {
    REQUIRE(emgmm::contraction_gamma(1.0, 1.0 / 3.0) == 0.875);
    REQUIRE_THAT(emgmm::contraction_gamma(2.0, 0.25), WithinRel(0.8125, 1e-15));

    // gamma always stays inside (5/8, 1).
    for (double pi_min : {0.05, 1.0 / 3.0, 0.5}) {
        for (double frac : {0.01, 0.5, 0.999}) {
            const double g = emgmm::contraction_gamma(frac / pi_min, pi_min);
            REQUIRE(g > 0.625);
            REQUIRE(g < 1.0);
        }
    }

    REQUIRE_THROWS_AS(emgmm::contraction_gamma(0.0, 1.0 / 3.0), emgmm::DomainError);
    REQUIRE_THROWS_AS(emgmm::contraction_gamma(3.0, 1.0 / 3.0), emgmm::DomainError);
    REQUIRE_THROWS_AS(emgmm::contraction_gamma(1.0, 0.0), emgmm::DomainError);
    REQUIRE_THROWS_AS(emgmm::contraction_gamma(1.0, 1.5), emgmm::DomainError);
}

TEST_CASE("subgaussian_bounds: closed forms and branch switch") {
    const auto small = emgmm::subgaussian_bounds(0.25, 4.0);
    REQUIRE_THAT(small.truth_centered, WithinRel(32.0, 1e-15));
    REQUIRE_THAT(small.estimate_centered, WithinRel(48.0, 1e-15));  // 24 * max(2, 1)

    const auto large = emgmm::subgaussian_bounds(0.25, 20.0);
    REQUIRE_THAT(large.estimate_centered, WithinRel(120.0, 1e-15));  // 24 * max(2, 5)

    REQUIRE(emgmm::subgaussian_bounds(0.25, 0.0).estimate_centered == 48.0);

    REQUIRE_THROWS_AS(emgmm::subgaussian_bounds(0.5, 4.0), emgmm::DomainError);
    REQUIRE_THROWS_AS(emgmm::subgaussian_bounds(0.25, -1.0), emgmm::DomainError);
}

TEST_CASE("minimal_n_for_ratio: frozen anchor and bracketing property") {
    REQUIRE(emgmm::minimal_n_for_ratio(1000.0) == 9119);
    REQUIRE(emgmm::minimal_n_for_ratio(0.5) == 2);

    const auto ratio = [](long long n) {
        return static_cast<double>(n) / std::log(static_cast<double>(n));
    };
    for (double t : {5.0, 17.3, 100.0, 1234.5, 1e6}) {
        CAPTURE(t);
        const long long n = emgmm::minimal_n_for_ratio(t);
        REQUIRE(ratio(n) > t);
        if (n > 3) REQUIRE(ratio(n - 1) <= t);
    }

    REQUIRE_THROWS_AS(emgmm::minimal_n_for_ratio(0.0), emgmm::DomainError);
    REQUIRE_THROWS_AS(emgmm::minimal_n_for_ratio(std::numeric_limits<double>::infinity()),
                      emgmm::DomainError);
}

TEST_CASE("threshold ordering: the halving threshold is the most demanding") {
    for (double lambda : {0.1, 0.25, 0.4}) {
        for (int k : {2, 3, 8}) {
            for (double theta : {1.0, 2.5, 10.0}) {
                CAPTURE(lambda, k, theta);
                // Feasible weight floor: one heavy component, k-1 light ones.
                const double pi_min = 1.0 / (k - 1.0 + theta);
                const double halve =
                    emgmm::min_separation_threshold(lambda, k, theta, pi_min);
                const double denom =
                    emgmm::denominator_separation_threshold(lambda, k, theta);
                const double cross =
                    emgmm::cross_responsibility_min_separation(lambda, theta);
                REQUIRE(halve >= denom);
                REQUIRE(denom >= cross);
            }
        }
    }
}

TEST_CASE("threshold monotonicity in lambda, theta, k, and pi_min") {
    // Tighter regions (lambda toward 1/2) demand more separation.
    double prev = emgmm::min_separation_threshold(0.05, 3, 2.0, 0.2);
    for (double lambda : {0.15, 0.3, 0.45}) {
        const double cur = emgmm::min_separation_threshold(lambda, 3, 2.0, 0.2);
        REQUIRE(cur > prev);
        prev = cur;
    }
    // More imbalance and more components both raise every threshold.
    REQUIRE(emgmm::min_separation_threshold(0.25, 3, 5.0, 0.1) >
            emgmm::min_separation_threshold(0.25, 3, 2.0, 0.1));
    REQUIRE(emgmm::min_separation_threshold(0.25, 6, 2.0, 0.1) >
            emgmm::min_separation_threshold(0.25, 3, 2.0, 0.1));
    REQUIRE(emgmm::min_separation_threshold(0.25, 3, 2.0, 0.05) >
            emgmm::min_separation_threshold(0.25, 3, 2.0, 0.2));
    REQUIRE(emgmm::denominator_separation_threshold(0.25, 3, 5.0) >
            emgmm::denominator_separation_threshold(0.25, 3, 2.0));
    REQUIRE(emgmm::denominator_separation_threshold(0.25, 6, 2.0) >
            emgmm::denominator_separation_threshold(0.25, 3, 2.0));
    REQUIRE(emgmm::subgaussian_min_separation(0.1, 100.0) >
            emgmm::subgaussian_min_separation(0.1, 1.0));

    REQUIRE_THROWS_AS(emgmm::min_separation_threshold(0.25, 1, 1.0, 0.9),
                      emgmm::DomainError);
    REQUIRE_THROWS_AS(emgmm::min_separation_threshold(0.25, 3, 0.5, 0.2),
                      emgmm::DomainError);
    REQUIRE_THROWS_AS(emgmm::min_separation_threshold(0.25, 3, 2.0, 0.5),
                      emgmm::DomainError);
}

TEST_CASE("sample_size_thresholds: inline recomputation and monotonicity") {
    const double lambda = 0.3, delta = 0.05;
    const int k = 3, d = 4;
    const double pi_min = 0.2, r_min = 12.0, r_max = 20.0;
    const Vec r_i{12.0, 14.0, 20.0};

    const auto th =
        emgmm::sample_size_thresholds(lambda, delta, k, d, pi_min, r_min, r_max, r_i);

    const double shape = std::sqrt(4.0) + 2.0 * r_max;
    const double tilde_em = 100.0 * 9.0 * r_max * shape * shape;
    const double tilde_grad = 36.0 * 9.0 * r_max * shape * shape;
    REQUIRE_THAT(th.tilde_c_em, WithinRel(tilde_em, 1e-13));
    REQUIRE_THAT(th.tilde_c_grad, WithinRel(tilde_grad, 1e-13));

    const double one_minus = 1.0 - 2.0 * lambda;
    const double em_want =
        12.0 * std::log(tilde_em / delta) / pi_min *
        std::max(1.0,
                 1.0 / (one_minus * one_minus * lambda * lambda * pi_min * r_min * r_min));
    REQUIRE_THAT(th.em, WithinRel(em_want, 1e-12));

    // Every r_i here has lambda^2 r^2 above (1-2 lambda)^{-2}: the gradient
    // max reduces to 1.
    const double grad_want = 12.0 * std::log(tilde_grad / delta) / (pi_min * pi_min);
    REQUIRE_THAT(th.grad, WithinRel(grad_want, 1e-12));

    // A short separation flips the gradient max onto its other branch.
    const auto th_small = emgmm::sample_size_thresholds(lambda, delta, k, d, pi_min, r_min,
                                                        r_max, {3.0, 14.0, 20.0});
    const double lr2 = lambda * lambda * 9.0;
    REQUIRE_THAT(th_small.grad,
                 WithinRel(grad_want * (1.0 / (one_minus * one_minus)) / lr2, 1e-12));

    // Harder instances need more samples.
    const auto th_tight_delta =
        emgmm::sample_size_thresholds(lambda, 0.001, k, d, pi_min, r_min, r_max, r_i);
    REQUIRE(th_tight_delta.em > th.em);
    REQUIRE(th_tight_delta.grad > th.grad);
    const auto th_small_pi =
        emgmm::sample_size_thresholds(lambda, delta, k, d, 0.05, r_min, r_max, r_i);
    REQUIRE(th_small_pi.em > th.em);
    REQUIRE(th_small_pi.grad > th.grad);

    const auto scaled = emgmm::sample_size_thresholds(lambda, delta, k, d, pi_min, r_min,
                                                      r_max, r_i, {2.0, 1.0, 14.0, 14.0});
    REQUIRE_THAT(scaled.em, WithinRel(2.0 * th.em, 1e-13));

    REQUIRE_THROWS_AS(emgmm::sample_size_thresholds(lambda, 0.0, k, d, pi_min, r_min,
                                                    r_max, r_i),
                      emgmm::DomainError);
    REQUIRE_THROWS_AS(emgmm::sample_size_thresholds(lambda, delta, 1, d, pi_min, r_min,
                                                    r_max, {12.0}),
                      emgmm::DomainError);
    REQUIRE_THROWS_AS(emgmm::sample_size_thresholds(lambda, delta, k, d, pi_min, r_min,
                                                    r_max, {12.0, 14.0}),
                      emgmm::ShapeMismatch);
    REQUIRE_THROWS_AS(emgmm::sample_size_thresholds(lambda, delta, k, d, pi_min, r_min,
                                                    r_max, {12.0, -1.0, 20.0}),
                      emgmm::DomainError);
}

TEST_CASE("statistical_errors: inline recomputation and monotonicity") {
    const double lambda = 0.25, delta = 0.1;
    const int k = 3, d = 4;
    const long long n = 100000;
    const Vec weights{0.2, 0.3, 0.5};
    const double r_max = 20.0;
    const Vec r_i{12.0, 14.0, 20.0};

    const auto se = emgmm::statistical_errors(lambda, delta, k, d, n, weights, r_max, r_i);
    REQUIRE(se.em.size() == 3);
    REQUIRE(se.grad.size() == 3);

    const double shape = std::sqrt(4.0) + 2.0 * r_max;
    const double tilde_em = 100.0 * 9.0 * r_max * shape * shape;
    const double tilde_grad = 36.0 * 9.0 * r_max * shape * shape;
    const double nn = static_cast<double>(n);
    const double em_core = std::sqrt(12.0 * std::log(tilde_em * nn / delta) / nn);
    const double grad_core = std::sqrt(12.0 * std::log(tilde_grad * nn / delta) / nn);
    for (int i = 0; i < 3; ++i) {
        CAPTURE(i);
        REQUIRE_THAT(se.em[i], WithinRel(em_core / (0.5 * weights[i]), 1e-12));
        const double factor = std::max(2.0, 0.25 * r_i[i]);
        REQUIRE_THAT(se.grad[i], WithinRel(grad_core * factor / weights[i], 1e-12));
    }

    // Heavier components and larger batches are easier.
    REQUIRE(se.em[0] > se.em[1]);
    REQUIRE(se.em[1] > se.em[2]);
    const auto se_big =
        emgmm::statistical_errors(lambda, delta, k, d, 100 * n, weights, r_max, r_i);
    for (int i = 0; i < 3; ++i) {
        REQUIRE(se_big.em[i] < se.em[i]);
        REQUIRE(se_big.grad[i] < se.grad[i]);
    }
    const auto se_tight =
        emgmm::statistical_errors(lambda, 0.001, k, d, n, weights, r_max, r_i);
    REQUIRE(se_tight.em[0] > se.em[0]);

    REQUIRE_THROWS_AS(emgmm::statistical_errors(lambda, delta, k, d, 1, weights, r_max,
                                                r_i),
                      emgmm::DomainError);
    REQUIRE_THROWS_AS(emgmm::statistical_errors(lambda, delta, k, d, n, {0.5, 0.5}, r_max,
                                                r_i),
                      emgmm::ShapeMismatch);
    REQUIRE_THROWS_AS(emgmm::statistical_errors(lambda, delta, k, d, n,
                                                {0.2, -0.3, 0.5}, r_max, r_i),
                      emgmm::NonPositiveWeight);
}

TEST_CASE("build_report: every field agrees with the component functions") {
    const emgmm::MixtureModel model = emgmm::build_model(
        make_mat(3, 2, {0.0, 0.0, 10.0, 0.0, 0.0, 20.0}), {0.25, 0.25, 0.5});
    const emgmm::SeparationStats stats = emgmm::separation_stats(model);
    const double lambda = 0.3, delta = 0.05, step = 1.2;
    const long long n = 50000;

    const emgmm::BoundReport r = emgmm::build_report(model, lambda, n, delta, step);

    REQUIRE(r.k == 3);
    REQUIRE(r.d == 2);
    REQUIRE(r.d0 == 2.0);
    REQUIRE(r.n == n);
    REQUIRE(r.step_size == step);
    REQUIRE(r.theta == 2.0);
    REQUIRE(r.r_min == 10.0);
    REQUIRE_THAT(r.r_max, WithinRel(std::sqrt(500.0), 1e-15));
    REQUIRE(r.c_lambda == emgmm::c_lambda(lambda));
    REQUIRE(r.min_separation ==
            emgmm::min_separation_threshold(lambda, 3, 2.0, 0.25));
    REQUIRE(r.separation_ok == (stats.r_min >= r.min_separation));
    REQUIRE(r.gamma == emgmm::contraction_gamma(step, 0.25));
    REQUIRE(r.denominator_separation ==
            emgmm::denominator_separation_threshold(lambda, 3, 2.0));

    const auto th = emgmm::sample_size_thresholds(lambda, delta, 3, 2, 0.25, stats.r_min,
                                                  stats.r_max, stats.per_component);
    REQUIRE(r.sample_ratio_em == th.em);
    REQUIRE(r.sample_ratio_grad == th.grad);
    REQUIRE(r.tilde_c_em == th.tilde_c_em);
    REQUIRE(r.tilde_c_grad == th.tilde_c_grad);
    REQUIRE(r.minimal_n_em == emgmm::minimal_n_for_ratio(th.em));
    REQUIRE(r.minimal_n_grad == emgmm::minimal_n_for_ratio(th.grad));
    const double n_ratio = static_cast<double>(n) / std::log(static_cast<double>(n));
    REQUIRE(r.sample_size_ok_em == (n_ratio > th.em));
    REQUIRE(r.sample_size_ok_grad == (n_ratio > th.grad));

    const auto se = emgmm::statistical_errors(lambda, delta, 3, 2, n, model.weights,
                                              stats.r_max, stats.per_component);
    REQUIRE(r.statistical_error_em == se.em);
    REQUIRE(r.statistical_error_grad == se.grad);

    for (int i = 0; i < 3; ++i) {
        const double r_i = stats.per_component[i];
        REQUIRE(r.self_responsibility[i] ==
                emgmm::self_responsibility_lower(lambda, 3, 2.0, r_i));
        REQUIRE(r.subgauss_truth[i] == 16.0 / (1.0 - 2.0 * lambda));
        REQUIRE(r.subgauss_estimate[i] ==
                emgmm::subgaussian_bounds(lambda, r_i).estimate_centered);
        REQUIRE(r.cross_covariance(i, i) ==
                emgmm::cross_covariance_bounds(lambda, 3, 2.0, 2.0, r_i, r_i).same);
        REQUIRE(r.cross_responsibility(i, i) == 0.0);
        for (int j = 0; j < 3; ++j) {
            if (i == j) continue;
            REQUIRE(r.cross_responsibility(i, j) ==
                    emgmm::cross_responsibility_bound(lambda, model.weights[i],
                                                      model.weights[j],
                                                      stats.pairwise(i, j)));
            REQUIRE(r.cross_covariance(i, j) ==
                    emgmm::cross_covariance_bounds(lambda, 3, 2.0, 2.0, r_i,
                                                   stats.per_component[j])
                        .cross);
        }
    }
}

TEST_CASE("build_report: single component is vacuous, inputs validated") {
    const emgmm::MixtureModel single =
        emgmm::build_model(make_mat(1, 4, {1.0, 2.0, 3.0, 4.0}), {1.0});
    const emgmm::BoundReport r = emgmm::build_report(single, 0.25, 1000, 0.05, 99.0);
    REQUIRE(r.k == 1);
    REQUIRE(r.min_separation == 0.0);
    REQUIRE(r.separation_ok);
    REQUIRE(r.sample_size_ok_em);
    REQUIRE(r.sample_size_ok_grad);
    REQUIRE(r.r_min == 0.0);
    REQUIRE(r.gamma == 0.0);
    REQUIRE(r.cross_responsibility.rows == 1);
    REQUIRE(r.cross_responsibility(0, 0) == 0.0);
    REQUIRE(r.self_responsibility == Vec{1.0});
    REQUIRE(r.subgauss_truth == Vec{32.0});
    REQUIRE(r.subgauss_estimate == Vec{0.0});
    REQUIRE(r.statistical_error_em == Vec{0.0});

    const emgmm::MixtureModel pair =
        emgmm::build_model(make_mat(2, 1, {0.0, 10.0}), {0.5, 0.5});
    REQUIRE_THROWS_AS(emgmm::build_report(pair, 0.5, 1000, 0.05, 1.0),
                      emgmm::DomainError);
    REQUIRE_THROWS_AS(emgmm::build_report(pair, 0.25, 1, 0.05, 1.0), emgmm::DomainError);
    REQUIRE_THROWS_AS(emgmm::build_report(pair, 0.25, 1000, 1.5, 1.0),
                      emgmm::DomainError);
    REQUIRE_THROWS_AS(emgmm::build_report(pair, 0.25, 1000, 0.05, 2.0),
                      emgmm::DomainError);
}

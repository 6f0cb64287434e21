#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "emgmm/errors.hpp"
#include "emgmm/model.hpp"
#include "emgmm/sampling.hpp"
#include "emgmm/solver.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using emgmm::Algorithm;
using emgmm::Mat;
using emgmm::MeansEstimate;
using emgmm::MixtureModel;
using emgmm::SampleBlock;
using emgmm::SolverConfig;
using emgmm::Vec;

namespace {

Mat make_mat(std::size_t rows, std::size_t cols, std::initializer_list<double> values) {
    Mat m(rows, cols);
    std::copy(values.begin(), values.end(), m.a.begin());
    return m;
}

MixtureModel oracle_model() {
    return emgmm::build_model(make_mat(3, 2, {0.0, 0.0, 4.0, 1.0, -2.0, 3.0}),
                              {0.3, 0.45, 0.25});
}

MeansEstimate oracle_estimate() {
    MeansEstimate e;
    e.means = make_mat(3, 2, {0.3, -0.2, 3.9, 1.4, -1.8, 3.1});
    return e;
}

/// Textbook responsibilities in plain double arithmetic: w_i proportional to
/// pi_i exp(-||x - mu_i||^2 / 2). Adequate to ~1e-14 when all centers sit
/// within a few units of the data, which the fixtures here guarantee.
Vec oracle_responsibilities(const Mat& means, const Vec& weights, const double* x) {
    const std::size_t k = means.rows;
    Vec w(k);
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        w[i] = weights[i] *
               std::exp(-0.5 * emgmm::squared_distance(x, means.row(i), means.cols));
        total += w[i];
    }
    for (std::size_t i = 0; i < k; ++i) w[i] /= total;
    return w;
}

}  // namespace

TEST_CASE("em_step: matches a brute-force weighted-average oracle") {
    const MixtureModel model = oracle_model();
    const SampleBlock samples = emgmm::sample(model, 50, 7);
    const MeansEstimate estimate = oracle_estimate();

    const MeansEstimate next = emgmm::em_step(samples, estimate, model.weights);

    Mat num(3, 2);
    Vec den(3, 0.0);
    for (std::size_t l = 0; l < samples.size(); ++l) {
        const double* x = samples.point(l);
        const Vec w = oracle_responsibilities(estimate.means, model.weights, x);
        for (std::size_t i = 0; i < 3; ++i) {
            den[i] += w[i];
            for (std::size_t c = 0; c < 2; ++c) num(i, c) += w[i] * x[c];
        }
    }
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t c = 0; c < 2; ++c) {
            CAPTURE(i, c);
            REQUIRE_THAT(next.means(i, c), WithinRel(num(i, c) / den[i], 1e-12));
        }
}

TEST_CASE("gradient_em_step: matches a brute-force residual oracle") {
    const MixtureModel model = oracle_model();
    const SampleBlock samples = emgmm::sample(model, 50, 11);
    const MeansEstimate estimate = oracle_estimate();
    const double step = 0.7;

    const MeansEstimate next =
        emgmm::gradient_em_step(samples, estimate, model.weights, step);

    Mat res(3, 2);
    for (std::size_t l = 0; l < samples.size(); ++l) {
        const double* x = samples.point(l);
        const Vec w = oracle_responsibilities(estimate.means, model.weights, x);
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t c = 0; c < 2; ++c)
                res(i, c) += w[i] * (x[c] - estimate.means(i, c));
    }
    const double scale = step / static_cast<double>(samples.size());
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t c = 0; c < 2; ++c) {
            CAPTURE(i, c);
            const double want = estimate.means(i, c) + scale * res(i, c);
            REQUIRE_THAT(next.means(i, c), WithinRel(want, 1e-12));
        }
}

TEST_CASE("em_step: every updated mean lies in the convex hull of the data") {
    const MixtureModel model = oracle_model();
    const SampleBlock samples = emgmm::sample(model, 50, 23);
    const MeansEstimate next = emgmm::em_step(samples, oracle_estimate(), model.weights);

    for (std::size_t c = 0; c < 2; ++c) {
        double lo = samples.point(0)[c], hi = lo;
        for (std::size_t l = 1; l < samples.size(); ++l) {
            lo = std::min(lo, samples.point(l)[c]);
            hi = std::max(hi, samples.point(l)[c]);
        }
        for (std::size_t i = 0; i < 3; ++i) {
            REQUIRE(next.means(i, c) >= lo);
            REQUIRE(next.means(i, c) <= hi);
        }
    }
}

TEST_CASE("single-component fixtures: EM is the sample mean and is idempotent") {
    const MixtureModel model =
        emgmm::build_model(make_mat(1, 3, {1.0, -2.0, 0.5}), {1.0});
    const SampleBlock samples = emgmm::sample(model, 40, 5);

    MeansEstimate start;
    start.means = make_mat(1, 3, {10.0, -10.0, 3.0});

    const MeansEstimate first = emgmm::em_step(samples, start, model.weights);
    Vec mean(3, 0.0);
    for (std::size_t l = 0; l < samples.size(); ++l)
        for (std::size_t c = 0; c < 3; ++c) mean[c] += samples.point(l)[c];
    for (std::size_t c = 0; c < 3; ++c) {
        CAPTURE(c);
        REQUIRE_THAT(first.means(0, c), WithinRel(mean[c] / 40.0, 1e-13));
    }

    // With one component the responsibilities are identically 1, so the
    // update ignores the current estimate entirely.
    const MeansEstimate second = emgmm::em_step(samples, first, model.weights);
    REQUIRE(second.means.a == first.means.a);

    // Unit-step gradient EM closes the full gap to the sample mean.
    const MeansEstimate grad = emgmm::gradient_em_step(samples, start, model.weights, 1.0);
    for (std::size_t c = 0; c < 3; ++c) {
        CAPTURE(c);
        REQUIRE_THAT(grad.means(0, c), WithinRel(first.means(0, c), 1e-12));
    }
}

TEST_CASE("run: trajectory bookkeeping with a reference model") {
    const MixtureModel model =
        emgmm::build_model(make_mat(2, 2, {0.0, 0.0, 8.0, 0.0}), {0.4, 0.6});
    const SampleBlock samples = emgmm::sample(model, 5000, 13);
    const MeansEstimate init = emgmm::init_sphere(model, 0.3, 99);

    SolverConfig config;
    config.max_iters = 5;
    config.record_means = true;
    config.region_lambda = 0.45;

    const emgmm::EmTrajectory traj =
        emgmm::run(samples, init, model.weights, config, &model);

    REQUIRE(traj.iterations_run == 5);
    REQUIRE(traj.errors.size() == 6);
    REQUIRE(traj.per_component_errors.size() == 6);
    REQUIRE(traj.in_region_flags.size() == 6);
    REQUIRE(traj.means_history.size() == 6);

    REQUIRE(traj.means_history.front().a == init.means.a);
    REQUIRE(traj.means_history.back().a == traj.final.means.a);
    REQUIRE(traj.errors.front() == emgmm::estimate_error(init, model));
    REQUIRE(traj.in_region_flags.front() == 1);  // sphere radius 0.3 R_i < 0.45 R_i

    // Each recorded error must be re-derivable from the recorded means.
    for (std::size_t t = 0; t < traj.means_history.size(); ++t) {
        MeansEstimate snapshot;
        snapshot.means = traj.means_history[t];
        REQUIRE(traj.errors[t] == emgmm::estimate_error(snapshot, model));
        REQUIRE(traj.per_component_errors[t] ==
                emgmm::per_component_errors(snapshot, model));
    }

    // Identical inputs must reproduce the trajectory bit for bit.
    const emgmm::EmTrajectory again =
        emgmm::run(samples, init, model.weights, config, &model);
    REQUIRE(again.final.means.a == traj.final.means.a);
    REQUIRE(again.errors == traj.errors);
}

TEST_CASE("run: zero iterations, early stopping, and optional records") {
    const MixtureModel model =
        emgmm::build_model(make_mat(2, 2, {0.0, 0.0, 8.0, 0.0}), {0.4, 0.6});
    const SampleBlock samples = emgmm::sample(model, 5000, 13);
    const MeansEstimate init = emgmm::init_sphere(model, 0.3, 99);

    SolverConfig config;
    config.max_iters = 0;
    auto traj = emgmm::run(samples, init, model.weights, config, &model);
    REQUIRE(traj.iterations_run == 0);
    REQUIRE(traj.errors.size() == 1);
    REQUIRE(traj.final.means.a == init.means.a);

    // An enormous tolerance halts the run right after the first update.
    config.max_iters = 50;
    config.early_stop_tol = 1e9;
    traj = emgmm::run(samples, init, model.weights, config, &model);
    REQUIRE(traj.iterations_run == 1);
    REQUIRE(traj.errors.size() == 2);

    // A tight tolerance converges this well-separated fixture early.
    config.early_stop_tol = 1e-8;
    traj = emgmm::run(samples, init, model.weights, config, &model);
    REQUIRE(traj.iterations_run < 50);
    const std::size_t m = traj.errors.size();
    REQUIRE(std::abs(traj.errors[m - 1] - traj.errors[m - 2]) < 1e-8);

    // Without a reference there is nothing to record but the means.
    config.early_stop_tol = 0.0;
    config.max_iters = 3;
    config.region_lambda = 0.45;
    traj = emgmm::run(samples, init, model.weights, config, nullptr);
    REQUIRE(traj.errors.empty());
    REQUIRE(traj.per_component_errors.empty());
    REQUIRE(traj.in_region_flags.empty());
    REQUIRE(traj.means_history.empty());
    REQUIRE(traj.iterations_run == 3);
}

TEST_CASE("run: gradient EM validates its step size against the reference") {
    const MixtureModel model =
        emgmm::build_model(make_mat(2, 2, {0.0, 0.0, 8.0, 0.0}), {0.4, 0.6});
    const SampleBlock samples = emgmm::sample(model, 2000, 17);
    const MeansEstimate init = emgmm::init_sphere(model, 0.3, 4);

    SolverConfig config;
    config.algorithm = Algorithm::gradient_em;
    config.max_iters = 2;

    config.step_size = 2.5;  // exactly 1 / pi_min: out of range
    REQUIRE_THROWS_AS(emgmm::run(samples, init, model.weights, config, &model),
                      emgmm::DomainError);
    config.step_size = 0.0;
    REQUIRE_THROWS_AS(emgmm::run(samples, init, model.weights, config, &model),
                      emgmm::DomainError);

    config.step_size = 1.0;
    const auto traj = emgmm::run(samples, init, model.weights, config, &model);
    REQUIRE(traj.iterations_run == 2);
    REQUIRE(traj.errors.size() == 3);

    SolverConfig bad;
    bad.max_iters = -1;
    REQUIRE_THROWS_AS(emgmm::run(samples, init, model.weights, bad, &model),
                      emgmm::DomainError);
}

TEST_CASE("degenerate component: EM throws with location, gradient EM does not") {
    SampleBlock samples;
    samples.d = 1;
    samples.points = {-0.5, 0.1, 0.4, -0.2, 0.3};
    samples.labels.assign(5, 0);

    MeansEstimate estimate;
    estimate.means = make_mat(2, 1, {0.0, 1e5});
    const Vec weights{0.5, 0.5};

    // The far component's responsibilities underflow to exactly zero.
    try {
        emgmm::em_step(samples, estimate, weights);
        FAIL("em_step should have thrown DegenerateComponent");
    } catch (const emgmm::DegenerateComponent& e) {
        REQUIRE(e.component == 1);
        REQUIRE(e.iteration == -1);  // bare step: no driver to fill it in
    }

    SolverConfig config;
    config.max_iters = 3;
    try {
        emgmm::run(samples, estimate, weights, config, nullptr);
        FAIL("run should have thrown DegenerateComponent");
    } catch (const emgmm::DegenerateComponent& e) {
        REQUIRE(e.component == 1);
        REQUIRE(e.iteration == 0);
    }

    // The gradient update divides by n, never by the responsibility mass, so
    // the stranded component simply stays put.
    const MeansEstimate next = emgmm::gradient_em_step(samples, estimate, weights, 1.0);
    REQUIRE(next.means(1, 0) == 1e5);
    REQUIRE_THAT(next.means(0, 0), WithinAbs(0.02, 1e-12));  // mean of the batch
}

TEST_CASE("solver steps: shape and domain validation") {
    const MixtureModel model = oracle_model();
    const SampleBlock samples = emgmm::sample(model, 10, 3);
    const MeansEstimate estimate = oracle_estimate();

    SampleBlock empty;
    empty.d = 2;
    REQUIRE_THROWS_AS(emgmm::em_step(empty, estimate, model.weights), emgmm::DomainError);

    REQUIRE_THROWS_AS(emgmm::em_step(samples, estimate, {0.5, 0.5}),
                      emgmm::ShapeMismatch);

    SampleBlock wrong_d = samples;
    wrong_d.d = 1;
    wrong_d.labels.assign(samples.points.size(), 0);
    REQUIRE_THROWS_AS(emgmm::em_step(wrong_d, estimate, model.weights),
                      emgmm::ShapeMismatch);

    MeansEstimate bad = estimate;
    bad.means(1, 1) = std::numeric_limits<double>::quiet_NaN();
    REQUIRE_THROWS_AS(emgmm::em_step(samples, bad, model.weights),
                      emgmm::NonFiniteInput);

    REQUIRE_THROWS_AS(emgmm::gradient_em_step(samples, estimate, model.weights, 0.0),
                      emgmm::DomainError);
    REQUIRE_THROWS_AS(emgmm::gradient_em_step(samples, estimate, model.weights, -1.0),
                      emgmm::DomainError);
}

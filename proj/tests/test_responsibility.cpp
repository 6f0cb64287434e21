#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "emgmm/model.hpp"
#include "emgmm/responsibility.hpp"
#include "emgmm/rng.hpp"

using namespace emgmm;

namespace {

// Direct softmax oracle in long double, safe only at moderate separations.
std::vector<long double> softmax_oracle(const Mat& means, const Vec& weights,
                                        const double* x) {
    const std::size_t k = means.rows, d = means.cols;
    std::vector<long double> logit(k);
    for (std::size_t i = 0; i < k; ++i) {
        long double sq = 0.0L;
        for (std::size_t c = 0; c < d; ++c) {
            const long double diff = static_cast<long double>(x[c]) - means(i, c);
            sq += diff * diff;
        }
        logit[i] = std::log(static_cast<long double>(weights[i])) - sq / 2.0L;
    }
    long double z = 0.0L;
    for (std::size_t i = 0; i < k; ++i) z += std::exp(logit[i]);
    std::vector<long double> w(k);
    for (std::size_t i = 0; i < k; ++i) w[i] = std::exp(logit[i]) / z;
    return w;
}

}  // namespace

TEST_CASE("responsibilities match a long-double softmax oracle", "[responsibility]") {
    Rng rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        const int k = 1 + static_cast<int>(rng.uniform() * 5);
        const int d = 1 + static_cast<int>(rng.uniform() * 3);
        Mat means(k, d);
        for (auto& v : means.a) v = 4.0 * rng.normal();
        Vec weights(k);
        double sum = 0.0;
        for (auto& w : weights) {
            w = 0.2 + rng.uniform();
            sum += w;
        }
        for (auto& w : weights) w /= sum;
        const Vec log_weights = detail::log_weights_of(weights);

        Vec w(k), x(d);
        for (int rep = 0; rep < 100; ++rep) {
            for (auto& v : x) v = 4.0 * rng.normal();
            detail::responsibilities_logspace(means, log_weights, x.data(), w.data());
            const auto oracle = softmax_oracle(means, weights, x.data());
            double total = 0.0;
            for (int i = 0; i < k; ++i) {
                REQUIRE_THAT(w[i], Catch::Matchers::WithinRel(
                                       static_cast<double>(oracle[i]), 1e-12));
                total += w[i];
            }
            REQUIRE_THAT(total, Catch::Matchers::WithinAbs(1.0, 1e-14));
        }
    }
}

// A naive density-ratio implementation underflows at separation 2000; the
// log-space version must return exact 1/0 responsibilities instead of NaN.
TEST_CASE("responsibilities survive extreme separation", "[responsibility]") {
    Mat means(2, 1);
    means(1, 0) = 2000.0;
    const Vec log_weights = detail::log_weights_of(Vec{0.5, 0.5});
    Vec w(2);
    const double x0 = 0.0;
    detail::responsibilities_logspace(means, log_weights, &x0, w.data());
    REQUIRE(w[0] == 1.0);
    REQUIRE(w[1] == 0.0);
    const double x1 = 2000.0;
    detail::responsibilities_logspace(means, log_weights, &x1, w.data());
    REQUIRE(w[1] == 1.0);

    // Exactly between the centers the weights decide alone. The achievable
    // accuracy is set by ulp(distance^2 / 2) = ulp(5e5) ~ 6e-11: the log
    // weights' low bits are absorbed when added to the huge log-density.
    const double mid = 1000.0;
    const Vec lw = detail::log_weights_of(Vec{0.2, 0.8});
    detail::responsibilities_logspace(means, lw, &mid, w.data());
    REQUIRE_THAT(w[0], Catch::Matchers::WithinRel(0.2, 1e-9));
    REQUIRE_THAT(w[1], Catch::Matchers::WithinRel(0.8, 1e-9));
}

// Mixing weights shift the posterior odds multiplicatively: w_i/w_j must
// equal (pi_i/pi_j) * exp(log-density difference).
TEST_CASE("weights enter the posterior odds exactly", "[responsibility]") {
    Mat means(2, 2);
    means(1, 0) = 3.0;
    means(1, 1) = -1.0;
    Vec w_eq(2), w_skew(2);
    const Vec lw_eq = detail::log_weights_of(Vec{0.5, 0.5});
    const Vec lw_sk = detail::log_weights_of(Vec{0.1, 0.9});
    const double x[2] = {1.0, 0.5};
    detail::responsibilities_logspace(means, lw_eq, x, w_eq.data());
    detail::responsibilities_logspace(means, lw_sk, x, w_skew.data());
    const double odds_eq = w_eq[0] / w_eq[1];
    const double odds_sk = w_skew[0] / w_skew[1];
    REQUIRE_THAT(odds_sk, Catch::Matchers::WithinRel(odds_eq * (0.1 / 0.9), 1e-12));
}

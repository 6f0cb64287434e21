#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "emgmm/errors.hpp"

namespace emgmm {

using Vec = std::vector<double>;

/// Dense row-major matrix; just enough linear algebra for this library.
struct Mat {
    std::size_t rows = 0;
    std::size_t cols = 0;
    Vec a;

    Mat() = default;
    Mat(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), a(r * c, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return a[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return a[r * cols + c]; }
    double* row(std::size_t r) { return a.data() + r * cols; }
    const double* row(std::size_t r) const { return a.data() + r * cols; }
};

inline double dot(const double* x, const double* y, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
    return s;
}

inline double squared_distance(const double* x, const double* y, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = x[i] - y[i];
        s += t * t;
    }
    return s;
}

inline double norm(const double* x, std::size_t n) { return std::sqrt(dot(x, x, n)); }

inline double norm(const Vec& x) { return norm(x.data(), x.size()); }

/// Kahan compensated accumulator: deterministic, accurate for n ~ 10^6 terms.
struct KahanSum {
    double sum = 0.0;
    double carry = 0.0;  // accumulated low-order parts, folded in at readout

    // Neumaier's variant: unlike textbook Kahan, the compensation survives
    // when a new addend dwarfs the running sum (e.g. big, small, -big), so
    // cancellation across magnitude swings keeps the small terms.
    void add(double x) {
        const double t = sum + x;
        if (std::abs(sum) >= std::abs(x))
            carry += (sum - t) + x;
        else
            carry += (x - t) + sum;
        sum = t;
    }
    double value() const { return sum + carry; }
};

namespace detail {

/// Cyclic Jacobi eigenvalue iteration for a symmetric matrix (in place).
/// Returns the largest eigenvalue. Reliable and exact-to-roundoff for the
/// small dense problems this library meets (n <= 64).
inline double jacobi_max_eigenvalue(Mat s) {
    const std::size_t n = s.rows;
    if (n == 1) return s(0, 0);
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += s(p, q) * s(p, q);
        if (off < 1e-28 * (1.0 + std::abs(s(0, 0)))) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = s(p, q);
                if (apq == 0.0) continue;
                const double diff = s(q, q) - s(p, p);
                double t;
                if (std::abs(apq) < 1e-300 * std::abs(diff)) {
                    t = apq / diff;
                } else {
                    const double phi = diff / (2.0 * apq);
                    t = 1.0 / (std::abs(phi) + std::sqrt(phi * phi + 1.0));
                    if (phi < 0.0) t = -t;
                }
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double sn = t * c;
                const double tau = sn / (1.0 + c);
                const double h = t * apq;
                s(p, p) -= h;
                s(q, q) += h;
                s(p, q) = 0.0;
                s(q, p) = 0.0;
                for (std::size_t r = 0; r < n; ++r) {
                    if (r == p || r == q) continue;
                    const double srp = s(r, p);
                    const double srq = s(r, q);
                    s(r, p) = srp - sn * (srq + tau * srp);
                    s(p, r) = s(r, p);
                    s(r, q) = srq + sn * (srp - tau * srq);
                    s(q, r) = s(r, q);
                }
            }
        }
    }
    double best = s(0, 0);
    for (std::size_t i = 1; i < n; ++i) best = std::max(best, s(i, i));
    return best;
}

/// Power iteration on a symmetric PSD matrix; 200 iterations max, relative
/// tolerance 1e-6 on the Rayleigh quotient.
inline double power_max_eigenvalue(const Mat& s) {
    const std::size_t n = s.rows;
    Vec v(n), w(n);
    // Deterministic start with a mild tilt so we never begin orthogonal to
    // the leading eigenvector of a structured matrix.
    for (std::size_t i = 0; i < n; ++i) v[i] = 1.0 + 1e-3 * static_cast<double>(i % 17);
    double nv = norm(v);
    for (auto& x : v) x /= nv;
    double prev = 0.0;
    for (int iter = 0; iter < 200; ++iter) {
        for (std::size_t i = 0; i < n; ++i) w[i] = dot(s.row(i), v.data(), n);
        const double lam = dot(v.data(), w.data(), n);
        const double nw = norm(w);
        if (nw == 0.0) return 0.0;  // matrix is (numerically) zero
        for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / nw;
        if (iter > 0 && std::abs(lam - prev) <= 1e-6 * std::abs(lam)) return lam;
        prev = lam;
    }
    throw PowerIterationNotConverged("power iteration: no convergence in 200 iterations");
}

}  // namespace detail

/// Operator (spectral) norm of a general square matrix: largest singular
/// value, computed as sqrt(lambda_max(A^T A)). Exact dense eigenvalue path
/// for n <= 64, power iteration above.
inline double operator_norm(const Mat& m) {
    if (m.rows != m.cols) throw ShapeMismatch("operator_norm: matrix must be square");
    const std::size_t n = m.rows;
    if (n == 0) return 0.0;
    // Scale first so A^T A cannot overflow and tolerances stay relative.
    double amax = 0.0;
    for (double x : m.a) amax = std::max(amax, std::abs(x));
    if (amax == 0.0) return 0.0;
    if (!std::isfinite(amax)) throw NonFiniteInput("operator_norm: non-finite entry");
    Mat g(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            double s = 0.0;
            for (std::size_t r = 0; r < n; ++r) s += (m(r, i) / amax) * (m(r, j) / amax);
            g(i, j) = s;
            g(j, i) = s;
        }
    }
    const double lam = (n <= 64) ? detail::jacobi_max_eigenvalue(std::move(g))
                                 : detail::power_max_eigenvalue(g);
    return amax * std::sqrt(std::max(lam, 0.0));
}

}  // namespace emgmm

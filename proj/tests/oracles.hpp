#pragma once

// Independent reference implementations used only by the tests. They favour
// obviousness over speed and share no code with the library beyond the
// Matrix container.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

#include "scqr/matrix.hpp"

namespace oracle {

using scqr::Matrix;
using scqr::Vector;

inline Matrix matmul(const Matrix& a, const Matrix& b) {
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < b.cols(); ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
            c(i, j) = s;
        }
    }
    return c;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// Central differences with step h.
inline Vector finite_difference(Vector x, const std::function<double(const Vector&)>& f, double h = 1e-6) {
    Vector g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double orig = x[i];
        x[i] = orig + h;
        const double up = f(x);
        x[i] = orig - h;
        const double down = f(x);
        x[i] = orig;
        g[i] = (up - down) / (2.0 * h);
    }
    return g;
}

// Vector-wise relative error: max |a - n| over max(|a|, |n|, floor).
inline double relative_error(std::span<const double> a, std::span<const double> n, double floor = 1e-8) {
    double diff = 0.0, scale = floor;
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff = std::max(diff, std::abs(a[i] - n[i]));
        scale = std::max({scale, std::abs(a[i]), std::abs(n[i])});
    }
    return diff / scale;
}

// --- Losses and metrics as plain loops ---------------------------------------

inline double pinball(double u, double tau) { return u >= 0.0 ? tau * u : (tau - 1.0) * u; }

inline double composite_loss(const Matrix& pred, std::span<const double> y, std::span<const double> taus) {
    double s = 0.0;
    for (std::size_t k = 0; k < taus.size(); ++k) {
        for (std::size_t i = 0; i < y.size(); ++i) s += pinball(y[i] - pred(i, k), taus[k]);
    }
    return s / static_cast<double>(taus.size() * y.size());
}

inline double rmse(const Matrix& a, const Matrix& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) s += (a(i, k) - b(i, k)) * (a(i, k) - b(i, k));
    }
    return std::sqrt(s / static_cast<double>(a.rows() * a.cols()));
}

inline Vector observed_frequency(const Matrix& pred, std::span<const double> y) {
    Vector f(pred.cols(), 0.0);
    for (std::size_t k = 0; k < pred.cols(); ++k) {
        std::size_t covered = 0;
        for (std::size_t i = 0; i < y.size(); ++i) covered += (y[i] <= pred(i, k)) ? 1 : 0;
        f[k] = static_cast<double>(covered) / static_cast<double>(y.size());
    }
    return f;
}

inline double overall_reliability(std::span<const double> freq, std::span<const double> taus) {
    double s = 0.0;
    for (std::size_t k = 0; k < taus.size(); ++k) s += std::abs(freq[k] - taus[k]);
    return s / static_cast<double>(taus.size());
}

// --- Densities and quadrature -------------------------------------------------

inline double normal_pdf(double x, double mean, double variance) {
    return std::exp(-(x - mean) * (x - mean) / (2.0 * variance)) / std::sqrt(2.0 * std::numbers::pi * variance);
}

inline double t_pdf(double x, double nu) {
    const double c = std::exp(std::lgamma((nu + 1.0) / 2.0) - std::lgamma(nu / 2.0)) / std::sqrt(nu * std::numbers::pi);
    return c * std::pow(1.0 + x * x / nu, -(nu + 1.0) / 2.0);
}

inline double chi2_pdf(double x, double k) {
    if (x <= 0.0) return 0.0;
    return std::exp((k / 2.0 - 1.0) * std::log(x) - x / 2.0 - (k / 2.0) * std::log(2.0) - std::lgamma(k / 2.0));
}

inline double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
                      double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol) return left + right + (left + right - whole) / 15.0;
    return simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
           simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

// Adaptive Simpson integral of f over [a, b].
inline double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-13) {
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    return simpson(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 50);
}

inline double t_cdf_quadrature(double x, double nu) {
    const double half = integrate([nu](double s) { return t_pdf(s, nu); }, 0.0, std::abs(x));
    return x >= 0.0 ? 0.5 + half : 0.5 - half;
}

// Substituting x = u^2 removes the square-root behaviour at the origin.
inline double chi2_cdf_quadrature(double x, double k) {
    if (x <= 0.0) return 0.0;
    return integrate([k](double u) { return chi2_pdf(u * u, k) * 2.0 * u; }, 0.0, std::sqrt(x));
}

// --- Permutahedron projection ---------------------------------------------------

// Euclidean projection of z onto the permutahedron P(w) by Dykstra's
// alternating projections over the sum hyperplane and every subset
// constraint sum_{i in S} x_i <= (sum of the |S| largest w). Exponential in
// n; intended for n <= 5.
inline Vector project_permutahedron(const Vector& z, const Vector& w, int sweeps = 20000) {
    const std::size_t n = z.size();
    Vector sorted_w = w;
    std::sort(sorted_w.begin(), sorted_w.end(), std::greater<>());
    Vector top(n + 1, 0.0);
    for (std::size_t k = 0; k < n; ++k) top[k + 1] = top[k] + sorted_w[k];

    struct HalfSpace {
        std::vector<std::size_t> members;
        double bound;
    };
    std::vector<HalfSpace> sets;
    for (unsigned mask = 1; mask + 1 < (1u << n); ++mask) {
        HalfSpace h;
        for (std::size_t i = 0; i < n; ++i) {
            if (mask & (1u << i)) h.members.push_back(i);
        }
        h.bound = top[h.members.size()];
        sets.push_back(h);
    }
    const double total = top[n];

    Vector x = z;
    std::vector<Vector> corrections(sets.size() + 1, Vector(n, 0.0));
    for (int sweep = 0; sweep < sweeps; ++sweep) {
        for (std::size_t c = 0; c <= sets.size(); ++c) {
            Vector y(n);
            for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + corrections[c][i];
            Vector p = y;
            if (c == sets.size()) {
                double s = 0.0;
                for (double v : y) s += v;
                for (auto& v : p) v -= (s - total) / static_cast<double>(n);
            } else {
                double s = 0.0;
                for (auto i : sets[c].members) s += y[i];
                if (s > sets[c].bound) {
                    const double shift = (s - sets[c].bound) / static_cast<double>(sets[c].members.size());
                    for (auto i : sets[c].members) p[i] -= shift;
                }
            }
            for (std::size_t i = 0; i < n; ++i) corrections[c][i] = y[i] - p[i];
            x = p;
        }
    }
    return x;
}

// Ascending soft sort through the projection oracle:
// out = -Proj_{P(-x)}(rho / epsilon), rho = (n, ..., 1).
inline Vector soft_sort(const Vector& x, double epsilon) {
    const std::size_t n = x.size();
    Vector z(n), neg(n);
    for (std::size_t i = 0; i < n; ++i) {
        z[i] = static_cast<double>(n - i) / epsilon;
        neg[i] = -x[i];
    }
    Vector p = project_permutahedron(z, neg);
    for (auto& v : p) v = -v;
    return p;
}

} // namespace oracle

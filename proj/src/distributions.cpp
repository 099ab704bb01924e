#include "scqr/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace scqr {

namespace {

constexpr double kSqrt3 = 1.7320508075688772;

bool is_three(double v) { return v == 3.0; }

bool is_integer(double v) { return v == std::floor(v) && v < 1e6; }

double chi_squared_variate(Rng& rng, double k) {
    if (is_integer(k)) {
        double s = 0.0;
        for (int i = 0; i < static_cast<int>(k); ++i) {
            const double z = rng.normal();
            s += z * z;
        }
        return s;
    }
    return 2.0 * sample_gamma(rng, 0.5 * k);
}

} // namespace

double sample_gamma(Rng& rng, double shape) {
    if (shape < 1.0) {
        // Boost to shape + 1 and rescale by U^(1/shape).
        const double u = rng.uniform_open();
        return sample_gamma(rng, shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x = 0.0;
        double v = 0.0;
        do {
            x = rng.normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = rng.uniform_open();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

ErrorDistribution ErrorDistribution::normal(double mean, double variance) {
    if (!(variance > 0.0) || !std::isfinite(variance) || !std::isfinite(mean)) {
        throw std::invalid_argument("Normal: variance must be positive and finite");
    }
    return {Kind::Normal, mean, variance};
}

ErrorDistribution ErrorDistribution::student_t(double dof) {
    if (!(dof > 0.0) || !std::isfinite(dof)) {
        throw std::invalid_argument("StudentT: degrees of freedom must be positive");
    }
    return {Kind::StudentT, dof, 0.0};
}

ErrorDistribution ErrorDistribution::chi_squared(double dof) {
    if (!(dof > 0.0) || !std::isfinite(dof)) {
        throw std::invalid_argument("ChiSquared: degrees of freedom must be positive");
    }
    return {Kind::ChiSquared, dof, 0.0};
}

ErrorDistribution ErrorDistribution::from_name(std::string_view name) {
    if (name == "normal" || name == "gauss") return normal(0.0, 0.25);
    if (name == "t" || name == "student-t" || name == "studentt") return student_t(3.0);
    if (name == "chi2" || name == "chi-squared" || name == "chisq") return chi_squared(3.0);
    throw std::invalid_argument("unknown error distribution '" + std::string(name) +
                                "' (expected normal, t or chi2)");
}

std::string ErrorDistribution::label() const {
    switch (kind_) {
    case Kind::Normal: return "normal";
    case Kind::StudentT: return "t";
    case Kind::ChiSquared: return "chi2";
    }
    return "?";
}

std::string ErrorDistribution::describe() const {
    switch (kind_) {
    case Kind::Normal:
        return "Normal(mean=" + std::to_string(a_) + ", variance=" + std::to_string(b_) + ")";
    case Kind::StudentT: return "StudentT(dof=" + std::to_string(a_) + ")";
    case Kind::ChiSquared: return "ChiSquared(dof=" + std::to_string(a_) + ")";
    }
    return "?";
}

double ErrorDistribution::pdf(double x) const {
    switch (kind_) {
    case Kind::Normal: {
        const double z = (x - a_) / std::sqrt(b_);
        return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi * b_);
    }
    case Kind::StudentT: {
        const double nu = a_;
        const double logc = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
                            0.5 * std::log(nu * std::numbers::pi);
        return std::exp(logc - 0.5 * (nu + 1.0) * std::log1p(x * x / nu));
    }
    case Kind::ChiSquared: {
        if (x <= 0.0) return 0.0;
        const double h = 0.5 * a_;
        return std::exp((h - 1.0) * std::log(x) - 0.5 * x - h * std::numbers::ln2 - std::lgamma(h));
    }
    }
    return 0.0;
}

double ErrorDistribution::cdf(double x) const {
    switch (kind_) {
    case Kind::Normal:
        return 0.5 * std::erfc(-(x - a_) / std::sqrt(2.0 * b_));
    case Kind::StudentT: {
        if (is_three(a_)) {
            const double s = x / kSqrt3;
            return 0.5 + (s / (1.0 + x * x / 3.0) + std::atan(s)) / std::numbers::pi;
        }
        const double nu = a_;
        const double tail = 0.5 * boost::math::ibeta(0.5 * nu, 0.5, nu / (nu + x * x));
        return x >= 0.0 ? 1.0 - tail : tail;
    }
    case Kind::ChiSquared: {
        if (x <= 0.0) return 0.0;
        if (is_three(a_)) {
            return std::erf(std::sqrt(0.5 * x)) -
                   std::sqrt(2.0 * x / std::numbers::pi) * std::exp(-0.5 * x);
        }
        return boost::math::gamma_p(0.5 * a_, 0.5 * x);
    }
    }
    return 0.0;
}

double ErrorDistribution::quantile(double tau) const {
    if (!(tau > 0.0 && tau < 1.0)) {
        throw std::out_of_range("quantile: tau must lie in (0, 1), got " + std::to_string(tau));
    }
    // Bracket the root of cdf(q) - tau.
    double lo = 0.0;
    double hi = 0.0;
    if (kind_ == Kind::ChiSquared) {
        lo = 0.0;
        hi = std::max(1.0, a_);
        while (cdf(hi) < tau) hi *= 2.0;
    } else {
        const double centre = kind_ == Kind::Normal ? a_ : 0.0;
        const double scale = kind_ == Kind::Normal ? std::sqrt(b_) : 1.0;
        double width = scale;
        lo = centre - width;
        hi = centre + width;
        while (cdf(lo) > tau) {
            width *= 2.0;
            lo = centre - width;
        }
        while (cdf(hi) < tau) {
            width *= 2.0;
            hi = centre + width;
        }
    }

    // Bisection until the bracket stops shrinking in double precision.
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (cdf(mid) < tau) {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    // Newton polish, kept inside the closed bracket.
    double q = 0.5 * (lo + hi);
    for (int it = 0; it < 20; ++it) {
        const double f = cdf(q) - tau;
        if (f == 0.0) break;
        const double d = pdf(q);
        if (!(d > 0.0)) break;
        const double next = std::clamp(q - f / d, lo, hi);
        if (next == q) break;
        q = next;
    }
    return q;
}

double ErrorDistribution::sample(Rng& rng) const {
    switch (kind_) {
    case Kind::Normal: return a_ + std::sqrt(b_) * rng.normal();
    case Kind::StudentT: {
        const double z = rng.normal();
        const double v = chi_squared_variate(rng, a_);
        return z / std::sqrt(v / a_);
    }
    case Kind::ChiSquared: return chi_squared_variate(rng, a_);
    }
    return 0.0;
}

Vector ErrorDistribution::sample(Rng& rng, std::size_t n) const {
    if (n == 0) throw std::invalid_argument("sample: n must be at least 1");
    Vector out(n);
    for (auto& v : out) v = sample(rng);
    return out;
}

} // namespace scqr

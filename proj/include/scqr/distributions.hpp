#pragma once

#include <string>
#include <string_view>

#include "scqr/matrix.hpp"
#include "scqr/rng.hpp"

namespace scqr {

/// Noise distributions used by the synthetic benchmarks.
///
/// Normal is parameterised by mean and VARIANCE (not standard deviation):
/// `ErrorDistribution::normal(0.0, 0.25)` has standard deviation 0.5.
///
/// The CDFs of StudentT(3) and ChiSquared(3) are evaluated in closed form:
///   t(3):    F(t) = 1/2 + (1/pi) [ (t/sqrt3) / (1 + t^2/3) + atan(t/sqrt3) ]
///   chi2(3): F(x) = erf(sqrt(x/2)) - sqrt(2x/pi) exp(-x/2)
/// Other degrees of freedom fall back to regularized incomplete beta/gamma.
/// Quantiles invert the CDF by bracketed bisection followed by Newton polish.
class ErrorDistribution {
public:
    enum class Kind { Normal, StudentT, ChiSquared };

    static ErrorDistribution normal(double mean, double variance);
    static ErrorDistribution student_t(double dof);
    static ErrorDistribution chi_squared(double dof);

    // "normal" -> N(0, 0.25), "t" -> t(3), "chi2" -> chi2(3); also accepts
    // "student-t", "chi-squared" and "chisq".
    static ErrorDistribution from_name(std::string_view name);

    Kind kind() const noexcept { return kind_; }
    // Short label used in file names and CSV columns: normal, t, chi2.
    std::string label() const;
    std::string describe() const;

    double mean_param() const noexcept { return a_; }
    double variance_param() const noexcept { return b_; }
    double dof() const noexcept { return a_; }

    double pdf(double x) const;
    double cdf(double x) const;
    // Throws std::out_of_range unless 0 < tau < 1.
    double quantile(double tau) const;

    double sample(Rng& rng) const;
    // Throws std::invalid_argument if n == 0.
    Vector sample(Rng& rng, std::size_t n) const;

    friend bool operator==(const ErrorDistribution&, const ErrorDistribution&) = default;

private:
    ErrorDistribution(Kind kind, double a, double b) : kind_(kind), a_(a), b_(b) {}

    Kind kind_;
    double a_; // mean (Normal) or degrees of freedom
    double b_; // variance (Normal), unused otherwise
};

// Gamma(shape, scale = 1) variate by Marsaglia-Tsang squeeze.
double sample_gamma(Rng& rng, double shape);

} // namespace scqr

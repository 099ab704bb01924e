#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "oracles.hpp"
#include "scqr/distributions.hpp"
#include "scqr/matrix.hpp"
#include "scqr/rng.hpp"

using namespace scqr;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng) {
    Matrix m(r, c);
    for (auto& v : m.data()) v = rng.uniform(-2.0, 2.0);
    return m;
}

const std::vector<ErrorDistribution>& all_dists() {
    static const std::vector<ErrorDistribution> d{ErrorDistribution::from_name("normal"),
                                                  ErrorDistribution::from_name("t"),
                                                  ErrorDistribution::from_name("chi2")};
    return d;
}

} // namespace

TEST_CASE("matrix construction checks data length") {
    CHECK_THROWS_AS(Matrix(2, 3, Vector(5, 0.0)), std::invalid_argument);
    const Matrix m(2, 3, Vector{1, 2, 3, 4, 5, 6});
    CHECK(m.size() == m.rows() * m.cols());
    CHECK(m(1, 0) == 4.0);
    CHECK(m.transposed()(0, 1) == 4.0);
    CHECK(m.column(2) == Vector{3, 6});
}

TEST_CASE("matmul small cases") {
    const Matrix a{{1, 2}, {3, 4}};
    CHECK(matmul(Matrix::identity(2), a) == a);
    CHECK(matmul(a, Matrix{{1}, {1}}) == Matrix{{3}, {7}});
    CHECK_THROWS_AS(matmul(a, Matrix(3, 1)), std::invalid_argument);
}

TEST_CASE("matmul variants agree with the triple-loop oracle") {
    Rng rng(11);
    const Matrix a = random_matrix(5, 4, rng);
    const Matrix b = random_matrix(4, 3, rng);
    CHECK(oracle::max_abs_diff(matmul(a, b).data(), oracle::matmul(a, b).data()) < 1e-12);

    for (std::size_t trial = 0; trial < 20; ++trial) {
        const std::size_t n = 1 + rng.below(64), k = 1 + rng.below(64), m = 1 + rng.below(64);
        const Matrix x = random_matrix(n, k, rng);
        const Matrix y = random_matrix(k, m, rng);
        const Matrix ref = oracle::matmul(x, y);
        CHECK(oracle::max_abs_diff(matmul(x, y).data(), ref.data()) < 1e-12);
        CHECK(oracle::max_abs_diff(matmul_bt(x, y.transposed()).data(), ref.data()) < 1e-12);
        CHECK(oracle::max_abs_diff(matmul_at(x.transposed(), y).data(), ref.data()) < 1e-12);
    }
}

TEST_CASE("row vectors, column sums and finiteness") {
    Matrix m{{1, 2}, {3, 4}};
    add_row_vector(m, Vector{10, 20});
    CHECK(m == Matrix{{11, 22}, {13, 24}});
    CHECK(column_sums(m) == Vector{24, 46});
    CHECK(m.all_finite());
    m(0, 0) = std::nan("");
    CHECK_FALSE(m.all_finite());
    CHECK_THROWS_AS(require_finite(m.data(), "m"), std::domain_error);
}

TEST_CASE("rng streams are reproducible and derived seeds differ") {
    Rng a(5), b(5), c(6);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    CHECK(Rng(5).next_u64() != c.next_u64());
    CHECK(derive_seed(1, 0) != derive_seed(1, 1));
    CHECK(derive_seed(1, 0) == derive_seed(1, 0));

    Rng r(9);
    for (int i = 0; i < 1000; ++i) {
        const double u = r.uniform_open();
        CHECK(u > 0.0);
        CHECK(u < 1.0);
        CHECK(r.below(7) < 7u);
    }
    std::vector<int> items(20);
    std::iota(items.begin(), items.end(), 0);
    r.shuffle(std::span<int>(items));
    std::vector<int> sorted = items;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < 20; ++i) CHECK(sorted[i] == i);
}

TEST_CASE("normal variance parameterisation and sample moments") {
    const auto d = ErrorDistribution::normal(0.0, 0.25);
    Rng rng(1);
    const Vector s = d.sample(rng, 100000);
    const double mean = std::accumulate(s.begin(), s.end(), 0.0) / s.size();
    double var = 0.0;
    for (double v : s) var += (v - mean) * (v - mean);
    var /= static_cast<double>(s.size() - 1);
    CHECK(mean >= -0.01);
    CHECK(mean <= 0.01);
    CHECK(var >= 0.24);
    CHECK(var <= 0.26);
    CHECK(d.quantile(0.5) == doctest::Approx(0.0).epsilon(1e-12));
    // variance 0.25 means standard deviation 0.5
    CHECK(d.quantile(0.8413447460685429) == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("chi-squared samples are positive with mean near the degrees of freedom") {
    const auto d = ErrorDistribution::chi_squared(3.0);
    Rng rng(2);
    const Vector s = d.sample(rng, 100000);
    CHECK(std::all_of(s.begin(), s.end(), [](double v) { return v > 0.0; }));
    const double mean = std::accumulate(s.begin(), s.end(), 0.0) / s.size();
    CHECK(mean >= 2.95);
    CHECK(mean <= 3.05);

    const auto half = ErrorDistribution::chi_squared(2.5);
    const Vector h = half.sample(rng, 50000);
    CHECK(std::accumulate(h.begin(), h.end(), 0.0) / h.size() == doctest::Approx(2.5).epsilon(0.03));
}

TEST_CASE("sampling is deterministic for a fixed seed") {
    for (const auto& d : all_dists()) {
        Rng a(77), b(77);
        CHECK(d.sample(a, 5) == d.sample(b, 5));
    }
    Rng r(0);
    CHECK_THROWS_AS(all_dists()[0].sample(r, 0), std::invalid_argument);
}

TEST_CASE("quantile and cdf are inverse") {
    for (const auto& d : all_dists()) {
        for (int i = 1; i <= 19; ++i) {
            const double tau = 0.05 * i;
            CHECK(std::abs(d.cdf(d.quantile(tau)) - tau) < 1e-8);
        }
    }
    // quantile(cdf(x)) = x where the density is not vanishingly small
    for (const auto& d : all_dists()) {
        for (double x : {0.1, 0.7, 1.9, 4.0}) {
            if (d.pdf(x) < 1e-3) continue;
            CHECK(std::abs(d.quantile(d.cdf(x)) - x) < 1e-8);
        }
    }
    CHECK(ErrorDistribution::student_t(3.0).quantile(0.5) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK_THROWS_AS(all_dists()[0].quantile(0.0), std::out_of_range);
    CHECK_THROWS_AS(all_dists()[0].quantile(1.0), std::out_of_range);
}

TEST_CASE("chi-squared and t quantiles against quadrature") {
    const auto chi = ErrorDistribution::chi_squared(3.0);
    const double median = chi.quantile(0.5);
    CHECK(std::abs(chi.cdf(median) - 0.5) < 1e-10);
    CHECK(std::abs(oracle::chi2_cdf_quadrature(median, 3.0) - 0.5) < 1e-8);

    // non-integer degrees of freedom take the special-function path
    for (double k : {2.5, 5.0}) {
        const auto d = ErrorDistribution::chi_squared(k);
        for (double tau : {0.1, 0.5, 0.9}) CHECK(std::abs(oracle::chi2_cdf_quadrature(d.quantile(tau), k) - tau) < 1e-7);
    }
    for (double nu : {3.0, 4.5}) {
        const auto d = ErrorDistribution::student_t(nu);
        for (double tau : {0.05, 0.3, 0.95}) CHECK(std::abs(oracle::t_cdf_quadrature(d.quantile(tau), nu) - tau) < 1e-7);
    }
}

TEST_CASE("densities match the oracle formulas") {
    const auto n = ErrorDistribution::normal(1.0, 0.25);
    const auto t = ErrorDistribution::student_t(3.0);
    const auto c = ErrorDistribution::chi_squared(3.0);
    for (double x : {-1.5, 0.2, 1.0, 3.3}) {
        CHECK(n.pdf(x) == doctest::Approx(oracle::normal_pdf(x, 1.0, 0.25)).epsilon(1e-12));
        CHECK(t.pdf(x) == doctest::Approx(oracle::t_pdf(x, 3.0)).epsilon(1e-12));
        CHECK(c.pdf(x) == doctest::Approx(oracle::chi2_pdf(x, 3.0)).epsilon(1e-12));
    }
}

TEST_CASE("invalid distribution parameters") {
    CHECK_THROWS(ErrorDistribution::normal(0.0, 0.0));
    CHECK_THROWS(ErrorDistribution::student_t(-1.0));
    CHECK_THROWS(ErrorDistribution::chi_squared(0.0));
    CHECK_THROWS(ErrorDistribution::from_name("cauchy"));
}

#include "doctest.h"

#include <cmath>

#include "oracles.hpp"
#include "scqr/metrics.hpp"
#include "scqr/rng.hpp"

using namespace scqr;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng) {
    Matrix m(r, c);
    for (auto& v : m.data()) v = rng.normal();
    return m;
}

} // namespace

TEST_CASE("rmse against ideal quantiles") {
    Rng rng(1);
    const Matrix a = random_matrix(6, 4, rng);
    CHECK(rmse_vs_ideal(a, a) == 0.0);
    Matrix shifted = a;
    for (auto& v : shifted.data()) v -= 0.7;
    CHECK(rmse_vs_ideal(shifted, a) == doctest::Approx(0.7).epsilon(1e-12));
    for (int t = 0; t < 100; ++t) {
        const Matrix p = random_matrix(1 + rng.below(10), 19, rng);
        const Matrix q = random_matrix(p.rows(), 19, rng);
        CHECK(std::abs(rmse_vs_ideal(p, q) - oracle::rmse(p, q)) < 1e-12);
        CHECK(rmse_vs_ideal(p, q) == rmse_vs_ideal(q, p));
    }
    CHECK_THROWS(rmse_vs_ideal(Matrix(2, 3), Matrix(3, 2)));
}

TEST_CASE("observed frequency") {
    const Vector y{1.0, 2.0, 3.0, 4.0};
    CHECK(observed_frequency(Matrix(4, 3, 1e9), y) == Vector{1, 1, 1});
    CHECK(observed_frequency(Matrix(4, 3, -1e9), y) == Vector{0, 0, 0});
    CHECK(observed_frequency(Matrix{{5}, {5}, {5}, {3.5}}, y)[0] == doctest::Approx(0.75));
    // a prediction equal to its target covers it
    CHECK(observed_frequency(Matrix{{1.0}}, Vector{1.0})[0] == 1.0);
    Rng rng(2);
    for (int t = 0; t < 100; ++t) {
        const Matrix p = random_matrix(20, 5, rng);
        Vector yy(20);
        for (auto& v : yy) v = rng.normal();
        CHECK(oracle::max_abs_diff(observed_frequency(p, yy), oracle::observed_frequency(p, yy)) < 1e-12);
    }
}

TEST_CASE("overall reliability") {
    const QuantileGrid g = QuantileGrid::standard();
    CHECK(overall_reliability(g.taus(), g) == 0.0);
    CHECK(overall_reliability(Vector(19, 0.0), g) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(overall_reliability(Vector{0.7}, QuantileGrid({0.5})) == doctest::Approx(0.2));
    CHECK_THROWS(overall_reliability(Vector{0.1, 0.2}, g));
}

TEST_CASE("reliability depends only on comparisons") {
    Rng rng(3);
    const QuantileGrid g = QuantileGrid::uniform(0.1, 9);
    for (int t = 0; t < 50; ++t) {
        const Matrix p = random_matrix(30, 9, rng);
        Vector y(30);
        for (auto& v : y) v = rng.normal();
        Matrix tp = p;
        for (auto& v : tp.data()) v = std::exp(v) * 3.0 + 1.0;
        Vector ty = y;
        for (auto& v : ty) v = std::exp(v) * 3.0 + 1.0;
        CHECK(overall_reliability(observed_frequency(p, y), g) == overall_reliability(observed_frequency(tp, ty), g));
    }
}

TEST_CASE("evaluate bundles the metrics") {
    Rng rng(4);
    const QuantileGrid g = QuantileGrid::uniform(0.25, 3);
    const Matrix p = random_matrix(10, 3, rng);
    const Matrix ideal = random_matrix(10, 3, rng);
    Vector y(10);
    for (auto& v : y) v = rng.normal();
    const EvalResult with = evaluate(p, y, g, &ideal);
    REQUIRE(with.rmse.has_value());
    CHECK(*with.rmse == rmse_vs_ideal(p, ideal));
    CHECK(with.test_pinball == doctest::Approx(oracle::composite_loss(p, y, g.taus())).epsilon(1e-12));
    CHECK_FALSE(evaluate(p, y, g).rmse.has_value());
    CHECK(eval_csv_row(evaluate(p, y, g)).front() == ',');
}

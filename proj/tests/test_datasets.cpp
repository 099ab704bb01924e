#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <unistd.h>

#include "oracles.hpp"
#include "scqr/datasets.hpp"

using namespace scqr;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() / ("scqr_ds_" + std::to_string(::getpid()))) {
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

void write_file(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

const char* kDists[] = {"normal", "t", "chi2"};

} // namespace

TEST_CASE("example functions at hand-computable points") {
    CHECK(example_value(Example::Example1, Vector{0.0}, 0.0) == 1.0);
    CHECK(example_value(Example::Example0, Vector{0.0, 0.0}, 0.0) == 2.0);
    const std::pair<double, double> points[] = {{0.5, 0.5}, {0.2, 0.7}, {0.0, 1.0}, {0.9, 0.1}};
    for (auto [a, b] : points) {
        const double num = 40.0 * std::exp(std::pow(a - 0.5, 2) + std::pow(b - 0.5, 2));
        const double den = std::exp(8.0 * (std::pow(a - 0.2, 2) + std::pow(b - 0.7, 2))) +
                           std::exp(8.0 * (std::pow(a - 0.7, 2) + std::pow(b - 0.7, 2)));
        CHECK(noise_free_value(Example::Example2, Vector{a, b}) == doctest::Approx(num / den).epsilon(1e-14));
    }
    CHECK(noise_free_value(Example::Example2, Vector{0.5, 0.5}) ==
          doctest::Approx(40.0 / (std::exp(1.04) + std::exp(0.64))).epsilon(1e-14));
    CHECK(noise_scale(Example::Example1, Vector{2.0}) == doctest::Approx(1.4 / 5.0));
    CHECK_THROWS(noise_free_value(Example::Example0, Vector{1.0}));
    CHECK_THROWS(example_from_index(3));
}

TEST_CASE("generated datasets have the documented shapes and ranges") {
    Rng rng(1);
    const auto d1 = generate(Example::Example1, ErrorDistribution::from_name("normal"), 600, rng);
    CHECK(d1.size() == 600);
    CHECK(d1.features() == 1);
    CHECK(d1.ideal->rows() == 600);
    CHECK(d1.ideal->cols() == 19);
    for (double v : d1.x.data()) {
        CHECK(v >= -4.0);
        CHECK(v <= 4.0);
    }
    const auto d2 = generate(Example::Example2, ErrorDistribution::from_name("t"), 100, rng);
    CHECK(d2.features() == 2);
    for (double v : d2.x.data()) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
    CHECK(d2.meta.feature_names == std::vector<std::string>{"x1", "x2"});
    Rng a(5), b(5);
    const auto g1 = generate(Example::Example0, ErrorDistribution::from_name("chi2"), 50, a);
    const auto g2 = generate(Example::Example0, ErrorDistribution::from_name("chi2"), 50, b);
    CHECK(g1.x == g2.x);
    CHECK(g1.y == g2.y);
}

TEST_CASE("standardised residuals follow the error distribution") {
    for (const char* name : kDists) {
        const auto dist = ErrorDistribution::from_name(name);
        for (Example ex : {Example::Example0, Example::Example1, Example::Example2}) {
            Rng rng(11);
            const auto d = generate(ex, dist, 10000, rng);
            Vector eps(d.size());
            for (std::size_t i = 0; i < d.size(); ++i) {
                eps[i] = (d.y[i] - noise_free_value(ex, d.x.row(i))) / noise_scale(ex, d.x.row(i));
            }
            std::sort(eps.begin(), eps.end());
            double ks = 0.0;
            const double n = static_cast<double>(eps.size());
            for (std::size_t i = 0; i < eps.size(); ++i) {
                const double f = dist.cdf(eps[i]);
                ks = std::max({ks, std::abs(f - i / n), std::abs((i + 1) / n - f)});
            }
            CHECK(ks < 1.628 / std::sqrt(n));
        }
    }
}

TEST_CASE("ideal quantiles") {
    Rng rng(2);
    const auto normal = ErrorDistribution::from_name("normal");
    const QuantileGrid g = QuantileGrid::standard();
    const Matrix x{{-1.0}, {0.0}, {2.5}};
    const Matrix q = ideal_quantiles(Example::Example1, normal, x, g);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(q(i, 9) == doctest::Approx(noise_free_value(Example::Example1, x.row(i))).epsilon(1e-12));
        const double expected = 2.0 * (1.0 + 0.2 * x(i, 0)) / 5.0 * normal.quantile(0.95);
        CHECK(q(i, 18) - q(i, 0) == doctest::Approx(expected).epsilon(1e-10));
    }
    const Matrix c = ideal_quantiles(Example::Example1, ErrorDistribution::from_name("chi2"), x, g);
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t k = 0; k < 19; ++k) CHECK(c(i, k) > noise_free_value(Example::Example1, x.row(i)));
    }
    for (const char* name : kDists) {
        for (Example ex : {Example::Example0, Example::Example1, Example::Example2}) {
            const auto d = generate(ex, ErrorDistribution::from_name(name), 200, rng);
            for (std::size_t i = 0; i < d.size(); ++i) {
                const auto row = d.ideal->row(i);
                CHECK(std::is_sorted(row.begin(), row.end()));
            }
            CHECK(ideal_quantiles(d.meta, d.x, g) == *d.ideal);
        }
    }
}

TEST_CASE("split sizes, determinism and coverage") {
    Rng rng(3);
    const auto d = generate(Example::Example1, ErrorDistribution::from_name("normal"), 600, rng);
    const double thirds[3] = {1.0 / 3, 1.0 / 3, 1.0 / 3};
    Rng a(4), b(4);
    const Split s = split(d, thirds, a);
    const Split t = split(d, thirds, b);
    CHECK(s.train.size() == 200);
    CHECK(s.val.size() == 200);
    CHECK(s.test.size() == 200);
    CHECK(s.train.y == t.train.y);
    CHECK(s.test.x == t.test.x);
    Vector all = s.train.y;
    all.insert(all.end(), s.val.y.begin(), s.val.y.end());
    all.insert(all.end(), s.test.y.begin(), s.test.y.end());
    Vector orig = d.y;
    std::sort(all.begin(), all.end());
    std::sort(orig.begin(), orig.end());
    CHECK(all == orig);
    // ideal quantiles follow their rows
    for (std::size_t i = 0; i < s.test.size(); ++i) {
        const Matrix one(1, 1, Vector{s.test.x(i, 0)});
        CHECK(ideal_quantiles(Example::Example1, ErrorDistribution::from_name("normal"), one, QuantileGrid::standard())
                  .row(0)[3] == s.test.ideal->row(i)[3]);
    }
    const double bad[3] = {0.5, 0.5, 0.5};
    CHECK_THROWS(split(d, bad, a));
}

TEST_CASE("csv round trip keeps full precision") {
    TempDir tmp;
    Rng rng(5);
    const auto d = generate(Example::Example2, ErrorDistribution::from_name("t"), 50, rng);
    const fs::path p = tmp.path / "data.csv";
    write_csv(p, d);
    const Dataset back = load_csv(p);
    CHECK(back.x == d.x);
    CHECK(back.y == d.y);
    CHECK(back.meta.feature_names == d.meta.feature_names);

    write_meta(meta_path_for(p), d.meta);
    CHECK(meta_path_for(p).filename() == "data.meta.json");
    const DatasetMeta m = read_meta(meta_path_for(p));
    CHECK(m.example == d.meta.example);
    CHECK(m.dist == d.meta.dist);
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23}) CHECK(std::stod(format_double(v)) == v);
}

TEST_CASE("csv ingestion of wide and tiny files") {
    TempDir tmp;
    std::string header, row;
    for (int i = 0; i < 28; ++i) {
        header += "p" + std::to_string(i) + ",";
        row += std::to_string(i * 0.5) + ",";
    }
    write_file(tmp.path / "wide.csv", header + "target\n" + row + "1.5\n" + row + "2.5\n");
    const Dataset wide = load_csv(tmp.path / "wide.csv", "target");
    CHECK(wide.features() == 28);
    CHECK(wide.size() == 2);
    CHECK_FALSE(wide.ideal.has_value());

    write_file(tmp.path / "one.csv", "a,y\n1,2\n");
    const Dataset one = load_csv(tmp.path / "one.csv");
    CHECK(one.size() == 1);
    CHECK(one.x(0, 0) == 1.0);
    CHECK(one.y[0] == 2.0);
    CHECK_THROWS(ideal_quantiles(one.meta, one.x, QuantileGrid::standard()));
}

TEST_CASE("csv errors carry the location") {
    TempDir tmp;
    write_file(tmp.path / "bad.csv", "a,y\n1,2\n3,abc\n");
    try {
        load_csv(tmp.path / "bad.csv");
        FAIL("expected a CSV error");
    } catch (const CsvError& e) {
        CHECK(e.row() == 3);
        CHECK(e.column() == 2);
    }
    write_file(tmp.path / "ragged.csv", "a,y\n1,2,3\n");
    CHECK_THROWS_AS(load_csv(tmp.path / "ragged.csv"), CsvError);
    write_file(tmp.path / "notarget.csv", "a,b\n1,2\n");
    CHECK_THROWS_AS(load_csv(tmp.path / "notarget.csv"), CsvError);
    write_file(tmp.path / "empty.csv", "a,y\n");
    CHECK_THROWS_AS(load_csv(tmp.path / "empty.csv"), CsvError);
    CHECK_THROWS_AS(load_csv(tmp.path / "missing.csv"), CsvError);
}

TEST_CASE("csv normalisation") {
    TempDir tmp;
    write_file(tmp.path / "n.csv", "a,b,y\n0,10,1\n5,20,2\n10,30,3\n");
    const Dataset mm = load_csv(tmp.path / "n.csv", "y", Normalization::MinMax);
    CHECK(mm.x(0, 0) == 0.0);
    CHECK(mm.x(2, 0) == 1.0);
    CHECK(mm.x(1, 1) == 0.5);
    CHECK(mm.y == Vector{1, 2, 3});
    const Dataset z = load_csv(tmp.path / "n.csv", "y", Normalization::ZScore);
    const Vector col = z.x.column(1);
    CHECK(std::accumulate(col.begin(), col.end(), 0.0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(z.meta.normalization_params.size() == 2);
}

#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "scqr/datasets.hpp"
#include "scqr/optimizer.hpp"
#include "scqr/training.hpp"

using namespace scqr;

namespace {

// Scalar Adam with L2 decay added to the gradient.
struct ReferenceAdam {
    double lr, b1 = 0.9, b2 = 0.999, eps = 1e-8, decay;
    Vector m, v;
    int t = 0;
    void step(Vector& w, const Vector& g) {
        if (m.empty()) {
            m.assign(w.size(), 0.0);
            v.assign(w.size(), 0.0);
        }
        ++t;
        for (std::size_t i = 0; i < w.size(); ++i) {
            const double gi = g[i] + decay * w[i];
            m[i] = b1 * m[i] + (1 - b1) * gi;
            v[i] = b2 * v[i] + (1 - b2) * gi * gi;
            const double mh = m[i] / (1 - std::pow(b1, t));
            const double vh = v[i] / (1 - std::pow(b2, t));
            w[i] -= lr * mh / (std::sqrt(vh) + eps);
        }
    }
};

struct Data {
    Dataset train, val, test;
};

Data example1_data(std::uint64_t seed, std::size_t n = 300) {
    Rng rng(seed);
    const Dataset d = generate(Example::Example1, ErrorDistribution::from_name("normal"), n, rng);
    const double p[3] = {1.0 / 3, 1.0 / 3, 1.0 / 3};
    Split s = split(d, p, rng);
    return {s.train, s.val, s.test};
}

ModelSpec small_spec(Family f) {
    ModelSpec s;
    s.family = f;
    s.input_width = 1;
    s.hidden_widths = {5, 5};
    return s;
}

} // namespace

TEST_CASE("adam with zero gradient and no decay is a no-op") {
    Vector w{1.0, -2.0};
    const Vector g{0.0, 0.0};
    Adam adam;
    std::vector<std::span<double>> params{std::span<double>(w)};
    std::vector<std::span<const double>> grads{std::span<const double>(g)};
    adam.step(params, grads);
    CHECK(w == Vector{1.0, -2.0});
    CHECK(adam.steps() == 1);
}

TEST_CASE("adam first step moves by the learning rate") {
    Vector w{0.5};
    const Vector g{1.0};
    AdamConfig cfg;
    cfg.lr = 0.01;
    Adam adam(cfg);
    std::vector<std::span<double>> params{std::span<double>(w)};
    std::vector<std::span<const double>> grads{std::span<const double>(g)};
    adam.step(params, grads);
    CHECK(w[0] == doctest::Approx(0.5 - 0.01).epsilon(1e-6));
}

TEST_CASE("adam matches a scalar reference over 100 steps") {
    Rng rng(1);
    Vector w(6), ref_w;
    for (auto& v : w) v = rng.normal();
    ref_w = w;
    AdamConfig cfg;
    cfg.lr = 0.003;
    cfg.weight_decay = 0.05;
    Adam adam(cfg);
    ReferenceAdam ref{0.003, 0.9, 0.999, 1e-8, 0.05};
    for (int step = 0; step < 100; ++step) {
        Vector g(6);
        for (auto& v : g) v = rng.normal();
        std::vector<std::span<double>> params{std::span<double>(w).subspan(0, 2), std::span<double>(w).subspan(2)};
        std::vector<std::span<const double>> grads{std::span<const double>(g).subspan(0, 2),
                                                   std::span<const double>(g).subspan(2)};
        adam.step(params, grads);
        ref.step(ref_w, g);
    }
    for (std::size_t i = 0; i < w.size(); ++i) CHECK(std::abs(w[i] - ref_w[i]) < 1e-10);
}

TEST_CASE("adam rejects non-finite gradients and mismatched blocks") {
    Vector w{1.0};
    const Vector g{std::nan("")};
    Adam adam;
    std::vector<std::span<double>> params{std::span<double>(w)};
    std::vector<std::span<const double>> grads{std::span<const double>(g)};
    CHECK_THROWS_AS(adam.step(params, grads), std::domain_error);
    const Vector g2{1.0, 2.0};
    std::vector<std::span<const double>> grads2{std::span<const double>(g2)};
    CHECK_THROWS(adam.step(params, grads2));
}

TEST_CASE("decoupled decay differs from L2 decay") {
    Vector a{1.0}, b{1.0};
    const Vector g{0.5};
    AdamConfig l2;
    l2.weight_decay = 0.1;
    AdamConfig dec = l2;
    dec.decoupled_decay = true;
    Adam x(l2), y(dec);
    for (int i = 0; i < 3; ++i) {
        std::vector<std::span<double>> pa{std::span<double>(a)}, pb{std::span<double>(b)};
        std::vector<std::span<const double>> gr{std::span<const double>(g)};
        x.step(pa, gr);
        y.step(pb, gr);
    }
    CHECK(a[0] != b[0]);
}

TEST_CASE("fit with zero epochs") {
    const Data d = example1_data(1);
    Model model(small_spec(Family::SCQRNN), 1);
    FitConfig cfg;
    cfg.stop.max_epochs = 0;
    const TrainingReport r = fit(model, d.train, d.val, cfg);
    CHECK(r.epochs_run == 0);
    CHECK(r.stop_reason == StopReason::MaxEpochs);
    CHECK(r.val_loss.empty());
}

TEST_CASE("fit is deterministic for a seed") {
    const Data d = example1_data(2);
    for (Family f : {Family::CQRNN, Family::SCQRNN, Family::MCQRNN}) {
        FitConfig cfg;
        cfg.seed = 5;
        cfg.stop.max_epochs = 15;
        Model a(small_spec(f), 3), b(small_spec(f), 3);
        const TrainingReport ra = fit(a, d.train, d.val, cfg);
        const TrainingReport rb = fit(b, d.train, d.val, cfg);
        CHECK(ra.train_loss == rb.train_loss);
        CHECK(ra.val_loss == rb.val_loss);
        CHECK(a.network().flat_parameters() == b.network().flat_parameters());
        cfg.seed = 6;
        Model c(small_spec(f), 3);
        CHECK(fit(c, d.train, d.val, cfg).train_loss != ra.train_loss);
    }
}

TEST_CASE("threshold stop lands on the first epoch below the threshold") {
    const Data d = example1_data(3);
    FitConfig probe;
    probe.stop.early_stopping.reset();
    probe.stop.max_epochs = 40;
    probe.adam.lr = 0.01;
    Model m0(small_spec(Family::CQRNN), 4);
    const TrainingReport full = fit(m0, d.train, d.val, probe);
    // a threshold reached mid-run
    const double threshold = 0.5 * (full.val_loss.front() + *std::min_element(full.val_loss.begin(), full.val_loss.end()));
    FitConfig cfg = probe;
    cfg.stop.threshold = threshold;
    Model m1(small_spec(Family::CQRNN), 4);
    const TrainingReport r = fit(m1, d.train, d.val, cfg);
    CHECK(r.stop_reason == StopReason::Threshold);
    CHECK(r.threshold_reached);
    std::size_t first = 0;
    while (first < full.val_loss.size() && !(full.val_loss[first] < threshold)) ++first;
    CHECK(r.epochs_run == first + 1);
    CHECK(r.val_loss.back() < threshold);
    for (std::size_t e = 0; e + 1 < r.val_loss.size(); ++e) CHECK(r.val_loss[e] >= threshold);
}

TEST_CASE("early stopping restores the best weights") {
    const Data d = example1_data(4);
    FitConfig cfg;
    cfg.stop.early_stopping = EarlyStopping{3, 0.0, true};
    cfg.stop.max_epochs = 500;
    cfg.adam.lr = 0.05;
    Model model(small_spec(Family::SCQRNN), 5);
    const TrainingReport r = fit(model, d.train, d.val, cfg);
    if (r.stop_reason == StopReason::EarlyStopping) {
        REQUIRE(r.best_epoch.has_value());
        CHECK(r.epochs_run == *r.best_epoch + 3);
        const double best = r.val_loss[*r.best_epoch - 1];
        CHECK(*std::min_element(r.val_loss.begin(), r.val_loss.end()) == best);
        CHECK(model.evaluate_loss(d.val.x, d.val.y) == doctest::Approx(best).epsilon(1e-12));
    } else {
        CHECK(r.epochs_run == 500);
    }
}

TEST_CASE("training reduces the validation loss") {
    const Data d = example1_data(5, 600);
    for (Family f : {Family::CQRNN, Family::SCQRNN, Family::MCQRNN}) {
        Model model(small_spec(f), 6);
        const double before = model.evaluate_loss(d.val.x, d.val.y);
        FitConfig cfg;
        cfg.stop.max_epochs = 60;
        fit(model, d.train, d.val, cfg);
        CHECK(model.evaluate_loss(d.val.x, d.val.y) < before);
    }
}

TEST_CASE("fit input validation") {
    const Data d = example1_data(6);
    Model model(small_spec(Family::CQRNN), 1);
    FitConfig cfg;
    cfg.batch_size = 0;
    CHECK_THROWS(fit(model, d.train, d.val, cfg));
    FitConfig bad_threshold;
    bad_threshold.stop.threshold = -1.0;
    CHECK_THROWS(fit(model, d.train, d.val, bad_threshold));
    Dataset empty;
    CHECK_THROWS(fit(model, d.train, empty, FitConfig{}));
}

TEST_CASE("a diverging fit reports the epoch") {
    const Data d = example1_data(7);
    Model model(small_spec(Family::CQRNN), 1);
    Dataset poisoned = d.train;
    poisoned.y[0] = std::numeric_limits<double>::infinity();
    FitConfig cfg;
    cfg.stop.max_epochs = 5;
    try {
        fit(model, poisoned, d.val, cfg);
        FAIL("expected a training error");
    } catch (const TrainingError& e) {
        CHECK(e.epoch() == 1);
    }
}

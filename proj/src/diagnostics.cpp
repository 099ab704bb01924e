#include "scqr/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>

#include "scqr/losses.hpp"
#include "scqr/models.hpp"
#include "scqr/nn.hpp"
#include "scqr/rng.hpp"
#include "scqr/sorting.hpp"

namespace scqr {

namespace {

constexpr double kStep = 1e-6;

Vector numeric_gradient(Vector x, const std::function<double(std::span<const double>)>& f) {
    Vector g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double orig = x[i];
        x[i] = orig + kStep;
        const double up = f(x);
        x[i] = orig - kStep;
        const double down = f(x);
        x[i] = orig;
        g[i] = (up - down) / (2.0 * kStep);
    }
    return g;
}

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng, double scale = 1.0) {
    Matrix m(r, c);
    for (auto& v : m.data()) v = scale * rng.normal();
    return m;
}

Vector random_vector(std::size_t n, Rng& rng, double scale = 1.0) {
    Vector v(n);
    for (auto& x : v) x = scale * rng.normal();
    return v;
}

double weighted_sum(const Matrix& m, const Matrix& w) {
    double s = 0.0;
    const auto a = m.data();
    const auto b = w.data();
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

Vector concat(std::initializer_list<std::span<const double>> parts) {
    Vector out;
    for (auto p : parts) out.insert(out.end(), p.begin(), p.end());
    return out;
}

// Input, weight and bias gradients of sum(G * layer(x)).
double dense_layer_error(Activation act, bool monotone, Rng& rng) {
    const std::size_t n = 1 + rng.below(4), in = 1 + rng.below(4), out = 1 + rng.below(4);
    const Matrix x = random_matrix(n, in, rng);
    const Matrix w = random_matrix(out, in, rng, 0.5);
    const Vector b = random_vector(out, rng, 0.5);
    const Matrix g = random_matrix(n, out, rng);
    std::vector<bool> mask;
    if (monotone) {
        for (std::size_t i = 0; i < in; ++i) mask.push_back(rng.below(2) == 1);
        mask[rng.below(in)] = true;
    }
    DenseLayer layer(w, b, act, mask);
    layer.forward(x);
    const LayerGradients grads = layer.backward(g);
    const Vector analytic = concat({grads.input.data(), grads.weights.data(), grads.bias});

    const Vector point = concat({x.data(), w.data(), b});
    auto f = [&](std::span<const double> p) {
        Matrix xs(n, in), ws(out, in);
        std::copy_n(p.begin(), n * in, xs.data().begin());
        std::copy_n(p.begin() + n * in, out * in, ws.data().begin());
        Vector bs(p.begin() + n * in + out * in, p.end());
        return weighted_sum(DenseLayer(ws, bs, act, mask).infer(xs), g);
    };
    return relative_error(analytic, numeric_gradient(point, f));
}

double network_error(bool monotone, Rng& rng) {
    NetworkConfig cfg;
    const std::size_t in = 1 + rng.below(3);
    cfg.widths = {in, 2 + rng.below(3), 2 + rng.below(3), 1 + rng.below(3)};
    if (monotone) {
        cfg.widths.back() = 1;
        cfg.monotone_inputs.assign(in, false);
        cfg.monotone_inputs[0] = true;
    }
    Network net(cfg, rng);
    const std::size_t n = 1 + rng.below(4);
    const Matrix x = random_matrix(n, in, rng);
    const Matrix g = random_matrix(n, cfg.widths.back(), rng);
    net.forward(x);
    const Matrix gin = net.backward(g);
    Vector analytic(gin.data().begin(), gin.data().end());
    for (auto block : net.gradient_blocks()) analytic.insert(analytic.end(), block.begin(), block.end());

    const Vector point = concat({x.data(), net.flat_parameters()});
    Network probe = net;
    auto f = [&](std::span<const double> p) {
        Matrix xs(n, in);
        std::copy_n(p.begin(), n * in, xs.data().begin());
        probe.set_flat_parameters(p.subspan(n * in));
        return weighted_sum(probe.infer(xs), g);
    };
    return relative_error(analytic, numeric_gradient(point, f));
}

// Distinct entries at least 1e-3 apart so the permutation is stable under
// the finite-difference step.
Vector distinct_vector(std::size_t n, Rng& rng) {
    for (;;) {
        Vector v = random_vector(n, rng);
        Vector s = v;
        std::sort(s.begin(), s.end());
        bool ok = true;
        for (std::size_t i = 1; i < n; ++i) ok = ok && s[i] - s[i - 1] > 1e-3;
        if (ok) return v;
    }
}

double sort_error(std::optional<double> epsilon, Rng& rng) {
    const std::size_t n = 2 + rng.below(18);
    const Vector x = distinct_vector(n, rng);
    const Vector g = random_vector(n, rng);
    Vector analytic;
    if (epsilon) {
        analytic = soft_sort_backward(g, soft_sort(x, *epsilon));
    } else {
        analytic = hard_sort_backward(g, hard_sort(x).perm);
    }
    auto f = [&](std::span<const double> p) {
        const Vector s = epsilon ? soft_sort(p, *epsilon).values : hard_sort(p).values;
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += g[i] * s[i];
        return acc;
    };
    return relative_error(analytic, numeric_gradient(x, f));
}

double smoothed_loss_error(Rng& rng) {
    const std::size_t n = 1 + rng.below(6), t = 1 + rng.below(9);
    const QuantileGrid grid = QuantileGrid::uniform(1.0 / static_cast<double>(t + 1), t);
    const double eps = 0.05 + 0.5 * rng.uniform();
    const Matrix pred = random_matrix(n, t, rng);
    const Vector y = random_vector(n, rng);
    const Matrix analytic = composite_loss_grad(pred, y, grid, eps);
    auto f = [&](std::span<const double> p) {
        Matrix m(n, t);
        std::copy(p.begin(), p.end(), m.data().begin());
        return composite_loss(m, y, grid, eps);
    };
    return relative_error(analytic.data(), numeric_gradient(Vector(pred.data().begin(), pred.data().end()), f));
}

double model_error(Family family, SortMode mode, Rng& rng) {
    ModelSpec spec;
    spec.family = family;
    spec.input_width = 1 + rng.below(2);
    spec.hidden_widths = {3, 3};
    spec.grid = QuantileGrid::uniform(0.2, 4);
    spec.sort_mode = mode;
    spec.smoothing = 0.1;
    Model model(spec, rng.next_u64());
    const std::size_t n = 2 + rng.below(4);
    const Matrix x = random_matrix(n, spec.input_width, rng);
    const Vector y = random_vector(n, rng);
    const Matrix rows = model.training_rows(x);
    const Vector targets = model.training_targets(y);
    model.compute_gradients(rows, targets);
    Vector analytic;
    for (auto block : model.network().gradient_blocks()) analytic.insert(analytic.end(), block.begin(), block.end());

    Model probe = model;
    auto f = [&](std::span<const double> p) {
        probe.network().set_flat_parameters(p);
        return probe.compute_gradients(rows, targets);
    };
    return relative_error(analytic, numeric_gradient(model.network().flat_parameters(), f));
}

} // namespace

DominanceReport check_sort_dominance(std::size_t pairs, std::size_t quantiles, std::uint64_t seed, double slack) {
    Rng rng(seed);
    const QuantileGrid grid = QuantileGrid::uniform(1.0 / static_cast<double>(quantiles + 1), quantiles);
    DominanceReport report;
    Matrix pred(1, quantiles);
    for (std::size_t p = 0; p < pairs; ++p) {
        const double y = 2.0 * rng.normal();
        for (auto& v : pred.data()) v = rng.normal();
        const Vector sorted_values = hard_sort(pred.data()).values;
        Matrix sorted(1, quantiles);
        std::copy(sorted_values.begin(), sorted_values.end(), sorted.data().begin());
        const double raw_loss = composite_loss(pred, std::span<const double>(&y, 1), grid);
        const double sorted_loss = composite_loss(sorted, std::span<const double>(&y, 1), grid);
        ++report.pairs;
        report.max_excess = std::max(report.max_excess, sorted_loss - raw_loss);
        if (sorted_loss > raw_loss + slack) ++report.violations;
        if (!(sorted == pred)) {
            ++report.changed;
            if (!(sorted_loss < raw_loss)) ++report.not_strict;
        }
    }
    return report;
}

double relative_error(std::span<const double> analytic, std::span<const double> numeric) {
    double diff = 0.0, scale = 1e-8;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        diff = std::max(diff, std::abs(analytic[i] - numeric[i]));
        scale = std::max({scale, std::abs(analytic[i]), std::abs(numeric[i])});
    }
    return diff / scale;
}

std::vector<GradientCheck> check_gradients(std::size_t configurations, std::uint64_t seed) {
    std::vector<std::pair<std::string, std::function<double(Rng&)>>> suites{
        {"dense/tanh", [](Rng& r) { return dense_layer_error(Activation::Tanh, false, r); }},
        {"dense/sigmoid", [](Rng& r) { return dense_layer_error(Activation::Sigmoid, false, r); }},
        {"dense/identity", [](Rng& r) { return dense_layer_error(Activation::Identity, false, r); }},
        {"dense/relu", [](Rng& r) { return dense_layer_error(Activation::ReLU, false, r); }},
        {"dense-monotone/tanh", [](Rng& r) { return dense_layer_error(Activation::Tanh, true, r); }},
        {"dense-monotone/identity", [](Rng& r) { return dense_layer_error(Activation::Identity, true, r); }},
        {"network", [](Rng& r) { return network_error(false, r); }},
        {"network-monotone", [](Rng& r) { return network_error(true, r); }},
        {"sort/hard", [](Rng& r) { return sort_error(std::nullopt, r); }},
        {"sort/soft:0.1", [](Rng& r) { return sort_error(0.1, r); }},
        {"sort/soft:1", [](Rng& r) { return sort_error(1.0, r); }},
        {"loss/smoothed", [](Rng& r) { return smoothed_loss_error(r); }},
        {"model/CQRNN", [](Rng& r) { return model_error(Family::CQRNN, SortMode::hard(), r); }},
        {"model/SCQRNN-hard", [](Rng& r) { return model_error(Family::SCQRNN, SortMode::hard(), r); }},
        {"model/SCQRNN-soft:0.1", [](Rng& r) { return model_error(Family::SCQRNN, SortMode::soft(0.1), r); }},
        {"model/SCQRNN-soft:1", [](Rng& r) { return model_error(Family::SCQRNN, SortMode::soft(1.0), r); }},
        {"model/MCQRNN", [](Rng& r) { return model_error(Family::MCQRNN, SortMode::hard(), r); }},
    };
    std::vector<GradientCheck> out;
    for (std::size_t s = 0; s < suites.size(); ++s) {
        Rng rng(derive_seed(seed, s));
        GradientCheck check{suites[s].first, configurations, 0.0};
        for (std::size_t c = 0; c < configurations; ++c) {
            check.max_relative_error = std::max(check.max_relative_error, suites[s].second(rng));
        }
        out.push_back(check);
    }
    return out;
}

} // namespace scqr

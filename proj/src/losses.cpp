#include "scqr/losses.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace scqr {

namespace {

void check_eps(double eps) {
    if (!(eps > 0.0) || !std::isfinite(eps)) {
        throw std::out_of_range("huber smoothing epsilon must be positive, got " + std::to_string(eps));
    }
}

double huber(double v, double eps) { return v <= eps ? v * v / (2.0 * eps) : v - 0.5 * eps; }
double huber_slope(double v, double eps) { return v <= eps ? v / eps : 1.0; }

// d rho / d u for the raw checker, with 0 at u == 0.
double checker_slope(double u, double tau) {
    if (u > 0.0) return tau;
    if (u < 0.0) return tau - 1.0;
    return 0.0;
}

double loss_term(double u, double tau, const std::optional<double>& smoothing) {
    return smoothing ? huber_checker(u, tau, *smoothing) : checker(u, tau);
}

double slope_term(double u, double tau, const std::optional<double>& smoothing) {
    return smoothing ? huber_checker_derivative(u, tau, *smoothing) : checker_slope(u, tau);
}

void check_shapes(const Matrix& pred, std::span<const double> y, const QuantileGrid& grid) {
    if (pred.rows() != y.size() || pred.cols() != grid.size()) {
        throw std::invalid_argument("composite loss: predictions " + pred.shape_string() +
                                    " do not match " + std::to_string(y.size()) + " targets x " +
                                    std::to_string(grid.size()) + " levels");
    }
    if (y.empty()) throw std::invalid_argument("composite loss: no samples");
}

void check_paired(std::span<const double> pred, std::span<const double> y,
                  std::span<const double> taus) {
    if (pred.size() != y.size() || taus.size() != y.size() || y.empty()) {
        throw std::invalid_argument("paired_tau_loss: length mismatch or empty input");
    }
}

} // namespace

QuantileGrid::QuantileGrid(std::vector<double> taus) : taus_(std::move(taus)) {
    if (taus_.empty()) throw std::invalid_argument("QuantileGrid: need at least one level");
    for (std::size_t k = 0; k < taus_.size(); ++k) {
        if (!(taus_[k] > 0.0 && taus_[k] < 1.0)) {
            throw std::invalid_argument("QuantileGrid: level " + std::to_string(taus_[k]) +
                                        " outside (0, 1)");
        }
        if (k > 0 && !(taus_[k] > taus_[k - 1])) {
            throw std::invalid_argument("QuantileGrid: levels must be strictly increasing");
        }
    }
}

QuantileGrid QuantileGrid::uniform(double step, std::size_t count) {
    std::vector<double> t(count);
    for (std::size_t i = 0; i < count; ++i) t[i] = step * static_cast<double>(i + 1);
    return QuantileGrid(std::move(t));
}

double checker(double u, double tau) noexcept { return u >= 0.0 ? tau * u : (tau - 1.0) * u; }

double huber_checker(double u, double tau, double eps) {
    check_eps(eps);
    return u >= 0.0 ? tau * huber(u, eps) : (1.0 - tau) * huber(-u, eps);
}

double huber_checker_derivative(double u, double tau, double eps) {
    check_eps(eps);
    return u >= 0.0 ? tau * huber_slope(u, eps) : -(1.0 - tau) * huber_slope(-u, eps);
}

double composite_loss(const Matrix& pred, std::span<const double> y, const QuantileGrid& grid,
                      std::optional<double> smoothing) {
    check_shapes(pred, y, grid);
    double total = 0.0;
    for (std::size_t i = 0; i < pred.rows(); ++i) {
        for (std::size_t k = 0; k < grid.size(); ++k) total += loss_term(y[i] - pred(i, k), grid[k], smoothing);
    }
    return total / static_cast<double>(pred.size());
}

Matrix composite_loss_grad(const Matrix& pred, std::span<const double> y, const QuantileGrid& grid,
                           std::optional<double> smoothing) {
    check_shapes(pred, y, grid);
    const double scale = 1.0 / static_cast<double>(pred.size());
    Matrix g(pred.rows(), pred.cols());
    for (std::size_t i = 0; i < pred.rows(); ++i) {
        for (std::size_t k = 0; k < grid.size(); ++k) {
            // residual u = y - pred, so d/dpred = -rho'(u)
            g(i, k) = -slope_term(y[i] - pred(i, k), grid[k], smoothing) * scale;
        }
    }
    return g;
}

double per_tau_loss(std::span<const double> pred, std::span<const double> y, double tau,
                    std::optional<double> smoothing) {
    if (pred.size() != y.size() || y.empty()) {
        throw std::invalid_argument("per_tau_loss: length mismatch or empty input");
    }
    if (!(tau > 0.0 && tau < 1.0)) throw std::out_of_range("per_tau_loss: tau outside (0, 1)");
    double total = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) total += loss_term(y[i] - pred[i], tau, smoothing);
    return total / static_cast<double>(y.size());
}

double paired_tau_loss(std::span<const double> pred, std::span<const double> y,
                       std::span<const double> taus, std::optional<double> smoothing) {
    check_paired(pred, y, taus);
    double total = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) total += loss_term(y[i] - pred[i], taus[i], smoothing);
    return total / static_cast<double>(y.size());
}

Vector paired_tau_loss_grad(std::span<const double> pred, std::span<const double> y,
                            std::span<const double> taus, std::optional<double> smoothing) {
    check_paired(pred, y, taus);
    const double scale = 1.0 / static_cast<double>(y.size());
    Vector g(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) g[i] = -slope_term(y[i] - pred[i], taus[i], smoothing) * scale;
    return g;
}

} // namespace scqr

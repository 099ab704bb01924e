#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "scqr/matrix.hpp"

namespace scqr {

// Strictly increasing quantile levels in (0, 1).
class QuantileGrid {
public:
    explicit QuantileGrid(std::vector<double> taus);

    // tau_i = step * i for i = 1..count, e.g. uniform(0.05, 19).
    static QuantileGrid uniform(double step, std::size_t count);
    // The 19-level grid 0.05, 0.10, ..., 0.95.
    static QuantileGrid standard() { return uniform(0.05, 19); }

    std::size_t size() const noexcept { return taus_.size(); }
    double operator[](std::size_t k) const noexcept { return taus_[k]; }
    const std::vector<double>& taus() const noexcept { return taus_; }

    friend bool operator==(const QuantileGrid&, const QuantileGrid&) = default;

private:
    std::vector<double> taus_;
};

// rho_tau(u) = tau u for u >= 0, (tau - 1) u otherwise.
double checker(double u, double tau) noexcept;

// Huber-smoothed checker with h(v) = v^2 / (2 eps) for v <= eps and v - eps/2
// above:  tau h(u) for u >= 0,  (1 - tau) h(-u) for u < 0.
// Throws std::out_of_range unless eps > 0.
double huber_checker(double u, double tau, double eps);
double huber_checker_derivative(double u, double tau, double eps);

/// Mean pinball loss (1 / (T N)) sum_k sum_i rho_{tau_k}(y_i - pred_ik).
/// pred is N x T. With `smoothing` set the Huber checker is used.
double composite_loss(const Matrix& pred, std::span<const double> y, const QuantileGrid& grid,
                      std::optional<double> smoothing = std::nullopt);

/// d composite_loss / d pred. Unsmoothed: -tau/(TN) for a positive residual,
/// (1 - tau)/(TN) for a negative one, and 0 at an exact fit.
Matrix composite_loss_grad(const Matrix& pred, std::span<const double> y, const QuantileGrid& grid,
                           std::optional<double> smoothing = std::nullopt);

// Single-level pinball loss (1/N) sum_i rho_tau(y_i - pred_i).
double per_tau_loss(std::span<const double> pred, std::span<const double> y, double tau,
                    std::optional<double> smoothing = std::nullopt);

// Pinball loss where each prediction carries its own level, as in training on
// the tiled (tau, x) design. Mean over entries.
double paired_tau_loss(std::span<const double> pred, std::span<const double> y,
                       std::span<const double> taus, std::optional<double> smoothing = std::nullopt);
Vector paired_tau_loss_grad(std::span<const double> pred, std::span<const double> y,
                            std::span<const double> taus,
                            std::optional<double> smoothing = std::nullopt);

} // namespace scqr

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scqr/losses.hpp"
#include "scqr/matrix.hpp"

namespace scqr {

struct EvalResult {
    std::optional<double> rmse; // synthetic data only
    double overall_reliability = 0.0;
    std::vector<double> observed_freq;
    double test_pinball = 0.0;
};

// sqrt(mean((pred - ideal)^2)) over all N x T entries.
double rmse_vs_ideal(const Matrix& pred, const Matrix& ideal);

// Per level, the fraction of targets with y_n <= pred_nk, i.e. Heaviside
// with H(0) = 1.
std::vector<double> observed_frequency(const Matrix& pred, std::span<const double> y);

// (1/T) sum_k |freq_k - tau_k|
double overall_reliability(std::span<const double> freqs, const QuantileGrid& grid);

EvalResult evaluate(const Matrix& pred, std::span<const double> y, const QuantileGrid& grid,
                    const Matrix* ideal = nullptr);

std::string eval_csv_header();
std::string eval_csv_row(const EvalResult& r);

} // namespace scqr

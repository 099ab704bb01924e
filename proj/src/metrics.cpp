#include "scqr/metrics.hpp"

#include <cmath>
#include <stdexcept>

#include "scqr/datasets.hpp"

namespace scqr {

double rmse_vs_ideal(const Matrix& pred, const Matrix& ideal) {
    if (pred.rows() != ideal.rows() || pred.cols() != ideal.cols()) {
        throw std::invalid_argument("rmse_vs_ideal: predictions " + pred.shape_string() +
                                    " vs ideal " + ideal.shape_string());
    }
    if (pred.empty()) throw std::invalid_argument("rmse_vs_ideal: empty input");
    const auto a = pred.data();
    const auto b = ideal.data();
    double ss = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) ss += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(ss / static_cast<double>(a.size()));
}

std::vector<double> observed_frequency(const Matrix& pred, std::span<const double> y) {
    if (pred.rows() != y.size() || y.empty()) {
        throw std::invalid_argument("observed_frequency: predictions " + pred.shape_string() + " vs " +
                                    std::to_string(y.size()) + " targets");
    }
    std::vector<double> freq(pred.cols(), 0.0);
    for (std::size_t n = 0; n < pred.rows(); ++n) {
        for (std::size_t k = 0; k < pred.cols(); ++k) {
            if (pred(n, k) - y[n] >= 0.0) freq[k] += 1.0;
        }
    }
    for (auto& f : freq) f /= static_cast<double>(y.size());
    return freq;
}

double overall_reliability(std::span<const double> freqs, const QuantileGrid& grid) {
    if (freqs.size() != grid.size()) {
        throw std::invalid_argument("overall_reliability: " + std::to_string(freqs.size()) +
                                    " frequencies for " + std::to_string(grid.size()) + " levels");
    }
    double s = 0.0;
    for (std::size_t k = 0; k < freqs.size(); ++k) s += std::abs(freqs[k] - grid[k]);
    return s / static_cast<double>(freqs.size());
}

EvalResult evaluate(const Matrix& pred, std::span<const double> y, const QuantileGrid& grid,
                    const Matrix* ideal) {
    EvalResult r;
    if (ideal) r.rmse = rmse_vs_ideal(pred, *ideal);
    r.observed_freq = observed_frequency(pred, y);
    r.overall_reliability = overall_reliability(r.observed_freq, grid);
    r.test_pinball = composite_loss(pred, y, grid);
    return r;
}

std::string eval_csv_header() { return "rmse,reliability,pinball"; }

std::string eval_csv_row(const EvalResult& r) {
    return (r.rmse ? format_double(*r.rmse) : std::string()) + "," + format_double(r.overall_reliability) +
           "," + format_double(r.test_pinball);
}

} // namespace scqr

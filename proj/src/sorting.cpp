#include "scqr/sorting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

namespace scqr {

SortMode SortMode::soft(double epsilon) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
        throw std::out_of_range("soft sort epsilon must be positive, got " + std::to_string(epsilon));
    }
    return {Kind::Soft, epsilon};
}

SortMode SortMode::parse(const std::string& text) {
    if (text == "hard") return hard();
    if (text == "soft") return soft(0.1);
    if (text.rfind("soft:", 0) == 0) return soft(std::stod(text.substr(5)));
    throw std::invalid_argument("unknown sort mode '" + text + "' (expected hard, soft or soft:<eps>)");
}

std::string SortMode::to_string() const {
    if (kind == Kind::Hard) return "hard";
    char buf[64];
    std::snprintf(buf, sizeof buf, "soft:%.17g", epsilon);
    return buf;
}

IsotonicResult isotonic_regression(std::span<const double> y) {
    const std::size_t n = y.size();
    // Stack of blocks; each merge pops the violating neighbour.
    std::vector<double> sums;
    std::vector<std::size_t> starts;
    std::vector<std::size_t> counts;
    sums.reserve(n);
    starts.reserve(n);
    counts.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        double sum = y[i];
        std::size_t count = 1;
        std::size_t start = i;
        while (!sums.empty() &&
               sums.back() * static_cast<double>(count) >= sum * static_cast<double>(counts.back())) {
            sum += sums.back();
            count += counts.back();
            start = starts.back();
            sums.pop_back();
            counts.pop_back();
            starts.pop_back();
        }
        sums.push_back(sum);
        counts.push_back(count);
        starts.push_back(start);
    }

    IsotonicResult r;
    r.values.resize(n);
    r.blocks.reserve(sums.size());
    for (std::size_t b = 0; b < sums.size(); ++b) {
        const double mean = sums[b] / static_cast<double>(counts[b]);
        r.blocks.push_back({starts[b], starts[b] + counts[b], mean});
        std::fill_n(r.values.begin() + static_cast<std::ptrdiff_t>(starts[b]), counts[b], mean);
    }
    return r;
}

HardSortResult hard_sort(std::span<const double> x) {
    HardSortResult r;
    r.perm.resize(x.size());
    std::iota(r.perm.begin(), r.perm.end(), std::size_t{0});
    std::stable_sort(r.perm.begin(), r.perm.end(),
                     [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    r.values.resize(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) r.values[j] = x[r.perm[j]];
    return r;
}

Vector hard_sort_backward(std::span<const double> grad_out, const Permutation& perm) {
    if (grad_out.size() != perm.size()) {
        throw std::invalid_argument("hard_sort_backward: gradient length " +
                                    std::to_string(grad_out.size()) + " != permutation length " +
                                    std::to_string(perm.size()));
    }
    Vector grad_in(perm.size());
    for (std::size_t j = 0; j < perm.size(); ++j) grad_in[perm[j]] = grad_out[j];
    return grad_in;
}

SoftSortResult soft_sort(std::span<const double> x, double epsilon) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
        throw std::out_of_range("soft_sort: epsilon must be positive, got " + std::to_string(epsilon));
    }
    const std::size_t n = x.size();
    HardSortResult sorted = hard_sort(x);

    Vector anchors(n);
    Vector target(n);
    for (std::size_t j = 0; j < n; ++j) {
        anchors[j] = static_cast<double>(n - j) / epsilon;
        target[j] = -(sorted.values[j] + anchors[j]);
    }
    IsotonicResult iso = isotonic_regression(target);

    SoftSortResult r;
    r.values.resize(n);
    for (std::size_t j = 0; j < n; ++j) r.values[j] = -iso.values[j] - anchors[j];
    // Rounding in the anchor subtraction can break exact monotonicity
    // between nearly equal neighbouring blocks.
    for (std::size_t j = 1; j < n; ++j) r.values[j] = std::max(r.values[j], r.values[j - 1]);
    r.perm = std::move(sorted.perm);
    r.blocks = std::move(iso.blocks);
    return r;
}

Vector soft_sort_backward(std::span<const double> grad_out, const SoftSortResult& forward) {
    const std::size_t n = grad_out.size();
    if (forward.perm.size() != n || forward.blocks.empty() != (n == 0) ||
        (n > 0 && (forward.blocks.front().start != 0 || forward.blocks.back().end != n))) {
        throw std::logic_error("soft_sort_backward: stale or mismatched PAV blocks for gradient of length " +
                               std::to_string(n));
    }
    Vector averaged(n);
    for (const auto& b : forward.blocks) {
        double s = 0.0;
        for (std::size_t j = b.start; j < b.end; ++j) s += grad_out[j];
        const double mean = s / static_cast<double>(b.end - b.start);
        for (std::size_t j = b.start; j < b.end; ++j) averaged[j] = mean;
    }
    return hard_sort_backward(averaged, forward.perm);
}

// --- SortLayer --------------------------------------------------------------

Matrix SortLayer::infer(const Matrix& batch) const {
    Matrix out(batch.rows(), batch.cols());
    for (std::size_t r = 0; r < batch.rows(); ++r) {
        const Vector v = mode_.is_soft() ? soft_sort(batch.row(r), mode_.epsilon).values
                                         : hard_sort(batch.row(r)).values;
        std::copy(v.begin(), v.end(), out.row(r).begin());
    }
    return out;
}

Matrix SortLayer::forward(const Matrix& batch) {
    Matrix out(batch.rows(), batch.cols());
    perms_.clear();
    soft_.clear();
    for (std::size_t r = 0; r < batch.rows(); ++r) {
        if (mode_.is_soft()) {
            soft_.push_back(soft_sort(batch.row(r), mode_.epsilon));
            std::copy(soft_.back().values.begin(), soft_.back().values.end(), out.row(r).begin());
        } else {
            HardSortResult h = hard_sort(batch.row(r));
            std::copy(h.values.begin(), h.values.end(), out.row(r).begin());
            perms_.push_back(std::move(h.perm));
        }
    }
    cached_cols_ = batch.cols();
    has_cache_ = true;
    return out;
}

Matrix SortLayer::backward(const Matrix& grad_out) const {
    const std::size_t cached_rows = mode_.is_soft() ? soft_.size() : perms_.size();
    if (!has_cache_ || grad_out.rows() != cached_rows || grad_out.cols() != cached_cols_) {
        throw std::logic_error("SortLayer::backward: no forward pass cached for gradient " +
                               grad_out.shape_string());
    }
    Matrix grad_in(grad_out.rows(), grad_out.cols());
    for (std::size_t r = 0; r < grad_out.rows(); ++r) {
        const Vector g = mode_.is_soft() ? soft_sort_backward(grad_out.row(r), soft_[r])
                                         : hard_sort_backward(grad_out.row(r), perms_[r]);
        std::copy(g.begin(), g.end(), grad_in.row(r).begin());
    }
    return grad_in;
}

} // namespace scqr

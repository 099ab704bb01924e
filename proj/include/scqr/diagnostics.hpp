#pragma once

// Self-checks behind the `sort-check` subcommand: the sorted-loss dominance
// property and finite-difference gradient checks for every differentiable
// component.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace scqr {

struct DominanceReport {
    std::size_t pairs = 0;
    std::size_t changed = 0;         // pairs where sorting changed the prediction
    std::size_t violations = 0;      // sorted loss above unsorted + slack
    std::size_t not_strict = 0;      // changed, but sorted loss not strictly lower
    double max_excess = -1e300;      // max of sorted - unsorted
    bool passed() const noexcept { return violations == 0 && not_strict == 0; }
};

// Random (prediction, target) pairs on a uniform T-level grid; compares the
// composite loss of the hard-sorted prediction with the raw one.
DominanceReport check_sort_dominance(std::size_t pairs, std::size_t quantiles, std::uint64_t seed,
                                     double slack = 1e-12);

struct GradientCheck {
    std::string name;
    std::size_t configurations = 0;
    double max_relative_error = 0.0;
    bool passed(double tolerance = 1e-4) const noexcept { return max_relative_error < tolerance; }
};

// max_i |a_i - n_i| / max(max_i |a_i|, max_i |n_i|, 1e-8)
double relative_error(std::span<const double> analytic, std::span<const double> numeric);

// Central differences (step 1e-6) against analytic gradients for dense
// layers (each activation, plain and monotone), networks, hard and soft
// sort (epsilon 0.1 and 1.0), the smoothed composite loss and each model
// family's training loss. `configurations` random cases per check.
std::vector<GradientCheck> check_gradients(std::size_t configurations, std::uint64_t seed);

} // namespace scqr

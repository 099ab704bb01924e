#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scqr/matrix.hpp"

namespace scqr {

// perm[j] is the input position that lands at output position j.
using Permutation = std::vector<std::size_t>;

struct SortMode {
    enum class Kind { Hard, Soft };
    Kind kind = Kind::Hard;
    double epsilon = 0.1; // regularization strength, Soft only

    static SortMode hard() { return {Kind::Hard, 0.1}; }
    // Throws std::out_of_range unless epsilon > 0.
    static SortMode soft(double epsilon);
    // "hard", "soft" (epsilon 0.1) or "soft:<epsilon>".
    static SortMode parse(const std::string& text);

    bool is_soft() const noexcept { return kind == Kind::Soft; }
    std::string to_string() const;
    friend bool operator==(const SortMode&, const SortMode&) = default;
};

struct PavBlock {
    std::size_t start; // inclusive
    std::size_t end;   // exclusive
    double mean;
    friend bool operator==(const PavBlock&, const PavBlock&) = default;
};

// Contiguous blocks covering [0, n) with strictly increasing means.
using PavBlocks = std::vector<PavBlock>;

struct IsotonicResult {
    Vector values;
    PavBlocks blocks;
};

// Nondecreasing least-squares fit argmin_{v1 <= ... <= vn} ||v - y||^2 by
// pool adjacent violators, O(n).
IsotonicResult isotonic_regression(std::span<const double> y);

struct HardSortResult {
    Vector values;
    Permutation perm;
};

// Ascending stable sort.
HardSortResult hard_sort(std::span<const double> x);
// gradIn[perm[j]] = gradOut[j]
Vector hard_sort_backward(std::span<const double> grad_out, const Permutation& perm);

struct SoftSortResult {
    Vector values;
    Permutation perm; // ascending order of the input
    PavBlocks blocks; // over sorted positions
};

/// Ascending soft sort: minus the L2 permutahedron projection of rho/epsilon
/// onto P(-x), with rho = (n, n-1, ..., 1). Computed as
///   a      = x sorted ascending
///   v      = isotonic_regression(-(a + rho/epsilon))
///   out_j  = -v_j - rho_j/epsilon
/// which is nondecreasing, preserves sum(x), and tends to the hard sort as
/// epsilon -> 0. O(n log n).
SoftSortResult soft_sort(std::span<const double> x, double epsilon);

// Jacobian-vector product: average grad_out over each PAV block, then route
// through the sorting permutation. O(n). Throws std::logic_error when the
// blocks do not describe a vector of grad_out's length.
Vector soft_sort_backward(std::span<const double> grad_out, const SoftSortResult& forward);

/// Row-wise sort used as a parameter-free final layer.
class SortLayer {
public:
    explicit SortLayer(SortMode mode = SortMode::hard()) : mode_(mode) {}

    const SortMode& mode() const noexcept { return mode_; }

    Matrix forward(const Matrix& batch);
    Matrix infer(const Matrix& batch) const;
    // Throws std::logic_error without a matching forward pass.
    Matrix backward(const Matrix& grad_out) const;

private:
    SortMode mode_;
    std::vector<Permutation> perms_;
    std::vector<SoftSortResult> soft_;
    std::size_t cached_cols_ = 0;
    bool has_cache_ = false;
};

} // namespace scqr

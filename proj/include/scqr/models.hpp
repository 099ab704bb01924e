#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scqr/losses.hpp"
#include "scqr/matrix.hpp"
#include "scqr/nn.hpp"
#include "scqr/optimizer.hpp"
#include "scqr/sorting.hpp"

namespace scqr {

enum class Family {
    CQRNN,   // T raw outputs
    CQRNNse, // CQRNN whose outputs are hard-sorted at evaluation time
    SCQRNN,  // sort is the last layer, also during training
    MCQRNN,  // single output, monotone in an extra tau input
};

std::string to_string(Family f);
Family family_from_name(std::string_view name);

struct ModelSpec {
    Family family = Family::SCQRNN;
    std::size_t input_width = 1; // M, number of original features
    std::vector<std::size_t> hidden_widths{5, 5};
    Activation activation = Activation::Tanh;
    QuantileGrid grid = QuantileGrid::standard();
    SortMode sort_mode = SortMode::hard(); // SCQRNN only
    std::optional<double> smoothing;       // Huber epsilon for the training loss
    InitScheme init = InitScheme::XavierUniform;
    // MCQRNN: original feature indices that are also constrained monotone
    // (tau is always monotone).
    std::vector<std::size_t> monotone_features;

    // Full layer widths of the underlying network.
    std::vector<std::size_t> network_widths() const;
    // Width of a training sample row: M, or M + 1 for MCQRNN.
    std::size_t sample_width() const;
};

/// Tiled MCQRNN design: `features` is (M+1) x (T N) with row 0 holding the
/// tau of each column; block j (columns j N .. (j+1) N - 1) carries tau_{j+1}
/// and a full copy of X. `targets` is y repeated T times.
struct DesignMatrix {
    Matrix features;
    Vector targets;

    // Samples as rows: (T N) x (M+1).
    Matrix sample_rows() const { return features.transposed(); }
};

// X is N x M (one sample per row).
DesignMatrix build_design_matrix(const Matrix& x, std::span<const double> y, const QuantileGrid& grid);

class Model {
public:
    // Initializes parameters from Rng(seed); equal (spec, seed) give equal weights.
    Model(ModelSpec spec, std::uint64_t seed);
    Model(ModelSpec spec, Parameters params);

    const ModelSpec& spec() const noexcept { return spec_; }
    Family family() const noexcept { return spec_.family; }
    const Network& network() const noexcept { return net_; }
    Network& network() noexcept { return net_; }

    /// N x T predictions along the family's evaluation path. Throws
    /// std::invalid_argument on a width mismatch and std::domain_error if the
    /// result is not finite.
    Matrix predict(const Matrix& x) const;
    // Network output before any sort layer (MCQRNN: same as predict).
    Matrix predict_unsorted(const Matrix& x) const;

    // Raw composite loss of predict(x) against y.
    double evaluate_loss(const Matrix& x, std::span<const double> y) const;

    /// Forward and backward on a training batch; gradients are left in the
    /// network. Rows of batch_x have sample_width() columns; for MCQRNN the
    /// first column is tau and the loss pairs each prediction with it.
    double compute_gradients(const Matrix& batch_x, std::span<const double> batch_y);

    // compute_gradients followed by an optimizer update. Throws
    // std::domain_error when the loss is not finite.
    double train_step(const Matrix& batch_x, std::span<const double> batch_y, Adam& optimizer);

    // Training-set rows in sample_width() layout (the tiled design for MCQRNN).
    Matrix training_rows(const Matrix& x) const;
    Vector training_targets(std::span<const double> y) const;

    void save(const std::filesystem::path& path) const;
    static Model load(const std::filesystem::path& path);

private:
    static NetworkConfig network_config(const ModelSpec& spec);
    void validate_input(const Matrix& x) const;

    ModelSpec spec_;
    Network net_;
    SortLayer sort_;
};

} // namespace scqr

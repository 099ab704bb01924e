#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scqr/matrix.hpp"
#include "scqr/rng.hpp"

namespace scqr {

enum class Activation { Tanh, Sigmoid, ReLU, Identity };

double activate(Activation f, double z) noexcept;
// Derivative with respect to the pre-activation z. ReLU uses f'(0) = 0.
double activate_derivative(Activation f, double z) noexcept;
std::string to_string(Activation f);
Activation activation_from_name(std::string_view name);

enum class InitScheme {
    XavierUniform, // U(-a, a), a = sqrt(6 / (fan_in + fan_out))
    HeUniform,     // U(-a, a), a = sqrt(6 / fan_in)
};

std::string to_string(InitScheme s);
InitScheme init_scheme_from_name(std::string_view name);

struct Parameters {
    std::vector<Matrix> weights; // weights[k] is out_k x in_k
    std::vector<Vector> biases;

    std::size_t count() const noexcept;
    Vector flatten() const;
    void assign(std::span<const double> flat);
    friend bool operator==(const Parameters&, const Parameters&) = default;
};

// Draws weights layer by layer in row-major order; biases start at zero.
// widths = (input, hidden..., output); needs at least two entries.
Parameters init_params(std::span<const std::size_t> widths, Rng& rng,
                       InitScheme scheme = InitScheme::XavierUniform);

struct LayerGradients {
    Matrix input;   // N x in
    Matrix weights; // out x in, with respect to the raw (pre-exp) weights
    Vector bias;    // out
};

/// Fully connected layer z -> f(W_eff z + b).
///
/// Without a monotone mask W_eff = W. With a mask, every masked input column
/// uses exp(W) elementwise instead, which forces a positive weight on those
/// inputs; a mask of all `true` gives the fully exponentiated hidden layer.
/// Biases are never exponentiated.
///
/// W_eff is cached. After writing to `weights()` through a mutable span,
/// call `sync()` before the next forward pass.
class DenseLayer {
public:
    DenseLayer(Matrix weights, Vector bias, Activation activation,
               std::vector<bool> monotone_mask = {});

    std::size_t in_width() const noexcept { return weights_.cols(); }
    std::size_t out_width() const noexcept { return weights_.rows(); }
    Activation activation() const noexcept { return activation_; }
    bool is_monotone() const noexcept { return !mask_.empty(); }
    const std::vector<bool>& monotone_mask() const noexcept { return mask_; }

    const Matrix& weights() const noexcept { return weights_; }
    const Vector& bias() const noexcept { return bias_; }
    std::span<double> weight_data() noexcept { return weights_.data(); }
    std::span<double> bias_data() noexcept { return bias_; }
    const Matrix& effective_weights() const noexcept { return effective_; }

    void sync();

    // Caches the input and pre-activation for backward().
    Matrix forward(const Matrix& batch);
    // Stateless evaluation; safe to call concurrently.
    Matrix infer(const Matrix& batch) const;
    // Throws std::logic_error if no forward pass is cached.
    LayerGradients backward(const Matrix& grad_out) const;

private:
    Matrix pre_activation(const Matrix& batch) const;

    Matrix weights_;
    Vector bias_;
    Activation activation_;
    std::vector<bool> mask_;
    Matrix effective_;   // out x in
    Matrix effective_t_; // in x out
    std::optional<Matrix> cached_input_;
    std::optional<Matrix> cached_pre_;
};

struct NetworkConfig {
    std::vector<std::size_t> widths;              // input, hidden..., output
    Activation hidden_activation = Activation::Tanh;
    Activation output_activation = Activation::Identity;
    // Empty: plain network. Otherwise one flag per input feature; the first
    // layer exponentiates masked columns and all later layers are fully
    // exponentiated.
    std::vector<bool> monotone_inputs;
};

/// Multilayer perceptron over DenseLayer with accumulated parameter gradients.
class Network {
public:
    Network(NetworkConfig config, Parameters params);
    Network(NetworkConfig config, Rng& rng, InitScheme scheme = InitScheme::XavierUniform);

    const NetworkConfig& config() const noexcept { return config_; }
    std::size_t input_width() const noexcept { return config_.widths.front(); }
    std::size_t output_width() const noexcept { return config_.widths.back(); }
    std::size_t layer_count() const noexcept { return layers_.size(); }
    const DenseLayer& layer(std::size_t i) const { return layers_.at(i); }
    std::size_t parameter_count() const noexcept;

    Matrix forward(const Matrix& batch);
    Matrix infer(const Matrix& batch) const;
    // Backpropagates from d loss / d output, storing parameter gradients;
    // returns d loss / d input.
    Matrix backward(const Matrix& grad_out);

    // Parameter and gradient views in the same order: W0, b0, W1, b1, ...
    std::vector<std::span<double>> parameter_blocks();
    std::vector<std::span<const double>> gradient_blocks() const;

    Parameters parameters() const;
    void set_parameters(const Parameters& params);
    Vector flat_parameters() const;
    void set_flat_parameters(std::span<const double> flat);

    // Refreshes cached effective weights after in-place parameter updates.
    void sync();

private:
    NetworkConfig config_;
    std::vector<DenseLayer> layers_;
    std::vector<Matrix> grad_w_;
    std::vector<Vector> grad_b_;
};

} // namespace scqr

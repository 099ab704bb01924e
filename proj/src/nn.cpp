#include "scqr/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace scqr {

double activate(Activation f, double z) noexcept {
    switch (f) {
    case Activation::Tanh: return std::tanh(z);
    case Activation::Sigmoid: return 1.0 / (1.0 + std::exp(-z));
    case Activation::ReLU: return z > 0.0 ? z : 0.0;
    case Activation::Identity: return z;
    }
    return z;
}

double activate_derivative(Activation f, double z) noexcept {
    switch (f) {
    case Activation::Tanh: {
        const double t = std::tanh(z);
        return 1.0 - t * t;
    }
    case Activation::Sigmoid: {
        const double s = 1.0 / (1.0 + std::exp(-z));
        return s * (1.0 - s);
    }
    case Activation::ReLU: return z > 0.0 ? 1.0 : 0.0;
    case Activation::Identity: return 1.0;
    }
    return 1.0;
}

std::string to_string(Activation f) {
    switch (f) {
    case Activation::Tanh: return "tanh";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::ReLU: return "relu";
    case Activation::Identity: return "identity";
    }
    return "?";
}

Activation activation_from_name(std::string_view name) {
    if (name == "tanh") return Activation::Tanh;
    if (name == "sigmoid") return Activation::Sigmoid;
    if (name == "relu") return Activation::ReLU;
    if (name == "identity" || name == "linear") return Activation::Identity;
    throw std::invalid_argument("unknown activation '" + std::string(name) + "'");
}

std::string to_string(InitScheme s) {
    return s == InitScheme::XavierUniform ? "xavier_uniform" : "he_uniform";
}

InitScheme init_scheme_from_name(std::string_view name) {
    if (name == "xavier_uniform" || name == "xavier") return InitScheme::XavierUniform;
    if (name == "he_uniform" || name == "he") return InitScheme::HeUniform;
    throw std::invalid_argument("unknown init scheme '" + std::string(name) + "'");
}

// --- Parameters -------------------------------------------------------------

std::size_t Parameters::count() const noexcept {
    std::size_t n = 0;
    for (std::size_t k = 0; k < weights.size(); ++k) n += weights[k].size() + biases[k].size();
    return n;
}

Vector Parameters::flatten() const {
    Vector flat;
    flat.reserve(count());
    for (std::size_t k = 0; k < weights.size(); ++k) {
        flat.insert(flat.end(), weights[k].values().begin(), weights[k].values().end());
        flat.insert(flat.end(), biases[k].begin(), biases[k].end());
    }
    return flat;
}

void Parameters::assign(std::span<const double> flat) {
    if (flat.size() != count()) {
        throw std::invalid_argument("Parameters::assign: expected " + std::to_string(count()) +
                                    " values, got " + std::to_string(flat.size()));
    }
    std::size_t pos = 0;
    for (std::size_t k = 0; k < weights.size(); ++k) {
        for (auto& w : weights[k].data()) w = flat[pos++];
        for (auto& b : biases[k]) b = flat[pos++];
    }
}

Parameters init_params(std::span<const std::size_t> widths, Rng& rng, InitScheme scheme) {
    if (widths.size() < 2) throw std::invalid_argument("init_params: need at least two widths");
    for (auto w : widths) {
        if (w == 0) throw std::invalid_argument("init_params: widths must be positive");
    }
    Parameters p;
    for (std::size_t k = 0; k + 1 < widths.size(); ++k) {
        const std::size_t fan_in = widths[k];
        const std::size_t fan_out = widths[k + 1];
        const double bound = scheme == InitScheme::XavierUniform
                                 ? std::sqrt(6.0 / static_cast<double>(fan_in + fan_out))
                                 : std::sqrt(6.0 / static_cast<double>(fan_in));
        Matrix w(fan_out, fan_in);
        for (auto& v : w.data()) v = rng.uniform(-bound, bound);
        p.weights.push_back(std::move(w));
        p.biases.emplace_back(fan_out, 0.0);
    }
    return p;
}

// --- DenseLayer -------------------------------------------------------------

DenseLayer::DenseLayer(Matrix weights, Vector bias, Activation activation,
                       std::vector<bool> monotone_mask)
    : weights_(std::move(weights)), bias_(std::move(bias)), activation_(activation),
      mask_(std::move(monotone_mask)) {
    if (bias_.size() != weights_.rows()) {
        throw std::invalid_argument("DenseLayer: bias length " + std::to_string(bias_.size()) +
                                    " does not match weights " + weights_.shape_string());
    }
    if (!mask_.empty() && mask_.size() != weights_.cols()) {
        throw std::invalid_argument("DenseLayer: monotone mask length " +
                                    std::to_string(mask_.size()) + " does not match input width " +
                                    std::to_string(weights_.cols()));
    }
    sync();
}

void DenseLayer::sync() {
    effective_ = weights_;
    if (!mask_.empty()) {
        for (std::size_t o = 0; o < effective_.rows(); ++o) {
            for (std::size_t i = 0; i < effective_.cols(); ++i) {
                if (mask_[i]) effective_(o, i) = std::exp(weights_(o, i));
            }
        }
        require_finite(effective_.data(), "monotone layer exp(W)");
    }
    effective_t_ = effective_.transposed();
}

Matrix DenseLayer::pre_activation(const Matrix& batch) const {
    if (batch.cols() != in_width()) {
        throw std::invalid_argument("DenseLayer::forward: batch " + batch.shape_string() +
                                    " does not match input width " + std::to_string(in_width()));
    }
    Matrix z = matmul(batch, effective_t_);
    add_row_vector(z, bias_);
    return z;
}

Matrix DenseLayer::infer(const Matrix& batch) const {
    Matrix a = pre_activation(batch);
    if (activation_ != Activation::Identity) {
        for (auto& v : a.data()) v = activate(activation_, v);
    }
    return a;
}

Matrix DenseLayer::forward(const Matrix& batch) {
    Matrix z = pre_activation(batch);
    Matrix a = z;
    if (activation_ != Activation::Identity) {
        for (auto& v : a.data()) v = activate(activation_, v);
    }
    cached_input_ = batch;
    cached_pre_ = std::move(z);
    return a;
}

LayerGradients DenseLayer::backward(const Matrix& grad_out) const {
    if (!cached_input_ || !cached_pre_) {
        throw std::logic_error("DenseLayer::backward called before forward");
    }
    const Matrix& z = *cached_pre_;
    if (grad_out.rows() != z.rows() || grad_out.cols() != z.cols()) {
        throw std::invalid_argument("DenseLayer::backward: gradient " + grad_out.shape_string() +
                                    " does not match cached output " + z.shape_string());
    }
    Matrix dz = grad_out;
    if (activation_ != Activation::Identity) {
        auto d = dz.data();
        const auto zs = z.data();
        for (std::size_t i = 0; i < d.size(); ++i) d[i] *= activate_derivative(activation_, zs[i]);
    }

    LayerGradients g;
    g.weights = matmul_at(dz, *cached_input_);
    if (!mask_.empty()) {
        // d/dw [exp(w) x] = exp(w) x
        for (std::size_t o = 0; o < g.weights.rows(); ++o) {
            for (std::size_t i = 0; i < g.weights.cols(); ++i) {
                if (mask_[i]) g.weights(o, i) *= effective_(o, i);
            }
        }
    }
    g.bias = column_sums(dz);
    g.input = matmul(dz, effective_);
    return g;
}

// --- Network ----------------------------------------------------------------

namespace {

void validate_config(const NetworkConfig& c) {
    if (c.widths.size() < 2) throw std::invalid_argument("Network: need at least two widths");
    if (!c.monotone_inputs.empty() && c.monotone_inputs.size() != c.widths.front()) {
        throw std::invalid_argument("Network: monotone mask length must equal input width");
    }
}

} // namespace

Network::Network(NetworkConfig config, Parameters params) : config_(std::move(config)) {
    validate_config(config_);
    const std::size_t n_layers = config_.widths.size() - 1;
    if (params.weights.size() != n_layers || params.biases.size() != n_layers) {
        throw std::invalid_argument("Network: parameter layer count mismatch");
    }
    const bool monotone = !config_.monotone_inputs.empty();
    for (std::size_t k = 0; k < n_layers; ++k) {
        const auto& w = params.weights[k];
        if (w.rows() != config_.widths[k + 1] || w.cols() != config_.widths[k]) {
            throw std::invalid_argument("Network: layer " + std::to_string(k) + " weights " +
                                        w.shape_string() + " do not match widths");
        }
        std::vector<bool> mask;
        if (monotone) {
            mask = k == 0 ? config_.monotone_inputs : std::vector<bool>(config_.widths[k], true);
        }
        const Activation f = k + 1 == n_layers ? config_.output_activation : config_.hidden_activation;
        layers_.emplace_back(std::move(params.weights[k]), std::move(params.biases[k]), f,
                             std::move(mask));
        grad_w_.emplace_back(config_.widths[k + 1], config_.widths[k]);
        grad_b_.emplace_back(config_.widths[k + 1], 0.0);
    }
}

Network::Network(NetworkConfig config, Rng& rng, InitScheme scheme)
    : Network(config, init_params(config.widths, rng, scheme)) {}

std::size_t Network::parameter_count() const noexcept {
    std::size_t n = 0;
    for (const auto& l : layers_) n += l.weights().size() + l.bias().size();
    return n;
}

Matrix Network::forward(const Matrix& batch) {
    Matrix a = batch;
    for (auto& l : layers_) a = l.forward(a);
    return a;
}

Matrix Network::infer(const Matrix& batch) const {
    Matrix a = batch;
    for (const auto& l : layers_) a = l.infer(a);
    return a;
}

Matrix Network::backward(const Matrix& grad_out) {
    Matrix g = grad_out;
    for (std::size_t k = layers_.size(); k-- > 0;) {
        LayerGradients lg = layers_[k].backward(g);
        grad_w_[k] = std::move(lg.weights);
        grad_b_[k] = std::move(lg.bias);
        g = std::move(lg.input);
    }
    return g;
}

std::vector<std::span<double>> Network::parameter_blocks() {
    std::vector<std::span<double>> blocks;
    for (auto& l : layers_) {
        blocks.push_back(l.weight_data());
        blocks.push_back(l.bias_data());
    }
    return blocks;
}

std::vector<std::span<const double>> Network::gradient_blocks() const {
    std::vector<std::span<const double>> blocks;
    for (std::size_t k = 0; k < layers_.size(); ++k) {
        blocks.push_back(grad_w_[k].data());
        blocks.emplace_back(grad_b_[k]);
    }
    return blocks;
}

Parameters Network::parameters() const {
    Parameters p;
    for (const auto& l : layers_) {
        p.weights.push_back(l.weights());
        p.biases.push_back(l.bias());
    }
    return p;
}

void Network::set_parameters(const Parameters& params) { set_flat_parameters(params.flatten()); }

Vector Network::flat_parameters() const { return parameters().flatten(); }

void Network::set_flat_parameters(std::span<const double> flat) {
    if (flat.size() != parameter_count()) {
        throw std::invalid_argument("Network: expected " + std::to_string(parameter_count()) +
                                    " parameters, got " + std::to_string(flat.size()));
    }
    std::size_t pos = 0;
    for (auto block : parameter_blocks()) {
        for (auto& v : block) v = flat[pos++];
    }
    sync();
}

void Network::sync() {
    for (auto& l : layers_) l.sync();
}

} // namespace scqr

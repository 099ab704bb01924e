#include "scqr/optimizer.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace scqr {

Adam::Adam(AdamConfig config) : config_(config) {
    if (!(config_.lr >= 0.0) || !(config_.weight_decay >= 0.0) || !(config_.eps > 0.0) ||
        !(config_.beta1 >= 0.0 && config_.beta1 < 1.0) || !(config_.beta2 >= 0.0 && config_.beta2 < 1.0)) {
        throw std::invalid_argument("Adam: invalid hyperparameters");
    }
}

void Adam::reset() {
    step_ = 0;
    m_.clear();
    v_.clear();
}

void Adam::step(std::span<const std::span<double>> params,
                std::span<const std::span<const double>> grads) {
    if (params.size() != grads.size()) {
        throw std::invalid_argument("Adam::step: " + std::to_string(params.size()) +
                                    " parameter blocks but " + std::to_string(grads.size()) +
                                    " gradient blocks");
    }
    if (m_.empty()) {
        for (const auto& p : params) {
            m_.emplace_back(p.size(), 0.0);
            v_.emplace_back(p.size(), 0.0);
        }
    }
    if (m_.size() != params.size()) throw std::invalid_argument("Adam::step: block count changed");
    for (std::size_t b = 0; b < params.size(); ++b) {
        if (params[b].size() != grads[b].size() || params[b].size() != m_[b].size()) {
            throw std::invalid_argument("Adam::step: shape mismatch in block " + std::to_string(b));
        }
        for (double g : grads[b]) {
            if (!std::isfinite(g)) throw std::domain_error("Adam::step: non-finite gradient");
        }
    }

    ++step_;
    const double t = static_cast<double>(step_);
    const double bc1 = 1.0 - std::pow(config_.beta1, t);
    const double bc2 = 1.0 - std::pow(config_.beta2, t);
    const double lr = config_.lr;
    const double wd = config_.weight_decay;

    for (std::size_t b = 0; b < params.size(); ++b) {
        auto p = params[b];
        const auto g = grads[b];
        auto& m = m_[b];
        auto& v = v_[b];
        for (std::size_t i = 0; i < p.size(); ++i) {
            double gi = g[i];
            if (config_.decoupled_decay) {
                p[i] *= 1.0 - lr * wd;
            } else {
                gi += wd * p[i];
            }
            m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * gi;
            v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * gi * gi;
            const double m_hat = m[i] / bc1;
            const double v_hat = v[i] / bc2;
            p[i] -= lr * m_hat / (std::sqrt(v_hat) + config_.eps);
        }
    }
}

} // namespace scqr

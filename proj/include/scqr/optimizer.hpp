#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "scqr/matrix.hpp"

namespace scqr {

struct AdamConfig {
    double lr = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;
    // false: decay * w is added to the gradient (L2, as torch.optim.Adam).
    // true: w *= 1 - lr * decay before the Adam step (AdamW).
    bool decoupled_decay = false;
};

/// Adam with bias correction. Moment buffers are allocated on the first
/// step and must keep the same block shapes afterwards.
class Adam {
public:
    explicit Adam(AdamConfig config = {});

    const AdamConfig& config() const noexcept { return config_; }
    std::uint64_t steps() const noexcept { return step_; }

    // Throws std::domain_error on non-finite gradients and
    // std::invalid_argument when block shapes disagree.
    void step(std::span<const std::span<double>> params,
              std::span<const std::span<const double>> grads);

    void reset();

private:
    AdamConfig config_;
    std::uint64_t step_ = 0;
    std::vector<Vector> m_;
    std::vector<Vector> v_;
};

} // namespace scqr

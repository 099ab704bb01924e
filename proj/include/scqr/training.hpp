#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "scqr/datasets.hpp"
#include "scqr/models.hpp"
#include "scqr/optimizer.hpp"

namespace scqr {

struct EarlyStopping {
    std::size_t patience = 20;
    double min_delta = 0.0;
    bool restore_best = true;
};

/// Composable stop rules, checked after every epoch in this order:
/// threshold, early stopping, epoch cap.
struct StopRules {
    std::optional<EarlyStopping> early_stopping = EarlyStopping{};
    std::optional<double> threshold; // stop once validation loss < threshold
    std::size_t max_epochs = 2000;
};

enum class StopReason { MaxEpochs, EarlyStopping, Threshold };
std::string to_string(StopReason r);

struct FitConfig {
    std::size_t batch_size = 16;
    AdamConfig adam{};
    StopRules stop{};
    std::uint64_t seed = 0; // drives batch order
};

struct TrainingReport {
    std::vector<double> train_loss; // per epoch, mean over training batches
    std::vector<double> val_loss;   // per epoch, raw composite loss on validation
    std::size_t epochs_run = 0;
    StopReason stop_reason = StopReason::MaxEpochs;
    std::uint64_t seed = 0;
    double wall_clock_ms = 0.0;
    std::optional<std::size_t> best_epoch; // 1-based, early stopping only
    bool threshold_reached = false;
};

class TrainingError : public std::runtime_error {
public:
    TrainingError(const std::string& msg, std::size_t epoch) : std::runtime_error(msg), epoch_(epoch) {}
    // 1-based epoch in which training diverged.
    std::size_t epoch() const noexcept { return epoch_; }

private:
    std::size_t epoch_;
};

/// Mini-batch Adam training. Batches are drawn from a fresh seeded shuffle
/// every epoch (the tiled (tau, x) rows for MCQRNN). Validation uses the
/// model's own evaluation path. Deterministic given config.seed and the
/// model's initial parameters. Throws TrainingError on a non-finite loss.
TrainingReport fit(Model& model, const Dataset& train, const Dataset& val, const FitConfig& config);

} // namespace scqr

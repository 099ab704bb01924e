#include "scqr/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

namespace scqr {

std::string to_string(StopReason r) {
    switch (r) {
    case StopReason::MaxEpochs: return "max_epochs";
    case StopReason::EarlyStopping: return "early_stopping";
    case StopReason::Threshold: return "threshold";
    }
    return "?";
}

TrainingReport fit(Model& model, const Dataset& train, const Dataset& val, const FitConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    if (train.size() == 0 || val.size() == 0) throw std::invalid_argument("fit: empty dataset");
    if (train.features() != model.spec().input_width || val.features() != model.spec().input_width) {
        throw std::invalid_argument("fit: dataset width does not match model input width " +
                                    std::to_string(model.spec().input_width));
    }
    if (config.batch_size == 0) throw std::invalid_argument("fit: batch size must be positive");
    if (config.stop.early_stopping && config.stop.early_stopping->patience == 0) {
        throw std::invalid_argument("fit: patience must be at least 1");
    }
    if (config.stop.threshold && !(*config.stop.threshold > 0.0)) {
        throw std::invalid_argument("fit: threshold must be positive");
    }

    TrainingReport report;
    report.seed = config.seed;

    const Matrix rows = model.training_rows(train.x);
    const Vector targets = model.training_targets(train.y);
    const std::size_t n = rows.rows();
    const std::size_t width = rows.cols();

    Rng rng(config.seed);
    Adam opt(config.adam);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});

    double best_val = std::numeric_limits<double>::infinity();
    std::size_t since_best = 0;
    Vector best_params;

    bool stop = config.stop.max_epochs == 0;
    while (!stop) {
        const std::size_t epoch = report.epochs_run + 1;
        rng.shuffle(std::span<std::size_t>(order));

        double loss_sum = 0.0;
        for (std::size_t b = 0; b < n; b += config.batch_size) {
            const std::size_t len = std::min(config.batch_size, n - b);
            Matrix bx(len, width);
            Vector by(len);
            for (std::size_t r = 0; r < len; ++r) {
                const std::size_t src = order[b + r];
                std::copy(rows.row(src).begin(), rows.row(src).end(), bx.row(r).begin());
                by[r] = targets[src];
            }
            double loss = 0.0;
            try {
                loss = model.train_step(bx, by, opt);
            } catch (const std::domain_error& e) {
                throw TrainingError(std::string("training diverged in epoch ") + std::to_string(epoch) +
                                        ": " + e.what(),
                                    epoch);
            }
            loss_sum += loss * static_cast<double>(len);
        }
        const double train_loss = loss_sum / static_cast<double>(n);

        double val_loss = 0.0;
        try {
            val_loss = model.evaluate_loss(val.x, val.y);
        } catch (const std::domain_error& e) {
            throw TrainingError(std::string("validation diverged in epoch ") + std::to_string(epoch) +
                                    ": " + e.what(),
                                epoch);
        }
        if (!std::isfinite(train_loss) || !std::isfinite(val_loss)) {
            throw TrainingError("non-finite loss in epoch " + std::to_string(epoch), epoch);
        }
        report.train_loss.push_back(train_loss);
        report.val_loss.push_back(val_loss);
        report.epochs_run = epoch;

        if (config.stop.threshold && val_loss < *config.stop.threshold) {
            report.stop_reason = StopReason::Threshold;
            report.threshold_reached = true;
            break;
        }
        if (const auto& es = config.stop.early_stopping) {
            if (val_loss < best_val - es->min_delta) {
                best_val = val_loss;
                since_best = 0;
                report.best_epoch = epoch;
                if (es->restore_best) best_params = model.network().flat_parameters();
            } else if (++since_best >= es->patience) {
                report.stop_reason = StopReason::EarlyStopping;
                if (es->restore_best && !best_params.empty()) model.network().set_flat_parameters(best_params);
                break;
            }
        }
        if (epoch >= config.stop.max_epochs) {
            report.stop_reason = StopReason::MaxEpochs;
            stop = true;
        }
    }
    if (config.stop.max_epochs == 0) report.stop_reason = StopReason::MaxEpochs;

    report.wall_clock_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return report;
}

} // namespace scqr

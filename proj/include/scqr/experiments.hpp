#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "scqr/datasets.hpp"
#include "scqr/metrics.hpp"
#include "scqr/models.hpp"
#include "scqr/training.hpp"

namespace scqr {

struct ExperimentConfig {
    std::string experiment = "exp1"; // exp1, exp2 or bench

    std::vector<Family> families{Family::CQRNN, Family::CQRNNse, Family::SCQRNN, Family::MCQRNN};
    std::vector<Example> examples{Example::Example0, Example::Example1, Example::Example2};
    std::vector<std::string> dists{"normal", "t", "chi2"};
    std::optional<std::filesystem::path> csv_path; // exp2: external data instead of the stand-in
    std::string target_column = "y";
    Normalization normalization = Normalization::None;
    std::size_t n_samples = 600;

    // Empty: per-example defaults in exp1 ([4,4] for example 0, [5,5] otherwise).
    std::vector<std::size_t> widths;
    Activation activation = Activation::Tanh;
    QuantileGrid grid = QuantileGrid::standard();
    double lr = 0.01;
    double weight_decay = 0.05;
    bool decoupled_decay = false;
    std::size_t batch_size = 16;
    std::size_t patience = 20;
    double min_delta = 0.0;
    bool early_stopping = true;
    std::optional<double> threshold;
    std::size_t max_epochs = 2000;
    std::size_t runs = 100;
    std::uint64_t base_seed = 0;
    // exp2: the stand-in dataset and its split are drawn from this seed, so
    // every run races on the same data and only the paired model seed varies.
    std::uint64_t data_seed = 0;
    SortMode sort_mode = SortMode::hard();
    std::optional<double> smoothing;
    std::size_t threads = 1;

    // bench
    std::vector<std::size_t> bench_layer_widths{16, 32, 64, 128};
    std::vector<std::size_t> bench_quantile_counts{1, 8, 16, 32, 64};
    std::size_t bench_depth = 2;
    std::size_t bench_input_width = 2;
    std::size_t bench_repetitions = 200;
    std::size_t bench_warmup = 20;

    std::filesystem::path out_dir = "out";
};

ExperimentConfig default_exp1_config();
// Desk-scale race: Example 2 / normal stand-in, widths [64,32,16], 100 runs.
ExperimentConfig default_exp2_config();
// Hyperparameters of the original large-scale race (widths [600,300,150],
// lr 1e-4, decay 5e-3, threshold 0.05).
ExperimentConfig paper_scale_exp2_config();
ExperimentConfig default_bench_config();

// Overrides fields present in `j`; unknown keys throw std::invalid_argument.
void apply_json(ExperimentConfig& config, const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& config);

// --- Experiment 1 -----------------------------------------------------------

struct RunRecord {
    std::size_t run = 0;
    std::uint64_t seed = 0;
    Family family = Family::CQRNN;
    std::string dataset; // e.g. example1/normal
    Example example = Example::Example0;
    std::string dist;
    EvalResult eval;
    std::size_t epochs = 0;
    std::string stop_reason;
    bool failed = false;
    std::string error;
    std::vector<double> val_loss; // training curve
};

struct CellSummary {
    Family family;
    Example example;
    std::string dist;
    std::size_t ok = 0;
    std::size_t failed = 0;
    double rmse_median = 0, rmse_q05 = 0, rmse_q95 = 0;
    double reliability_median = 0, reliability_q05 = 0, reliability_q95 = 0;
    double epochs_median = 0;
};

struct Exp1Result {
    std::vector<RunRecord> records; // ordered by run, example, dist, family
    std::vector<CellSummary> cells;
};

// Seeds for run r: derive_seed(base_seed, r). CQRNN and CQRNNse share one
// trained network per run.
Exp1Result run_experiment1(const ExperimentConfig& config);
std::vector<CellSummary> summarize_exp1(const std::vector<RunRecord>& records);

// --- Experiment 2 -----------------------------------------------------------

struct RaceRun {
    std::size_t run = 0;
    std::uint64_t seed = 0;
    std::size_t epochs_a = 0;
    std::size_t epochs_b = 0;
    bool reached_a = false;
    bool reached_b = false;
    double final_val_a = 0.0;
    double final_val_b = 0.0;
    std::vector<double> curve_a;
    std::vector<double> curve_b;
};

struct RaceStats {
    double median = 0, mean = 0, std = 0;
    std::size_t faster = 0;
    std::size_t capped = 0;
};

struct Exp2Result {
    Family family_a = Family::SCQRNN;
    Family family_b = Family::CQRNN;
    std::vector<RaceRun> runs;
    RaceStats a, b;
    std::size_t ties = 0;
};

// Both models of a run are built and trained from the same seed; each
// trains until validation loss < threshold (or the epoch cap).
Exp2Result run_experiment2(const ExperimentConfig& config);
void summarize_exp2(Exp2Result& result);

// --- Complexity benchmark ---------------------------------------------------

struct BenchCell {
    std::size_t layer_width = 0;
    std::size_t quantiles = 0;
    double scqrnn_ns = 0.0; // median single-sample forward time
    double mcqrnn_ns = 0.0;
    double ratio() const { return mcqrnn_ns / scqrnn_ns; }
};

std::vector<BenchCell> run_complexity_bench(const ExperimentConfig& config);

// --- Output -----------------------------------------------------------------

// Writes config.json, runs.csv and summary.json (plus curves.csv for exp2 and
// bench.csv for the benchmark) into config.out_dir. Wall-clock data lives in
// timing.json only, so the other files are byte-reproducible.
void write_exp1(const ExperimentConfig& config, const Exp1Result& result, double wall_seconds);
void write_exp2(const ExperimentConfig& config, const Exp2Result& result, double wall_seconds);
void write_bench(const ExperimentConfig& config, const std::vector<BenchCell>& cells);

// Linear-interpolation sample quantile (numpy's default), q in [0, 1].
double sample_quantile(std::vector<double> values, double q);
double median(std::vector<double> values);

} // namespace scqr

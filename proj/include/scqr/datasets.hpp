#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "scqr/distributions.hpp"
#include "scqr/losses.hpp"
#include "scqr/matrix.hpp"
#include "scqr/rng.hpp"

namespace scqr {

/// Synthetic regression benchmarks with additive, possibly scaled, noise:
///
///   Example0: y = sin(2 x1) + 2 exp(-16 x2^2) + 0.5 e,     x1, x2 ~ N(0, 1)
///   Example1: y = (1 - x - 2x^2) exp(-x^2 / 2) + (1 + 0.2x)/5 e,  x ~ U(-4, 4)
///   Example2: y = 40 exp((x1-.5)^2 + (x2-.5)^2)
///                 / (exp(8((x1-.2)^2 + (x2-.7)^2)) + exp(8((x1-.7)^2 + (x2-.7)^2))) + e,
///             x1, x2 ~ U(0, 1)
enum class Example { Example0 = 0, Example1 = 1, Example2 = 2 };

Example example_from_index(int index);
std::string to_string(Example e);
std::size_t input_dim(Example e);
double noise_free_value(Example e, std::span<const double> x);
double noise_scale(Example e, std::span<const double> x);
// noise_free_value + noise_scale * eps
double example_value(Example e, std::span<const double> x, double eps);

enum class Normalization { None, MinMax, ZScore };
std::string to_string(Normalization n);
Normalization normalization_from_name(std::string_view name);

struct DatasetMeta {
    std::string source = "synthetic"; // "synthetic" or "csv"
    std::optional<Example> example;
    std::optional<ErrorDistribution> dist;
    std::uint64_t seed = 0;
    std::size_t n = 0;
    std::vector<std::string> feature_names;
    std::string target_name = "y";
    Normalization normalization = Normalization::None;
    // Per feature (offset, scale): stored value = (raw - offset) / scale.
    std::vector<std::pair<double, double>> normalization_params;
};

struct Dataset {
    Matrix x;                            // N x M
    Vector y;                            // N
    std::optional<Matrix> ideal;         // N x T, synthetic data only
    std::optional<QuantileGrid> ideal_grid;
    DatasetMeta meta;

    std::size_t size() const noexcept { return y.size(); }
    std::size_t features() const noexcept { return x.cols(); }
    // Rows selected by `indices`, in that order (ideal quantiles follow).
    Dataset subset(std::span<const std::size_t> indices) const;
};

// Draws x per the example, then the noise, sample by sample. Ideal quantiles
// are computed on `grid`.
Dataset generate(Example example, const ErrorDistribution& dist, std::size_t n, Rng& rng,
                 const QuantileGrid& grid = QuantileGrid::standard());

// Noise-free value plus scale times the distribution's tau-quantile.
Matrix ideal_quantiles(Example example, const ErrorDistribution& dist, const Matrix& x,
                       const QuantileGrid& grid);
// Same, driven by dataset metadata; throws std::invalid_argument for
// non-synthetic data.
Matrix ideal_quantiles(const DatasetMeta& meta, const Matrix& x, const QuantileGrid& grid);

struct Split {
    Dataset train;
    Dataset val;
    Dataset test;
};

// Seeded shuffle, then contiguous train/val/test parts of sizes
// round(N p0), round(N p1) and the remainder.
Split split(const Dataset& data, std::span<const double> proportions, Rng& rng);

class CsvError : public std::runtime_error {
public:
    CsvError(const std::string& msg, std::size_t row, std::size_t column)
        : std::runtime_error(msg), row_(row), column_(column) {}
    // 1-based line number in the file (header is line 1) and 1-based column.
    std::size_t row() const noexcept { return row_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t row_;
    std::size_t column_;
};

/// Comma-separated numeric table with a mandatory header. All non-target
/// columns become features in header order.
Dataset load_csv(const std::filesystem::path& path, std::string_view target_column = "y",
                 Normalization normalization = Normalization::None);
// Features then target, shortest round-trip float formatting.
void write_csv(const std::filesystem::path& path, const Dataset& data);
void write_quantiles_csv(const std::filesystem::path& path, const Matrix& q, const QuantileGrid& grid);

std::string format_double(double v);

void write_meta(const std::filesystem::path& path, const DatasetMeta& meta);
DatasetMeta read_meta(const std::filesystem::path& path);
// `data.csv` -> `data.meta.json`
std::filesystem::path meta_path_for(const std::filesystem::path& csv_path);

} // namespace scqr

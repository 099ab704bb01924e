#pragma once

// JSON conversions for the public value types, and the parameter file format:
// one line of compact JSON header, a newline, then `param_count` float64
// values in little-endian byte order.

#include <filesystem>
#include <utility>

#include "json.hpp"

#include "scqr/datasets.hpp"
#include "scqr/distributions.hpp"
#include "scqr/losses.hpp"
#include "scqr/metrics.hpp"
#include "scqr/models.hpp"
#include "scqr/sorting.hpp"
#include "scqr/training.hpp"

namespace nlohmann {

template <>
struct adl_serializer<scqr::QuantileGrid> {
    static void to_json(json& j, const scqr::QuantileGrid& g) { j = g.taus(); }
    static scqr::QuantileGrid from_json(const json& j) {
        return scqr::QuantileGrid(j.get<std::vector<double>>());
    }
};

template <>
struct adl_serializer<scqr::ErrorDistribution> {
    static void to_json(json& j, const scqr::ErrorDistribution& d);
    static scqr::ErrorDistribution from_json(const json& j);
};

template <>
struct adl_serializer<scqr::SortMode> {
    static void to_json(json& j, const scqr::SortMode& m) { j = m.to_string(); }
    static scqr::SortMode from_json(const json& j) { return scqr::SortMode::parse(j.get<std::string>()); }
};

} // namespace nlohmann

namespace scqr {

void to_json(nlohmann::json& j, const ModelSpec& s);
void from_json(const nlohmann::json& j, ModelSpec& s);

void to_json(nlohmann::json& j, const DatasetMeta& m);
void from_json(const nlohmann::json& j, DatasetMeta& m);

// Includes wall_clock_ms only when `with_timing` is set.
nlohmann::json report_to_json(const TrainingReport& r, bool with_timing = true);
nlohmann::json eval_to_json(const EvalResult& r);

void write_parameter_file(const std::filesystem::path& path, const nlohmann::json& header,
                          std::span<const double> params);
std::pair<nlohmann::json, Vector> read_parameter_file(const std::filesystem::path& path);

} // namespace scqr

#include "scqr/serialization.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace nlohmann {

void adl_serializer<scqr::ErrorDistribution>::to_json(json& j, const scqr::ErrorDistribution& d) {
    j = json{{"kind", d.label()}};
    if (d.kind() == scqr::ErrorDistribution::Kind::Normal) {
        j["mean"] = d.mean_param();
        j["variance"] = d.variance_param();
    } else {
        j["dof"] = d.dof();
    }
}

scqr::ErrorDistribution adl_serializer<scqr::ErrorDistribution>::from_json(const json& j) {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "normal") return scqr::ErrorDistribution::normal(j.value("mean", 0.0), j.value("variance", 0.25));
    if (kind == "t") return scqr::ErrorDistribution::student_t(j.value("dof", 3.0));
    if (kind == "chi2") return scqr::ErrorDistribution::chi_squared(j.value("dof", 3.0));
    throw std::invalid_argument("unknown distribution kind '" + kind + "'");
}

} // namespace nlohmann

namespace scqr {

using nlohmann::json;

void to_json(json& j, const ModelSpec& s) {
    j = json{{"family", to_string(s.family)},
             {"input_width", s.input_width},
             {"hidden_widths", s.hidden_widths},
             {"activation", to_string(s.activation)},
             {"grid", s.grid},
             {"sort_mode", s.sort_mode},
             {"smoothing", s.smoothing ? json(*s.smoothing) : json(nullptr)},
             {"init", to_string(s.init)},
             {"monotone_features", s.monotone_features}};
}

void from_json(const json& j, ModelSpec& s) {
    s.family = family_from_name(j.at("family").get<std::string>());
    s.input_width = j.at("input_width").get<std::size_t>();
    s.hidden_widths = j.at("hidden_widths").get<std::vector<std::size_t>>();
    s.activation = activation_from_name(j.value("activation", "tanh"));
    s.grid = j.at("grid").get<QuantileGrid>();
    s.sort_mode = j.contains("sort_mode") ? j.at("sort_mode").get<SortMode>() : SortMode::hard();
    s.smoothing.reset();
    if (j.contains("smoothing") && !j.at("smoothing").is_null()) s.smoothing = j.at("smoothing").get<double>();
    s.init = init_scheme_from_name(j.value("init", "xavier_uniform"));
    s.monotone_features = j.value("monotone_features", std::vector<std::size_t>{});
}

void to_json(json& j, const DatasetMeta& m) {
    j = json{{"source", m.source},
             {"seed", m.seed},
             {"n", m.n},
             {"feature_names", m.feature_names},
             {"target_name", m.target_name},
             {"normalization", to_string(m.normalization)}};
    j["example"] = m.example ? json(static_cast<int>(*m.example)) : json(nullptr);
    j["dist"] = m.dist ? json(*m.dist) : json(nullptr);
    if (!m.normalization_params.empty()) {
        json params = json::array();
        for (const auto& [offset, scale] : m.normalization_params) params.push_back({offset, scale});
        j["normalization_params"] = params;
    }
}

void from_json(const json& j, DatasetMeta& m) {
    m.source = j.value("source", "synthetic");
    m.seed = j.value("seed", std::uint64_t{0});
    m.n = j.value("n", std::size_t{0});
    m.feature_names = j.value("feature_names", std::vector<std::string>{});
    m.target_name = j.value("target_name", "y");
    m.normalization = normalization_from_name(j.value("normalization", "none"));
    m.example.reset();
    m.dist.reset();
    if (j.contains("example") && !j.at("example").is_null()) m.example = example_from_index(j.at("example").get<int>());
    if (j.contains("dist") && !j.at("dist").is_null()) m.dist = j.at("dist").get<ErrorDistribution>();
    m.normalization_params.clear();
    if (j.contains("normalization_params")) {
        for (const auto& p : j.at("normalization_params")) m.normalization_params.emplace_back(p.at(0), p.at(1));
    }
}

json report_to_json(const TrainingReport& r, bool with_timing) {
    json j{{"train_loss", r.train_loss},
           {"val_loss", r.val_loss},
           {"epochs_run", r.epochs_run},
           {"stop_reason", to_string(r.stop_reason)},
           {"seed", r.seed},
           {"threshold_reached", r.threshold_reached},
           {"best_epoch", r.best_epoch ? json(*r.best_epoch) : json(nullptr)},
           {"validation_metric", "composite_pinball_unsmoothed"}};
    if (with_timing) j["wall_clock_ms"] = r.wall_clock_ms;
    return j;
}

json eval_to_json(const EvalResult& r) {
    return json{{"rmse", r.rmse ? json(*r.rmse) : json(nullptr)},
                {"overall_reliability", r.overall_reliability},
                {"observed_frequency", r.observed_freq},
                {"test_pinball", r.test_pinball}};
}

void write_parameter_file(const std::filesystem::path& path, const json& header_in,
                          std::span<const double> params) {
    json header = header_in;
    header["param_count"] = params.size();
    header["dtype"] = "float64";
    header["byte_order"] = "little";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << header.dump() << '\n';
    for (double v : params) {
        auto bits = std::bit_cast<std::uint64_t>(v);
        unsigned char bytes[8];
        for (int b = 0; b < 8; ++b) bytes[b] = static_cast<unsigned char>(bits >> (8 * b));
        out.write(reinterpret_cast<const char*>(bytes), 8);
    }
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::pair<json, Vector> read_parameter_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": missing header");
    json header = json::parse(line);
    const auto count = header.at("param_count").get<std::size_t>();
    Vector params(count);
    for (auto& v : params) {
        unsigned char bytes[8];
        if (!in.read(reinterpret_cast<char*>(bytes), 8)) {
            throw std::runtime_error(path.string() + ": truncated parameter data");
        }
        std::uint64_t bits = 0;
        for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[b]) << (8 * b);
        v = std::bit_cast<double>(bits);
    }
    return {std::move(header), std::move(params)};
}

} // namespace scqr

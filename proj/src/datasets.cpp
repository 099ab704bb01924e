#include "scqr/datasets.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "scqr/serialization.hpp"

namespace scqr {

Example example_from_index(int index) {
    if (index < 0 || index > 2) {
        throw std::invalid_argument("unknown example " + std::to_string(index) + " (expected 0, 1 or 2)");
    }
    return static_cast<Example>(index);
}

std::string to_string(Example e) { return "example" + std::to_string(static_cast<int>(e)); }

std::size_t input_dim(Example e) { return e == Example::Example1 ? 1 : 2; }

double noise_free_value(Example e, std::span<const double> x) {
    if (x.size() != input_dim(e)) {
        throw std::invalid_argument(to_string(e) + " expects " + std::to_string(input_dim(e)) + " inputs");
    }
    switch (e) {
    case Example::Example0: return std::sin(2.0 * x[0]) + 2.0 * std::exp(-16.0 * x[1] * x[1]);
    case Example::Example1: return (1.0 - x[0] - 2.0 * x[0] * x[0]) * std::exp(-0.5 * x[0] * x[0]);
    case Example::Example2: {
        auto sq = [](double a) { return a * a; };
        const double num = 40.0 * std::exp(sq(x[0] - 0.5) + sq(x[1] - 0.5));
        const double den = std::exp(8.0 * (sq(x[0] - 0.2) + sq(x[1] - 0.7))) +
                           std::exp(8.0 * (sq(x[0] - 0.7) + sq(x[1] - 0.7)));
        return num / den;
    }
    }
    return 0.0;
}

double noise_scale(Example e, std::span<const double> x) {
    switch (e) {
    case Example::Example0: return 0.5;
    case Example::Example1: return (1.0 + 0.2 * x[0]) / 5.0;
    case Example::Example2: return 1.0;
    }
    return 1.0;
}

double example_value(Example e, std::span<const double> x, double eps) {
    return noise_free_value(e, x) + noise_scale(e, x) * eps;
}

std::string to_string(Normalization n) {
    switch (n) {
    case Normalization::None: return "none";
    case Normalization::MinMax: return "minmax";
    case Normalization::ZScore: return "zscore";
    }
    return "?";
}

Normalization normalization_from_name(std::string_view name) {
    if (name == "none") return Normalization::None;
    if (name == "minmax") return Normalization::MinMax;
    if (name == "zscore") return Normalization::ZScore;
    throw std::invalid_argument("unknown normalization '" + std::string(name) + "'");
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
    Dataset d;
    d.x = Matrix(indices.size(), x.cols());
    d.y.resize(indices.size());
    if (ideal) d.ideal = Matrix(indices.size(), ideal->cols());
    d.ideal_grid = ideal_grid;
    for (std::size_t r = 0; r < indices.size(); ++r) {
        const std::size_t src = indices[r];
        std::copy(x.row(src).begin(), x.row(src).end(), d.x.row(r).begin());
        d.y[r] = y[src];
        if (ideal) std::copy(ideal->row(src).begin(), ideal->row(src).end(), d.ideal->row(r).begin());
    }
    d.meta = meta;
    d.meta.n = indices.size();
    return d;
}

Dataset generate(Example example, const ErrorDistribution& dist, std::size_t n, Rng& rng,
                 const QuantileGrid& grid) {
    if (n == 0) throw std::invalid_argument("generate: n must be at least 1");
    const std::size_t m = input_dim(example);
    Dataset d;
    d.x = Matrix(n, m);
    d.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto row = d.x.row(i);
        for (std::size_t j = 0; j < m; ++j) {
            switch (example) {
            case Example::Example0: row[j] = rng.normal(); break;
            case Example::Example1: row[j] = rng.uniform(-4.0, 4.0); break;
            case Example::Example2: row[j] = rng.uniform(); break;
            }
        }
        d.y[i] = example_value(example, row, dist.sample(rng));
    }
    d.ideal = ideal_quantiles(example, dist, d.x, grid);
    d.ideal_grid = grid;
    d.meta.source = "synthetic";
    d.meta.example = example;
    d.meta.dist = dist;
    d.meta.seed = rng.seed();
    d.meta.n = n;
    d.meta.feature_names = m == 1 ? std::vector<std::string>{"x"} : std::vector<std::string>{"x1", "x2"};
    return d;
}

Matrix ideal_quantiles(Example example, const ErrorDistribution& dist, const Matrix& x,
                       const QuantileGrid& grid) {
    if (x.cols() != input_dim(example)) {
        throw std::invalid_argument("ideal_quantiles: " + to_string(example) + " expects " +
                                    std::to_string(input_dim(example)) + " features, got " +
                                    std::to_string(x.cols()));
    }
    Vector q(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) q[k] = dist.quantile(grid[k]);
    Matrix out(x.rows(), grid.size());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const double f = noise_free_value(example, x.row(i));
        const double s = noise_scale(example, x.row(i));
        for (std::size_t k = 0; k < grid.size(); ++k) out(i, k) = f + s * q[k];
    }
    return out;
}

Matrix ideal_quantiles(const DatasetMeta& meta, const Matrix& x, const QuantileGrid& grid) {
    if (meta.source != "synthetic" || !meta.example || !meta.dist) {
        throw std::invalid_argument("ideal quantiles are only known for synthetic data");
    }
    return ideal_quantiles(*meta.example, *meta.dist, x, grid);
}

Split split(const Dataset& data, std::span<const double> proportions, Rng& rng) {
    if (proportions.size() != 3) throw std::invalid_argument("split: need three proportions");
    double total = 0.0;
    for (double p : proportions) {
        if (!(p >= 0.0)) throw std::invalid_argument("split: proportions must be non-negative");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("split: proportions must sum to 1");

    const std::size_t n = data.size();
    const auto n_train = static_cast<std::size_t>(std::llround(static_cast<double>(n) * proportions[0]));
    const auto n_val = static_cast<std::size_t>(std::llround(static_cast<double>(n) * proportions[1]));
    if (n_train == 0 || n_val == 0 || n_train + n_val >= n) {
        throw std::invalid_argument("split: " + std::to_string(n) +
                                    " samples leave an empty train, validation or test part");
    }
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(idx));
    const std::span<const std::size_t> all(idx);
    return {data.subset(all.subspan(0, n_train)), data.subset(all.subspan(n_train, n_val)),
            data.subset(all.subspan(n_train + n_val))};
}

// --- CSV --------------------------------------------------------------------

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream ss(line);
    while (std::getline(ss, cur, ',')) out.push_back(cur);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

} // namespace

Dataset load_csv(const std::filesystem::path& path, std::string_view target_column,
                 Normalization normalization) {
    std::ifstream in(path);
    if (!in) throw CsvError("cannot open " + path.string(), 0, 0);

    std::string line;
    if (!std::getline(in, line)) throw CsvError(path.string() + ": missing header row", 1, 0);
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    std::vector<std::string> header = split_fields(line);
    for (auto& h : header) h = trim(h);

    const auto target_it = std::find(header.begin(), header.end(), target_column);
    if (target_it == header.end()) {
        throw CsvError(path.string() + ": target column '" + std::string(target_column) + "' not in header", 1, 0);
    }
    const auto target_idx = static_cast<std::size_t>(target_it - header.begin());
    const std::size_t m = header.size() - 1;

    Vector xs;
    Vector ys;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != header.size()) {
            throw CsvError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                               std::to_string(header.size()) + " fields, got " + std::to_string(fields.size()),
                           line_no, fields.size());
        }
        for (std::size_t c = 0; c < fields.size(); ++c) {
            const std::string f = trim(fields[c]);
            double v = 0.0;
            const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
            if (f.empty() || res.ec != std::errc() || res.ptr != f.data() + f.size() || !std::isfinite(v)) {
                throw CsvError(path.string() + ":" + std::to_string(line_no) + ": column " +
                                   std::to_string(c + 1) + " ('" + header[c] + "') is not a number: '" + f + "'",
                               line_no, c + 1);
            }
            if (c == target_idx) {
                ys.push_back(v);
            } else {
                xs.push_back(v);
            }
        }
    }
    if (ys.empty()) throw CsvError(path.string() + ": no data rows", line_no, 0);

    Dataset d;
    d.x = Matrix(ys.size(), m, std::move(xs));
    d.y = std::move(ys);
    d.meta.source = "csv";
    d.meta.n = d.y.size();
    d.meta.target_name = std::string(target_column);
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (c != target_idx) d.meta.feature_names.push_back(header[c]);
    }
    d.meta.normalization = normalization;
    if (normalization != Normalization::None) {
        for (std::size_t j = 0; j < m; ++j) {
            const Vector col = d.x.column(j);
            double offset = 0.0;
            double scale = 1.0;
            if (normalization == Normalization::MinMax) {
                const auto [lo, hi] = std::minmax_element(col.begin(), col.end());
                offset = *lo;
                scale = *hi - *lo;
            } else {
                const double mean = std::accumulate(col.begin(), col.end(), 0.0) / static_cast<double>(col.size());
                double ss = 0.0;
                for (double v : col) ss += (v - mean) * (v - mean);
                offset = mean;
                scale = std::sqrt(ss / static_cast<double>(col.size()));
            }
            if (!(scale > 0.0)) scale = 1.0; // constant column
            for (std::size_t i = 0; i < d.x.rows(); ++i) d.x(i, j) = (d.x(i, j) - offset) / scale;
            d.meta.normalization_params.emplace_back(offset, scale);
        }
    }
    return d;
}

void write_csv(const std::filesystem::path& path, const Dataset& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    std::vector<std::string> names = data.meta.feature_names;
    if (names.size() != data.features()) {
        names.clear();
        for (std::size_t j = 0; j < data.features(); ++j) names.push_back("x" + std::to_string(j + 1));
    }
    for (const auto& n : names) out << n << ',';
    out << data.meta.target_name << '\n';
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (double v : data.x.row(i)) out << format_double(v) << ',';
        out << format_double(data.y[i]) << '\n';
    }
}

void write_quantiles_csv(const std::filesystem::path& path, const Matrix& q, const QuantileGrid& grid) {
    if (q.cols() != grid.size()) throw std::invalid_argument("write_quantiles_csv: width mismatch");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    for (std::size_t k = 0; k < grid.size(); ++k) out << (k ? "," : "") << "q" << format_double(grid[k]);
    out << '\n';
    for (std::size_t i = 0; i < q.rows(); ++i) {
        for (std::size_t k = 0; k < q.cols(); ++k) out << (k ? "," : "") << format_double(q(i, k));
        out << '\n';
    }
}

void write_meta(const std::filesystem::path& path, const DatasetMeta& meta) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << nlohmann::json(meta).dump(2) << '\n';
}

DatasetMeta read_meta(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return nlohmann::json::parse(in).get<DatasetMeta>();
}

std::filesystem::path meta_path_for(const std::filesystem::path& csv_path) {
    auto p = csv_path;
    p.replace_extension(".meta.json");
    return p;
}

} // namespace scqr

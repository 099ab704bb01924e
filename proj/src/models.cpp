#include "scqr/models.hpp"

#include <cctype>
#include <cmath>
#include <stdexcept>

#include "scqr/serialization.hpp"

namespace scqr {

std::string to_string(Family f) {
    switch (f) {
    case Family::CQRNN: return "CQRNN";
    case Family::CQRNNse: return "CQRNNse";
    case Family::SCQRNN: return "SCQRNN";
    case Family::MCQRNN: return "MCQRNN";
    }
    return "?";
}

Family family_from_name(std::string_view name) {
    std::string lower(name);
    for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (lower == "cqrnn") return Family::CQRNN;
    if (lower == "cqrnnse") return Family::CQRNNse;
    if (lower == "scqrnn") return Family::SCQRNN;
    if (lower == "mcqrnn") return Family::MCQRNN;
    throw std::invalid_argument("unknown model family '" + std::string(name) +
                                "' (expected CQRNN, CQRNNse, SCQRNN or MCQRNN)");
}

std::vector<std::size_t> ModelSpec::network_widths() const {
    std::vector<std::size_t> w;
    w.push_back(sample_width());
    w.insert(w.end(), hidden_widths.begin(), hidden_widths.end());
    w.push_back(family == Family::MCQRNN ? 1 : grid.size());
    return w;
}

std::size_t ModelSpec::sample_width() const {
    return family == Family::MCQRNN ? input_width + 1 : input_width;
}

DesignMatrix build_design_matrix(const Matrix& x, std::span<const double> y, const QuantileGrid& grid) {
    const std::size_t n = x.rows();
    const std::size_t m = x.cols();
    if (n == 0) throw std::invalid_argument("build_design_matrix: need at least one sample");
    if (y.size() != n) {
        throw std::invalid_argument("build_design_matrix: " + std::to_string(y.size()) +
                                    " targets for " + std::to_string(n) + " samples");
    }
    const std::size_t t = grid.size();
    DesignMatrix d{Matrix(m + 1, t * n), Vector(t * n)};
    for (std::size_t k = 0; k < t; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t col = k * n + i;
            d.features(0, col) = grid[k];
            for (std::size_t j = 0; j < m; ++j) d.features(j + 1, col) = x(i, j);
            d.targets[col] = y[i];
        }
    }
    return d;
}

NetworkConfig Model::network_config(const ModelSpec& spec) {
    if (spec.input_width == 0) throw std::invalid_argument("ModelSpec: input width must be positive");
    for (auto w : spec.hidden_widths) {
        if (w == 0) throw std::invalid_argument("ModelSpec: hidden widths must be positive");
    }
    NetworkConfig c;
    c.widths = spec.network_widths();
    c.hidden_activation = spec.activation;
    c.output_activation = Activation::Identity;
    if (spec.family == Family::MCQRNN) {
        c.monotone_inputs.assign(spec.input_width + 1, false);
        c.monotone_inputs[0] = true;
        for (auto f : spec.monotone_features) {
            if (f >= spec.input_width) {
                throw std::invalid_argument("ModelSpec: monotone feature index " + std::to_string(f) +
                                            " out of range");
            }
            c.monotone_inputs[f + 1] = true;
        }
    } else if (!spec.monotone_features.empty()) {
        throw std::invalid_argument("ModelSpec: monotone features apply to MCQRNN only");
    }
    return c;
}

Model::Model(ModelSpec spec, std::uint64_t seed)
    : spec_(std::move(spec)), net_([&] {
          Rng rng(seed);
          return Network(network_config(spec_), rng, spec_.init);
      }()),
      sort_(spec_.sort_mode) {}

Model::Model(ModelSpec spec, Parameters params)
    : spec_(std::move(spec)), net_(network_config(spec_), std::move(params)), sort_(spec_.sort_mode) {}

void Model::validate_input(const Matrix& x) const {
    if (x.cols() != spec_.input_width) {
        throw std::invalid_argument(to_string(spec_.family) + ": input " + x.shape_string() +
                                    " does not have " + std::to_string(spec_.input_width) + " features");
    }
}

Matrix Model::training_rows(const Matrix& x) const {
    validate_input(x);
    if (spec_.family != Family::MCQRNN) return x;
    const Vector dummy(x.rows(), 0.0);
    return build_design_matrix(x, dummy, spec_.grid).sample_rows();
}

Vector Model::training_targets(std::span<const double> y) const {
    if (spec_.family != Family::MCQRNN) return Vector(y.begin(), y.end());
    Vector out;
    out.reserve(y.size() * spec_.grid.size());
    for (std::size_t k = 0; k < spec_.grid.size(); ++k) out.insert(out.end(), y.begin(), y.end());
    return out;
}

Matrix Model::predict_unsorted(const Matrix& x) const {
    validate_input(x);
    Matrix out;
    if (spec_.family == Family::MCQRNN) {
        const std::size_t n = x.rows();
        const std::size_t t = spec_.grid.size();
        const Matrix flat = net_.infer(training_rows(x));
        out = Matrix(n, t);
        for (std::size_t k = 0; k < t; ++k) {
            for (std::size_t i = 0; i < n; ++i) out(i, k) = flat(k * n + i, 0);
        }
    } else {
        out = net_.infer(x);
    }
    if (!out.all_finite()) {
        throw std::domain_error(to_string(spec_.family) +
                                ": non-finite predictions (parameters may have diverged)");
    }
    return out;
}

Matrix Model::predict(const Matrix& x) const {
    Matrix raw = predict_unsorted(x);
    switch (spec_.family) {
    case Family::CQRNN:
    case Family::MCQRNN: return raw;
    case Family::CQRNNse: return SortLayer(SortMode::hard()).infer(raw);
    case Family::SCQRNN: return sort_.infer(raw);
    }
    return raw;
}

double Model::evaluate_loss(const Matrix& x, std::span<const double> y) const {
    return composite_loss(predict(x), y, spec_.grid);
}

double Model::compute_gradients(const Matrix& batch_x, std::span<const double> batch_y) {
    if (batch_x.cols() != spec_.sample_width()) {
        throw std::invalid_argument(to_string(spec_.family) + ": training batch " +
                                    batch_x.shape_string() + " must have " +
                                    std::to_string(spec_.sample_width()) + " columns");
    }
    if (batch_x.rows() != batch_y.size() || batch_y.empty()) {
        throw std::invalid_argument("train_step: batch rows and targets disagree");
    }
    Matrix out = net_.forward(batch_x);
    double loss = 0.0;
    switch (spec_.family) {
    case Family::CQRNN:
    case Family::CQRNNse: {
        loss = composite_loss(out, batch_y, spec_.grid, spec_.smoothing);
        net_.backward(composite_loss_grad(out, batch_y, spec_.grid, spec_.smoothing));
        break;
    }
    case Family::SCQRNN: {
        const Matrix sorted = sort_.forward(out);
        loss = composite_loss(sorted, batch_y, spec_.grid, spec_.smoothing);
        net_.backward(sort_.backward(composite_loss_grad(sorted, batch_y, spec_.grid, spec_.smoothing)));
        break;
    }
    case Family::MCQRNN: {
        const Vector taus = batch_x.column(0);
        const auto pred = out.data();
        loss = paired_tau_loss(pred, batch_y, taus, spec_.smoothing);
        Vector g = paired_tau_loss_grad(pred, batch_y, taus, spec_.smoothing);
        const std::size_t rows = g.size();
        net_.backward(Matrix(rows, 1, std::move(g)));
        break;
    }
    }
    return loss;
}

double Model::train_step(const Matrix& batch_x, std::span<const double> batch_y, Adam& optimizer) {
    const double loss = compute_gradients(batch_x, batch_y);
    if (!std::isfinite(loss)) {
        throw std::domain_error(to_string(spec_.family) + ": non-finite training loss");
    }
    const auto params = net_.parameter_blocks();
    const auto grads = net_.gradient_blocks();
    optimizer.step(params, grads);
    net_.sync();
    return loss;
}

void Model::save(const std::filesystem::path& path) const {
    nlohmann::json header;
    header["format"] = "scqr-model";
    header["version"] = 1;
    header["spec"] = spec_;
    header["widths"] = net_.config().widths;
    header["activation"] = to_string(spec_.activation);
    header["family"] = to_string(spec_.family);
    header["monotone_mask"] = net_.config().monotone_inputs;
    write_parameter_file(path, header, net_.flat_parameters());
}

Model Model::load(const std::filesystem::path& path) {
    auto [header, flat] = read_parameter_file(path);
    if (header.value("format", "") != "scqr-model") {
        throw std::runtime_error("Model::load: " + path.string() + " is not a model file");
    }
    ModelSpec spec = header.at("spec").get<ModelSpec>();
    Rng unused(0);
    Parameters params = init_params(spec.network_widths(), unused, spec.init);
    params.assign(flat);
    return Model(std::move(spec), std::move(params));
}

} // namespace scqr

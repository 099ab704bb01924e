#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "scqr/datasets.hpp"
#include "scqr/experiments.hpp"
#include "scqr/losses.hpp"
#include "scqr/metrics.hpp"
#include "scqr/models.hpp"
#include "scqr/serialization.hpp"
#include "scqr/sorting.hpp"
#include "scqr/training.hpp"

namespace py = pybind11;
using namespace scqr;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const Array& a) {
    if (a.ndim() == 1) {
        // a single feature column
        return Matrix(static_cast<std::size_t>(a.shape(0)), 1, Vector(a.data(), a.data() + a.size()));
    }
    if (a.ndim() != 2) throw std::invalid_argument("expected a 1-d or 2-d array");
    return Matrix(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)),
                  Vector(a.data(), a.data() + a.size()));
}

Vector to_vector(const Array& a) {
    if (a.ndim() != 1) throw std::invalid_argument("expected a 1-d array");
    return Vector(a.data(), a.data() + a.size());
}

Array from_matrix(const Matrix& m) {
    Array out({m.rows(), m.cols()});
    std::copy(m.data().begin(), m.data().end(), out.mutable_data());
    return out;
}

Array from_vector(std::span<const double> v) {
    Array out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

py::object to_python(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

QuantileGrid grid_from(const std::optional<std::vector<double>>& taus) {
    return taus ? QuantileGrid(*taus) : QuantileGrid::standard();
}

Model make_model(const std::string& family, std::size_t input_width, std::vector<std::size_t> hidden_widths,
                 std::uint64_t seed, const std::string& sort_mode, const std::optional<std::vector<double>>& taus,
                 std::optional<double> smoothing, const std::string& activation) {
    ModelSpec spec;
    spec.family = family_from_name(family);
    spec.input_width = input_width;
    spec.hidden_widths = std::move(hidden_widths);
    spec.sort_mode = SortMode::parse(sort_mode);
    spec.grid = grid_from(taus);
    spec.smoothing = smoothing;
    spec.activation = activation_from_name(activation);
    return Model(spec, seed);
}

py::object fit_model(Model& model, const Array& x_train, const Array& y_train, const Array& x_val,
                      const Array& y_val, double lr, double weight_decay, std::size_t batch_size,
                      std::size_t max_epochs, std::optional<std::size_t> patience, std::optional<double> threshold,
                      std::uint64_t seed) {
    Dataset train, val;
    train.x = to_matrix(x_train);
    train.y = to_vector(y_train);
    val.x = to_matrix(x_val);
    val.y = to_vector(y_val);
    FitConfig cfg;
    cfg.adam.lr = lr;
    cfg.adam.weight_decay = weight_decay;
    cfg.batch_size = batch_size;
    cfg.stop.max_epochs = max_epochs;
    if (patience) {
        cfg.stop.early_stopping = EarlyStopping{*patience, 0.0, true};
    } else {
        cfg.stop.early_stopping.reset();
    }
    cfg.stop.threshold = threshold;
    cfg.seed = seed;
    TrainingReport report;
    {
        py::gil_scoped_release release;
        report = fit(model, train, val, cfg);
    }
    return to_python(report_to_json(report));
}

std::string run_experiment(const std::string& kind, const std::string& config_json) {
    ExperimentConfig c;
    if (kind == "exp1") c = default_exp1_config();
    else if (kind == "exp2") c = default_exp2_config();
    else if (kind == "bench") c = default_bench_config();
    else throw std::invalid_argument("unknown experiment '" + kind + "'");
    apply_json(c, nlohmann::json::parse(config_json));
    py::gil_scoped_release release;
    const auto t0 = std::chrono::steady_clock::now();
    const auto seconds = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };
    if (kind == "exp1") {
        write_exp1(c, run_experiment1(c), seconds());
    } else if (kind == "exp2") {
        write_exp2(c, run_experiment2(c), seconds());
    } else {
        write_bench(c, run_complexity_bench(c));
    }
    return c.out_dir.string();
}

} // namespace

PYBIND11_MODULE(_scqr, m) {
    m.doc() = "Sorting composite quantile regression networks";

    m.def(
        "hard_sort",
        [](const Array& x) {
            const auto r = hard_sort(to_vector(x));
            return py::make_tuple(from_vector(r.values), r.perm);
        },
        py::arg("x"), "Ascending stable sort; returns (values, perm) with out[j] = x[perm[j]].");
    m.def(
        "soft_sort", [](const Array& x, double epsilon) { return from_vector(soft_sort(to_vector(x), epsilon).values); },
        py::arg("x"), py::arg("epsilon") = 0.1, "Ascending soft sort via the permutahedron projection.");
    m.def(
        "isotonic_regression", [](const Array& y) { return from_vector(isotonic_regression(to_vector(y)).values); },
        py::arg("y"));
    m.def(
        "composite_loss",
        [](const Array& pred, const Array& y, std::optional<std::vector<double>> taus, std::optional<double> smoothing) {
            return composite_loss(to_matrix(pred), to_vector(y), grid_from(taus), smoothing);
        },
        py::arg("pred"), py::arg("y"), py::arg("taus") = py::none(), py::arg("smoothing") = py::none());
    m.def(
        "evaluate",
        [](const Array& pred, const Array& y, std::optional<std::vector<double>> taus, std::optional<Array> ideal) {
            const Matrix p = to_matrix(pred);
            std::optional<Matrix> q;
            if (ideal) q = to_matrix(*ideal);
            return to_python(eval_to_json(evaluate(p, to_vector(y), grid_from(taus), q ? &*q : nullptr)));
        },
        py::arg("pred"), py::arg("y"), py::arg("taus") = py::none(), py::arg("ideal") = py::none());
    m.def(
        "quantile", [](const std::string& dist, double tau) { return ErrorDistribution::from_name(dist).quantile(tau); },
        py::arg("dist"), py::arg("tau"));
    m.def(
        "cdf", [](const std::string& dist, double x) { return ErrorDistribution::from_name(dist).cdf(x); },
        py::arg("dist"), py::arg("x"));
    m.def(
        "generate",
        [](int example, const std::string& dist, std::size_t n, std::uint64_t seed) {
            Rng rng(seed);
            const Dataset d = generate(example_from_index(example), ErrorDistribution::from_name(dist), n, rng);
            py::dict out;
            out["x"] = from_matrix(d.x);
            out["y"] = from_vector(d.y);
            out["ideal"] = from_matrix(*d.ideal);
            return out;
        },
        py::arg("example"), py::arg("dist"), py::arg("n"), py::arg("seed") = 0,
        "Synthetic example data with ideal quantiles on the 19-level grid.");

    py::class_<Model>(m, "Model")
        .def(py::init(&make_model), py::arg("family"), py::arg("input_width"),
             py::arg("hidden_widths") = std::vector<std::size_t>{5, 5}, py::arg("seed") = 0,
             py::arg("sort_mode") = "hard", py::arg("taus") = py::none(), py::arg("smoothing") = py::none(),
             py::arg("activation") = "tanh")
        .def_property_readonly("family", [](const Model& self) { return to_string(self.family()); })
        .def_property_readonly("taus", [](const Model& self) { return self.spec().grid.taus(); })
        .def_property_readonly("parameter_count",
                               [](const Model& self) { return self.network().parameter_count(); })
        .def("predict", [](const Model& self, const Array& x) { return from_matrix(self.predict(to_matrix(x))); },
             py::arg("x"))
        .def("predict_unsorted",
             [](const Model& self, const Array& x) { return from_matrix(self.predict_unsorted(to_matrix(x))); },
             py::arg("x"))
        .def("loss",
             [](const Model& self, const Array& x, const Array& y) {
                 return self.evaluate_loss(to_matrix(x), to_vector(y));
             },
             py::arg("x"), py::arg("y"))
        .def("fit", &fit_model, py::arg("x_train"), py::arg("y_train"), py::arg("x_val"), py::arg("y_val"),
             py::arg("lr") = 0.01, py::arg("weight_decay") = 0.05, py::arg("batch_size") = 16,
             py::arg("max_epochs") = 2000, py::arg("patience") = 20, py::arg("threshold") = py::none(),
             py::arg("seed") = 0, "Trains in place and returns the training report as a dict.")
        .def("save", [](const Model& self, const std::filesystem::path& path) { self.save(path); }, py::arg("path"))
        .def_static("load", [](const std::filesystem::path& path) { return Model::load(path); }, py::arg("path"));

    m.def("run_experiment", &run_experiment, py::arg("kind"), py::arg("config_json"),
          "Runs exp1, exp2 or bench with overrides from a JSON object and writes the results; returns out_dir.");

    // argument domain errors are ValueError in Python, not IndexError
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const std::out_of_range& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        }
    });
    py::register_exception<CsvError>(m, "CsvError", PyExc_ValueError);
    py::register_exception<TrainingError>(m, "TrainingError", PyExc_RuntimeError);
}

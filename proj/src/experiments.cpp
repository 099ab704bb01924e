#include "scqr/experiments.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <mutex>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "scqr/serialization.hpp"

namespace scqr {

using nlohmann::json;

namespace {

constexpr std::uint64_t kDataStream = 0xDA7A;

// Runs task(i) for i in [0, count) on up to `threads` workers.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& task) {
    threads = std::max<std::size_t>(1, std::min(threads, count));
    if (threads == 1) {
        for (std::size_t i = 0; i < count; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mutex;
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    task(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

FitConfig fit_config(const ExperimentConfig& c, std::uint64_t seed) {
    FitConfig f;
    f.batch_size = c.batch_size;
    f.adam.lr = c.lr;
    f.adam.weight_decay = c.weight_decay;
    f.adam.decoupled_decay = c.decoupled_decay;
    f.stop.max_epochs = c.max_epochs;
    f.stop.threshold = c.threshold;
    if (c.early_stopping) {
        f.stop.early_stopping = EarlyStopping{c.patience, c.min_delta, true};
    } else {
        f.stop.early_stopping.reset();
    }
    f.seed = seed;
    return f;
}

ModelSpec model_spec(const ExperimentConfig& c, Family family, std::size_t input_width,
                     std::vector<std::size_t> widths) {
    ModelSpec s;
    s.family = family;
    s.input_width = input_width;
    s.hidden_widths = std::move(widths);
    s.activation = c.activation;
    s.grid = c.grid;
    s.sort_mode = c.sort_mode;
    s.smoothing = c.smoothing;
    return s;
}

std::vector<std::size_t> exp1_widths(const ExperimentConfig& c, Example e) {
    if (!c.widths.empty()) return c.widths;
    return e == Example::Example0 ? std::vector<std::size_t>{4, 4} : std::vector<std::size_t>{5, 5};
}

json optional_number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

template <class T>
std::vector<std::string> names_of(const std::vector<T>& items) {
    std::vector<std::string> out;
    for (const auto& i : items) out.push_back(to_string(i));
    return out;
}

void ensure_dir(const std::filesystem::path& dir) { std::filesystem::create_directories(dir); }

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

} // namespace

double sample_quantile(std::vector<double> values, double q) {
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

double median(std::vector<double> values) { return sample_quantile(std::move(values), 0.5); }

// --- Configuration ----------------------------------------------------------

ExperimentConfig default_exp1_config() {
    ExperimentConfig c;
    c.experiment = "exp1";
    c.out_dir = "out/exp1";
    return c;
}

ExperimentConfig default_exp2_config() {
    ExperimentConfig c;
    c.experiment = "exp2";
    c.families = {Family::SCQRNN, Family::CQRNN};
    c.examples = {Example::Example2};
    c.dists = {"normal"};
    c.widths = {64, 32, 16};
    c.lr = 0.001;
    c.weight_decay = 0.005;
    c.early_stopping = false;
    c.threshold = 0.73;
    c.runs = 100;
    c.out_dir = "out/exp2";
    return c;
}

ExperimentConfig paper_scale_exp2_config() {
    ExperimentConfig c = default_exp2_config();
    c.widths = {600, 300, 150};
    c.lr = 1e-4;
    c.weight_decay = 0.005;
    c.threshold = 0.05;
    c.runs = 1000;
    return c;
}

ExperimentConfig default_bench_config() {
    ExperimentConfig c;
    c.experiment = "bench";
    c.families = {Family::SCQRNN, Family::MCQRNN};
    c.out_dir = "out/bench";
    return c;
}

json to_json(const ExperimentConfig& c) {
    json dists = c.dists;
    std::vector<int> examples;
    for (auto e : c.examples) examples.push_back(static_cast<int>(e));
    return json{
        {"experiment", c.experiment},
        {"families", names_of(c.families)},
        {"examples", examples},
        {"dists", dists},
        {"csv_path", c.csv_path ? json(c.csv_path->string()) : json(nullptr)},
        {"target_column", c.target_column},
        {"normalization", to_string(c.normalization)},
        {"n_samples", c.n_samples},
        {"widths", c.widths},
        {"activation", to_string(c.activation)},
        {"grid", c.grid},
        {"lr", c.lr},
        {"weight_decay", c.weight_decay},
        {"decoupled_decay", c.decoupled_decay},
        {"batch_size", c.batch_size},
        {"early_stopping", c.early_stopping},
        {"patience", c.patience},
        {"min_delta", c.min_delta},
        {"restore_best_weights", true},
        {"threshold", c.threshold ? json(*c.threshold) : json(nullptr)},
        {"validation_metric", "composite_pinball_unsmoothed"},
        {"max_epochs", c.max_epochs},
        {"runs", c.runs},
        {"base_seed", c.base_seed},
        {"data_seed", c.data_seed},
        {"sort_mode", c.sort_mode},
        {"smoothing", c.smoothing ? json(*c.smoothing) : json(nullptr)},
        {"bench_layer_widths", c.bench_layer_widths},
        {"bench_quantile_counts", c.bench_quantile_counts},
        {"bench_depth", c.bench_depth},
        {"bench_input_width", c.bench_input_width},
        {"bench_repetitions", c.bench_repetitions},
        {"bench_warmup", c.bench_warmup},
    };
}

void apply_json(ExperimentConfig& c, const json& j) {
    if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
    for (const auto& [key, v] : j.items()) {
        if (key == "experiment") c.experiment = v.get<std::string>();
        else if (key == "families") {
            c.families.clear();
            for (const auto& f : v) c.families.push_back(family_from_name(f.get<std::string>()));
        } else if (key == "examples") {
            c.examples.clear();
            for (const auto& e : v) c.examples.push_back(example_from_index(e.get<int>()));
        } else if (key == "dists") {
            c.dists = v.get<std::vector<std::string>>();
            for (const auto& d : c.dists) ErrorDistribution::from_name(d);
        } else if (key == "csv_path") {
            if (v.is_null()) c.csv_path.reset();
            else c.csv_path = v.get<std::string>();
        } else if (key == "target_column") c.target_column = v.get<std::string>();
        else if (key == "normalization") c.normalization = normalization_from_name(v.get<std::string>());
        else if (key == "n_samples") c.n_samples = v.get<std::size_t>();
        else if (key == "widths") c.widths = v.get<std::vector<std::size_t>>();
        else if (key == "activation") c.activation = activation_from_name(v.get<std::string>());
        else if (key == "grid") c.grid = v.get<QuantileGrid>();
        else if (key == "lr") c.lr = v.get<double>();
        else if (key == "weight_decay") c.weight_decay = v.get<double>();
        else if (key == "decoupled_decay") c.decoupled_decay = v.get<bool>();
        else if (key == "batch_size") c.batch_size = v.get<std::size_t>();
        else if (key == "early_stopping") c.early_stopping = v.get<bool>();
        else if (key == "patience") c.patience = v.get<std::size_t>();
        else if (key == "min_delta") c.min_delta = v.get<double>();
        else if (key == "restore_best_weights" || key == "validation_metric") {
            // informational, fixed
        } else if (key == "threshold") {
            if (v.is_null()) c.threshold.reset();
            else c.threshold = v.get<double>();
        } else if (key == "max_epochs") c.max_epochs = v.get<std::size_t>();
        else if (key == "runs") c.runs = v.get<std::size_t>();
        else if (key == "base_seed") c.base_seed = v.get<std::uint64_t>();
        else if (key == "data_seed") c.data_seed = v.get<std::uint64_t>();
        else if (key == "sort_mode") c.sort_mode = v.get<SortMode>();
        else if (key == "smoothing") {
            if (v.is_null()) c.smoothing.reset();
            else c.smoothing = v.get<double>();
        } else if (key == "threads") c.threads = v.get<std::size_t>();
        else if (key == "bench_layer_widths") c.bench_layer_widths = v.get<std::vector<std::size_t>>();
        else if (key == "bench_quantile_counts") c.bench_quantile_counts = v.get<std::vector<std::size_t>>();
        else if (key == "bench_depth") c.bench_depth = v.get<std::size_t>();
        else if (key == "bench_input_width") c.bench_input_width = v.get<std::size_t>();
        else if (key == "bench_repetitions") c.bench_repetitions = v.get<std::size_t>();
        else if (key == "bench_warmup") c.bench_warmup = v.get<std::size_t>();
        else if (key == "out_dir") c.out_dir = v.get<std::string>();
        else throw std::invalid_argument("config: unknown key '" + key + "'");
    }
    if (c.runs == 0) throw std::invalid_argument("config: runs must be at least 1");
}

// --- Experiment 1 -----------------------------------------------------------

namespace {

std::vector<RunRecord> exp1_task(const ExperimentConfig& c, std::size_t run, Example example,
                                 std::size_t ex_idx, const std::string& dist_name, std::size_t dist_idx) {
    const std::uint64_t run_seed = derive_seed(c.base_seed, run);
    const std::uint64_t cell = 1 + ex_idx * 16 + dist_idx;
    const ErrorDistribution dist = ErrorDistribution::from_name(dist_name);

    Rng data_rng(derive_seed(run_seed, cell));
    const Dataset data = generate(example, dist, c.n_samples, data_rng, c.grid);
    const std::array<double, 3> thirds{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    const Split parts = split(data, thirds, data_rng);
    const std::uint64_t model_seed = derive_seed(run_seed, 0x1000 + cell);
    const auto widths = exp1_widths(c, example);

    auto base_record = [&](Family f) {
        RunRecord r;
        r.run = run;
        r.seed = run_seed;
        r.family = f;
        r.example = example;
        r.dist = dist.label();
        r.dataset = to_string(example) + "/" + dist.label();
        return r;
    };

    auto fail = [&](RunRecord r, const std::string& msg) {
        r.failed = true;
        r.stop_reason = "diverged";
        r.error = msg;
        return r;
    };

    auto has = [&](Family f) { return std::find(c.families.begin(), c.families.end(), f) != c.families.end(); };

    std::map<Family, RunRecord> out;

    auto train_and_eval = [&](Family train_family, const std::vector<Family>& report_as) {
        try {
            Model model(model_spec(c, train_family, input_dim(example), widths), model_seed);
            const TrainingReport rep = fit(model, parts.train, parts.val, fit_config(c, model_seed));
            const Matrix raw = model.predict(parts.test.x);
            for (Family f : report_as) {
                RunRecord r = base_record(f);
                const Matrix pred = f == Family::CQRNNse ? SortLayer(SortMode::hard()).infer(raw) : raw;
                r.eval = evaluate(pred, parts.test.y, c.grid, &*parts.test.ideal);
                r.epochs = rep.epochs_run;
                r.stop_reason = to_string(rep.stop_reason);
                r.val_loss = rep.val_loss;
                out[f] = std::move(r);
            }
        } catch (const std::exception& e) {
            for (Family f : report_as) out[f] = fail(base_record(f), e.what());
        }
    };

    std::vector<Family> unsorted_group;
    if (has(Family::CQRNN)) unsorted_group.push_back(Family::CQRNN);
    if (has(Family::CQRNNse)) unsorted_group.push_back(Family::CQRNNse);
    if (!unsorted_group.empty()) train_and_eval(Family::CQRNN, unsorted_group);
    if (has(Family::SCQRNN)) train_and_eval(Family::SCQRNN, {Family::SCQRNN});
    if (has(Family::MCQRNN)) train_and_eval(Family::MCQRNN, {Family::MCQRNN});

    std::vector<RunRecord> records;
    for (Family f : c.families) {
        if (out.count(f)) records.push_back(out[f]);
    }
    return records;
}

} // namespace

Exp1Result run_experiment1(const ExperimentConfig& c) {
    if (c.runs == 0) throw std::invalid_argument("exp1: runs must be at least 1");
    struct Task {
        std::size_t run, ex_idx, dist_idx;
    };
    std::vector<Task> tasks;
    for (std::size_t r = 0; r < c.runs; ++r) {
        for (std::size_t e = 0; e < c.examples.size(); ++e) {
            for (std::size_t d = 0; d < c.dists.size(); ++d) tasks.push_back({r, e, d});
        }
    }
    std::vector<std::vector<RunRecord>> results(tasks.size());
    parallel_for(tasks.size(), c.threads, [&](std::size_t i) {
        const Task& t = tasks[i];
        const Example ex = c.examples[t.ex_idx];
        results[i] = exp1_task(c, t.run, ex, static_cast<std::size_t>(ex), c.dists[t.dist_idx],
                               t.dist_idx);
    });
    Exp1Result out;
    for (auto& r : results) {
        for (auto& rec : r) out.records.push_back(std::move(rec));
    }
    out.cells = summarize_exp1(out.records);
    return out;
}

std::vector<CellSummary> summarize_exp1(const std::vector<RunRecord>& records) {
    std::vector<CellSummary> cells;
    std::map<std::tuple<int, std::string, int>, std::size_t> index;
    std::vector<std::vector<const RunRecord*>> members;
    for (const auto& r : records) {
        const auto key = std::make_tuple(static_cast<int>(r.example), r.dist, static_cast<int>(r.family));
        auto it = index.find(key);
        if (it == index.end()) {
            it = index.emplace(key, cells.size()).first;
            cells.push_back(CellSummary{r.family, r.example, r.dist});
            members.emplace_back();
        }
        members[it->second].push_back(&r);
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
        std::vector<double> rmse, rel, epochs;
        for (const RunRecord* r : members[i]) {
            if (r->failed) {
                ++cells[i].failed;
                continue;
            }
            ++cells[i].ok;
            if (r->eval.rmse) rmse.push_back(*r->eval.rmse);
            rel.push_back(r->eval.overall_reliability);
            epochs.push_back(static_cast<double>(r->epochs));
        }
        auto& c = cells[i];
        c.rmse_median = median(rmse);
        c.rmse_q05 = sample_quantile(rmse, 0.05);
        c.rmse_q95 = sample_quantile(rmse, 0.95);
        c.reliability_median = median(rel);
        c.reliability_q05 = sample_quantile(rel, 0.05);
        c.reliability_q95 = sample_quantile(rel, 0.95);
        c.epochs_median = median(epochs);
    }
    return cells;
}

// --- Experiment 2 -----------------------------------------------------------

void summarize_exp2(Exp2Result& result) {
    std::vector<double> ea, eb;
    result.a = {};
    result.b = {};
    result.ties = 0;
    for (const auto& r : result.runs) {
        ea.push_back(static_cast<double>(r.epochs_a));
        eb.push_back(static_cast<double>(r.epochs_b));
        if (!r.reached_a) ++result.a.capped;
        if (!r.reached_b) ++result.b.capped;
        if (r.epochs_a < r.epochs_b) ++result.a.faster;
        else if (r.epochs_b < r.epochs_a) ++result.b.faster;
        else ++result.ties;
    }
    auto stats = [](const std::vector<double>& v, RaceStats& s) {
        if (v.empty()) return;
        s.median = median(v);
        s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
        double ss = 0.0;
        for (double x : v) ss += (x - s.mean) * (x - s.mean);
        s.std = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
    };
    stats(ea, result.a);
    stats(eb, result.b);
}

Exp2Result run_experiment2(const ExperimentConfig& c) {
    if (c.runs == 0) throw std::invalid_argument("exp2: runs must be at least 1");
    if (c.families.size() != 2) throw std::invalid_argument("exp2: exactly two families are raced");
    if (!c.threshold) throw std::invalid_argument("exp2: a validation-loss threshold is required");

    Rng data_rng(derive_seed(c.data_seed, kDataStream));
    Dataset data;
    if (c.csv_path) {
        if (!std::filesystem::exists(*c.csv_path)) {
            throw std::invalid_argument("exp2: data file " + c.csv_path->string() + " does not exist");
        }
        data = load_csv(*c.csv_path, c.target_column, c.normalization);
    } else {
        const Example ex = c.examples.empty() ? Example::Example2 : c.examples.front();
        const auto dist = ErrorDistribution::from_name(c.dists.empty() ? "normal" : c.dists.front());
        data = generate(ex, dist, c.n_samples, data_rng, c.grid);
    }
    const std::array<double, 3> thirds{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    const Split parts = split(data, thirds, data_rng);

    Exp2Result result;
    result.family_a = c.families[0];
    result.family_b = c.families[1];
    result.runs.resize(c.runs);
    const std::vector<std::size_t> widths = c.widths.empty() ? std::vector<std::size_t>{64, 32, 16} : c.widths;

    parallel_for(c.runs, c.threads, [&](std::size_t r) {
        RaceRun& rr = result.runs[r];
        rr.run = r;
        rr.seed = derive_seed(c.base_seed, r);
        auto race = [&](Family f, std::size_t& epochs, bool& reached, double& last, std::vector<double>& curve) {
            Model model(model_spec(c, f, data.features(), widths), rr.seed);
            try {
                const TrainingReport rep = fit(model, parts.train, parts.val, fit_config(c, rr.seed));
                epochs = rep.epochs_run;
                reached = rep.threshold_reached;
                curve = rep.val_loss;
                last = curve.empty() ? std::numeric_limits<double>::quiet_NaN() : curve.back();
            } catch (const TrainingError& e) {
                epochs = e.epoch();
                reached = false;
                last = std::numeric_limits<double>::quiet_NaN();
            }
        };
        race(result.family_a, rr.epochs_a, rr.reached_a, rr.final_val_a, rr.curve_a);
        race(result.family_b, rr.epochs_b, rr.reached_b, rr.final_val_b, rr.curve_b);
    });
    summarize_exp2(result);
    return result;
}

// --- Complexity benchmark ---------------------------------------------------

std::vector<BenchCell> run_complexity_bench(const ExperimentConfig& c) {
    using clock = std::chrono::steady_clock;
    std::vector<BenchCell> cells;
    Rng rng(derive_seed(c.base_seed, 0xBE4C));
    Matrix x(1, c.bench_input_width);
    for (auto& v : x.data()) v = rng.uniform(-1.0, 1.0);

    // Median over repetitions of the mean time of an inner loop long enough
    // to swamp clock overhead.
    auto time_ns = [&](const Model& model) {
        volatile double sink = 0.0;
        std::size_t inner = 1;
        for (;;) {
            const auto t0 = clock::now();
            for (std::size_t i = 0; i < inner; ++i) sink = sink + model.predict(x)(0, 0);
            const auto ns = std::chrono::duration<double, std::nano>(clock::now() - t0).count();
            if (ns > 20000.0 || inner >= (1u << 20)) break;
            inner *= 2;
        }
        for (std::size_t w = 0; w < c.bench_warmup; ++w) sink = sink + model.predict(x)(0, 0);
        std::vector<double> samples;
        samples.reserve(c.bench_repetitions);
        for (std::size_t rep = 0; rep < c.bench_repetitions; ++rep) {
            const auto t0 = clock::now();
            for (std::size_t i = 0; i < inner; ++i) sink = sink + model.predict(x)(0, 0);
            samples.push_back(std::chrono::duration<double, std::nano>(clock::now() - t0).count() /
                              static_cast<double>(inner));
        }
        return median(samples);
    };

    for (std::size_t l : c.bench_layer_widths) {
        for (std::size_t t : c.bench_quantile_counts) {
            ModelSpec spec;
            spec.input_width = c.bench_input_width;
            spec.hidden_widths.assign(c.bench_depth, l);
            spec.activation = c.activation;
            spec.grid = QuantileGrid::uniform(1.0 / static_cast<double>(t + 1), t);
            spec.sort_mode = c.sort_mode;
            spec.family = Family::SCQRNN;
            const Model sc(spec, c.base_seed);
            spec.family = Family::MCQRNN;
            const Model mc(spec, c.base_seed);
            BenchCell cell;
            cell.layer_width = l;
            cell.quantiles = t;
            cell.scqrnn_ns = time_ns(sc);
            cell.mcqrnn_ns = time_ns(mc);
            cells.push_back(cell);
        }
    }
    return cells;
}

// --- Output -----------------------------------------------------------------

void write_exp1(const ExperimentConfig& config, const Exp1Result& result, double wall_seconds) {
    ensure_dir(config.out_dir);
    write_text(config.out_dir / "config.json", to_json(config).dump(2) + "\n");

    std::string csv = "run,seed,family,example,dist,rmse,reliability,epochs,stop_reason\n";
    for (const auto& r : result.records) {
        csv += std::to_string(r.run) + "," + std::to_string(r.seed) + "," + to_string(r.family) + "," +
               std::to_string(static_cast<int>(r.example)) + "," + r.dist + ",";
        if (!r.failed) {
            csv += (r.eval.rmse ? format_double(*r.eval.rmse) : std::string()) + "," +
                   format_double(r.eval.overall_reliability);
        } else {
            csv += ",";
        }
        csv += "," + std::to_string(r.epochs) + "," + r.stop_reason + "\n";
    }
    write_text(config.out_dir / "runs.csv", csv);

    json cells = json::array();
    for (const auto& c : result.cells) {
        cells.push_back(json{
            {"family", to_string(c.family)},
            {"example", static_cast<int>(c.example)},
            {"dist", c.dist},
            {"ok", c.ok},
            {"failed", c.failed},
            {"rmse", {{"median", optional_number(c.rmse_median)},
                      {"q05", optional_number(c.rmse_q05)},
                      {"q95", optional_number(c.rmse_q95)}}},
            {"reliability", {{"median", optional_number(c.reliability_median)},
                             {"q05", optional_number(c.reliability_q05)},
                             {"q95", optional_number(c.reliability_q95)}}},
            {"epochs_median", optional_number(c.epochs_median)},
        });
    }
    json failures = json::array();
    for (const auto& r : result.records) {
        if (r.failed) failures.push_back({{"run", r.run}, {"family", to_string(r.family)}, {"dataset", r.dataset}, {"error", r.error}});
    }
    const json summary{{"experiment", "exp1"},
                       {"runs", config.runs},
                       {"records", result.records.size()},
                       {"quantile_method", "linear interpolation"},
                       {"cells", cells},
                       {"failures", failures}};
    write_text(config.out_dir / "summary.json", summary.dump(2) + "\n");
    write_text(config.out_dir / "timing.json", json{{"wall_clock_seconds", wall_seconds}}.dump(2) + "\n");
}

void write_exp2(const ExperimentConfig& config, const Exp2Result& result, double wall_seconds) {
    ensure_dir(config.out_dir);
    write_text(config.out_dir / "config.json", to_json(config).dump(2) + "\n");

    const std::string a = to_string(result.family_a);
    const std::string b = to_string(result.family_b);
    std::string runs = "run,seed,family,epochs,threshold_reached,final_val_loss\n";
    std::string curves = "run,family,epoch,val_loss\n";
    for (const auto& r : result.runs) {
        auto row = [&](const std::string& fam, std::size_t epochs, bool reached, double last) {
            runs += std::to_string(r.run) + "," + std::to_string(r.seed) + "," + fam + "," +
                    std::to_string(epochs) + "," + (reached ? "1" : "0") + "," +
                    (std::isfinite(last) ? format_double(last) : std::string()) + "\n";
        };
        row(a + (a == b ? "_a" : ""), r.epochs_a, r.reached_a, r.final_val_a);
        row(b + (a == b ? "_b" : ""), r.epochs_b, r.reached_b, r.final_val_b);
        for (std::size_t e = 0; e < r.curve_a.size(); ++e) {
            curves += std::to_string(r.run) + "," + a + (a == b ? "_a" : "") + "," + std::to_string(e + 1) + "," +
                      format_double(r.curve_a[e]) + "\n";
        }
        for (std::size_t e = 0; e < r.curve_b.size(); ++e) {
            curves += std::to_string(r.run) + "," + b + (a == b ? "_b" : "") + "," + std::to_string(e + 1) + "," +
                      format_double(r.curve_b[e]) + "\n";
        }
    }
    write_text(config.out_dir / "runs.csv", runs);
    write_text(config.out_dir / "curves.csv", curves);

    auto stats = [](const RaceStats& s) {
        return json{{"median", s.median}, {"mean", s.mean}, {"std", s.std}, {"faster", s.faster}, {"capped", s.capped}};
    };
    const json summary{{"experiment", "exp2"},
                       {"runs", result.runs.size()},
                       {"threshold", config.threshold ? json(*config.threshold) : json(nullptr)},
                       {"std_ddof", 1},
                       {"model_a", a},
                       {"model_b", b},
                       {"a", stats(result.a)},
                       {"b", stats(result.b)},
                       {"ties", result.ties}};
    write_text(config.out_dir / "summary.json", summary.dump(2) + "\n");
    write_text(config.out_dir / "timing.json", json{{"wall_clock_seconds", wall_seconds}}.dump(2) + "\n");
}

void write_bench(const ExperimentConfig& config, const std::vector<BenchCell>& cells) {
    ensure_dir(config.out_dir);
    write_text(config.out_dir / "config.json", to_json(config).dump(2) + "\n");
    std::string csv = "L,T,scqrnn_ns,mcqrnn_ns,ratio\n";
    json rows = json::array();
    for (const auto& c : cells) {
        csv += std::to_string(c.layer_width) + "," + std::to_string(c.quantiles) + "," +
               format_double(c.scqrnn_ns) + "," + format_double(c.mcqrnn_ns) + "," + format_double(c.ratio()) + "\n";
        rows.push_back({{"L", c.layer_width}, {"T", c.quantiles}, {"scqrnn_ns", c.scqrnn_ns},
                        {"mcqrnn_ns", c.mcqrnn_ns}, {"ratio", c.ratio()}});
    }
    write_text(config.out_dir / "bench.csv", csv);
    write_text(config.out_dir / "summary.json", json{{"experiment", "bench"}, {"cells", rows}}.dump(2) + "\n");
}

} // namespace scqr

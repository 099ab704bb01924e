// scqr: data generation, training, evaluation and the experiment drivers.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "scqr/datasets.hpp"
#include "scqr/diagnostics.hpp"
#include "scqr/experiments.hpp"
#include "scqr/metrics.hpp"
#include "scqr/models.hpp"
#include "scqr/serialization.hpp"
#include "scqr/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace scqr;

namespace {

struct Globals {
    std::optional<std::uint64_t> seed;
    std::optional<fs::path> config;
    std::optional<fs::path> out;
    std::string format = "json";
};

// Error with a stable machine-readable kind.
struct CliError : std::runtime_error {
    CliError(std::string kind, const std::string& msg) : std::runtime_error(msg), kind(std::move(kind)) {}
    std::string kind;
};

json read_json_file(const fs::path& path) {
    if (!fs::exists(path)) throw CliError("missing_file", "config file " + path.string() + " does not exist");
    std::ifstream in(path);
    if (!in) throw CliError("io_error", "cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw CliError("invalid_config", path.string() + ": " + e.what());
    }
}

std::vector<std::size_t> parse_widths(const std::string& text) {
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::size_t pos = 0;
        const unsigned long v = std::stoul(item, &pos);
        if (pos != item.size() || v == 0) throw CliError("invalid_argument", "bad width '" + item + "'");
        out.push_back(v);
    }
    return out;
}

void emit(const Globals& g, const json& summary, const std::string& csv) {
    if (g.format == "csv") {
        std::cout << csv;
    } else {
        std::cout << summary.dump(2) << '\n';
    }
}

std::string kv_csv(const json& obj) {
    std::string header, row;
    for (const auto& [k, v] : obj.items()) {
        if (v.is_structured()) continue;
        header += (header.empty() ? "" : ",") + k;
        row += (row.empty() ? "" : ",") + (v.is_string() ? v.get<std::string>() : v.dump());
    }
    return header + "\n" + row + "\n";
}

// Shared hyperparameter flags; values land in an ExperimentConfig and are
// applied only when given, so config files keep precedence over defaults.
struct HyperFlags {
    std::optional<std::string> widths, activation, sort_mode;
    std::optional<double> lr, weight_decay, threshold, smoothing, min_delta;
    std::optional<std::size_t> batch_size, patience, max_epochs, grid_count;
    bool no_early_stopping = false;
    bool decoupled = false;

    void add(CLI::App* app) {
        app->add_option("--widths", widths, "Hidden layer widths, e.g. 5,5");
        app->add_option("--activation", activation, "tanh, sigmoid, relu or identity");
        app->add_option("--sort-mode", sort_mode, "hard, soft or soft:<epsilon>");
        app->add_option("--lr", lr, "Adam learning rate");
        app->add_option("--weight-decay", weight_decay, "L2 weight decay");
        app->add_flag("--decoupled-decay", decoupled, "Decoupled (AdamW) weight decay");
        app->add_option("--batch-size", batch_size, "Mini-batch size");
        app->add_option("--patience", patience, "Early-stopping patience in epochs");
        app->add_option("--min-delta", min_delta, "Early-stopping minimum improvement");
        app->add_flag("--no-early-stopping", no_early_stopping, "Disable early stopping");
        app->add_option("--threshold", threshold, "Stop once validation loss falls below this");
        app->add_option("--max-epochs", max_epochs, "Epoch cap");
        app->add_option("--smoothing", smoothing, "Huber smoothing of the training loss (bare flag: 1e-3)")
            ->expected(0, 1)
            ->default_str("0.001");
        app->add_option("--quantiles", grid_count, "Number of levels in the uniform grid tau_i = i/(T+1)");
    }

    void apply(ExperimentConfig& c) const {
        if (widths) c.widths = parse_widths(*widths);
        if (activation) c.activation = activation_from_name(*activation);
        if (sort_mode) c.sort_mode = SortMode::parse(*sort_mode);
        if (lr) c.lr = *lr;
        if (weight_decay) c.weight_decay = *weight_decay;
        if (decoupled) c.decoupled_decay = true;
        if (batch_size) c.batch_size = *batch_size;
        if (patience) c.patience = *patience;
        if (min_delta) c.min_delta = *min_delta;
        if (no_early_stopping) c.early_stopping = false;
        if (threshold) c.threshold = *threshold;
        if (max_epochs) c.max_epochs = *max_epochs;
        if (smoothing) c.smoothing = *smoothing;
        if (grid_count) c.grid = QuantileGrid::uniform(1.0 / static_cast<double>(*grid_count + 1), *grid_count);
    }
};

ExperimentConfig resolve(ExperimentConfig base, const Globals& g) {
    if (g.config) apply_json(base, read_json_file(*g.config));
    if (g.seed) base.base_seed = *g.seed;
    if (g.out) base.out_dir = *g.out;
    return base;
}

FitConfig fit_from(const ExperimentConfig& c, std::uint64_t seed) {
    FitConfig f;
    f.batch_size = c.batch_size;
    f.adam.lr = c.lr;
    f.adam.weight_decay = c.weight_decay;
    f.adam.decoupled_decay = c.decoupled_decay;
    f.stop.threshold = c.threshold;
    f.stop.max_epochs = c.max_epochs;
    if (c.early_stopping) {
        f.stop.early_stopping = EarlyStopping{c.patience, c.min_delta, true};
    } else {
        f.stop.early_stopping.reset();
    }
    f.seed = seed;
    return f;
}

Dataset load_with_meta(const fs::path& path, const std::string& target) {
    if (!fs::exists(path)) throw CliError("missing_file", "data file " + path.string() + " does not exist");
    Dataset d = load_csv(path, target);
    const fs::path meta = meta_path_for(path);
    if (fs::exists(meta)) {
        d.meta = read_meta(meta);
        d.meta.n = d.size();
    }
    return d;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// --- Subcommands ------------------------------------------------------------

struct GenData {
    int example = 1;
    std::string dist = "normal";
    std::size_t n = 600;
    std::string name = "data.csv";
    bool ideal = false;
};

int run_gen_data(const Globals& g, const GenData& o) {
    const Example ex = example_from_index(o.example);
    const ErrorDistribution dist = ErrorDistribution::from_name(o.dist);
    const std::uint64_t seed = g.seed.value_or(0);
    const fs::path out = g.out.value_or(".");
    Rng rng(seed);
    Dataset d = generate(ex, dist, o.n, rng);
    d.meta.seed = seed;
    fs::create_directories(out);
    const fs::path csv = out / o.name;
    write_csv(csv, d);
    write_meta(meta_path_for(csv), d.meta);
    if (o.ideal) write_quantiles_csv(out / "ideal_quantiles.csv", *d.ideal, *d.ideal_grid);
    const json summary{{"path", csv.string()}, {"rows", d.size()}, {"columns", d.features() + 1},
                       {"example", o.example}, {"dist", dist.label()}, {"seed", seed}};
    emit(g, summary, kv_csv(summary));
    return 0;
}

struct Train {
    std::string data;
    std::string target = "y";
    std::string family = "SCQRNN";
    double val_fraction = 0.25;
    HyperFlags hyper;
};

int run_train(const Globals& g, const Train& o) {
    ExperimentConfig c = resolve(default_exp1_config(), g);
    o.hyper.apply(c);
    const fs::path out = g.out.value_or(".");
    const Dataset data = load_with_meta(o.data, o.target);
    if (!(o.val_fraction > 0.0 && o.val_fraction < 1.0)) {
        throw CliError("invalid_argument", "--val-fraction must lie in (0, 1)");
    }
    Rng rng(derive_seed(c.base_seed, 0x5917));
    std::vector<std::size_t> idx(data.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(idx));
    const auto n_val = static_cast<std::size_t>(std::llround(o.val_fraction * static_cast<double>(data.size())));
    if (n_val == 0 || n_val >= data.size()) throw CliError("invalid_argument", "too few rows to split");
    const std::span<const std::size_t> all(idx);
    const Dataset val = data.subset(all.subspan(0, n_val));
    const Dataset train = data.subset(all.subspan(n_val));

    ModelSpec spec;
    spec.family = family_from_name(o.family);
    spec.input_width = data.features();
    spec.hidden_widths = c.widths.empty() ? std::vector<std::size_t>{5, 5} : c.widths;
    spec.activation = c.activation;
    spec.grid = c.grid;
    spec.sort_mode = c.sort_mode;
    spec.smoothing = c.smoothing;

    Model model(spec, c.base_seed);
    const TrainingReport report = fit(model, train, val, fit_from(c, c.base_seed));
    fs::create_directories(out);
    model.save(out / "model.bin");
    json rep = report_to_json(report);
    rep["family"] = to_string(spec.family);
    std::ofstream(out / "report.json") << rep.dump(2) << '\n';

    const json summary{{"model", (out / "model.bin").string()},
                       {"family", to_string(spec.family)},
                       {"epochs_run", report.epochs_run},
                       {"stop_reason", to_string(report.stop_reason)},
                       {"final_val_loss", report.val_loss.empty() ? json(nullptr) : json(report.val_loss.back())}};
    emit(g, summary, kv_csv(summary));
    return 0;
}

struct Eval {
    std::string model;
    std::string data;
    std::string target = "y";
};

int run_eval(const Globals& g, const Eval& o) {
    if (!fs::exists(o.model)) throw CliError("missing_file", "model file " + o.model + " does not exist");
    const Model model = Model::load(o.model);
    const Dataset data = load_with_meta(o.data, o.target);
    const Matrix pred = model.predict(data.x);
    std::optional<Matrix> ideal;
    if (data.meta.example && data.meta.dist && data.meta.normalization == Normalization::None) {
        ideal = ideal_quantiles(data.meta, data.x, model.spec().grid);
    }
    const EvalResult r = evaluate(pred, data.y, model.spec().grid, ideal ? &*ideal : nullptr);
    json metrics = eval_to_json(r);
    metrics["family"] = to_string(model.family());
    metrics["n"] = data.size();
    if (g.out) {
        fs::create_directories(*g.out);
        write_quantiles_csv(*g.out / "predictions.csv", pred, model.spec().grid);
        std::ofstream(*g.out / "metrics.json") << metrics.dump(2) << '\n';
    }
    emit(g, metrics, eval_csv_header() + "\n" + eval_csv_row(r) + "\n");
    return 0;
}

struct ExpFlags {
    std::optional<std::size_t> runs, threads, n_samples;
    std::optional<std::uint64_t> data_seed;
    std::optional<std::string> families, examples, dists, data, target;
    bool paper_scale = false;
    HyperFlags hyper;
};

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

void apply_exp_flags(ExperimentConfig& c, const ExpFlags& f) {
    if (f.runs) c.runs = *f.runs;
    if (c.runs == 0) throw CliError("invalid_argument", "--runs must be at least 1");
    if (f.threads) c.threads = *f.threads;
    if (f.data_seed) c.data_seed = *f.data_seed;
    if (f.n_samples) c.n_samples = *f.n_samples;
    if (f.families) {
        c.families.clear();
        for (const auto& s : split_list(*f.families)) c.families.push_back(family_from_name(s));
    }
    if (f.examples) {
        c.examples.clear();
        for (const auto& s : split_list(*f.examples)) c.examples.push_back(example_from_index(std::stoi(s)));
    }
    if (f.dists) {
        c.dists = split_list(*f.dists);
        for (const auto& d : c.dists) ErrorDistribution::from_name(d);
    }
    if (f.data) c.csv_path = *f.data;
    if (f.target) c.target_column = *f.target;
    f.hyper.apply(c);
    if (c.csv_path && !fs::exists(*c.csv_path)) {
        throw CliError("missing_file", "data file " + c.csv_path->string() + " does not exist");
    }
}

int run_exp1(const Globals& g, const ExpFlags& f) {
    ExperimentConfig c = resolve(default_exp1_config(), g);
    apply_exp_flags(c, f);
    const auto t0 = std::chrono::steady_clock::now();
    const Exp1Result result = run_experiment1(c);
    write_exp1(c, result, seconds_since(t0));
    std::size_t failed = 0;
    for (const auto& r : result.records) failed += r.failed ? 1 : 0;
    const json summary{{"experiment", "exp1"}, {"out", c.out_dir.string()}, {"records", result.records.size()},
                       {"failed", failed}};
    emit(g, summary, kv_csv(summary));
    return 0;
}

int run_exp2(const Globals& g, const ExpFlags& f) {
    ExperimentConfig c = resolve(f.paper_scale ? paper_scale_exp2_config() : default_exp2_config(), g);
    apply_exp_flags(c, f);
    const auto t0 = std::chrono::steady_clock::now();
    const Exp2Result result = run_experiment2(c);
    write_exp2(c, result, seconds_since(t0));
    const json summary{{"experiment", "exp2"},
                       {"out", c.out_dir.string()},
                       {"runs", result.runs.size()},
                       {"median_a", result.a.median},
                       {"median_b", result.b.median},
                       {"faster_a", result.a.faster},
                       {"faster_b", result.b.faster},
                       {"ties", result.ties}};
    emit(g, summary, kv_csv(summary));
    return 0;
}

struct BenchFlags {
    std::optional<std::string> widths, quantiles;
    std::optional<std::size_t> reps, warmup;
};

int run_bench(const Globals& g, const BenchFlags& f) {
    ExperimentConfig c = resolve(default_bench_config(), g);
    if (f.widths) c.bench_layer_widths = parse_widths(*f.widths);
    if (f.quantiles) c.bench_quantile_counts = parse_widths(*f.quantiles);
    if (f.reps) c.bench_repetitions = *f.reps;
    if (f.warmup) c.bench_warmup = *f.warmup;
    const auto cells = run_complexity_bench(c);
    write_bench(c, cells);
    json rows = json::array();
    std::string csv = "L,T,scqrnn_ns,mcqrnn_ns,ratio\n";
    for (const auto& cell : cells) {
        rows.push_back({{"L", cell.layer_width}, {"T", cell.quantiles}, {"ratio", cell.ratio()}});
        csv += std::to_string(cell.layer_width) + "," + std::to_string(cell.quantiles) + "," +
               format_double(cell.scqrnn_ns) + "," + format_double(cell.mcqrnn_ns) + "," +
               format_double(cell.ratio()) + "\n";
    }
    emit(g, json{{"experiment", "bench"}, {"out", c.out_dir.string()}, {"cells", rows}}, csv);
    return 0;
}

struct SortCheck {
    std::size_t pairs = 10000;
    std::size_t quantiles = 19;
    std::size_t configs = 100;
};

int run_sort_check(const Globals& g, const SortCheck& o) {
    const std::uint64_t seed = g.seed.value_or(0);
    const DominanceReport dom = check_sort_dominance(o.pairs, o.quantiles, seed);
    const auto grads = check_gradients(o.configs, derive_seed(seed, 1));
    bool ok = dom.passed();
    json checks = json::array();
    std::string csv = "check,configurations,max_relative_error,passed\n";
    csv += "dominance," + std::to_string(dom.pairs) + "," + format_double(dom.max_excess) + "," +
           (dom.passed() ? "1" : "0") + "\n";
    for (const auto& gc : grads) {
        ok = ok && gc.passed();
        checks.push_back({{"name", gc.name}, {"configurations", gc.configurations},
                          {"max_relative_error", gc.max_relative_error}, {"passed", gc.passed()}});
        csv += gc.name + "," + std::to_string(gc.configurations) + "," + format_double(gc.max_relative_error) +
               "," + (gc.passed() ? "1" : "0") + "\n";
    }
    const json report{{"dominance",
                       {{"pairs", dom.pairs}, {"changed", dom.changed}, {"violations", dom.violations},
                        {"not_strict", dom.not_strict}, {"max_excess", dom.max_excess}, {"passed", dom.passed()}}},
                      {"gradients", checks},
                      {"passed", ok}};
    if (g.out) {
        fs::create_directories(*g.out);
        std::ofstream(*g.out / "sort_check.json") << report.dump(2) << '\n';
    }
    emit(g, report, csv);
    return ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sorted composite quantile regression neural networks"};
    app.require_subcommand(1);
    Globals g;
    std::uint64_t seed = 0;
    std::string config, out;
    app.add_option("--seed", seed, "Base seed");
    app.add_option("--config", config, "JSON config file");
    app.add_option("--out", out, "Output directory");
    app.add_option("--format", g.format, "Summary format on stdout")->check(CLI::IsMember({"csv", "json"}));

    GenData gen;
    auto* gen_cmd = app.add_subcommand("gen-data", "Generate a synthetic dataset");
    gen_cmd->add_option("--example", gen.example, "Example 0, 1 or 2")->check(CLI::Range(0, 2));
    gen_cmd->add_option("--dist", gen.dist, "normal, t or chi2");
    gen_cmd->add_option("--n", gen.n, "Number of samples")->check(CLI::PositiveNumber);
    gen_cmd->add_option("--name", gen.name, "Output file name");
    gen_cmd->add_flag("--ideal", gen.ideal, "Also write ideal quantiles on the standard grid");

    Train train;
    auto* train_cmd = app.add_subcommand("train", "Train a model on a CSV dataset");
    train_cmd->add_option("--data", train.data, "CSV file")->required();
    train_cmd->add_option("--target", train.target, "Target column");
    train_cmd->add_option("--family", train.family, "CQRNN, CQRNNse, SCQRNN or MCQRNN");
    train_cmd->add_option("--val-fraction", train.val_fraction, "Validation share of the rows");
    train.hyper.add(train_cmd);

    Eval ev;
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a saved model on a CSV dataset");
    eval_cmd->add_option("--model", ev.model, "Model file")->required();
    eval_cmd->add_option("--data", ev.data, "CSV file")->required();
    eval_cmd->add_option("--target", ev.target, "Target column");

    ExpFlags e1, e2;
    auto add_exp = [&](CLI::App* cmd, ExpFlags& f) {
        cmd->add_option("--runs", f.runs, "Monte-Carlo runs");
        cmd->add_option("--threads", f.threads, "Worker threads");
        cmd->add_option("--n-samples", f.n_samples, "Samples per synthetic dataset");
        cmd->add_option("--families", f.families, "Comma-separated model families");
        cmd->add_option("--examples", f.examples, "Comma-separated example indices");
        cmd->add_option("--dists", f.dists, "Comma-separated error distributions");
        f.hyper.add(cmd);
    };
    auto* exp1_cmd = app.add_subcommand("exp1", "Monte-Carlo model comparison");
    add_exp(exp1_cmd, e1);
    auto* exp2_cmd = app.add_subcommand("exp2", "Paired-seed convergence race");
    add_exp(exp2_cmd, e2);
    exp2_cmd->add_option("--data", e2.data, "CSV dataset instead of the synthetic stand-in");
    exp2_cmd->add_option("--target", e2.target, "Target column of --data");
    exp2_cmd->add_option("--data-seed", e2.data_seed, "Seed of the synthetic stand-in dataset and split");
    exp2_cmd->add_flag("--paper-scale", e2.paper_scale, "Original large-scale hyperparameters");

    BenchFlags bench;
    auto* bench_cmd = app.add_subcommand("bench", "Forward-pass complexity benchmark");
    bench_cmd->add_option("--widths", bench.widths, "Hidden widths L, comma-separated");
    bench_cmd->add_option("--quantiles", bench.quantiles, "Quantile counts T, comma-separated");
    bench_cmd->add_option("--reps", bench.reps, "Timed repetitions per cell");
    bench_cmd->add_option("--warmup", bench.warmup, "Discarded warmup calls");

    SortCheck sc;
    auto* sc_cmd = app.add_subcommand("sort-check", "Sorted-loss dominance and gradient checks");
    sc_cmd->add_option("--pairs", sc.pairs, "Random (prediction, target) pairs");
    sc_cmd->add_option("--quantiles", sc.quantiles, "Quantile levels per prediction");
    sc_cmd->add_option("--configs", sc.configs, "Random configurations per gradient check");

    for (auto* cmd : app.get_subcommands({})) cmd->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    try {
        if (app.get_option("--seed")->count()) g.seed = seed;
        if (app.get_option("--config")->count()) g.config = config;
        if (app.get_option("--out")->count()) g.out = out;
        if (*gen_cmd) return run_gen_data(g, gen);
        if (*train_cmd) return run_train(g, train);
        if (*eval_cmd) return run_eval(g, ev);
        if (*exp1_cmd) return run_exp1(g, e1);
        if (*exp2_cmd) return run_exp2(g, e2);
        if (*bench_cmd) return run_bench(g, bench);
        if (*sc_cmd) return run_sort_check(g, sc);
    } catch (const CliError& e) {
        std::cerr << json{{"error", {{"kind", e.kind}, {"message", e.what()}}}}.dump() << '\n';
        return 1;
    } catch (const CsvError& e) {
        std::cerr << json{{"error", {{"kind", "csv_error"}, {"message", e.what()}, {"row", e.row()},
                                     {"column", e.column()}}}}.dump()
                  << '\n';
        return 1;
    } catch (const TrainingError& e) {
        std::cerr << json{{"error", {{"kind", "training_error"}, {"message", e.what()}, {"epoch", e.epoch()}}}}.dump()
                  << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << json{{"error", {{"kind", "runtime_error"}, {"message", e.what()}}}}.dump() << '\n';
        return 1;
    }
    return 1;
}

#include "doctest.h"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Sandbox {
    fs::path dir;
    Sandbox() : dir(fs::temp_directory_path() / ("scqr_cli_" + std::to_string(::getpid()))) {
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~Sandbox() { fs::remove_all(dir); }

    Result run(const std::string& args) const {
        const std::string cmd = std::string(SCQR_CLI_PATH) + " " + args + " >" + (dir / "stdout").string() + " 2>" +
                                (dir / "stderr").string();
        const int status = std::system(cmd.c_str());
        return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(dir / "stdout"), slurp(dir / "stderr")};
    }
};

} // namespace

TEST_CASE("gen-data writes the documented csv") {
    Sandbox box;
    const auto r = box.run("gen-data --example 1 --dist normal --n 600 --seed 1 --out " + (box.dir / "d").string());
    REQUIRE(r.code == 0);
    std::ifstream in(box.dir / "d" / "data.csv");
    std::string line;
    std::getline(in, line);
    CHECK(line == "x,y");
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        CHECK(std::count(line.begin(), line.end(), ',') == 1);
    }
    CHECK(rows == 600);
    CHECK(fs::exists(box.dir / "d" / "data.meta.json"));
    CHECK(json::parse(r.out).at("rows") == 600);
}

TEST_CASE("train then eval") {
    Sandbox box;
    const std::string d = (box.dir / "d").string();
    REQUIRE(box.run("gen-data --example 0 --dist t --n 120 --seed 2 --out " + d).code == 0);
    const std::string m = (box.dir / "m").string();
    const auto t = box.run("train --data " + d + "/data.csv --family MCQRNN --widths 4,4 --max-epochs 5 --seed 3 --out " + m);
    REQUIRE(t.code == 0);
    CHECK(fs::exists(box.dir / "m" / "model.bin"));
    const auto e = box.run("eval --model " + m + "/model.bin --data " + d + "/data.csv --format csv --out " + m);
    REQUIRE(e.code == 0);
    CHECK(e.out.rfind("rmse,reliability,pinball\n", 0) == 0);
    const json metrics = json::parse(slurp(box.dir / "m" / "metrics.json"));
    CHECK(metrics.at("rmse").is_number());
    CHECK(fs::exists(box.dir / "m" / "predictions.csv"));
}

TEST_CASE("usage errors exit with 2") {
    Sandbox box;
    CHECK(box.run("exp1 --no-such-flag").code == 2);
    CHECK(box.run("frobnicate").code == 2);
    CHECK(box.run("").code == 2);
    const auto r = box.run("--bogus");
    CHECK(r.code == 2);
    CHECK(r.err.find("Usage") != std::string::npos);
}

TEST_CASE("runtime errors are machine readable and leave no output") {
    Sandbox box;
    const fs::path out = box.dir / "never";
    auto r = box.run("exp1 --config " + (box.dir / "missing.json").string() + " --out " + out.string());
    CHECK(r.code == 1);
    CHECK(json::parse(r.err).at("error").at("kind") == "missing_file");
    CHECK_FALSE(fs::exists(out));

    std::ofstream(box.dir / "bad.json") << R"({"runs": 2, "learning_rate": 1})";
    r = box.run("exp2 --config " + (box.dir / "bad.json").string() + " --out " + out.string());
    CHECK(r.code == 1);
    CHECK(json::parse(r.err).contains("error"));
    CHECK_FALSE(fs::exists(out));

    r = box.run("train --data " + (box.dir / "nope.csv").string());
    CHECK(r.code == 1);
    CHECK(json::parse(r.err).at("error").at("kind") == "missing_file");
}

TEST_CASE("config files feed the experiments") {
    Sandbox box;
    std::ofstream(box.dir / "cfg.json") << R"({"runs": 1, "families": ["SCQRNN"], "examples": [1], "dists": ["normal"],
                                             "n_samples": 60, "max_epochs": 3})";
    const auto r = box.run("exp1 --config " + (box.dir / "cfg.json").string() + " --out " + (box.dir / "e").string());
    REQUIRE(r.code == 0);
    const std::string runs = slurp(box.dir / "e" / "runs.csv");
    CHECK(std::count(runs.begin(), runs.end(), '\n') == 2);
    const json cfg = json::parse(slurp(box.dir / "e" / "config.json"));
    CHECK(cfg.at("max_epochs") == 3);
    CHECK(cfg.at("patience") == 20);
}

TEST_CASE("exp2 is byte reproducible") {
    Sandbox box;
    const std::string flags = " --runs 2 --seed 7 --widths 8,8 --n-samples 90 --max-epochs 20 --threshold 1.5";
    REQUIRE(box.run("exp2" + flags + " --out " + (box.dir / "a").string()).code == 0);
    REQUIRE(box.run("exp2" + flags + " --out " + (box.dir / "b").string()).code == 0);
    for (const char* f : {"runs.csv", "summary.json", "curves.csv"}) {
        CHECK(slurp(box.dir / "a" / f) == slurp(box.dir / "b" / f));
    }
}

TEST_CASE("sort-check passes") {
    Sandbox box;
    const auto r = box.run("sort-check --pairs 500 --configs 5 --format csv");
    CHECK(r.code == 0);
    CHECK(r.out.rfind("check,configurations,max_relative_error,passed\n", 0) == 0);
}

TEST_CASE("bench emits a table") {
    Sandbox box;
    const auto r = box.run("bench --widths 8 --quantiles 1,4 --reps 3 --warmup 1 --out " + (box.dir / "b").string());
    REQUIRE(r.code == 0);
    const std::string table = slurp(box.dir / "b" / "bench.csv");
    CHECK(table.rfind("L,T,scqrnn_ns,mcqrnn_ns,ratio\n", 0) == 0);
    CHECK(std::count(table.begin(), table.end(), '\n') == 3);
}

#include "doctest.h"

#include "psym/config.hpp"
#include "psym/errors.hpp"

#include <fstream>
#include <sstream>

using namespace psym;
using nlohmann::json;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> problems_of(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ValidationError& e) {
        return e.problems();
    }
    return {};
}

bool has_problem(const std::vector<std::string>& problems, const std::string& needle) {
    for (const auto& p : problems) {
        if (p.find(needle) != std::string::npos) return true;
    }
    return false;
}

}  // namespace

TEST_CASE("minimal Brownian config echoes the documented defaults") {
    const auto cfg = parse_config(slurp(PSYM_GOLDEN_DIR "/minimal_brownian.json"));
    const auto golden = json::parse(slurp(PSYM_GOLDEN_DIR "/minimal_brownian.canonical.json"));
    CHECK(to_json(cfg) == golden);
    CHECK(cfg.kind == ExperimentKind::symbol);
    CHECK(cfg.seed == 0);
    CHECK(cfg.params.ks == std::vector<double>{10.0});
    CHECK(cfg.params.n_paths == 10000);
    CHECK(cfg.params.t_schedule.first == 0.1);
    CHECK(cfg.params.t_schedule.ratio == 0.5);
    CHECK(cfg.params.t_schedule.count == 8);
}

TEST_CASE("canonical form is a fixed point") {
    const std::vector<std::string> docs{
        R"({"schema_version": 1, "experiment": "symbol", "seed": 5, "spec": {"kind": "levy", "Q": 1},
            "params": {"x": [0, 1], "xi": [1, 2], "k": [0.5, 1], "n_paths": 2000}})",
        R"({"schema_version": 1, "experiment": "det_symbol", "spec": {"kind": "det_family", "family": "sawtooth"}})",
        R"({"schema_version": 1, "experiment": "indices", "spec": {"kind": "det_family", "family": "quadratic"}})",
        R"({"schema_version": 1, "experiment": "indices", "spec": {"kind": "levy", "Q": 1},
            "params": {"window": [0, 1], "lambdas": [0.5, 4]}})",
        R"({"schema_version": 1, "experiment": "singular", "params": {"function": "minkowski"}})",
        R"({"schema_version": 1, "experiment": "decompose", "params": {"function": {"t": [0, 1], "v": [0, 1]}}})",
        R"({"schema_version": 1, "experiment": "homogeneity", "spec": {"kind": "det_family", "family": "quadratic"}})",
    };
    for (const auto& d : docs) {
        const auto cfg = parse_config(d);
        const auto canonical = to_json(cfg);
        const auto again = parse_config(canonical.dump());
        CHECK(to_json(again) == canonical);
        CHECK(config_hash(again) == config_hash(cfg));
        CHECK(config_hash(cfg).size() == 16);
    }
}

TEST_CASE("hash changes with the seed and the parameters") {
    const auto a = parse_config(R"({"schema_version": 1, "experiment": "symbol", "spec": {"kind": "levy", "Q": 1}})");
    auto b = a;
    b.seed = 1;
    auto c = a;
    c.params.n_paths = 20000;
    CHECK(config_hash(a) != config_hash(b));
    CHECK(config_hash(a) != config_hash(c));
}

TEST_CASE("semantic errors carry key paths and are all reported") {
    const auto problems = problems_of(R"({"schema_version": 1, "experiment": "symbol",
        "spec": {"kind": "levy", "Q": -1},
        "params": {"t_schedule": {"first": 0.1, "ratio": 1.5, "count": 4}, "n_paths": 10, "bogus": true}})");
    CHECK(problems.size() == 4);
    CHECK(has_problem(problems, "spec.Q"));
    CHECK(has_problem(problems, "schedule must decrease"));
    CHECK(has_problem(problems, "params.n_paths"));
    CHECK(has_problem(problems, "params.bogus: unknown key"));
}

TEST_CASE("Q = -1 is an error at spec.Q") {
    const auto problems =
        problems_of(R"({"schema_version": 1, "experiment": "symbol", "spec": {"kind": "levy", "Q": -1}})");
    REQUIRE(problems.size() == 1);
    CHECK(problems[0].rfind("spec.Q", 0) == 0);
}

TEST_CASE("t-schedule ratio 1.5 is rejected") {
    const auto problems = problems_of(R"({"schema_version": 1, "experiment": "symbol",
        "spec": {"kind": "levy", "Q": 1}, "params": {"t_schedule": {"first": 0.1, "ratio": 1.5, "count": 8}}})");
    REQUIRE(problems.size() == 1);
    CHECK(has_problem(problems, "schedule must decrease"));
}

TEST_CASE("syntax errors report line and column") {
    const auto problems = problems_of("{\"experiment\": \"symbol\",\n \"spec\": {\"kind\": \"levy\" \"Q\": 1}}");
    REQUIRE(problems.size() == 1);
    CHECK(has_problem(problems, "line 2, column 28"));
}

TEST_CASE("structural errors") {
    CHECK(has_problem(problems_of(R"({"experiment": "symbol", "spec": {"kind": "levy"}})"), "schema_version"));
    CHECK(has_problem(problems_of(R"({"schema_version": 2, "experiment": "symbol", "spec": {"kind": "levy"}})"),
                      "schema_version"));
    CHECK(has_problem(problems_of(R"({"schema_version": 1, "experiment": "fly"})"), "experiment"));
    CHECK(has_problem(problems_of(R"({"schema_version": 1, "experiment": "symbol"})"), "spec"));
    CHECK(has_problem(problems_of(R"([1, 2])"), "object"));
    CHECK(has_problem(
        problems_of(R"({"schema_version": 1, "experiment": "det_symbol", "spec": {"kind": "levy", "Q": 1}})"),
        "det_family"));
    CHECK(has_problem(
        problems_of(R"({"schema_version": 1, "experiment": "homogeneity", "spec": {"kind": "levy", "Q": 1}})"),
        "det_family"));
    CHECK(has_problem(problems_of(R"({"schema_version": 1, "experiment": "symbol", "seed": -1,
                                     "spec": {"kind": "levy", "Q": 1}})"),
                      "seed"));
    CHECK(has_problem(problems_of(R"({"schema_version": 1, "experiment": "symbol", "spec": {"kind": "levy", "Q": 1},
                                     "params": {"k": [0, 1]}})"),
                      "params.k"));
    CHECK(has_problem(problems_of(R"({"schema_version": 1, "experiment": "indices", "spec": {"kind": "levy", "Q": 1},
                                     "params": {"r_grid": {"first": 10, "ratio": 1.5, "count": 11}}})"),
                      "params.r_grid"));
    CHECK(has_problem(problems_of(R"({"schema_version": 1, "experiment": "singular",
                                     "params": {"function": "weierstrass"}})"),
                      "params.function"));
}

TEST_CASE("per-kind defaults") {
    const auto det = parse_config(
        R"({"schema_version": 1, "experiment": "det_symbol", "spec": {"kind": "det_family", "family": "sawtooth"}})");
    CHECK(det.params.t_schedule.ratio == 0.1);
    CHECK(det.params.t_schedule.count == 6);
    CHECK(det.params.ks.empty());
    const auto idx = parse_config(
        R"({"schema_version": 1, "experiment": "indices", "spec": {"kind": "det_family", "family": "quadratic"}})");
    CHECK(idx.params.r_grid.first == 10.0);
    CHECK(idx.params.r_grid.ratio == 2.0);
    CHECK(idx.params.r_grid.count == 11);
    CHECK(idx.params.lambdas == std::vector<double>{0.9});
    CHECK(idx.params.growth_times == std::vector<double>{10.0, 100.0, 1000.0});
    CHECK(idx.params.window_count == 41);
    const auto hom = parse_config(
        R"({"schema_version": 1, "experiment": "homogeneity", "spec": {"kind": "det_family", "family": "sawtooth"}})");
    CHECK(hom.params.tol == 1e-12);
    CHECK(hom.params.starts.denominator == 8);
    const auto dec = parse_config(R"({"schema_version": 1, "experiment": "decompose"})");
    CHECK(dec.params.step == 1.0 / 6561.0);
    CHECK(dec.params.cap == 10.0);
}

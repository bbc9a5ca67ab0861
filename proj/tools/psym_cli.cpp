// psym: run symbol, index and singular-function experiments from JSON configs.
//
//   psym validate <config>
//   psym run <config> [--out DIR] [--seed N]
//   psym presets list
//   psym presets show <name>
//   psym presets run <name> [--out DIR] [--seed N]
//
// Exit codes: 0 success, 2 validation failure, 3 runtime failure. Failures
// print a JSON object {"status": "error", "kind": ..., "errors": [...]}.

#include "psym/config.hpp"
#include "psym/errors.hpp"
#include "psym/experiment.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "json.hpp"

namespace {

using nlohmann::json;

constexpr int kValidationFailure = 2;
constexpr int kRuntimeFailure = 3;

int fail(const char* kind, const std::vector<std::string>& errors, int code) {
    std::cout << json{{"status", "error"}, {"kind", kind}, {"errors", errors}}.dump(2) << "\n";
    return code;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw psym::ValidationError(fmt::format("cannot read config file '{}'", path));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Overrides {
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
};

int run_text(const std::string& text, const Overrides& o) {
    psym::ExperimentConfig cfg;
    try {
        cfg = psym::parse_config(text);
    } catch (const psym::ValidationError& e) {
        return fail("validation", e.problems(), kValidationFailure);
    }
    if (o.out) cfg.output_dir = *o.out;
    if (o.seed) cfg.seed = *o.seed;
    try {
        const auto result = psym::run_experiment(cfg);
        std::cout << json{{"status", "ok"},
                          {"experiment", psym::to_string(cfg.kind)},
                          {"output_dir", result.output_dir.string()},
                          {"files", result.files},
                          {"summary", result.summary}}
                         .dump(2)
                  << "\n";
        return 0;
    } catch (const std::exception& e) {
        return fail("runtime", {e.what()}, kRuntimeFailure);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Probabilistic symbols, Blumenthal-Getoor indices and singular clocks"};
    app.require_subcommand(1);
    app.set_version_flag("--version", psym::kVersion);

    std::string config_path;
    Overrides overrides;

    auto* validate = app.add_subcommand("validate", "Parse and validate a config; print its canonical form");
    validate->add_option("config", config_path, "Config file")->required();

    auto* run = app.add_subcommand("run", "Run the experiment described by a config");
    run->add_option("config", config_path, "Config file")->required();
    run->add_option("--out", overrides.out, "Output directory (overrides output_dir)");
    run->add_option("--seed", overrides.seed, "Base seed (overrides seed)");

    auto* presets = app.add_subcommand("presets", "Built-in experiments");
    presets->require_subcommand(1);
    auto* list = presets->add_subcommand("list", "List preset names");
    std::string preset_name;
    auto* show = presets->add_subcommand("show", "Print a preset's config");
    show->add_option("name", preset_name, "Preset name")->required();
    auto* run_preset = presets->add_subcommand("run", "Run a preset");
    run_preset->add_option("name", preset_name, "Preset name")->required();
    run_preset->add_option("--out", overrides.out, "Output directory");
    run_preset->add_option("--seed", overrides.seed, "Base seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kValidationFailure;
    }

    if (*validate) {
        try {
            const auto cfg = psym::parse_config(read_file(config_path));
            std::cout << json{{"status", "ok"}, {"config", psym::to_json(cfg)}}.dump(2) << "\n";
            return 0;
        } catch (const psym::ValidationError& e) {
            return fail("validation", e.problems(), kValidationFailure);
        }
    }
    if (*run) {
        std::string text;
        try {
            text = read_file(config_path);
        } catch (const psym::ValidationError& e) {
            return fail("validation", e.problems(), kValidationFailure);
        }
        return run_text(text, overrides);
    }
    if (*list) {
        for (const auto& p : psym::presets()) std::cout << p.name << "\t" << p.description << "\n";
        return 0;
    }
    const auto* preset = psym::find_preset(preset_name);
    if (preset == nullptr) return fail("validation", {fmt::format("unknown preset '{}'", preset_name)}, kValidationFailure);
    if (*show) {
        std::cout << json::parse(preset->config).dump(2) << "\n";
        return 0;
    }
    return run_text(preset->config, overrides);
}

#include "psym/config.hpp"

#include "psym/errors.hpp"
#include "psym/homogeneity.hpp"
#include "psym/singular.hpp"

#include "json_reader.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace psym {

using detail::JsonReader;
using nlohmann::json;

std::string to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::symbol:
            return "symbol";
        case ExperimentKind::det_symbol:
            return "det_symbol";
        case ExperimentKind::indices:
            return "indices";
        case ExperimentKind::singular:
            return "singular";
        case ExperimentKind::decompose:
            return "decompose";
        case ExperimentKind::homogeneity:
            return "homogeneity";
    }
    return {};
}

std::vector<double> GridParams::points() const {
    if (explicit_list) return values;
    if (orbit_m_max) return quadratic_orbit_grid(*orbit_m_max, denominator);
    return rational_grid(lo, hi, denominator);
}

namespace {

constexpr std::string_view kKinds[] = {"symbol", "det_symbol", "indices", "singular", "decompose", "homogeneity"};

std::optional<ExperimentKind> kind_from(std::string_view name) {
    for (std::size_t i = 0; i < std::size(kKinds); ++i) {
        if (kKinds[i] == name) return static_cast<ExperimentKind>(i);
    }
    return std::nullopt;
}

std::optional<std::size_t> count_field(JsonReader& r, std::string_view key) {
    if (auto v = r.unsigned_integer(key)) return static_cast<std::size_t>(*v);
    return std::nullopt;
}

void read_schedule(JsonReader& parent, std::string_view key, ScheduleParams& s, std::vector<std::string>& errors) {
    const json* doc = parent.child(key);
    if (doc == nullptr) return;
    JsonReader r(*doc, parent.path(key), errors);
    if (!r.valid()) return;
    s.first = r.number_or("first", s.first);
    s.ratio = r.number_or("ratio", s.ratio);
    s.count = count_field(r, "count").value_or(s.count);
    r.finish();
}

void check_decreasing(JsonReader& r, std::string_view key, const ScheduleParams& s) {
    if (!(s.first > 0.0)) r.error(key, fmt::format("first must be > 0 (got {})", s.first));
    if (!(s.ratio > 0.0 && s.ratio < 1.0)) r.error(key, fmt::format("schedule must decrease (ratio {})", s.ratio));
    if (s.count == 0) r.error(key, "count must be >= 1");
}

void read_list(JsonReader& r, std::string_view key, std::vector<double>& out) {
    if (auto v = r.numbers(key)) out = *v;
}

void require_nonempty(JsonReader& r, std::string_view key, const std::vector<double>& v) {
    if (v.empty()) r.error(key, "must not be empty");
}

void read_grid(JsonReader& parent, std::string_view key, GridParams& g, std::vector<std::string>& errors) {
    const json* doc = parent.child(key);
    if (doc == nullptr) return;
    if (doc->is_array() || doc->is_number()) {
        if (auto v = JsonReader::as_numbers(*doc, parent.path(key), errors)) {
            g.values = *v;
            g.explicit_list = true;
            if (g.values.empty()) parent.error(key, "must not be empty");
        }
        return;
    }
    JsonReader r(*doc, parent.path(key), errors);
    if (!r.valid()) return;
    if (auto d = r.unsigned_integer("denominator")) g.denominator = static_cast<int>(*d);
    if (auto m = r.unsigned_integer("orbit_m_max")) g.orbit_m_max = static_cast<int>(*m);
    g.lo = r.number_or("lo", g.lo);
    g.hi = r.number_or("hi", g.hi);
    if (g.denominator <= 0) r.error("denominator", "must be >= 1");
    if (!g.orbit_m_max && !(g.hi >= g.lo)) r.error("hi", "must be >= lo");
    r.finish();
}

json grid_to_json(const GridParams& g) {
    if (g.explicit_list) return g.values;
    if (g.orbit_m_max) return {{"orbit_m_max", *g.orbit_m_max}, {"denominator", g.denominator}};
    return {{"lo", g.lo}, {"hi", g.hi}, {"denominator", g.denominator}};
}

json schedule_to_json(const ScheduleParams& s) { return {{"first", s.first}, {"ratio", s.ratio}, {"count", s.count}}; }

void read_mc(JsonReader& p, ExperimentParams& out) {
    out.n_paths = count_field(p, "n_paths").value_or(out.n_paths);
    out.threads = static_cast<int>(count_field(p, "threads").value_or(0));
}

void read_verdict_rules(JsonReader& p, ExperimentParams& out) {
    out.abs_tol = p.number_or("abs_tol", out.abs_tol);
    out.divergence_ratio = p.number_or("divergence_ratio", out.divergence_ratio);
    if (!(out.abs_tol > 0.0)) p.error("abs_tol", "must be > 0");
    if (!(out.divergence_ratio > 1.0)) p.error("divergence_ratio", "must be > 1");
}

void read_symbol(JsonReader& p, ExperimentParams& out, bool det, std::vector<std::string>& errors) {
    out.t_schedule = det ? ScheduleParams{0.1, 0.1, 6} : ScheduleParams{0.1, 0.5, 8};
    read_list(p, "x", out.xs);
    read_list(p, "xi", out.xis);
    read_list(p, "k", out.ks);
    require_nonempty(p, "x", out.xs);
    require_nonempty(p, "xi", out.xis);
    for (double k : out.ks) {
        if (!(k > 0.0)) p.error("k", fmt::format("exit radius must be > 0 (got {})", k));
    }
    read_schedule(p, "t_schedule", out.t_schedule, errors);
    check_decreasing(p, "t_schedule", out.t_schedule);
    read_verdict_rules(p, out);
    if (det) {
        out.path_horizon = p.number_or("path_horizon", out.path_horizon);
        if (!(out.path_horizon > 0.0)) p.error("path_horizon", "must be > 0");
        return;
    }
    if (out.ks.empty()) out.ks = {10.0};
    read_mc(p, out);
    if (out.n_paths < 1000) p.error("n_paths", fmt::format("must be >= 1000 (got {})", out.n_paths));
    out.dt = p.number_or("dt", out.dt);
    if (!(out.dt > 0.0)) p.error("dt", "must be > 0");
    out.plot_paths = count_field(p, "plot_paths").value_or(out.plot_paths);
}

void read_indices(JsonReader& p, ExperimentParams& out, std::vector<std::string>& errors) {
    out.t_schedule = {0.1, 0.1, 8};
    out.n_paths = 1000;
    if (const json* w = p.child("window")) {
        if (w->is_object()) {
            JsonReader r(*w, p.path("window"), errors);
            out.window_lo = r.number_or("lo", out.window_lo);
            out.window_hi = r.number_or("hi", out.window_hi);
            out.window_count = count_field(r, "count").value_or(out.window_count);
            if (out.window_count == 0) r.error("count", "must be >= 1");
            if (!(out.window_hi >= out.window_lo)) r.error("hi", "must be >= lo");
            r.finish();
        } else if (auto v = JsonReader::as_numbers(*w, p.path("window"), errors)) {
            out.window = *v;
            if (out.window.empty()) p.error("window", "must not be empty");
        }
    }
    read_schedule(p, "r_grid", out.r_grid, errors);
    if (!(out.r_grid.first > 0.0)) p.error("r_grid", "first must be > 0");
    if (!(out.r_grid.ratio >= 2.0)) p.error("r_grid", fmt::format("ratio must be >= 2 (got {})", out.r_grid.ratio));
    if (out.r_grid.count < 8) p.error("r_grid", fmt::format("count must be >= 8 (got {})", out.r_grid.count));
    read_list(p, "lambdas", out.lambdas);
    require_nonempty(p, "lambdas", out.lambdas);
    for (double l : out.lambdas) {
        if (!(l > 0.0)) p.error("lambdas", fmt::format("must be > 0 (got {})", l));
    }
    read_list(p, "growth_times", out.growth_times);
    if (out.growth_times.size() < 3) p.error("growth_times", "need at least 3 times");
    for (std::size_t i = 0; i < out.growth_times.size(); ++i) {
        if (!(out.growth_times[i] > 0.0) || (i > 0 && !(out.growth_times[i] > out.growth_times[i - 1]))) {
            p.error("growth_times", "must be positive and increasing");
            break;
        }
    }
    out.growth_step = p.number_or("growth_step", out.growth_step);
    if (!(out.growth_step > 0.0)) p.error("growth_step", "must be > 0");
    if (auto x = p.number("x")) out.xs = {*x};
    read_schedule(p, "t_schedule", out.t_schedule, errors);
    check_decreasing(p, "t_schedule", out.t_schedule);
    read_mc(p, out);
    if (out.n_paths == 0) p.error("n_paths", "must be >= 1");
    out.dt = p.number_or("dt", out.dt);
    if (!(out.dt > 0.0)) p.error("dt", "must be > 0");
}

void read_function(JsonReader& p, ExperimentParams& out, std::vector<std::string>& errors) {
    if (const json* f = p.child("function")) {
        out.function = *f;
        staircase_from_json(*f, p.path("function"), errors);
    }
}

void read_singular(JsonReader& p, ExperimentParams& out, std::vector<std::string>& errors) {
    read_function(p, out, errors);
    read_list(p, "points", out.points);
    if (const json* s = p.child("sides")) {
        out.sides.clear();
        const json list = s->is_string() ? json::array({*s}) : *s;
        if (!list.is_array()) p.error("sides", "expected a list of \"right\" / \"left\"");
        for (const auto& v : list.is_array() ? list : json::array()) {
            if (!v.is_string() || (v != "right" && v != "left")) {
                p.error("sides", "expected \"right\" or \"left\"");
                continue;
            }
            out.sides.push_back(v.get<std::string>());
        }
    }
    if (auto e = p.string("envelope")) {
        out.envelope = *e;
        if (*e != "upper" && *e != "lower") p.error("envelope", "expected \"upper\" or \"lower\"");
    }
    read_schedule(p, "h_schedule", out.h_schedule, errors);
    check_decreasing(p, "h_schedule", out.h_schedule);
    if (const json* s = p.child("scan")) {
        JsonReader r(*s, p.path("scan"), errors);
        out.scan_lo = r.number_or("lo", out.scan_lo);
        out.scan_hi = r.number_or("hi", out.scan_hi);
        out.scan_resolution = count_field(r, "resolution").value_or(out.scan_resolution);
        out.threshold = r.number_or("threshold", out.threshold);
        if (!(out.scan_hi > out.scan_lo)) r.error("hi", "must be > lo");
        if (out.scan_resolution == 0) r.error("resolution", "must be >= 1");
        if (!(out.threshold > 0.0)) r.error("threshold", "must be > 0");
        r.finish();
    }
}

void read_decompose(JsonReader& p, ExperimentParams& out, std::vector<std::string>& errors) {
    read_function(p, out, errors);
    out.lo = p.number_or("lo", out.lo);
    out.hi = p.number_or("hi", out.hi);
    out.step = p.number_or("step", out.step);
    out.cap = p.number_or("cap", out.cap);
    out.median_window = count_field(p, "median_window").value_or(out.median_window);
    if (!(out.hi > out.lo)) p.error("hi", "must be > lo");
    if (!(out.step > 0.0)) p.error("step", "must be > 0");
    if (!(out.cap > 0.0)) p.error("cap", "must be > 0");
}

void read_homogeneity(JsonReader& p, ExperimentParams& out, const std::optional<ProcessSpec>& spec,
                      std::vector<std::string>& errors) {
    out.starts = {};
    out.starts.hi = 2.0;
    if (spec) {
        if (const auto* f = std::get_if<DetFamily>(&*spec); f && f->kind == DetFamily::Kind::quadratic) {
            out.starts.orbit_m_max = 2;
        }
    }
    out.times = {};
    out.shifts = {};
    read_grid(p, "starts", out.starts, errors);
    read_grid(p, "times", out.times, errors);
    read_grid(p, "shifts", out.shifts, errors);
    out.tol = p.number_or("tol", out.tol);
    if (!(out.tol >= 0.0)) p.error("tol", "must be >= 0");
}

bool needs_spec(ExperimentKind k) {
    return k == ExperimentKind::symbol || k == ExperimentKind::det_symbol || k == ExperimentKind::indices ||
           k == ExperimentKind::homogeneity;
}

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
    std::size_t line = 1, column = 1;
    for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
    return {line, column};
}

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        const auto [line, column] = line_column(text, e.byte);
        throw ValidationError(fmt::format("syntax error at line {}, column {}: {}", line, column, e.what()));
    }
    return parse_config_json(doc);
}

ExperimentConfig parse_config_json(const json& doc) {
    std::vector<std::string> errors;
    ExperimentConfig cfg;
    JsonReader r(doc, "", errors);
    if (!r.valid()) throw ValidationError(errors);

    if (auto v = r.unsigned_integer("schema_version")) {
        if (*v != static_cast<std::uint64_t>(kSchemaVersion)) {
            r.error("schema_version", fmt::format("unsupported version {} (expected {})", *v, kSchemaVersion));
        }
    } else if (!r.has("schema_version")) {
        r.error("schema_version", fmt::format("missing (expected {})", kSchemaVersion));
    }

    std::optional<ExperimentKind> kind;
    if (auto name = r.string("experiment")) {
        kind = kind_from(*name);
        if (!kind) r.error("experiment", fmt::format("unknown experiment '{}'", *name));
    } else if (!r.has("experiment")) {
        r.error("experiment", "missing (symbol, det_symbol, indices, singular, decompose or homogeneity)");
    }
    cfg.seed = r.unsigned_integer("seed").value_or(0);
    cfg.output_dir = r.string("output_dir").value_or(cfg.output_dir);

    if (const json* spec = r.child("spec")) {
        cfg.spec = spec_from_json(*spec, "spec", errors);
    } else if (kind && needs_spec(*kind)) {
        r.error("spec", "missing process spec");
    }

    if (kind) {
        cfg.kind = *kind;
        if (cfg.spec && (*kind == ExperimentKind::det_symbol || *kind == ExperimentKind::homogeneity) &&
            !std::holds_alternative<DetFamily>(*cfg.spec)) {
            r.error("spec.kind", fmt::format("{} needs a det_family spec", to_string(*kind)));
        }
        if (!needs_spec(*kind) && r.has("spec")) r.error("spec", fmt::format("not used by {}", to_string(*kind)));

        static const json empty = json::object();
        const json* params = r.child("params");
        JsonReader p(params ? *params : empty, "params", errors);
        if (p.valid()) {
            auto& out = cfg.params;
            switch (*kind) {
                case ExperimentKind::symbol:
                    read_symbol(p, out, false, errors);
                    break;
                case ExperimentKind::det_symbol:
                    read_symbol(p, out, true, errors);
                    break;
                case ExperimentKind::indices:
                    read_indices(p, out, errors);
                    break;
                case ExperimentKind::singular:
                    read_singular(p, out, errors);
                    break;
                case ExperimentKind::decompose:
                    read_decompose(p, out, errors);
                    break;
                case ExperimentKind::homogeneity:
                    read_homogeneity(p, out, cfg.spec, errors);
                    break;
            }
            p.finish();
        }
    } else {
        r.child("params");
    }
    r.finish();
    if (!errors.empty()) throw ValidationError(errors);
    return cfg;
}

json to_json(const ExperimentConfig& cfg) {
    const auto& p = cfg.params;
    json params = json::object();
    switch (cfg.kind) {
        case ExperimentKind::symbol:
        case ExperimentKind::det_symbol:
            params["x"] = p.xs;
            params["xi"] = p.xis;
            params["k"] = p.ks;
            params["t_schedule"] = schedule_to_json(p.t_schedule);
            params["abs_tol"] = p.abs_tol;
            params["divergence_ratio"] = p.divergence_ratio;
            if (cfg.kind == ExperimentKind::symbol) {
                params["n_paths"] = p.n_paths;
                params["dt"] = p.dt;
                params["plot_paths"] = p.plot_paths;
                params["threads"] = p.threads;
            } else {
                params["path_horizon"] = p.path_horizon;
            }
            break;
        case ExperimentKind::indices:
            if (p.window.empty()) {
                params["window"] = {{"lo", p.window_lo}, {"hi", p.window_hi}, {"count", p.window_count}};
            } else {
                params["window"] = p.window;
            }
            params["r_grid"] = schedule_to_json(p.r_grid);
            params["lambdas"] = p.lambdas;
            params["growth_times"] = p.growth_times;
            params["growth_step"] = p.growth_step;
            params["x"] = p.xs.front();
            params["t_schedule"] = schedule_to_json(p.t_schedule);
            params["n_paths"] = p.n_paths;
            params["dt"] = p.dt;
            params["threads"] = p.threads;
            break;
        case ExperimentKind::singular:
            params["function"] = p.function;
            params["points"] = p.points;
            params["sides"] = p.sides;
            params["envelope"] = p.envelope;
            params["h_schedule"] = schedule_to_json(p.h_schedule);
            params["scan"] = {{"lo", p.scan_lo}, {"hi", p.scan_hi}, {"resolution", p.scan_resolution},
                              {"threshold", p.threshold}};
            break;
        case ExperimentKind::decompose:
            params["function"] = p.function;
            params["lo"] = p.lo;
            params["hi"] = p.hi;
            params["step"] = p.step;
            params["cap"] = p.cap;
            params["median_window"] = p.median_window;
            break;
        case ExperimentKind::homogeneity:
            params["starts"] = grid_to_json(p.starts);
            params["times"] = grid_to_json(p.times);
            params["shifts"] = grid_to_json(p.shifts);
            params["tol"] = p.tol;
            break;
    }
    json out;
    out["schema_version"] = cfg.schema_version;
    out["experiment"] = to_string(cfg.kind);
    out["seed"] = cfg.seed;
    if (cfg.spec) out["spec"] = to_json(*cfg.spec);
    out["params"] = params;
    out["output_dir"] = cfg.output_dir;
    return out;
}

std::string config_hash(const ExperimentConfig& config) {
    auto doc = to_json(config);
    doc.erase("output_dir");
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : doc.dump()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return fmt::format("{:016x}", h);
}

}  // namespace psym

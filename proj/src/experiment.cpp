#include "psym/experiment.hpp"

#include "psym/errors.hpp"
#include "psym/homogeneity.hpp"
#include "psym/singular.hpp"
#include "psym/symbol.hpp"
#include "psym/tables.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

namespace psym {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

class Writer {
public:
    explicit Writer(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

    void text(const std::string& name, const std::string& content) {
        std::ofstream out(dir_ / name, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error(fmt::format("cannot write {}", (dir_ / name).string()));
        out << content;
        files_.push_back(name);
    }
    void csv(const std::string& name, const CsvSchema& schema, std::span<const Row> rows) {
        std::ostringstream ss;
        write_csv(ss, schema, rows);
        text(name, ss.str());
    }
    void json_file(const std::string& name, const json& doc) { text(name, doc.dump(2) + "\n"); }

    const fs::path& dir() const { return dir_; }
    const std::vector<std::string>& files() const { return files_; }

private:
    fs::path dir_;
    std::vector<std::string> files_;
};

json complex_json(std::complex<double> z) { return {{"re", z.real()}, {"im", z.imag()}}; }

std::vector<double> schedule(const ScheduleParams& s) { return time_schedule(s.first, s.ratio, s.count); }

McOptions mc_options(const ExperimentParams& p) {
    McOptions o;
    o.default_dt = p.dt;
    o.abs_tol = p.abs_tol;
    o.divergence_ratio = p.divergence_ratio;
    o.parallel.threads = p.threads;
    return o;
}

std::optional<std::complex<double>> analytic_symbol(const ProcessSpec& spec, double x, double xi) {
    if (const auto* l = std::get_if<LevyTriplet>(&spec)) return lk_eval(*l, xi);
    if (const auto* d = std::get_if<DiffChar>(&spec)) return lk_eval_state(*d, x, xi);
    if (const auto* c = std::get_if<ClockedProcess>(&spec)) {
        if (c->clock.kind == ClockSpec::Kind::identity) return lk_eval(c->triplet, xi);
        if (c->clock.kind == ClockSpec::Kind::ac_of_state) return c->clock.rate(x) * lk_eval(c->triplet, xi);
    }
    return std::nullopt;
}

json estimate_json(const SymbolEstimate& e, const std::optional<std::complex<double>>& reference) {
    json out;
    out["x"] = e.x;
    out["xi"] = e.xi;
    out["k"] = std::isinf(e.k) ? json("infinity") : json(e.k);
    out["verdict"] = to_string(e.verdict);
    out["value"] = e.value ? complex_json(*e.value) : json(nullptr);
    out["value_se"] = e.value_se;
    out["total_paths"] = e.total_paths;
    if (reference) out["analytic"] = complex_json(*reference);
    return out;
}

json k_report_json(const KIndependenceReport& r, double x, double xi) {
    json gaps = json::array();
    for (const auto& row : r.gaps) {
        json line = json::array();
        for (double g : row) line.push_back(std::isnan(g) ? json(nullptr) : json(g));
        gaps.push_back(line);
    }
    return {{"x", x}, {"xi", xi}, {"ks", r.ks}, {"pass", r.pass}, {"gaps", gaps}};
}

const char* kPlotHeader = R"PY(# Generated by psym. Usage: python3 plot.py (run inside this directory).
import csv
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt


def rows(name):
    with open(name, newline="") as f:
        return list(csv.DictReader(f))

)PY";

const char* kPlotSymbol = R"PY(
q = rows("quotients.csv")
fig, (a, b) = plt.subplots(1, 2, figsize=(11, 4))
keys = sorted({(r["x"], r["xi"], r["k"]) for r in q})
for key in keys:
    sel = [r for r in q if (r["x"], r["xi"], r["k"]) == key]
    t = [float(r["t"]) for r in sel]
    mod = [abs(complex(float(r["re_q"]), float(r["im_q"]))) for r in sel]
    a.loglog(t, mod, "o-", label="x=%s xi=%s k=%s (%s)" % (key + (sel[0]["verdict"],)))
a.set_xlabel("t")
a.set_ylabel("|quotient|")
a.legend(fontsize=7)
p = rows("paths.csv")
for pid in sorted({r["path_id"] for r in p}):
    sel = [r for r in p if r["path_id"] == pid]
    b.plot([float(r["t"]) for r in sel], [float(r["x"]) for r in sel], lw=0.8)
b.set_xlabel("t")
b.set_ylabel("X_t")
fig.tight_layout()
fig.savefig("plot.png", dpi=150)
)PY";

const char* kPlotIndices = R"PY(
h = rows("h.csv")
g = rows("growth.csv")
fig, (a, b) = plt.subplots(1, 2, figsize=(11, 4))
a.loglog([float(r["R"]) for r in h], [float(r["H"]) for r in h], "o-")
a.set_xlabel("R")
a.set_ylabel("H(R)")
for lam in sorted({r["lambda"] for r in g}):
    sel = [r for r in g if r["lambda"] == lam]
    b.loglog([float(r["t"]) for r in sel], [float(r["scaled_sup"]) for r in sel], "o-",
             label="lambda=%s (%s)" % (lam, sel[0]["verdict"]))
b.set_xlabel("t")
b.set_ylabel("t^(-1/lambda) sup|X_s - x|")
b.legend()
fig.tight_layout()
fig.savefig("plot.png", dpi=150)
)PY";

const char* kPlotSingular = R"PY(
c = rows("curve.csv")
d = rows("dini.csv")
fig, (a, b) = plt.subplots(1, 2, figsize=(11, 4))
a.plot([float(r["t"]) for r in c], [float(r["F"]) for r in c], lw=0.8)
a.set_xlabel("t")
a.set_ylabel("F(t)")
for key in sorted({(r["x0"], r["side"]) for r in d}):
    sel = [r for r in d if (r["x0"], r["side"]) == key]
    b.loglog([abs(float(r["h"])) for r in sel], [abs(float(r["quotient"])) for r in sel], "o-",
             label="x0=%s %s (%s)" % (key + (sel[0]["verdict"],)))
b.set_xlabel("|h|")
b.set_ylabel("|difference quotient|")
b.legend(fontsize=7)
fig.tight_layout()
fig.savefig("plot.png", dpi=150)
)PY";

const char* kPlotDecompose = R"PY(
d = rows("decomposition.csv")
t = [float(r["t"]) for r in d]
fig, ax = plt.subplots(figsize=(7, 4))
for col in ("F", "A", "S"):
    ax.plot(t, [float(r[col]) for r in d], label=col, lw=0.8)
ax.set_xlabel("t")
ax.legend()
fig.tight_layout()
fig.savefig("plot.png", dpi=150)
)PY";

std::vector<double> k_list(const ExperimentParams& p) {
    if (p.ks.empty()) return {std::numeric_limits<double>::infinity()};
    return p.ks;
}

json run_symbol(const ExperimentConfig& cfg, Writer& w) {
    const auto& p = cfg.params;
    const ProcessSpec& spec = *cfg.spec;
    const auto ts = schedule(p.t_schedule);
    const auto opts = mc_options(p);
    const auto ks = k_list(p);
    const bool det = cfg.kind == ExperimentKind::det_symbol;

    std::vector<Row> rows;
    json estimates = json::array();
    json k_reports = json::array();
    for (std::size_t ix = 0; ix < p.xs.size(); ++ix) {
        for (std::size_t ixi = 0; ixi < p.xis.size(); ++ixi) {
            const double x = p.xs[ix];
            const double xi = p.xis[ixi];
            // Independent seeds per (x, xi, k), so the k comparison sees independent errors.
            std::vector<SymbolEstimate> per_k;
            for (std::size_t ik = 0; ik < ks.size(); ++ik) {
                const double k = ks[ik];
                const std::uint64_t seed = derive_seed(cfg.seed, (ix * p.xis.size() + ixi) * ks.size() + ik);
                per_k.push_back(det ? det_symbol(std::get<DetFamily>(spec), x, xi, ts, k, opts)
                                    : estimate_symbol(spec, x, xi, k, ts, p.n_paths, seed, opts));
                const auto& e = per_k.back();
                const auto r = quotient_rows(e);
                rows.insert(rows.end(), r.begin(), r.end());
                estimates.push_back(estimate_json(e, det ? std::optional<std::complex<double>>{}
                                                         : analytic_symbol(spec, x, xi)));
            }
            if (per_k.size() > 1) k_reports.push_back(k_report_json(k_independence(per_k, det), x, xi));
        }
    }
    w.csv("quotients.csv", quotient_schema(), rows);

    std::vector<Row> path_table;
    if (det) {
        const auto grid = uniform_grid(p.path_horizon, p.path_horizon / 512.0);
        for (std::size_t ix = 0; ix < p.xs.size(); ++ix) {
            const auto r = path_rows(sample_det_path(std::get<DetFamily>(spec), p.xs[ix], grid), ix);
            path_table.insert(path_table.end(), r.begin(), r.end());
        }
    } else {
        const auto grid = quotient_grid(ts.front(), p.dt);
        for (std::size_t i = 0; i < p.plot_paths; ++i) {
            const auto r = path_rows(simulate(spec, p.xs.front(), grid, cfg.seed, i), i);
            path_table.insert(path_table.end(), r.begin(), r.end());
        }
    }
    w.csv("paths.csv", path_schema(), path_table);

    json summary = {{"estimates", estimates}};
    if (!k_reports.empty()) summary["k_independence"] = k_reports;
    w.json_file("estimates.json", summary);
    w.text("plot.py", std::string(kPlotHeader) + kPlotSymbol);
    return summary;
}

json run_indices(const ExperimentConfig& cfg, Writer& w) {
    const auto& p = cfg.params;
    const ProcessSpec& spec = *cfg.spec;
    IndexReport report;
    report.window = state_window(spec, p);
    const auto Rs = geometric_r_grid(p.r_grid.first, p.r_grid.ratio, p.r_grid.count);
    report.samples = h_table(symbol_function(spec, p), report.window, Rs);
    report.fit = beta0(report.samples);

    GrowthOptions g;
    g.step = p.growth_step;
    g.n_paths = p.n_paths;
    g.seed = cfg.seed;
    g.parallel.threads = p.threads;
    report.growth = path_growth(spec, p.xs.front(), p.lambdas, p.growth_times, g);

    std::vector<Row> h_rows;
    for (const auto& s : report.samples) h_rows.push_back({s.R, s.H});
    w.csv("h.csv", h_schema(), h_rows);
    w.csv("growth.csv", growth_schema(), growth_rows(report.growth));
    const json out = to_json(report);
    w.json_file("index_report.json", out);
    w.text("plot.py", std::string(kPlotHeader) + kPlotIndices);
    return {{"beta0", out["beta0"]}, {"residual", out["residual"]}, {"growth_verdicts", out["growth_verdicts"]}};
}

StaircaseFunction configured_function(const ExperimentParams& p) {
    std::vector<std::string> errors;
    auto f = staircase_from_json(p.function, "params.function", errors);
    if (!f) throw ValidationError(errors);
    return *f;
}

json run_singular(const ExperimentConfig& cfg, Writer& w) {
    const auto& p = cfg.params;
    const auto f = configured_function(p);
    const auto steps = geometric_schedule(p.h_schedule.first, p.h_schedule.ratio, p.h_schedule.count);
    const auto envelope = p.envelope == "upper" ? DiniEnvelope::upper : DiniEnvelope::lower;

    std::vector<Row> rows;
    json verdicts = json::array();
    const auto dom = f.domain();
    for (double x0 : p.points) {
        for (const auto& side_name : p.sides) {
            const auto side = side_name == "right" ? DiniSide::right : DiniSide::left;
            // A side whose first step leaves the domain has no quotients.
            if (!dom.contains(side == DiniSide::right ? x0 + steps.front() : x0 - steps.front())) {
                verdicts.push_back({{"x0", x0}, {"side", side_name}, {"verdict", "outside domain"}});
                continue;
            }
            const auto est = dini(f, x0, side, envelope, steps);
            const auto r = dini_rows(est);
            rows.insert(rows.end(), r.begin(), r.end());
            verdicts.push_back({{"x0", x0}, {"side", side_name}, {"verdict", std::get<std::string>(r.back()[5])},
                                {"max_quotient", est.max_quotient()}});
        }
    }
    w.csv("dini.csv", dini_schema(), rows);

    const auto hits = find_infinite_dini(f, Interval{p.scan_lo, p.scan_hi}, p.scan_resolution, p.threshold, steps);
    std::vector<Row> hit_rows;
    for (const auto& h : hits) hit_rows.push_back({h.point, h.max_quotient});
    w.csv("dini_hits.csv", dini_hits_schema(), hit_rows);

    std::vector<Row> curve;
    const double lo = std::isfinite(dom.lo) ? dom.lo : p.scan_lo;
    const double hi = std::isfinite(dom.hi) ? dom.hi : p.scan_hi;
    for (int i = 0; i <= 2048; ++i) {
        const double t = lo + (hi - lo) * i / 2048.0;
        curve.push_back({t, f(t)});
    }
    w.csv("curve.csv", curve_schema(), curve);

    json summary = {{"function", f.name()}, {"dini", verdicts}, {"hits", hits.size()}};
    w.json_file("singular.json", summary);
    w.text("plot.py", std::string(kPlotHeader) + kPlotSingular);
    return summary;
}

json run_decompose(const ExperimentConfig& cfg, Writer& w) {
    const auto& p = cfg.params;
    const auto f = configured_function(p);
    const auto n = static_cast<std::size_t>(std::llround((p.hi - p.lo) / p.step));
    std::vector<double> ts(n + 1), samples(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        ts[i] = p.lo + static_cast<double>(i) * p.step;
        samples[i] = f(ts[i]);
    }
    DecomposeOptions opts;
    opts.cap = p.cap;
    opts.window = p.median_window;
    const auto d = lebesgue_decompose(samples, p.step, opts);
    const auto total = reconstruct(d);
    bool exact = true;
    for (std::size_t i = 0; i <= n; ++i) exact = exact && total[i] == samples[i];
    w.csv("decomposition.csv", decomposition_schema(), decomposition_rows(ts, samples, d));
    json summary = {{"function", f.name()},
                    {"points", n + 1},
                    {"step", p.step},
                    {"singular_mass", d.singular.back() - d.singular.front()},
                    {"reconstruction_exact", exact}};
    w.json_file("decompose.json", summary);
    w.text("plot.py", std::string(kPlotHeader) + kPlotDecompose);
    return summary;
}

json run_homogeneity(const ExperimentConfig& cfg, Writer& w) {
    const auto& p = cfg.params;
    ProbeGrid grid{p.starts.points(), p.times.points(), p.shifts.points()};
    const auto report = check_time_homogeneity(std::get<DetFamily>(*cfg.spec), grid, p.tol);
    json out = {{"pass", report.pass}, {"matched_pairs", report.matched_pairs}};
    if (report.witness) {
        const auto& v = *report.witness;
        out["witness"] = {{"x", v.x}, {"s", v.s}, {"y", v.y}, {"t", v.t}, {"h", v.h}, {"lhs", v.lhs}, {"rhs", v.rhs}};
    } else {
        out["witness"] = nullptr;
    }
    w.json_file("homogeneity.json", out);
    return out;
}

}  // namespace

SymbolFn symbol_function(const ProcessSpec& spec, const ExperimentParams& params) {
    if (const auto* f = std::get_if<DetFamily>(&spec)) {
        const auto ts = schedule(params.t_schedule);
        const auto opts = mc_options(params);
        return [family = *f, ts, opts](double y, double xi) {
            const auto e = det_symbol(family, y, xi, ts, std::numeric_limits<double>::infinity(), opts);
            if (!e.value) {
                throw std::runtime_error(fmt::format("symbol at x = {}, xi = {} did not converge ({})", y, xi,
                                                     to_string(e.verdict)));
            }
            return *e.value;
        };
    }
    if (const auto* c = std::get_if<ClockedProcess>(&spec); c && c->clock.kind == ClockSpec::Kind::staircase) {
        throw std::runtime_error("a staircase clock has no symbol to index");
    }
    validate(spec);
    return [spec](double y, double xi) { return *analytic_symbol(spec, y, xi); };
}

std::vector<double> state_window(const ProcessSpec& spec, const ExperimentParams& p) {
    if (!p.window.empty()) return p.window;
    std::vector<double> out;
    const auto* f = std::get_if<DetFamily>(&spec);
    const bool orbit = f != nullptr && f->kind == DetFamily::Kind::quadratic;
    for (std::size_t i = 0; i < p.window_count; ++i) {
        const double u = p.window_count == 1
                             ? p.window_lo
                             : p.window_lo + (p.window_hi - p.window_lo) * static_cast<double>(i) /
                                                 static_cast<double>(p.window_count - 1);
        out.push_back(orbit ? det_family_eval(*f, 0.0, u) : u);
    }
    return out;
}

RunResult run_experiment(const ExperimentConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    Writer w(cfg.output_dir);
    RunResult result;
    result.output_dir = w.dir();
    switch (cfg.kind) {
        case ExperimentKind::symbol:
        case ExperimentKind::det_symbol:
            result.summary = run_symbol(cfg, w);
            break;
        case ExperimentKind::indices:
            result.summary = run_indices(cfg, w);
            break;
        case ExperimentKind::singular:
            result.summary = run_singular(cfg, w);
            break;
        case ExperimentKind::decompose:
            result.summary = run_decompose(cfg, w);
            break;
        case ExperimentKind::homogeneity:
            result.summary = run_homogeneity(cfg, w);
            break;
    }
    result.files = w.files();
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    json manifest = {{"config_hash", config_hash(cfg)},
                     {"seed", cfg.seed},
                     {"experiment", to_string(cfg.kind)},
                     {"versions", {{"psym", kVersion}, {"schema", kSchemaVersion}}},
                     {"wall_time_s", elapsed.count()},
                     {"files", result.files},
                     {"config", to_json(cfg)}};
    std::ofstream(w.dir() / "manifest.json", std::ios::binary | std::ios::trunc) << manifest.dump(2) << "\n";
    return result;
}

// ---------------------------------------------------------------------------

const std::vector<Preset>& presets() {
    static const std::vector<Preset> list{
        {"sawtooth-symbol", "Exact symbol of the sawtooth family at three starts and four frequencies",
         R"({"schema_version": 1, "experiment": "det_symbol", "seed": 0,
             "spec": {"kind": "det_family", "family": "sawtooth"},
             "params": {"x": [0, 0.5, 0.9], "xi": [-2, -1, 1, 2],
                        "t_schedule": {"first": 0.1, "ratio": 0.1, "count": 6}},
             "output_dir": "out/sawtooth-symbol"})"},
        {"quadratic-index", "H(R), beta0 and path growth of the quadratic family",
         R"({"schema_version": 1, "experiment": "indices", "seed": 0,
             "spec": {"kind": "det_family", "family": "quadratic"},
             "params": {"r_grid": {"first": 10, "ratio": 2, "count": 11}, "lambdas": [0.9],
                        "growth_times": [10, 100, 1000], "t_schedule": {"first": 0.1, "ratio": 0.1, "count": 8}},
             "output_dir": "out/quadratic-index"})"},
        {"cantor-clock", "Brownian motion run by the Cantor staircase clock: quotients diverge",
         R"({"schema_version": 1, "experiment": "symbol", "seed": 7,
             "spec": {"kind": "clocked", "triplet": {"Q": 1},
                      "clock": {"type": "staircase", "function": "cantor"}},
             "params": {"x": 0, "xi": [1, 2], "k": [10], "n_paths": 100000,
                        "t_schedule": {"first": 0.1111111111111111, "ratio": 0.3333333333333333, "count": 7}},
             "output_dir": "out/cantor-clock"})"},
        {"brownian-symbol", "Brownian symbol at three exit radii",
         R"({"schema_version": 1, "experiment": "symbol", "seed": 1,
             "spec": {"kind": "levy", "Q": 1},
             "params": {"x": 0, "xi": [1, 2], "k": [0.5, 1, 2], "n_paths": 100000,
                        "t_schedule": {"first": 0.1, "ratio": 0.5, "count": 8}},
             "output_dir": "out/brownian-symbol"})"},
        {"ou-symbol", "Ornstein-Uhlenbeck characteristics at x = 1 against the frozen exponent",
         R"({"schema_version": 1, "experiment": "symbol", "seed": 2,
             "spec": {"kind": "levy_type", "drift": {"poly": [0, -1]}, "Q": 1},
             "params": {"x": 1, "xi": [1, 2], "k": [10], "n_paths": 100000,
                        "t_schedule": {"first": 0.1, "ratio": 0.5, "count": 8}},
             "output_dir": "out/ou-symbol"})"},
        {"brownian-index", "H(R), beta0 and path growth of Brownian motion",
         R"({"schema_version": 1, "experiment": "indices", "seed": 3,
             "spec": {"kind": "levy", "Q": 1},
             "params": {"lambdas": [0.5, 4], "growth_times": [10, 100, 1000], "growth_step": 0.25,
                        "n_paths": 1000},
             "output_dir": "out/brownian-index"})"},
        {"dini-cantor", "Dini quotients of the Cantor function and a scan for infinite ones",
         R"({"schema_version": 1, "experiment": "singular",
             "params": {"function": "cantor", "points": [0, 0.25, 0.5], "sides": ["right", "left"],
                        "scan": {"lo": 0, "hi": 1, "resolution": 729, "threshold": 50}},
             "output_dir": "out/dini-cantor"})"},
        {"decompose-cantor", "Density and singular part of t + C(t) on a 3^-8 grid",
         R"({"schema_version": 1, "experiment": "decompose",
             "params": {"function": "affine+cantor:1,1", "lo": 0, "hi": 1, "step": 0.00015241579027587258},
             "output_dir": "out/decompose-cantor"})"},
        {"homogeneity-sawtooth", "Time-shift probe of the sawtooth family on a denominator-8 grid",
         R"({"schema_version": 1, "experiment": "homogeneity",
             "spec": {"kind": "det_family", "family": "sawtooth"},
             "output_dir": "out/homogeneity-sawtooth"})"},
        {"homogeneity-quadratic", "Time-shift probe of the quadratic family on orbit points",
         R"({"schema_version": 1, "experiment": "homogeneity",
             "spec": {"kind": "det_family", "family": "quadratic"},
             "output_dir": "out/homogeneity-quadratic"})"},
    };
    return list;
}

const Preset* find_preset(std::string_view name) {
    for (const auto& p : presets()) {
        if (p.name == name) return &p;
    }
    return nullptr;
}

}  // namespace psym

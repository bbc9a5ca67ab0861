#include "psym/errors.hpp"
#include "psym/process.hpp"

#include "json_reader.hpp"

namespace psym {

using detail::index_path;
using detail::JsonReader;
using nlohmann::json;

namespace {

std::optional<JumpSize> size_from_json(const json& doc, const std::string& path, std::vector<std::string>& errors) {
    if (doc.is_number()) return JumpSize::constant(doc.get<double>());
    JsonReader r(doc, path, errors);
    if (!r.valid()) return std::nullopt;
    const auto type = r.string("type").value_or("constant");
    std::optional<JumpSize> out;
    if (type == "constant") {
        if (auto v = r.required_number("value")) out = JumpSize::constant(*v);
    } else if (type == "uniform") {
        auto a = r.required_number("a");
        auto b = r.required_number("b");
        if (a && b) {
            if (*a < *b) {
                out = JumpSize::uniform(*a, *b);
            } else {
                r.error("b", "uniform jump needs a < b");
            }
        }
    } else if (type == "two_point") {
        auto a = r.required_number("a");
        auto b = r.required_number("b");
        auto p = r.required_number("p");
        if (a && b && p) {
            if (*p >= 0.0 && *p <= 1.0) {
                out = JumpSize::two_point(*a, *b, *p);
            } else {
                r.error("p", "probability must lie in [0,1]");
            }
        }
    } else {
        r.error("type", "expected constant, uniform or two_point");
    }
    r.finish();
    return out;
}

json size_to_json(const JumpSize& s) {
    switch (s.kind) {
        case JumpSize::Kind::constant:
            return {{"type", "constant"}, {"value", s.a}};
        case JumpSize::Kind::uniform:
            return {{"type", "uniform"}, {"a", s.a}, {"b", s.b}};
        case JumpSize::Kind::two_point:
            return {{"type", "two_point"}, {"a", s.a}, {"b", s.b}, {"p", s.p}};
    }
    return {};
}

std::optional<Coefficient> coefficient_from_json(const json& doc, const std::string& path,
                                                 std::vector<std::string>& errors) {
    if (doc.is_number()) return Coefficient::constant(doc.get<double>());
    JsonReader r(doc, path, errors);
    if (!r.valid()) return std::nullopt;
    std::optional<Coefficient> out;
    if (r.has("poly")) {
        if (auto cs = r.numbers("poly")) {
            try {
                out = Coefficient::polynomial(*cs);
            } catch (const ValidationError& e) {
                r.error("poly", e.what());
            }
        }
    } else if (const json* table = r.child("table")) {
        JsonReader t(*table, r.path("table"), errors);
        auto xs = t.numbers("x");
        auto ys = t.numbers("y");
        t.finish();
        if (xs && ys) {
            try {
                out = Coefficient::tabulated(*xs, *ys);
            } catch (const ValidationError& e) {
                r.error("table", e.what());
            }
        } else if (t.valid() && (!xs || !ys)) {
            r.error("table", "needs x and y lists");
        }
    } else {
        r.error("", "expected a number, {\"poly\": [...]} or {\"table\": {\"x\": [...], \"y\": [...]}}");
    }
    r.finish();
    return out;
}

json coefficient_to_json(const Coefficient& c) {
    if (c.is_polynomial()) {
        if (c.coefficients().size() == 1) return c.coefficients().front();
        return {{"poly", c.coefficients()}};
    }
    return {{"table", {{"x", c.nodes()}, {"y", c.coefficients()}}}};
}

// Fields shared by the levy kind and the clocked kind's triplet.
LevyTriplet triplet_fields(JsonReader& r, std::vector<std::string>& errors) {
    LevyTriplet t;
    t.drift = r.number_or("drift", 0.0);
    t.diffusion = r.number_or("Q", 0.0);
    if (t.diffusion < 0.0) r.error("Q", fmt::format("must be >= 0 (got {})", t.diffusion));
    if (const json* jumps = r.child("jumps")) {
        if (!jumps->is_array()) {
            r.error("jumps", "expected a list");
        } else {
            for (std::size_t i = 0; i < jumps->size(); ++i) {
                JsonReader j((*jumps)[i], index_path(r.path("jumps"), i), errors);
                if (!j.valid()) continue;
                JumpComponent c;
                c.rate = j.required_number("rate").value_or(0.0);
                if (c.rate < 0.0) j.error("rate", fmt::format("must be >= 0 (got {})", c.rate));
                if (const json* size = j.child("size")) {
                    if (auto s = size_from_json(*size, j.path("size"), errors)) c.size = *s;
                } else {
                    j.error("size", "missing jump size");
                }
                j.finish();
                t.jumps.push_back(c);
            }
        }
    }
    return t;
}

json triplet_to_json(const LevyTriplet& t) {
    json jumps = json::array();
    for (const auto& j : t.jumps) jumps.push_back({{"rate", j.rate}, {"size", size_to_json(j.size)}});
    return {{"drift", t.drift}, {"Q", t.diffusion}, {"jumps", jumps}};
}

}  // namespace

std::optional<StaircaseFunction> staircase_from_json(const json& doc, const std::string& path,
                                                     std::vector<std::string>& errors) {
    try {
        if (doc.is_string()) return StaircaseFunction::parse(doc.get<std::string>());
        JsonReader r(doc, path, errors);
        if (!r.valid()) return std::nullopt;
        std::optional<StaircaseFunction> out;
        if (auto csv = r.string("csv")) {
            out = StaircaseFunction::from_csv(*csv);
        } else {
            auto ts = r.numbers("t");
            auto vs = r.numbers("v");
            if (ts && vs) {
                out = StaircaseFunction::sampled(*ts, *vs);
            } else {
                r.error("", "expected a staircase name, {\"csv\": path} or {\"t\": [...], \"v\": [...]}");
            }
        }
        r.finish();
        return out;
    } catch (const ValidationError& e) {
        errors.push_back(fmt::format("{}: {}", path, e.what()));
        return std::nullopt;
    }
}

json staircase_to_json(const StaircaseFunction& f) {
    if (f.kind() == StaircaseKind::sampled) return {{"t", f.abscissae()}, {"v", f.values()}};
    return f.name();
}

std::optional<ProcessSpec> spec_from_json(const json& doc, const std::string& path, std::vector<std::string>& errors) {
    const std::size_t before = errors.size();
    JsonReader r(doc, path, errors);
    if (!r.valid()) return std::nullopt;
    const auto kind = r.string("kind");
    std::optional<ProcessSpec> out;
    if (!kind) {
        if (!r.has("kind")) r.error("kind", "missing (levy, levy_type, clocked or det_family)");
    } else if (*kind == "levy") {
        out = triplet_fields(r, errors);
    } else if (*kind == "levy_type") {
        DiffChar c;
        if (const json* v = r.child("drift")) {
            if (auto coef = coefficient_from_json(*v, r.path("drift"), errors)) c.drift = *coef;
        }
        if (const json* v = r.child("Q")) {
            if (auto coef = coefficient_from_json(*v, r.path("Q"), errors)) c.diffusion = *coef;
        }
        if (const json* jumps = r.child("jumps")) {
            if (!jumps->is_array()) {
                r.error("jumps", "expected a list");
            } else {
                for (std::size_t i = 0; i < jumps->size(); ++i) {
                    JsonReader j((*jumps)[i], index_path(r.path("jumps"), i), errors);
                    if (!j.valid()) continue;
                    StateJump sj;
                    if (const json* rate = j.child("rate")) {
                        if (auto coef = coefficient_from_json(*rate, j.path("rate"), errors)) sj.rate = *coef;
                    } else {
                        j.error("rate", "missing jump rate");
                    }
                    if (const json* size = j.child("size")) {
                        if (auto s = size_from_json(*size, j.path("size"), errors)) sj.size = *s;
                    } else {
                        j.error("size", "missing jump size");
                    }
                    j.finish();
                    c.jumps.push_back(sj);
                }
            }
        }
        c.max_dt = r.number_or("max_dt", c.max_dt);
        try {
            c.validate();
        } catch (const ValidationError& e) {
            for (const auto& p : e.problems()) errors.push_back(detail::join_path(path, p));
        }
        out = c;
    } else if (*kind == "clocked") {
        ClockedProcess c;
        if (const json* t = r.child("triplet")) {
            JsonReader tr(*t, r.path("triplet"), errors);
            if (tr.valid()) {
                c.triplet = triplet_fields(tr, errors);
                tr.finish();
            }
        } else {
            r.error("triplet", "missing");
        }
        const json* clock = r.child("clock");
        if (clock == nullptr || (clock->is_string() && clock->get<std::string>() == "identity")) {
            c.clock = ClockSpec::identity();
        } else {
            JsonReader cr(*clock, r.path("clock"), errors);
            if (cr.valid()) {
                const auto type = cr.string("type").value_or("");
                if (type == "identity") {
                    c.clock = ClockSpec::identity();
                } else if (type == "staircase") {
                    if (const json* f = cr.child("function")) {
                        if (auto s = staircase_from_json(*f, cr.path("function"), errors)) {
                            c.clock = ClockSpec::deterministic(*s);
                        }
                    } else {
                        cr.error("function", "missing staircase function");
                    }
                } else if (type == "ac_of_state") {
                    if (const json* g = cr.child("g")) {
                        if (auto coef = coefficient_from_json(*g, cr.path("g"), errors)) {
                            c.clock = ClockSpec::ac_of_state(*coef);
                        }
                    } else {
                        cr.error("g", "missing clock rate");
                    }
                } else {
                    cr.error("type", "expected identity, staircase or ac_of_state");
                }
                cr.finish();
            }
        }
        out = c;
    } else if (*kind == "det_family") {
        const auto family = r.string("family").value_or("");
        if (family == "sawtooth") {
            out = DetFamily{DetFamily::Kind::sawtooth};
        } else if (family == "quadratic") {
            out = DetFamily{DetFamily::Kind::quadratic};
        } else {
            r.error("family", "expected sawtooth or quadratic");
        }
    } else {
        r.error("kind", fmt::format("unknown kind '{}' (expected levy, levy_type, clocked or det_family)", *kind));
    }
    r.finish();
    if (errors.size() != before) return std::nullopt;
    return out;
}

ProcessSpec spec_from_json(const json& doc) {
    std::vector<std::string> errors;
    auto spec = spec_from_json(doc, "spec", errors);
    if (!spec || !errors.empty()) throw ValidationError(std::move(errors));
    return *spec;
}

json to_json(const ProcessSpec& spec) {
    json out;
    out["kind"] = kind_name(spec);
    if (const auto* t = std::get_if<LevyTriplet>(&spec)) {
        out.update(triplet_to_json(*t));
    } else if (const auto* c = std::get_if<DiffChar>(&spec)) {
        json jumps = json::array();
        for (const auto& j : c->jumps) {
            jumps.push_back({{"rate", coefficient_to_json(j.rate)}, {"size", size_to_json(j.size)}});
        }
        out["drift"] = coefficient_to_json(c->drift);
        out["Q"] = coefficient_to_json(c->diffusion);
        out["jumps"] = jumps;
        out["max_dt"] = c->max_dt;
    } else if (const auto* c = std::get_if<ClockedProcess>(&spec)) {
        out["triplet"] = triplet_to_json(c->triplet);
        switch (c->clock.kind) {
            case ClockSpec::Kind::identity:
                out["clock"] = {{"type", "identity"}};
                break;
            case ClockSpec::Kind::ac_of_state:
                out["clock"] = {{"type", "ac_of_state"}, {"g", coefficient_to_json(c->clock.rate)}};
                break;
            case ClockSpec::Kind::staircase:
                out["clock"] = {{"type", "staircase"}, {"function", staircase_to_json(*c->clock.staircase)}};
                break;
        }
    } else if (const auto* f = std::get_if<DetFamily>(&spec)) {
        out["family"] = f->kind == DetFamily::Kind::sawtooth ? "sawtooth" : "quadratic";
    }
    return out;
}

std::uint64_t fingerprint(const ProcessSpec& spec) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : to_json(spec).dump()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace psym

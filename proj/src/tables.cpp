#include "psym/tables.hpp"

#include "psym/errors.hpp"
#include "psym/indices.hpp"
#include "psym/singular.hpp"
#include "psym/symbol.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

namespace psym {

namespace {

using T = ColumnType;

bool cell_matches(const Cell& cell, ColumnType type) {
    switch (type) {
        case T::real:
            return std::holds_alternative<double>(cell);
        case T::count:
            return std::holds_alternative<std::uint64_t>(cell);
        case T::text:
            return std::holds_alternative<std::string>(cell);
    }
    return false;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

Cell parse_cell(const std::string& text, ColumnType type, std::size_t line, const std::string& column) {
    auto fail = [&] {
        return ValidationError(fmt::format("line {}, column {}: malformed value '{}'", line, column, text));
    };
    const char* first = text.data();
    const char* last = first + text.size();
    switch (type) {
        case T::real: {
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(first, last, v);
            if (ec != std::errc() || ptr != last || text.empty()) throw fail();
            return v;
        }
        case T::count: {
            std::uint64_t v = 0;
            const auto [ptr, ec] = std::from_chars(first, last, v);
            if (ec != std::errc() || ptr != last || text.empty()) throw fail();
            return v;
        }
        case T::text:
            if (text.find_first_of(",\"\n") != std::string::npos) throw fail();
            return text;
    }
    throw fail();
}

CsvSchema make(std::string name, std::vector<Column> columns) { return {std::move(name), std::move(columns)}; }

}  // namespace

const CsvSchema& quotient_schema() {
    static const CsvSchema s = make("quotients", {{"x", T::real}, {"xi", T::real}, {"k", T::real}, {"t", T::real},
                                                  {"re_q", T::real}, {"im_q", T::real}, {"se_re", T::real},
                                                  {"se_im", T::real}, {"n_paths", T::count}, {"verdict", T::text}});
    return s;
}

const CsvSchema& growth_schema() {
    static const CsvSchema s =
        make("growth", {{"lambda", T::real}, {"t", T::real}, {"scaled_sup", T::real}, {"verdict", T::text}});
    return s;
}

const CsvSchema& path_schema() {
    static const CsvSchema s = make("paths", {{"path_id", T::count}, {"t", T::real}, {"x", T::real}});
    return s;
}

const CsvSchema& dini_schema() {
    static const CsvSchema s = make("dini", {{"x0", T::real}, {"side", T::text}, {"envelope", T::text},
                                             {"h", T::real}, {"quotient", T::real}, {"verdict", T::text}});
    return s;
}

const CsvSchema& dini_hits_schema() {
    static const CsvSchema s = make("dini_hits", {{"point", T::real}, {"max_quotient", T::real}});
    return s;
}

const CsvSchema& decomposition_schema() {
    static const CsvSchema s = make("decomposition", {{"t", T::real}, {"F", T::real}, {"g", T::real},
                                                      {"A", T::real}, {"S", T::real}});
    return s;
}

const CsvSchema& h_schema() {
    static const CsvSchema s = make("h", {{"R", T::real}, {"H", T::real}});
    return s;
}

const CsvSchema& curve_schema() {
    static const CsvSchema s = make("curve", {{"t", T::real}, {"F", T::real}});
    return s;
}

std::string format_cell(const Cell& cell) {
    return std::visit([](const auto& v) { return fmt::format("{}", v); }, cell);
}

void write_csv(std::ostream& out, const CsvSchema& schema, std::span<const Row> rows) {
    for (std::size_t c = 0; c < schema.columns.size(); ++c) out << (c ? "," : "") << schema.columns[c].name;
    out << '\n';
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const Row& row = rows[r];
        if (row.size() != schema.columns.size()) {
            throw std::invalid_argument(fmt::format("{} row {}: {} cells for {} columns", schema.name, r, row.size(),
                                                    schema.columns.size()));
        }
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (!cell_matches(row[c], schema.columns[c].type)) {
                throw std::invalid_argument(
                    fmt::format("{} row {}: column {} has the wrong type", schema.name, r, schema.columns[c].name));
            }
            out << (c ? "," : "") << format_cell(row[c]);
        }
        out << '\n';
    }
}

std::vector<Row> parse_csv(std::istream& in, const CsvSchema& schema) {
    std::string line;
    if (!std::getline(in, line)) throw ValidationError(fmt::format("{}: empty input, expected a header", schema.name));
    const auto header = split(line);
    bool header_ok = header.size() == schema.columns.size();
    for (std::size_t c = 0; header_ok && c < header.size(); ++c) header_ok = header[c] == schema.columns[c].name;
    if (!header_ok) throw ValidationError(fmt::format("line 1: header '{}' does not match the {} schema", line, schema.name));

    std::vector<Row> rows;
    std::size_t number = 1;
    while (std::getline(in, line)) {
        ++number;
        const auto fields = split(line);
        if (fields.size() != schema.columns.size()) {
            throw ValidationError(
                fmt::format("line {}: {} fields, expected {}", number, fields.size(), schema.columns.size()));
        }
        Row row;
        row.reserve(fields.size());
        for (std::size_t c = 0; c < fields.size(); ++c) {
            row.push_back(parse_cell(fields[c], schema.columns[c].type, number, schema.columns[c].name));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<Row> quotient_rows(const SymbolEstimate& e) {
    std::vector<Row> rows;
    const std::string verdict = to_string(e.verdict);
    for (const auto& q : e.table) {
        rows.push_back({e.x, e.xi, e.k, q.t, q.value.real(), q.value.imag(), q.se_re, q.se_im,
                        static_cast<std::uint64_t>(q.n_paths), verdict});
    }
    return rows;
}

std::vector<Row> growth_rows(const GrowthTable& table) {
    std::vector<Row> rows;
    for (const auto& r : table.rows) {
        std::string verdict;
        for (std::size_t i = 0; i < table.lambdas.size(); ++i) {
            if (table.lambdas[i] == r.lambda) verdict = to_string(table.verdicts[i]);
        }
        rows.push_back({r.lambda, r.t, r.scaled_sup, verdict});
    }
    return rows;
}

std::vector<Row> path_rows(const PathSample& path, std::uint64_t path_id) {
    std::vector<Row> rows;
    rows.reserve(path.times.size());
    for (std::size_t i = 0; i < path.times.size(); ++i) rows.push_back({path_id, path.times[i], path.states[i]});
    return rows;
}

std::vector<Row> dini_rows(const DiniEstimate& e) {
    const std::string side = e.side == DiniSide::right ? "right" : "left";
    const std::string envelope = e.envelope == DiniEnvelope::upper ? "upper" : "lower";
    std::string verdict;
    switch (e.verdict.kind) {
        case DiniVerdict::Kind::finite:
            verdict = "finite";
            break;
        case DiniVerdict::Kind::diverging:
            verdict = "diverging";
            break;
        case DiniVerdict::Kind::inconclusive:
            verdict = "inconclusive";
            break;
    }
    std::vector<Row> rows;
    for (const auto& q : e.quotients) rows.push_back({e.x0, side, envelope, q.h, q.quotient, verdict});
    return rows;
}

std::vector<Row> decomposition_rows(std::span<const double> ts, std::span<const double> samples,
                                    const Decomposition& d) {
    std::vector<Row> rows;
    rows.reserve(ts.size());
    double cum = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        cum += d.density[i];
        rows.push_back({ts[i], samples[i], d.density[i], cum * d.step, d.singular[i]});
    }
    return rows;
}

}  // namespace psym

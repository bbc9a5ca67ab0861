#pragma once

// CSV emission with fixed schemas, and the matching parser used to check that
// emitted rows round-trip. Reals are written in shortest round-trip form.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace psym {

struct SymbolEstimate;
struct GrowthTable;
struct PathSample;
struct DiniEstimate;
struct Decomposition;

enum class ColumnType { real, count, text };

struct Column {
    std::string name;
    ColumnType type;
};

struct CsvSchema {
    std::string name;
    std::vector<Column> columns;
};

using Cell = std::variant<double, std::uint64_t, std::string>;
using Row = std::vector<Cell>;

// x, xi, k, t, re_q, im_q, se_re, se_im, n_paths, verdict
const CsvSchema& quotient_schema();
// lambda, t, scaled_sup, verdict
const CsvSchema& growth_schema();
// path_id, t, x
const CsvSchema& path_schema();
// x0, side, envelope, h, quotient, verdict
const CsvSchema& dini_schema();
// point, max_quotient
const CsvSchema& dini_hits_schema();
// t, F, g, A, S
const CsvSchema& decomposition_schema();
// R, H
const CsvSchema& h_schema();
// t, F
const CsvSchema& curve_schema();

std::string format_cell(const Cell& cell);

/// Header line then one line per row; throws std::invalid_argument if a row
/// does not match the schema.
void write_csv(std::ostream& out, const CsvSchema& schema, std::span<const Row> rows);

/// Parses text written by write_csv. Throws ValidationError naming the line
/// and column on a header mismatch, a wrong field count or a malformed cell.
std::vector<Row> parse_csv(std::istream& in, const CsvSchema& schema);

std::vector<Row> quotient_rows(const SymbolEstimate& estimate);
std::vector<Row> growth_rows(const GrowthTable& table);
std::vector<Row> path_rows(const PathSample& path, std::uint64_t path_id);
std::vector<Row> dini_rows(const DiniEstimate& estimate);
std::vector<Row> decomposition_rows(std::span<const double> ts, std::span<const double> samples,
                                    const Decomposition& d);

}  // namespace psym

#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace sqleval {

// Fixed-point decimal scaled by 1e6. Floats are rounded to six decimal
// places before any comparison; a float whose fractional part vanishes
// after rounding is stored as an Integer cell instead of a Decimal6.
struct Decimal6 {
    std::int64_t micros = 0;

    double value() const { return static_cast<double>(micros) / 1e6; }
    auto operator<=>(const Decimal6&) const = default;
};

// Blobs are compared by content digest (FNV-1a) plus length; the raw
// bytes are not retained.
struct BlobDigest {
    std::uint64_t digest = 0;
    std::uint64_t size = 0;

    auto operator<=>(const BlobDigest&) const = default;
};

// Canonical cell value. All NULLs compare equal (monostate). The variant
// order defines a total order across types, which makes rows and tables
// sortable and usable as set elements.
using Cell = std::variant<std::monostate, std::int64_t, Decimal6, std::string, BlobDigest>;

using Row = std::vector<Cell>;

struct CanonicalTable {
    std::size_t n_cols = 0;
    std::vector<Row> rows;

    bool operator==(const CanonicalTable&) const = default;
};

// Raw cell as produced by the database engine, before canonicalization.
struct RawCell {
    enum class Kind { Null, Integer, Float, Text, Blob };
    Kind kind = Kind::Null;
    std::int64_t integer = 0;
    double real = 0.0;
    std::string text;          // Text payload
    std::vector<unsigned char> blob;  // Blob payload

    static RawCell null() { return {}; }
    static RawCell of_int(std::int64_t v);
    static RawCell of_float(double v);
    static RawCell of_text(std::string v);
    static RawCell of_blob(std::vector<unsigned char> v);
};

using RawRow = std::vector<RawCell>;

// Canonicalize one engine value.
Cell canonicalize(const RawCell& raw);

// Canonicalize a rectangular result. Throws RaggedRows if any row length
// differs from n_cols.
CanonicalTable normalize(const std::vector<RawRow>& rows, std::size_t n_cols);

// Re-canonicalization of an already canonical table (idempotence surface).
CanonicalTable normalize(const CanonicalTable& table);

std::uint64_t fnv1a64(const unsigned char* data, std::size_t size);

bool cell_less(const Cell& a, const Cell& b);
bool row_less(const Row& a, const Row& b);

// Distinct rows of a table, sorted. This is the row-set view used by
// set-based grading and by execution-result clustering.
std::vector<Row> sorted_distinct_rows(const CanonicalTable& table);

// Row-set equality: same n_cols and the same set of distinct rows.
bool table_set_equal(const CanonicalTable& a, const CanonicalTable& b);

// Render a cell for prompts, reports and CSV output. Deterministic:
// NULL, integer digits, trimmed 6-decimal form, text verbatim,
// blob:<hex digest>.
std::string cell_to_string(const Cell& cell);

std::string row_to_string(const Row& row, char separator = '|');

}  // namespace sqleval

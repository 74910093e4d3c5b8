#include "sqleval/value.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>

#include "sqleval/errors.hpp"

namespace sqleval {

RawCell RawCell::of_int(std::int64_t v) {
    RawCell c;
    c.kind = Kind::Integer;
    c.integer = v;
    return c;
}

RawCell RawCell::of_float(double v) {
    RawCell c;
    c.kind = Kind::Float;
    c.real = v;
    return c;
}

RawCell RawCell::of_text(std::string v) {
    RawCell c;
    c.kind = Kind::Text;
    c.text = std::move(v);
    return c;
}

RawCell RawCell::of_blob(std::vector<unsigned char> v) {
    RawCell c;
    c.kind = Kind::Blob;
    c.blob = std::move(v);
    return c;
}

std::uint64_t fnv1a64(const unsigned char* data, std::size_t size) {
    std::uint64_t h = 1469598103934665603ull;
    for (std::size_t i = 0; i < size; ++i) {
        h ^= data[i];
        h *= 1099511628211ull;
    }
    return h;
}

namespace {

// Scaled values stay exact in int64 up to ~9.2e12; beyond that a double
// has no 6-decimal precision left, so integral values collapse to Integer
// and the rest fall back to a fixed-format text form.
constexpr double kScaledLimit = 9.0e12;

Cell canonicalize_float(double v) {
    if (!std::isfinite(v)) {
        if (std::isnan(v)) return Cell{std::string("nan")};
        return Cell{std::string(v > 0 ? "inf" : "-inf")};
    }
    if (std::abs(v) < kScaledLimit) {
        const std::int64_t micros = std::llround(v * 1e6);
        if (micros % 1000000 == 0) return Cell{micros / 1000000};
        return Cell{Decimal6{micros}};
    }
    if (std::trunc(v) == v && std::abs(v) < 9.2e18) {
        return Cell{static_cast<std::int64_t>(std::llround(v))};
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return Cell{std::string(buf)};
}

}  // namespace

Cell canonicalize(const RawCell& raw) {
    switch (raw.kind) {
        case RawCell::Kind::Null:
            return Cell{std::monostate{}};
        case RawCell::Kind::Integer:
            return Cell{raw.integer};
        case RawCell::Kind::Float:
            return canonicalize_float(raw.real);
        case RawCell::Kind::Text:
            return Cell{raw.text};
        case RawCell::Kind::Blob:
            return Cell{BlobDigest{fnv1a64(raw.blob.data(), raw.blob.size()), raw.blob.size()}};
    }
    return Cell{std::monostate{}};
}

CanonicalTable normalize(const std::vector<RawRow>& rows, std::size_t n_cols) {
    CanonicalTable table;
    table.n_cols = n_cols;
    table.rows.reserve(rows.size());
    for (const RawRow& raw_row : rows) {
        if (raw_row.size() != n_cols) {
            throw RaggedRows("row with " + std::to_string(raw_row.size()) +
                             " cells in a " + std::to_string(n_cols) + "-column result");
        }
        Row row;
        row.reserve(n_cols);
        for (const RawCell& raw : raw_row) row.push_back(canonicalize(raw));
        table.rows.push_back(std::move(row));
    }
    return table;
}

CanonicalTable normalize(const CanonicalTable& table) {
    CanonicalTable out;
    out.n_cols = table.n_cols;
    out.rows.reserve(table.rows.size());
    for (const Row& row : table.rows) {
        if (row.size() != table.n_cols) {
            throw RaggedRows("canonical table with ragged row");
        }
        Row copy;
        copy.reserve(row.size());
        for (const Cell& cell : row) {
            if (const auto* dec = std::get_if<Decimal6>(&cell)) {
                copy.push_back(canonicalize_float(dec->value()));
            } else {
                copy.push_back(cell);
            }
        }
        out.rows.push_back(std::move(copy));
    }
    return out;
}

bool cell_less(const Cell& a, const Cell& b) { return a < b; }

bool row_less(const Row& a, const Row& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

std::vector<Row> sorted_distinct_rows(const CanonicalTable& table) {
    std::vector<Row> rows = table.rows;
    std::sort(rows.begin(), rows.end(), row_less);
    rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
    return rows;
}

bool table_set_equal(const CanonicalTable& a, const CanonicalTable& b) {
    if (a.n_cols != b.n_cols) return false;
    return sorted_distinct_rows(a) == sorted_distinct_rows(b);
}

std::string cell_to_string(const Cell& cell) {
    struct Visitor {
        std::string operator()(std::monostate) const { return "NULL"; }
        std::string operator()(std::int64_t v) const { return std::to_string(v); }
        std::string operator()(const Decimal6& v) const {
            char buf[40];
            std::snprintf(buf, sizeof(buf), "%.6f", v.value());
            std::string s(buf);
            while (s.size() > 1 && s.back() == '0') s.pop_back();
            if (!s.empty() && s.back() == '.') s.pop_back();
            return s;
        }
        std::string operator()(const std::string& v) const { return v; }
        std::string operator()(const BlobDigest& v) const {
            char buf[40];
            std::snprintf(buf, sizeof(buf), "blob:%016llx/%llu",
                          static_cast<unsigned long long>(v.digest),
                          static_cast<unsigned long long>(v.size));
            return buf;
        }
    };
    return std::visit(Visitor{}, cell);
}

std::string row_to_string(const Row& row, char separator) {
    std::string out;
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (i > 0) out.push_back(separator);
        out += cell_to_string(row[i]);
    }
    return out;
}

}  // namespace sqleval

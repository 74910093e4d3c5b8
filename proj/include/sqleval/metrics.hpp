#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace sqleval {

// Structural complexity counters for one SQL query.
//
// Counting rules:
//   tables          base-table references in any FROM/JOIN clause, across
//                   all scopes (CTE bodies included); CTE names referenced
//                   in FROM do not count
//   joins           JOIN keywords plus comma-separated FROM items beyond
//                   the first
//   aggregations    COUNT/SUM/AVG/MIN/MAX/TOTAL/GROUP_CONCAT calls,
//                   including inside OVER clauses
//   functions       all other function-call expressions
//   set_operations  UNION / UNION ALL / INTERSECT / EXCEPT occurrences
//   subqueries      parenthesized SELECTs outside WITH definitions
//   ctes            entries in WITH clauses
//   window_functions  expressions carrying an OVER clause
struct ComplexityProfile {
    std::int64_t tables = 0;
    std::int64_t joins = 0;
    std::int64_t functions = 0;
    std::int64_t aggregations = 0;
    std::int64_t set_operations = 0;
    std::int64_t subqueries = 0;
    std::int64_t ctes = 0;
    std::int64_t window_functions = 0;

    bool operator==(const ComplexityProfile&) const = default;
    ComplexityProfile& operator+=(const ComplexityProfile& other);
};

// Throws ParseError for input the scanner cannot tokenize or bracket-match.
ComplexityProfile complexity_profile(std::string_view sql);

// Counter means in the canonical column order (tables, joins, functions,
// aggregations, set operations, subqueries, CTEs, window functions).
struct CorpusStats {
    std::array<double, 8> means{};
    std::size_t counted = 0;
    std::vector<std::pair<std::size_t, std::string>> excluded;  // (index, error)
};

std::array<double, 8> profile_means_order(const ComplexityProfile& totals, double denominator);

// Arithmetic mean per counter over a corpus; unparseable queries are
// reported and excluded. Throws AllUnparseable when nothing parses.
// Queries are independent, so the corpus is processed in parallel.
CorpusStats corpus_stats(const std::vector<std::string>& queries);

// Serial reference implementation, kept for equivalence testing and for
// the serial/parallel benchmark.
CorpusStats corpus_stats_serial(const std::vector<std::string>& queries);

extern const std::array<std::string_view, 8> kComplexityColumnNames;

}  // namespace sqleval

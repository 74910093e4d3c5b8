#include <doctest.h>

#include <string>
#include <vector>

#include "sqleval/errors.hpp"
#include "sqleval/metrics.hpp"

using namespace sqleval;

namespace {

ComplexityProfile profile_of(std::int64_t tables, std::int64_t joins, std::int64_t functions,
                             std::int64_t aggregations, std::int64_t set_operations,
                             std::int64_t subqueries, std::int64_t ctes,
                             std::int64_t window_functions) {
    ComplexityProfile p;
    p.tables = tables;
    p.joins = joins;
    p.functions = functions;
    p.aggregations = aggregations;
    p.set_operations = set_operations;
    p.subqueries = subqueries;
    p.ctes = ctes;
    p.window_functions = window_functions;
    return p;
}

struct LabeledFixture {
    const char* name;
    const char* sql;
    ComplexityProfile expected;
};

// Hand-counted fixtures pinning the counting convention.
const std::vector<LabeledFixture>& fixtures() {
    static const std::vector<LabeledFixture> cases = {
        {"bare literal", "SELECT 1", profile_of(0, 0, 0, 0, 0, 0, 0, 0)},
        {"distinct count over two joins",
         "SELECT COUNT(DISTINCT T1.student_id) FROM student AS T1 "
         "INNER JOIN registration AS T2 ON T1.student_id = T2.student_id "
         "INNER JOIN course AS T3 ON T2.course_id = T3.course_id "
         "WHERE T3.credit = 3 AND T1.gpa = 3.2",
         profile_of(3, 2, 0, 1, 0, 0, 0, 0)},
        {"cte for ties",
         "WITH cheapest AS (SELECT MIN(price) AS min_p FROM price) "
         "SELECT T1.ID FROM data AS T1 "
         "INNER JOIN production AS T2 ON T1.ID = T2.ID "
         "INNER JOIN price AS T3 ON T3.ID = T2.ID "
         "INNER JOIN cheapest AS T4 ON T3.price = T4.min_p",
         profile_of(4, 3, 0, 1, 0, 0, 1, 0)},
        {"aggregate range with null guards",
         "SELECT MIN(weight * 1.0 / (height * height) * 703), "
         "MAX(weight * 1.0 / (height * height) * 703) FROM players "
         "WHERE weight IS NOT NULL AND weight > 0 "
         "AND height IS NOT NULL AND height > 0",
         profile_of(1, 0, 0, 2, 0, 0, 0, 0)},
        {"comma join with a scalar function",
         "SELECT UPPER(a.name) FROM artists a, albums b WHERE a.id = b.artist_id",
         profile_of(2, 1, 1, 0, 0, 0, 0, 0)},
        {"membership subquery",
         "SELECT name FROM student WHERE student_id IN (SELECT student_id FROM registration)",
         profile_of(2, 0, 0, 0, 0, 1, 0, 0)},
        {"derived table plus exists",
         "SELECT * FROM (SELECT course_id, COUNT(*) AS n FROM registration GROUP BY course_id) d "
         "WHERE EXISTS (SELECT 1 FROM course c WHERE c.course_id = d.course_id)",
         profile_of(2, 0, 0, 1, 0, 2, 0, 0)},
        {"union all",
         "SELECT name FROM student UNION ALL SELECT title FROM course",
         profile_of(2, 0, 0, 0, 1, 0, 0, 0)},
        {"row_number window",
         "SELECT name, ROW_NUMBER() OVER (PARTITION BY gpa ORDER BY name) FROM student",
         profile_of(1, 0, 1, 0, 0, 0, 0, 1)},
        {"aggregate in a window",
         "SELECT name, SUM(gpa) OVER (ORDER BY student_id) FROM student",
         profile_of(1, 0, 0, 1, 0, 0, 0, 1)},
        {"two ctes, membership subquery, except",
         "WITH a AS (SELECT student_id FROM registration), "
         "b AS (SELECT CAST(gpa AS INTEGER) AS g, student_id FROM student) "
         "SELECT g FROM b WHERE student_id IN (SELECT student_id FROM a) "
         "EXCEPT SELECT 4",
         profile_of(2, 0, 1, 0, 1, 1, 2, 0)},
        {"full mix",
         "SELECT strftime('%Y', e.hire_date) AS year, COUNT(DISTINCT e.id), MAX(s.amount) "
         "FROM employees e LEFT JOIN salaries s ON s.emp_id = e.id "
         "AND s.amount > (SELECT AVG(amount) FROM salaries) "
         "GROUP BY strftime('%Y', e.hire_date)",
         profile_of(3, 1, 2, 3, 0, 1, 0, 0)},
    };
    return cases;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("hand-labeled fixtures match exactly") {
    for (const LabeledFixture& fixture : fixtures()) {
        CAPTURE(fixture.name);
        const ComplexityProfile actual = complexity_profile(fixture.sql);
        CHECK(actual.tables == fixture.expected.tables);
        CHECK(actual.joins == fixture.expected.joins);
        CHECK(actual.functions == fixture.expected.functions);
        CHECK(actual.aggregations == fixture.expected.aggregations);
        CHECK(actual.set_operations == fixture.expected.set_operations);
        CHECK(actual.subqueries == fixture.expected.subqueries);
        CHECK(actual.ctes == fixture.expected.ctes);
        CHECK(actual.window_functions == fixture.expected.window_functions);
    }
}

TEST_CASE("profiles are whitespace and comment insensitive") {
    const std::string compact =
        "SELECT COUNT(*) FROM student WHERE gpa > 3 AND student_id IN "
        "(SELECT student_id FROM registration)";
    const std::string noisy =
        "SELECT\n  COUNT(*)  -- how many\nFROM   student /* the base table */\n"
        "WHERE gpa > 3\n  AND student_id IN (\n    SELECT student_id FROM registration\n  )";
    CHECK(complexity_profile(compact) == complexity_profile(noisy));
}

TEST_CASE("quoted identifiers never count as keywords or functions") {
    const auto p = complexity_profile(
        "SELECT \"count\" FROM \"from\" WHERE [select] = `union`");
    CHECK(p.tables == 1);
    CHECK(p.functions == 0);
    CHECK(p.set_operations == 0);
}

TEST_CASE("wrapping as a derived table adds exactly one subquery") {
    for (const LabeledFixture& fixture : fixtures()) {
        const ComplexityProfile base = complexity_profile(fixture.sql);
        const ComplexityProfile wrapped =
            complexity_profile("SELECT * FROM (" + std::string(fixture.sql) + ")");
        CAPTURE(fixture.name);
        CHECK(wrapped.subqueries == base.subqueries + 1);
        CHECK(wrapped.ctes == base.ctes);
        CHECK(wrapped.tables == base.tables);
        CHECK(wrapped.joins == base.joins);
        CHECK(wrapped.set_operations == base.set_operations);
    }
}

TEST_CASE("prepending a WITH clause adds exactly one cte") {
    for (const LabeledFixture& fixture : fixtures()) {
        if (std::string_view(fixture.sql).substr(0, 4) == "WITH") continue;
        const ComplexityProfile base = complexity_profile(fixture.sql);
        const ComplexityProfile with =
            complexity_profile("WITH helper AS (SELECT 1) " + std::string(fixture.sql));
        CAPTURE(fixture.name);
        CHECK(with.ctes == base.ctes + 1);
        CHECK(with.tables == base.tables);
        CHECK(with.subqueries == base.subqueries);
        CHECK(with.joins == base.joins);
    }
    // Referencing the CTE does not add a table.
    const auto referenced =
        complexity_profile("WITH helper AS (SELECT 1 AS x) SELECT x FROM helper");
    CHECK(referenced.ctes == 1);
    CHECK(referenced.tables == 0);
}

TEST_CASE("self-union doubles every counter except set operations") {
    const std::vector<std::string> queries = {
        "SELECT COUNT(DISTINCT a) FROM t WHERE b IN (SELECT c FROM u)",
        "SELECT x, SUM(y) OVER (PARTITION BY z) FROM w",
        "SELECT name FROM student UNION SELECT title FROM course",
    };
    for (const std::string& q : queries) {
        const ComplexityProfile base = complexity_profile(q);
        const ComplexityProfile doubled = complexity_profile(q + " UNION " + q);
        CHECK(doubled.tables == 2 * base.tables);
        CHECK(doubled.joins == 2 * base.joins);
        CHECK(doubled.functions == 2 * base.functions);
        CHECK(doubled.aggregations == 2 * base.aggregations);
        CHECK(doubled.subqueries == 2 * base.subqueries);
        CHECK(doubled.ctes == 2 * base.ctes);
        CHECK(doubled.window_functions == 2 * base.window_functions);
        CHECK(doubled.set_operations == 2 * base.set_operations + 1);
    }
}

TEST_CASE("malformed input raises ParseError") {
    CHECK_THROWS_AS(complexity_profile("SELECT (1 FROM t"), ParseError);
    CHECK_THROWS_AS(complexity_profile("SELECT 'unterminated"), ParseError);
    CHECK_THROWS_AS(complexity_profile("  "), ParseError);
    CHECK_THROWS_AS(complexity_profile("WITH x SELECT 1"), ParseError);
    CHECK_THROWS_AS(complexity_profile("SELECT 1)"), ParseError);
    CHECK_THROWS_AS(complexity_profile("SELECT /* open"), ParseError);
}

TEST_CASE("corpus means are per-counter arithmetic means") {
    const std::vector<std::string> corpus = {
        "SELECT a FROM t1 JOIN t2 ON t1.x = t2.x",                       // 2 tables, 1 join
        "SELECT b FROM t1, t2, t3, t4",                                  // 4 tables, 3 joins
    };
    const CorpusStats stats = corpus_stats(corpus);
    CHECK(stats.counted == 2);
    CHECK(stats.means[0] == 3.0);  // tables
    CHECK(stats.means[1] == 2.0);  // joins
    CHECK(stats.excluded.empty());
}

TEST_CASE("unparseable corpus entries are excluded and reported") {
    const std::vector<std::string> corpus = {"SELECT 1", "SELECT ("};
    const CorpusStats stats = corpus_stats(corpus);
    CHECK(stats.counted == 1);
    REQUIRE(stats.excluded.size() == 1);
    CHECK(stats.excluded[0].first == 1);

    CHECK_THROWS_AS(corpus_stats({"SELECT ("}), AllUnparseable);
    CHECK_THROWS_AS(corpus_stats({}), AllUnparseable);
}

TEST_CASE("multiple statements accumulate counters") {
    const auto p = complexity_profile("SELECT a FROM t; SELECT b FROM u;");
    CHECK(p.tables == 2);
}

}  // TEST_SUITE

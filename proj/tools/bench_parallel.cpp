// Benchmark of the OpenMP batch paths against their serial references:
// corpus complexity statistics and bulk set-based grading.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "sqleval/grading.hpp"
#include "sqleval/metrics.hpp"
#include "sqleval/value.hpp"

using namespace sqleval;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<std::string> synthetic_corpus(std::size_t n, std::uint64_t seed) {
    static const char* templates[] = {
        "SELECT COUNT(DISTINCT a.id) FROM alpha AS a INNER JOIN beta AS b ON a.id = b.a_id "
        "WHERE a.score > %d AND b.tag = 'x%d'",
        "WITH top AS (SELECT MAX(price) AS p FROM items) SELECT i.name FROM items AS i "
        "INNER JOIN top AS t ON i.price = t.p WHERE i.stock > %d",
        "SELECT name, SUM(amount) OVER (PARTITION BY region) FROM sales WHERE year = %d "
        "UNION ALL SELECT name, amount FROM archive WHERE year = %d",
        "SELECT * FROM (SELECT customer, AVG(total) AS avg_total FROM orders GROUP BY customer) "
        "WHERE avg_total > %d AND customer IN (SELECT id FROM vip WHERE tier = %d)",
    };
    std::mt19937_64 rng(seed);
    std::vector<std::string> corpus;
    corpus.reserve(n);
    char buf[512];
    for (std::size_t i = 0; i < n; ++i) {
        const int v = static_cast<int>(rng() % 1000);
        std::snprintf(buf, sizeof(buf), templates[rng() % 4], v, v);
        corpus.emplace_back(buf);
    }
    return corpus;
}

CanonicalTable random_table(std::mt19937_64& rng) {
    CanonicalTable table;
    table.n_cols = 1 + rng() % 3;
    const std::size_t rows = 1 + rng() % 64;
    for (std::size_t r = 0; r < rows; ++r) {
        Row row;
        for (std::size_t c = 0; c < table.n_cols; ++c) {
            row.push_back(Cell{static_cast<std::int64_t>(rng() % 100)});
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

}  // namespace

int main(int argc, char** argv) {
    std::size_t corpus_size = 40000;
    std::size_t pair_count = 200000;
    if (argc > 1) corpus_size = static_cast<std::size_t>(std::atoll(argv[1]));
    if (argc > 2) pair_count = static_cast<std::size_t>(std::atoll(argv[2]));

    std::printf("threads available: %d\n\n", omp_get_max_threads());

    // corpus statistics
    const auto corpus = synthetic_corpus(corpus_size, 7);
    auto t0 = Clock::now();
    const CorpusStats serial = corpus_stats_serial(corpus);
    const double serial_s = seconds_since(t0);
    t0 = Clock::now();
    const CorpusStats parallel = corpus_stats(corpus);
    const double parallel_s = seconds_since(t0);
    const bool stats_match = serial.means == parallel.means;

    std::printf("corpus_stats   %zu queries   serial %.3fs   openmp %.3fs   speedup %.2fx   %s\n",
                corpus.size(), serial_s, parallel_s, serial_s / parallel_s,
                stats_match ? "results match" : "MISMATCH");

    // bulk set grading
    std::mt19937_64 rng(11);
    std::vector<std::pair<CanonicalTable, CanonicalTable>> pairs;
    pairs.reserve(pair_count);
    for (std::size_t i = 0; i < pair_count; ++i) {
        CanonicalTable gold = random_table(rng);
        CanonicalTable candidate = rng() % 2 == 0 ? gold : random_table(rng);
        pairs.emplace_back(std::move(candidate), std::move(gold));
    }

    std::vector<char> verdict_serial(pairs.size());
    t0 = Clock::now();
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        verdict_serial[i] =
            grade(pairs[i].first, pairs[i].second, GradingMethod::SetBased).correct ? 1 : 0;
    }
    const double grade_serial_s = seconds_since(t0);

    std::vector<char> verdict_parallel(pairs.size());
    t0 = Clock::now();
    const std::int64_t n = static_cast<std::int64_t>(pairs.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        verdict_parallel[i] =
            grade(pairs[i].first, pairs[i].second, GradingMethod::SetBased).correct ? 1 : 0;
    }
    const double grade_parallel_s = seconds_since(t0);
    const bool grade_match = verdict_serial == verdict_parallel;

    std::printf("set grading    %zu pairs     serial %.3fs   openmp %.3fs   speedup %.2fx   %s\n",
                pairs.size(), grade_serial_s, grade_parallel_s,
                grade_serial_s / grade_parallel_s, grade_match ? "results match" : "MISMATCH");

    return stats_match && grade_match ? 0 : 1;
}

#include <doctest.h>

#include <json.hpp>

#include "mock_clients.hpp"
#include "sqleval/harness.hpp"
#include "sqleval/metrics.hpp"
#include "test_support.hpp"

using namespace sqleval;
using namespace std::chrono_literals;
using testsupport::TempDir;
using testsupport::make_instance;
using testsupport::write_text;

TEST_SUITE("parallel") {

TEST_CASE("corpus statistics match the serial reference") {
    std::vector<std::string> corpus;
    for (int i = 0; i < 2000; ++i) {
        switch (i % 4) {
            case 0: corpus.push_back("SELECT a FROM t" + std::to_string(i)); break;
            case 1: corpus.push_back("SELECT COUNT(*) FROM x JOIN y ON x.id = y.id"); break;
            case 2:
                corpus.push_back("WITH c AS (SELECT 1) SELECT * FROM c, d WHERE e IN "
                                 "(SELECT f FROM g)");
                break;
            default: corpus.push_back(i % 8 == 3 ? "SELECT (" : "SELECT MAX(v) FROM w");
        }
    }
    const CorpusStats serial = corpus_stats_serial(corpus);
    const CorpusStats parallel = corpus_stats(corpus);
    CHECK(serial.means == parallel.means);
    CHECK(serial.counted == parallel.counted);
    CHECK(serial.excluded == parallel.excluded);
}

TEST_CASE("parallel evaluation reports byte-identical results") {
    TempDir dir("parallel_eval");
    std::vector<TextToSqlInstance> instances;
    for (int i = 0; i < 16; ++i) {
        instances.push_back(make_instance("p" + std::to_string(i), "q",
                                          i % 3 == 0 ? "SELECT COUNT(*) FROM student"
                                                     : "SELECT name FROM student"));
    }
    const DatasetRoot root = testsupport::write_school_dataset(dir.path(), instances);

    nlohmann::json predictions = nlohmann::json::array();
    for (int i = 0; i < 16; ++i) {
        predictions.push_back({{"id", "p" + std::to_string(i)},
                               {"sql", i % 2 == 0 ? instances[i].gold_sql : "SELECT 0"}});
    }
    write_text(dir.path() / "predictions.json", predictions.dump());

    EvalOptions serial_options;
    serial_options.parallelism = 1;
    EvalOptions parallel_options;
    parallel_options.parallelism = 4;
    const std::string serial =
        run_evaluate(root, dir.path() / "predictions.json", serial_options).to_json_text();
    const std::string parallel =
        run_evaluate(root, dir.path() / "predictions.json", parallel_options).to_json_text();
    CHECK(serial == parallel);
}

TEST_CASE("parallel validation matches serial") {
    TempDir dir("parallel_validate");
    std::vector<TextToSqlInstance> instances;
    for (int i = 0; i < 12; ++i) {
        instances.push_back(make_instance(
            "v" + std::to_string(i), "q",
            i % 4 == 0 ? "SELECT name FROM student WHERE gpa > 99" : "SELECT name FROM student"));
    }
    const DatasetRoot root = testsupport::write_school_dataset(dir.path(), instances);
    const std::string serial = run_validate(root, 30s, false, 1).to_json_text();
    const std::string parallel = run_validate(root, 30s, false, 4).to_json_text();
    CHECK(serial == parallel);
}

}  // TEST_SUITE

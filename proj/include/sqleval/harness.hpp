#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sqleval/clients.hpp"
#include "sqleval/dataset.hpp"
#include "sqleval/grading.hpp"
#include "sqleval/metrics.hpp"
#include "sqleval/reconcile.hpp"
#include "sqleval/rollout_env.hpp"

namespace sqleval {

// ---------------------------------------------------------------------------
// Scaling configuration and candidate schedule

struct ScalingConfig {
    int n_candidates = 5;
    // First entry 0 is the greedy pass; the remaining candidates are split
    // over the non-zero temperatures.
    std::vector<double> temperatures = {0.0, 0.25, 0.5, 0.75, 1.0};
    bool judge_enabled = true;
    std::uint64_t seed = 0;
    int parallelism = 1;
};

// (temperature, count) pairs: one greedy candidate plus (n-1) sampled ones
// split equally over the non-zero temperatures; a non-divisible remainder
// is assigned round-robin starting from the lowest non-zero temperature.
std::vector<std::pair<double, int>> candidate_schedule(const ScalingConfig& config);

// ---------------------------------------------------------------------------
// Reports

struct UsageTotals {
    std::int64_t input_tokens = 0;
    std::int64_t output_tokens = 0;
    std::int64_t generate_calls = 0;
    std::int64_t judge_calls = 0;

    void add_generation(const UsageRecord& record);
    void add_judge(const UsageRecord& record);
    UsageTotals& operator+=(const UsageTotals& other);
};

struct CostSummary {
    std::string model;
    std::int64_t realtime_pico_usd = 0;
    std::optional<std::int64_t> batch_pico_usd;
};

struct InstanceReport {
    std::string id;
    std::string chosen_sql;
    bool correct = false;
    std::string reason;  // match | mismatch | candidate_error | gold_error | ...
    std::string error;   // instance-level failure note, empty when none
    std::optional<ReconcileAudit> audit;
    std::vector<std::pair<double, int>> per_temperature_counts;
    UsageTotals usage;
};

struct Report {
    std::string command;
    std::uint64_t seed = 0;
    int n_candidates = 0;
    std::vector<double> temperatures;
    bool judge_enabled = false;
    std::vector<InstanceReport> instances;
    int correct_count = 0;
    int total_count = 0;  // accuracy = correct/total, exact before formatting
    UsageTotals usage;
    std::optional<CostSummary> cost;

    double accuracy() const;
    std::string to_json_text() const;   // canonical machine-readable form
    std::string summary_table() const;  // human-readable
};

// ---------------------------------------------------------------------------
// evaluate

struct EvalOptions {
    std::chrono::milliseconds timeout{30000};
    int parallelism = 1;
    bool strict = false;
};

// (instance id, SQL) records.
std::map<std::string, std::string> load_predictions(const std::filesystem::path& path);

Report run_evaluate(const DatasetRoot& root, const std::filesystem::path& predictions_path,
                    const EvalOptions& options = {});

// ---------------------------------------------------------------------------
// scale

// Per-candidate client construction keeps episode streams independent of
// thread scheduling: a mock derives its behavior from (instance id,
// temperature, candidate index, seed) alone.
class GenerationClientFactory {
  public:
    virtual ~GenerationClientFactory() = default;
    virtual std::unique_ptr<GenerationClient> make(const std::string& instance_id,
                                                   double temperature, int candidate_index) = 0;
};

class HttpClientFactory : public GenerationClientFactory {
  public:
    explicit HttpClientFactory(HttpClientConfig config) : config_(std::move(config)) {}
    std::unique_ptr<GenerationClient> make(const std::string&, double, int) override {
        return std::make_unique<HttpChatClient>(config_);
    }

  private:
    HttpClientConfig config_;
};

struct ScaleOptions {
    EnvConfig env;
    RetryPolicy retry;
    // When set, one JSONL transcript record per episode is written here.
    std::optional<std::filesystem::path> transcripts_path;
};

Report run_scale(const DatasetRoot& root, GenerationClientFactory& generation,
                 JudgeClient* judge, const ScalingConfig& config,
                 const ScaleOptions& options = {});

// ---------------------------------------------------------------------------
// cost

// Fill report.cost from the usage totals. Realtime pricing is required,
// batch pricing optional.
void apply_cost(Report& report, const PricingTable& pricing, const std::string& model);

// ---------------------------------------------------------------------------
// stats

struct StatsRow {
    std::string label;
    std::array<double, 8> means{};
    std::size_t counted = 0;
    std::size_t excluded = 0;
};

struct StatsResult {
    std::vector<StatsRow> rows;
    // (b - a) / a per counter when two corpora are given; NaN where a == 0.
    std::optional<std::array<double, 8>> diff;

    std::string to_csv() const;
};

// A corpus file is an instances.json (gold SQL is profiled), a dataset
// root containing one, or a JSON array of SQL strings.
std::vector<std::string> load_corpus(const std::filesystem::path& path);

StatsResult run_stats(const std::vector<std::filesystem::path>& corpora);

// ---------------------------------------------------------------------------
// validate

struct ValidateSummary {
    std::vector<ValidationReport> reports;
    std::size_t clean = 0;

    std::string to_json_text() const;
};

ValidateSummary run_validate(const DatasetRoot& root, std::chrono::milliseconds timeout,
                             bool strict = false, int parallelism = 1);

}  // namespace sqleval

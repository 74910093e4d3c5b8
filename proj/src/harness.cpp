#include "sqleval/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "sqleval/errors.hpp"

namespace sqleval {

using nlohmann::ordered_json;

std::vector<std::pair<double, int>> candidate_schedule(const ScalingConfig& config) {
    if (config.n_candidates < 1) throw Error("n_candidates must be >= 1");

    std::vector<double> sampled;
    for (double t : config.temperatures) {
        if (t > 0.0) sampled.push_back(t);
    }
    std::sort(sampled.begin(), sampled.end());

    std::vector<std::pair<double, int>> schedule;
    schedule.emplace_back(0.0, 1);
    const int remaining = config.n_candidates - 1;
    if (remaining == 0) return schedule;
    if (sampled.empty()) {
        throw Error("n_candidates > 1 requires at least one non-zero temperature");
    }

    const int per_temperature = remaining / static_cast<int>(sampled.size());
    const int remainder = remaining % static_cast<int>(sampled.size());
    for (std::size_t i = 0; i < sampled.size(); ++i) {
        // Remainder goes round-robin starting from the lowest temperature.
        const int extra = static_cast<int>(i) < remainder ? 1 : 0;
        schedule.emplace_back(sampled[i], per_temperature + extra);
    }
    return schedule;
}

void UsageTotals::add_generation(const UsageRecord& record) {
    input_tokens += record.input_tokens;
    output_tokens += record.output_tokens;
    ++generate_calls;
}

void UsageTotals::add_judge(const UsageRecord& record) {
    input_tokens += record.input_tokens;
    output_tokens += record.output_tokens;
    ++judge_calls;
}

UsageTotals& UsageTotals::operator+=(const UsageTotals& other) {
    input_tokens += other.input_tokens;
    output_tokens += other.output_tokens;
    generate_calls += other.generate_calls;
    judge_calls += other.judge_calls;
    return *this;
}

double Report::accuracy() const {
    return total_count == 0 ? 0.0
                            : static_cast<double>(correct_count) / static_cast<double>(total_count);
}

namespace {

ordered_json usage_to_json(const UsageTotals& usage) {
    return ordered_json{{"input_tokens", usage.input_tokens},
                        {"output_tokens", usage.output_tokens},
                        {"generate_calls", usage.generate_calls},
                        {"judge_calls", usage.judge_calls}};
}

ordered_json audit_to_json(const ReconcileAudit& audit) {
    ordered_json groups = ordered_json::array();
    for (const GroupAudit& group : audit.groups) {
        groups.push_back(ordered_json{{"members", group.member_indices},
                                      {"size", group.size},
                                      {"error_group", group.is_error_group},
                                      {"result", group.result_digest}});
    }
    ordered_json decisions = ordered_json::array();
    for (const JudgeDecision& decision : audit.decisions) {
        decisions.push_back(ordered_json{{"group", decision.group_index},
                                         {"approved", decision.approved},
                                         {"rationale", decision.rationale}});
    }
    return ordered_json{{"groups", std::move(groups)},
                        {"decisions", std::move(decisions)},
                        {"winner_group", audit.winner_group},
                        {"winner_candidate", audit.winner_candidate},
                        {"fallback_all_groups", audit.fallback_all_groups},
                        {"fallback_error_pool", audit.fallback_error_pool}};
}

}  // namespace

std::string Report::to_json_text() const {
    ordered_json doc;
    doc["command"] = command;
    doc["seed"] = seed;
    if (command == "scale") {
        doc["n_candidates"] = n_candidates;
        doc["temperatures"] = temperatures;
        doc["judge_enabled"] = judge_enabled;
    }

    ordered_json entries = ordered_json::array();
    for (const InstanceReport& instance : instances) {
        ordered_json entry;
        entry["id"] = instance.id;
        entry["chosen_sql"] = instance.chosen_sql;
        entry["correct"] = instance.correct;
        entry["reason"] = instance.reason;
        if (!instance.error.empty()) entry["error"] = instance.error;
        if (!instance.per_temperature_counts.empty()) {
            ordered_json counts = ordered_json::array();
            for (const auto& [temperature, count] : instance.per_temperature_counts) {
                counts.push_back(ordered_json{{"temperature", temperature}, {"count", count}});
            }
            entry["candidates_per_temperature"] = std::move(counts);
        }
        if (instance.audit) entry["reconciliation"] = audit_to_json(*instance.audit);
        entry["usage"] = usage_to_json(instance.usage);
        entries.push_back(std::move(entry));
    }
    doc["instances"] = std::move(entries);

    ordered_json aggregate;
    aggregate["correct"] = correct_count;
    aggregate["total"] = total_count;
    aggregate["accuracy"] = accuracy();
    aggregate["usage"] = usage_to_json(usage);
    if (cost) {
        ordered_json cost_doc;
        cost_doc["model"] = cost->model;
        cost_doc["realtime_pico_usd"] = cost->realtime_pico_usd;
        cost_doc["realtime_usd"] = pico_usd_to_usd(cost->realtime_pico_usd);
        if (total_count > 0) {
            cost_doc["realtime_usd_per_query"] =
                pico_usd_to_usd(cost->realtime_pico_usd) / total_count;
        }
        if (cost->batch_pico_usd) {
            cost_doc["batch_pico_usd"] = *cost->batch_pico_usd;
            cost_doc["batch_usd"] = pico_usd_to_usd(*cost->batch_pico_usd);
            if (total_count > 0) {
                cost_doc["batch_usd_per_query"] =
                    pico_usd_to_usd(*cost->batch_pico_usd) / total_count;
            }
        }
        aggregate["cost"] = std::move(cost_doc);
    }
    doc["aggregate"] = std::move(aggregate);
    return doc.dump(2) + "\n";
}

std::string Report::summary_table() const {
    std::ostringstream out;
    out << "instances: " << total_count << "  correct: " << correct_count << "  accuracy: ";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", accuracy());
    out << buf << "\n";
    out << "tokens: " << usage.input_tokens << " in / " << usage.output_tokens << " out ("
        << usage.generate_calls << " generate, " << usage.judge_calls << " judge calls)\n";
    if (cost) {
        std::snprintf(buf, sizeof(buf), "%.6f", pico_usd_to_usd(cost->realtime_pico_usd));
        out << "cost (" << cost->model << "): $" << buf << " realtime";
        if (cost->batch_pico_usd) {
            std::snprintf(buf, sizeof(buf), "%.6f", pico_usd_to_usd(*cost->batch_pico_usd));
            out << ", $" << buf << " batch";
        }
        out << "\n";
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// evaluate

std::map<std::string, std::string> load_predictions(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MalformedRecord("cannot open predictions file " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw MalformedRecord("invalid predictions JSON: " + std::string(e.what()));
    }
    if (!doc.is_array()) throw MalformedRecord("predictions file must be a JSON array");

    std::map<std::string, std::string> predictions;
    for (const auto& record : doc) {
        std::string id;
        if (record.at("id").is_string()) {
            id = record.at("id").get<std::string>();
        } else {
            id = std::to_string(record.at("id").get<std::int64_t>());
        }
        const std::string sql = record.at("sql").get<std::string>();
        if (!predictions.emplace(id, sql).second) {
            throw DuplicateId("duplicate prediction for id '" + id + "'");
        }
    }
    return predictions;
}

Report run_evaluate(const DatasetRoot& root, const std::filesystem::path& predictions_path,
                    const EvalOptions& options) {
    const LoadResult loaded = root.load(options.strict);
    const auto predictions = load_predictions(predictions_path);

    Report report;
    report.command = "evaluate";
    report.total_count = static_cast<int>(loaded.instances.size());
    report.instances.resize(loaded.instances.size());

    const std::int64_t n = static_cast<std::int64_t>(loaded.instances.size());
#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, options.parallelism)) \
    if (options.parallelism > 1)
    for (std::int64_t i = 0; i < n; ++i) {
        const TextToSqlInstance& instance = loaded.instances[i];
        InstanceReport& entry = report.instances[i];
        entry.id = instance.id;
        try {
            const auto found = predictions.find(instance.id);
            if (found == predictions.end()) {
                throw MissingPrediction("no prediction for instance '" + instance.id + "'");
            }
            entry.chosen_sql = found->second;

            Database db = root.open_database(instance.db_id);
            const auto gold = execute(db, instance.gold_sql, options.timeout);
            if (!gold.ok()) {
                throw GoldExecutionFailure("gold SQL failed: " + gold.message);
            }
            const auto predicted = execute(db, entry.chosen_sql, options.timeout);
            const GradeVerdict verdict =
                grade_outcomes(predicted, gold, instance.grading, instance.required_size);
            entry.correct = verdict.correct;
            entry.reason = std::string(to_string(verdict.reason));
        } catch (const MissingPrediction& e) {
            entry.reason = "missing_prediction";
            entry.error = e.what();
        } catch (const GoldExecutionFailure& e) {
            entry.reason = "gold_error";
            entry.error = e.what();
        } catch (const Error& e) {
            entry.reason = "error";
            entry.error = e.what();
        }
    }

    for (const InstanceReport& entry : report.instances) {
        if (entry.correct) ++report.correct_count;
    }
    return report;
}

// ---------------------------------------------------------------------------
// scale

namespace {

// Accumulates judge usage for one instance while delegating to the shared
// judge client.
class UsageRecordingJudge : public JudgeClient {
  public:
    UsageRecordingJudge(JudgeClient& inner, UsageTotals& sink) : inner_(inner), sink_(sink) {}
    JudgeReply judge(const JudgeRequest& request) override {
        JudgeReply reply = inner_.judge(request);
        sink_.add_judge(reply.usage);
        return reply;
    }

  private:
    JudgeClient& inner_;
    UsageTotals& sink_;
};

ordered_json transcript_to_json(const std::string& instance_id, double temperature,
                                int candidate_index, const std::vector<Message>& prompts,
                                const RolloutTranscript& transcript) {
    ordered_json turns = ordered_json::array();
    for (const Turn& turn : transcript.turns) {
        turns.push_back(ordered_json{{"model", turn.model_message},
                                     {"env", turn.env_response},
                                     {"wall_time_s", turn.wall_time_s}});
    }
    ordered_json prompt_docs = ordered_json::array();
    for (const Message& message : prompts) {
        prompt_docs.push_back(ordered_json{{"role", message.role}, {"content", message.content}});
    }
    ordered_json doc;
    doc["instance"] = instance_id;
    doc["temperature"] = temperature;
    doc["candidate_index"] = candidate_index;
    doc["prompts"] = std::move(prompt_docs);
    doc["turns"] = std::move(turns);
    doc["final_sql"] = transcript.final_sql ? ordered_json(*transcript.final_sql)
                                            : ordered_json(nullptr);
    doc["terminal_reason"] = std::string(to_string(transcript.terminal_reason));
    return doc;
}

}  // namespace

Report run_scale(const DatasetRoot& root, GenerationClientFactory& generation,
                 JudgeClient* judge, const ScalingConfig& config, const ScaleOptions& options) {
    const LoadResult loaded = root.load(/*strict=*/false);
    const auto schedule = candidate_schedule(config);

    Report report;
    report.command = "scale";
    report.seed = config.seed;
    report.n_candidates = config.n_candidates;
    report.temperatures = config.temperatures;
    report.judge_enabled = config.judge_enabled && judge != nullptr;
    report.total_count = static_cast<int>(loaded.instances.size());
    report.instances.resize(loaded.instances.size());

    std::vector<std::string> transcript_records(loaded.instances.size());

    const std::int64_t n = static_cast<std::int64_t>(loaded.instances.size());
#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, config.parallelism)) \
    if (config.parallelism > 1)
    for (std::int64_t i = 0; i < n; ++i) {
        const TextToSqlInstance& instance = loaded.instances[i];
        InstanceReport& entry = report.instances[i];
        entry.id = instance.id;
        for (const auto& [temperature, count] : schedule) {
            entry.per_temperature_counts.emplace_back(temperature, 0);
        }

        try {
            Database db = root.open_database(instance.db_id);
            const SchemaPrompt schema =
                render_schema(db, instance, 3, root.column_descriptions(instance.db_id));

            std::vector<Candidate> candidates;
            std::ostringstream transcripts;
            int candidate_index = 0;
            for (std::size_t s = 0; s < schedule.size(); ++s) {
                const auto [temperature, count] = schedule[s];
                for (int k = 0; k < count; ++k, ++candidate_index) {
                    auto client = generation.make(instance.id, temperature, candidate_index);

                    Episode episode(db, instance, schema, options.env);
                    std::vector<Message> messages = episode.initial_messages();
                    while (!episode.terminal()) {
                        GenerationRequest request;
                        request.messages = messages;
                        request.temperature = temperature;
                        request.max_output_tokens = options.env.per_turn_output_token_cap;
                        GenerationResult result;
                        try {
                            result = generate_with_retry(*client, request, options.retry);
                        } catch (const ClientError&) {
                            episode.abort_client_error();
                            throw;
                        }
                        entry.usage.add_generation(result.usage);
                        const auto response = episode.step(result.message);
                        if (response) {
                            messages.push_back({"assistant", result.message});
                            messages.push_back({"user", *response});
                        }
                    }
                    entry.per_temperature_counts[s].second += 1;

                    const RolloutTranscript& transcript = episode.transcript();
                    if (options.transcripts_path) {
                        transcripts << transcript_to_json(instance.id, temperature,
                                                          candidate_index,
                                                          episode.initial_messages(), transcript)
                                           .dump()
                                    << "\n";
                    }
                    if (transcript.final_sql) {
                        Candidate candidate;
                        candidate.sql = *transcript.final_sql;
                        candidate.source = temperature == 0.0 ? CandidateSource::Greedy
                                                              : CandidateSource::Sampled;
                        candidate.temperature = temperature;
                        candidate.index = candidate_index;
                        candidate.outcome =
                            execute(db, candidate.sql, options.env.query_timeout);
                        candidates.push_back(std::move(candidate));
                    }
                }
            }
            transcript_records[i] = transcripts.str();

            if (candidates.empty()) {
                entry.reason = "no_candidate_sql";
                entry.error = "no episode produced a final SQL";
                continue;
            }

            std::optional<UsageRecordingJudge> judge_adapter;
            JudgeClient* instance_judge = nullptr;
            if (config.judge_enabled && judge != nullptr) {
                judge_adapter.emplace(*judge, entry.usage);
                instance_judge = &*judge_adapter;
            }

            const ReconcileResult reconciled =
                reconcile_pipeline(instance, candidates, instance_judge);
            entry.chosen_sql = reconciled.final_sql;
            entry.audit = reconciled.audit;

            const auto gold = execute(db, instance.gold_sql, options.env.query_timeout);
            if (!gold.ok()) {
                throw GoldExecutionFailure("gold SQL failed: " + gold.message);
            }
            const auto chosen = execute(db, entry.chosen_sql, options.env.query_timeout);
            const GradeVerdict verdict =
                grade_outcomes(chosen, gold, instance.grading, instance.required_size);
            entry.correct = verdict.correct;
            entry.reason = std::string(to_string(verdict.reason));
        } catch (const GoldExecutionFailure& e) {
            entry.reason = "gold_error";
            entry.error = e.what();
        } catch (const ClientError& e) {
            entry.reason = "client_error";
            entry.error = e.what();
        } catch (const Error& e) {
            entry.reason = "error";
            entry.error = e.what();
        }
    }

    for (const InstanceReport& entry : report.instances) {
        if (entry.correct) ++report.correct_count;
        report.usage += entry.usage;
    }

    if (options.transcripts_path) {
        std::ofstream out(*options.transcripts_path);
        for (const std::string& record : transcript_records) out << record;
    }
    return report;
}

// ---------------------------------------------------------------------------
// cost

void apply_cost(Report& report, const PricingTable& pricing, const std::string& model) {
    CostSummary cost;
    cost.model = model;

    const Price realtime = pricing.lookup(model, PricingMode::Realtime);
    // Total cost is the sum of exact per-instance costs (integer pico-USD),
    // which equals the per-call sum by linearity of integer arithmetic.
    std::int64_t realtime_total = 0;
    for (const InstanceReport& instance : report.instances) {
        realtime_total +=
            cost_pico_usd(instance.usage.input_tokens, instance.usage.output_tokens, realtime);
    }
    cost.realtime_pico_usd = realtime_total;

    if (pricing.has(model, PricingMode::Batch)) {
        const Price batch = pricing.lookup(model, PricingMode::Batch);
        std::int64_t batch_total = 0;
        for (const InstanceReport& instance : report.instances) {
            batch_total +=
                cost_pico_usd(instance.usage.input_tokens, instance.usage.output_tokens, batch);
        }
        cost.batch_pico_usd = batch_total;
    }
    report.cost = cost;
}

// ---------------------------------------------------------------------------
// stats

std::vector<std::string> load_corpus(const std::filesystem::path& path) {
    std::filesystem::path file = path;
    if (std::filesystem::is_directory(file)) file /= "instances.json";
    std::ifstream in(file);
    if (!in) throw MalformedRecord("cannot open corpus file " + file.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw MalformedRecord("invalid corpus JSON: " + std::string(e.what()));
    }
    if (!doc.is_array()) throw MalformedRecord("corpus must be a JSON array");

    std::vector<std::string> queries;
    for (const auto& record : doc) {
        if (record.is_string()) {
            queries.push_back(record.get<std::string>());
        } else if (record.is_object() && record.contains("SQL")) {
            queries.push_back(record.at("SQL").get<std::string>());
        } else {
            throw MalformedRecord("corpus records must be SQL strings or objects with SQL");
        }
    }
    return queries;
}

StatsResult run_stats(const std::vector<std::filesystem::path>& corpora) {
    if (corpora.empty() || corpora.size() > 2) {
        throw Error("stats expects one or two corpora");
    }
    StatsResult result;
    for (const auto& path : corpora) {
        const auto queries = load_corpus(path);
        const CorpusStats stats = corpus_stats(queries);
        StatsRow row;
        row.label = path.filename().string();
        row.means = stats.means;
        row.counted = stats.counted;
        row.excluded = stats.excluded.size();
        result.rows.push_back(std::move(row));
    }
    if (result.rows.size() == 2) {
        std::array<double, 8> diff{};
        for (std::size_t c = 0; c < 8; ++c) {
            const double a = result.rows[0].means[c];
            const double b = result.rows[1].means[c];
            diff[c] = a == 0.0 ? std::numeric_limits<double>::quiet_NaN() : (b - a) / a;
        }
        result.diff = diff;
    }
    return result;
}

std::string StatsResult::to_csv() const {
    std::ostringstream out;
    out << "corpus";
    for (const auto& name : kComplexityColumnNames) out << "," << name;
    out << "\n";
    char buf[64];
    for (const StatsRow& row : rows) {
        out << row.label;
        for (double mean : row.means) {
            std::snprintf(buf, sizeof(buf), "%.6g", mean);
            out << "," << buf;
        }
        out << "\n";
    }
    if (diff) {
        out << "diff_pct";
        for (double d : *diff) {
            if (std::isnan(d)) {
                out << ",n/a";
            } else {
                std::snprintf(buf, sizeof(buf), "%+.1f%%", d * 100.0);
                out << "," << buf;
            }
        }
        out << "\n";
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// validate

ValidateSummary run_validate(const DatasetRoot& root, std::chrono::milliseconds timeout,
                             bool strict, int parallelism) {
    const LoadResult loaded = root.load(strict);
    ValidateSummary summary;
    summary.reports.resize(loaded.instances.size());

    const std::int64_t n = static_cast<std::int64_t>(loaded.instances.size());
#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, parallelism)) \
    if (parallelism > 1)
    for (std::int64_t i = 0; i < n; ++i) {
        const TextToSqlInstance& instance = loaded.instances[i];
        try {
            Database db = root.open_database(instance.db_id);
            summary.reports[i] = validate_instance(instance, db, timeout);
        } catch (const Error& e) {
            ValidationReport failed;
            failed.instance_id = instance.id;
            failed.flags.push_back(ValidationFlag::GoldExecutionError);
            failed.detail = e.what();
            summary.reports[i] = std::move(failed);
        }
    }
    for (const ValidationReport& report : summary.reports) {
        if (report.clean()) ++summary.clean;
    }
    return summary;
}

std::string ValidateSummary::to_json_text() const {
    ordered_json doc;
    doc["total"] = reports.size();
    doc["clean"] = clean;
    ordered_json entries = ordered_json::array();
    for (const ValidationReport& report : reports) {
        if (report.clean()) continue;
        ordered_json flags = ordered_json::array();
        for (const ValidationFlag flag : report.flags) flags.push_back(std::string(to_string(flag)));
        entries.push_back(ordered_json{{"id", report.instance_id},
                                       {"flags", std::move(flags)},
                                       {"detail", report.detail}});
    }
    doc["flagged"] = std::move(entries);
    return doc.dump(2) + "\n";
}

}  // namespace sqleval

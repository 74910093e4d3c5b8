// sqleval command line: evaluate predictions, run inference-time scaling,
// price usage, emit complexity statistics, and validate gold annotations.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "sqleval/errors.hpp"
#include "sqleval/harness.hpp"

namespace {

using namespace sqleval;

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << content;
}

// Deterministic offline generation client: answers every episode immediately
// with the instance's gold SQL. Useful for smoke-testing the scale pipeline
// without a model endpoint.
class GoldEchoFactory : public GenerationClientFactory {
  public:
    explicit GoldEchoFactory(const DatasetRoot& root) {
        for (const TextToSqlInstance& instance : root.load(false).instances) {
            gold_[instance.id] = instance.gold_sql;
        }
    }

    std::unique_ptr<GenerationClient> make(const std::string& instance_id, double, int) override {
        const std::string sql = gold_.at(instance_id);
        return std::make_unique<ScriptedGenerationClient>(
            [sql](const GenerationRequest&) {
                return "<final_answer>\n```sql\n" + sql + "\n```\n</final_answer>";
            });
    }

  private:
    std::map<std::string, std::string> gold_;
};

class ApproveAllJudge : public JudgeClient {
  public:
    JudgeReply judge(const JudgeRequest& request) override {
        JudgeReply reply;
        reply.verdict = JudgeVerdict::Approved;
        reply.rationale = "yes: offline judge";
        reply.usage.input_tokens = approximate_tokens(render_judge_prompt(request));
        reply.usage.output_tokens = 4;
        return reply;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Execution-based text-to-SQL evaluation and scaling harness"};
    app.require_subcommand(1);

    std::string dataset;
    std::string output;
    int parallelism = 1;
    int timeout_ms = 30000;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--dataset", dataset, "dataset root or instances.json")->required();
        cmd->add_option("-o,--output", output, "output path (default: stdout)");
        cmd->add_option("-j,--parallelism", parallelism, "instances processed in parallel");
        cmd->add_option("--timeout-ms", timeout_ms, "per-query timeout in milliseconds");
    };

    // evaluate
    auto* cmd_evaluate = app.add_subcommand("evaluate", "grade a predictions file");
    std::string predictions;
    add_common(cmd_evaluate);
    cmd_evaluate->add_option("--predictions", predictions, "JSON array of {id, sql}")->required();

    // scale
    auto* cmd_scale = app.add_subcommand("scale", "candidate scaling with reconciliation");
    add_common(cmd_scale);
    int n_candidates = 5;
    std::vector<double> temperatures = {0.0, 0.25, 0.5, 0.75, 1.0};
    bool judge_off = false;
    bool use_mock = false;
    std::uint64_t seed = 0;
    std::string api_base;
    std::string model;
    std::string judge_model;
    std::string transcripts;
    cmd_scale->add_option("-n,--n-candidates", n_candidates, "candidates per question");
    cmd_scale->add_option("--temperatures", temperatures,
                          "sampling temperatures (0 = the greedy pass)");
    cmd_scale->add_flag("--no-judge", judge_off, "skip reconciliation judging");
    cmd_scale->add_flag("--mock", use_mock, "offline gold-echo client instead of an endpoint");
    cmd_scale->add_option("--seed", seed, "seed recorded in the report");
    cmd_scale->add_option("--api-base", api_base, "endpoint base URL (or $SQLEVAL_API_BASE)");
    cmd_scale->add_option("--model", model, "generation model name");
    cmd_scale->add_option("--judge-model", judge_model, "judge model name (pre-finetuning base)");
    cmd_scale->add_option("--transcripts", transcripts, "write episode transcripts (JSONL)");

    // cost
    auto* cmd_cost = app.add_subcommand("cost", "price a report's usage ledger");
    std::string report_path;
    std::string pricing_path;
    std::string cost_model;
    cmd_cost->add_option("--report", report_path, "report JSON from evaluate/scale")->required();
    cmd_cost->add_option("--pricing", pricing_path, "pricing JSON file")->required();
    cmd_cost->add_option("--model", cost_model, "model to price")->required();
    cmd_cost->add_option("-o,--output", output, "output path (default: stdout)");

    // stats
    auto* cmd_stats = app.add_subcommand("stats", "structural complexity statistics");
    std::vector<std::string> corpora;
    cmd_stats->add_option("corpora", corpora, "one or two corpora (instances.json or SQL array)")
        ->required()
        ->expected(1, 2);
    cmd_stats->add_option("-o,--output", output, "output path (default: stdout)");

    // validate
    auto* cmd_validate = app.add_subcommand("validate", "check gold annotations");
    add_common(cmd_validate);

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_evaluate->parsed()) {
            DatasetRoot root{dataset};
            EvalOptions options;
            options.timeout = std::chrono::milliseconds(timeout_ms);
            options.parallelism = parallelism;
            Report report = run_evaluate(root, predictions, options);
            const std::string text = report.to_json_text();
            if (output.empty()) {
                std::cout << text;
            } else {
                write_file(output, text);
            }
            std::cerr << report.summary_table();
        } else if (cmd_scale->parsed()) {
            DatasetRoot root{dataset};
            ScalingConfig config;
            config.n_candidates = n_candidates;
            config.temperatures = temperatures;
            config.judge_enabled = !judge_off;
            config.seed = seed;
            config.parallelism = parallelism;

            ScaleOptions options;
            options.env.query_timeout = std::chrono::milliseconds(timeout_ms);
            if (!transcripts.empty()) options.transcripts_path = transcripts;

            std::unique_ptr<GenerationClientFactory> factory;
            std::unique_ptr<GenerationClient> judge_generation;
            std::unique_ptr<JudgeClient> judge;
            if (use_mock) {
                factory = std::make_unique<GoldEchoFactory>(root);
                judge = std::make_unique<ApproveAllJudge>();
            } else {
                HttpClientConfig http;
                if (api_base.empty()) {
                    if (const char* env = std::getenv("SQLEVAL_API_BASE")) api_base = env;
                }
                if (api_base.empty()) {
                    throw Error("scale needs --api-base, $SQLEVAL_API_BASE, or --mock");
                }
                http.base_url = api_base;
                http.model = model;
                factory = std::make_unique<HttpClientFactory>(http);

                HttpClientConfig judge_http = http;
                judge_http.model = judge_model.empty() ? model : judge_model;
                judge_generation = std::make_unique<HttpChatClient>(judge_http);
                judge = std::make_unique<PromptJudgeClient>(*judge_generation);
            }

            Report report = run_scale(root, *factory, judge.get(), config, options);
            const std::string text = report.to_json_text();
            if (output.empty()) {
                std::cout << text;
            } else {
                write_file(output, text);
            }
            std::cerr << report.summary_table();
        } else if (cmd_cost->parsed()) {
            // Augment an existing report with cost figures computed from its
            // usage ledger; every other field is preserved verbatim.
            std::ifstream in(report_path);
            if (!in) throw Error("cannot open report " + report_path);
            nlohmann::ordered_json doc;
            in >> doc;

            const PricingTable pricing = PricingTable::load(pricing_path);
            const Price realtime = pricing.lookup(cost_model, PricingMode::Realtime);
            std::int64_t realtime_total = 0;
            std::int64_t batch_total = 0;
            const bool has_batch = pricing.has(cost_model, PricingMode::Batch);
            const Price batch = has_batch ? pricing.lookup(cost_model, PricingMode::Batch)
                                          : Price{};
            std::size_t instance_count = 0;
            for (const auto& entry : doc.at("instances")) {
                if (!entry.contains("usage")) continue;
                const std::int64_t input = entry["usage"].value("input_tokens", 0);
                const std::int64_t output_tokens = entry["usage"].value("output_tokens", 0);
                realtime_total += cost_pico_usd(input, output_tokens, realtime);
                if (has_batch) batch_total += cost_pico_usd(input, output_tokens, batch);
                ++instance_count;
            }

            nlohmann::ordered_json cost_doc;
            cost_doc["model"] = cost_model;
            cost_doc["realtime_pico_usd"] = realtime_total;
            cost_doc["realtime_usd"] = pico_usd_to_usd(realtime_total);
            if (instance_count > 0) {
                cost_doc["realtime_usd_per_query"] =
                    pico_usd_to_usd(realtime_total) / static_cast<double>(instance_count);
            }
            if (has_batch) {
                cost_doc["batch_pico_usd"] = batch_total;
                cost_doc["batch_usd"] = pico_usd_to_usd(batch_total);
                if (instance_count > 0) {
                    cost_doc["batch_usd_per_query"] =
                        pico_usd_to_usd(batch_total) / static_cast<double>(instance_count);
                }
            }
            doc["aggregate"]["cost"] = std::move(cost_doc);

            const std::string text = doc.dump(2) + "\n";
            if (output.empty()) {
                std::cout << text;
            } else {
                write_file(output, text);
            }
        } else if (cmd_stats->parsed()) {
            std::vector<std::filesystem::path> paths(corpora.begin(), corpora.end());
            const StatsResult result = run_stats(paths);
            const std::string csv = result.to_csv();
            if (output.empty()) {
                std::cout << csv;
            } else {
                write_file(output, csv);
            }
        } else if (cmd_validate->parsed()) {
            DatasetRoot root{dataset};
            const ValidateSummary summary =
                run_validate(root, std::chrono::milliseconds(timeout_ms), false, parallelism);
            const std::string text = summary.to_json_text();
            if (output.empty()) {
                std::cout << text;
            } else {
                write_file(output, text);
            }
            std::cerr << summary.clean << "/" << summary.reports.size()
                      << " instances validate clean\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

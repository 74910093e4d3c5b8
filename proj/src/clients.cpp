#include "sqleval/clients.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "sqleval/errors.hpp"

namespace sqleval {

GenerationResult generate_with_retry(GenerationClient& client, const GenerationRequest& request,
                                     const RetryPolicy& policy) {
    std::chrono::milliseconds delay = policy.base_delay;
    for (int attempt = 1;; ++attempt) {
        try {
            return client.generate(request);
        } catch (const ClientError& e) {
            if (!e.transient || attempt >= policy.max_attempts) throw;
            if (delay.count() > 0) std::this_thread::sleep_for(delay);
            delay *= 2;
        }
    }
}

JudgeVerdict parse_judge_verdict(const std::string& response, std::string* rationale) {
    std::istringstream lines(response);
    std::string line;
    while (std::getline(lines, line)) {
        std::size_t begin = 0;
        while (begin < line.size() && std::isspace(static_cast<unsigned char>(line[begin]))) {
            ++begin;
        }
        if (begin == line.size()) continue;

        std::string lower = line.substr(begin);
        std::transform(lower.begin(), lower.end(), lower.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        if (rationale != nullptr) *rationale = line.substr(begin);
        if (lower.rfind("yes", 0) == 0) return JudgeVerdict::Approved;
        if (lower.rfind("no", 0) == 0) return JudgeVerdict::Rejected;
        if (rationale != nullptr) *rationale = response;
        return JudgeVerdict::Unparseable;
    }
    if (rationale != nullptr) *rationale = response;
    return JudgeVerdict::Unparseable;
}

std::string render_judge_prompt(const JudgeRequest& request) {
    std::ostringstream out;
    out << "You review SQL queries for a natural-language question. All queries below\n"
        << "return the same execution result. Decide whether they comprehensively cover\n"
        << "every constraint stated in the question and the external knowledge.\n"
        << "Answer on the first line with \"yes\" or \"no\", then a short reason.\n\n"
        << "Question: " << request.question << "\n";
    if (!request.external_knowledge.empty()) {
        out << "External knowledge: " << request.external_knowledge << "\n";
    }
    out << "\nQueries:\n";
    for (std::size_t i = 0; i < request.sqls.size(); ++i) {
        out << i + 1 << ". " << request.sqls[i] << "\n";
    }
    out << "\nShared execution result";
    if (request.result_total_rows > request.result_sample.size()) {
        out << " (first " << request.result_sample.size() << " of " << request.result_total_rows
            << " rows)";
    }
    out << ":\n";
    for (const std::string& row : request.result_sample) out << row << "\n";
    return out.str();
}

PromptJudgeClient::PromptJudgeClient(GenerationClient& client, RetryPolicy policy)
    : client_(client), policy_(policy) {}

JudgeReply PromptJudgeClient::judge(const JudgeRequest& request) {
    GenerationRequest gen;
    gen.messages.push_back({"user", render_judge_prompt(request)});
    gen.temperature = 0.0;
    gen.max_output_tokens = 512;

    const GenerationResult result = generate_with_retry(client_, gen, policy_);
    JudgeReply reply;
    reply.usage = result.usage;
    reply.verdict = parse_judge_verdict(result.message, &reply.rationale);
    return reply;
}

ScriptedGenerationClient::ScriptedGenerationClient(Script script) : script_(std::move(script)) {}

GenerationResult ScriptedGenerationClient::generate(const GenerationRequest& request) {
    ++calls_;
    if (failures_remaining_ > 0) {
        --failures_remaining_;
        throw ClientError("injected transient fault", /*transient=*/true);
    }
    GenerationResult result;
    result.message = script_(request);
    result.usage.input_tokens = approximate_tokens(request.messages);
    result.usage.output_tokens = approximate_tokens(result.message);
    result.usage.wall_time_s = 0.0;
    return result;
}

std::int64_t approximate_tokens(const std::string& text) {
    return static_cast<std::int64_t>((text.size() + 3) / 4);
}

std::int64_t approximate_tokens(const std::vector<Message>& messages) {
    std::int64_t total = 0;
    for (const Message& m : messages) total += approximate_tokens(m.content);
    return total;
}

// ---------------------------------------------------------------------------
// HTTP client

HttpChatClient::HttpChatClient(HttpClientConfig config) : config_(std::move(config)) {
    if (config_.api_key.empty() && !config_.api_key_env.empty()) {
        if (const char* key = std::getenv(config_.api_key_env.c_str())) config_.api_key = key;
    }
}

GenerationResult HttpChatClient::generate(const GenerationRequest& request) {
    using nlohmann::json;

    json body;
    body["model"] = config_.model;
    body["temperature"] = request.temperature;
    body["max_tokens"] = request.max_output_tokens;
    json messages = json::array();
    for (const Message& m : request.messages) {
        messages.push_back({{"role", m.role}, {"content", m.content}});
    }
    body["messages"] = std::move(messages);

    httplib::Client client(config_.base_url);
    client.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(
        config_.request_timeout));
    client.set_read_timeout(std::chrono::duration_cast<std::chrono::seconds>(
        config_.request_timeout));
    httplib::Headers headers;
    if (!config_.api_key.empty()) {
        headers.emplace("Authorization", "Bearer " + config_.api_key);
    }

    const auto start = std::chrono::steady_clock::now();
    auto response = client.Post(config_.path, headers, body.dump(), "application/json");
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    if (!response) {
        throw ClientError("connection to " + config_.base_url + " failed", /*transient=*/true);
    }
    if (response->status == 429 || response->status >= 500) {
        throw ClientError("server returned status " + std::to_string(response->status),
                          /*transient=*/true);
    }
    if (response->status != 200) {
        throw ClientError("server returned status " + std::to_string(response->status) + ": " +
                          response->body);
    }

    json doc;
    try {
        doc = json::parse(response->body);
    } catch (const json::exception& e) {
        throw ClientError(std::string("malformed response body: ") + e.what());
    }

    GenerationResult result;
    try {
        result.message = doc.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception&) {
        throw ClientError("response carries no message content");
    }
    if (doc.contains("usage")) {
        result.usage.input_tokens = doc["usage"].value("prompt_tokens", 0);
        result.usage.output_tokens = doc["usage"].value("completion_tokens", 0);
    }
    result.usage.wall_time_s = wall;
    return result;
}

// ---------------------------------------------------------------------------
// Pricing

namespace {

std::string price_key(const std::string& model, PricingMode mode) {
    return model + "\n" + (mode == PricingMode::Realtime ? "realtime" : "batch");
}

std::int64_t usd_to_micro(double usd) { return std::llround(usd * 1e6); }

}  // namespace

PricingTable PricingTable::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingPrice("cannot open pricing file " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return from_json_text(buffer.str());
}

PricingTable PricingTable::from_json_text(const std::string& text) {
    using nlohmann::json;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw MissingPrice(std::string("invalid pricing JSON: ") + e.what());
    }
    if (!doc.is_array()) throw MissingPrice("pricing file must be a JSON array");

    PricingTable table;
    for (const json& record : doc) {
        const std::string model = record.at("model").get<std::string>();
        const std::string mode_text = record.at("mode").get<std::string>();
        PricingMode mode;
        if (mode_text == "realtime") {
            mode = PricingMode::Realtime;
        } else if (mode_text == "batch") {
            mode = PricingMode::Batch;
        } else {
            throw MissingPrice("unknown pricing mode '" + mode_text + "'");
        }
        Price price;
        price.input_micro_usd_per_m = usd_to_micro(record.at("usd_per_1m_input").get<double>());
        price.output_micro_usd_per_m = usd_to_micro(record.at("usd_per_1m_output").get<double>());
        table.prices_[price_key(model, mode)] = price;
    }
    return table;
}

Price PricingTable::lookup(const std::string& model, PricingMode mode) const {
    const auto it = prices_.find(price_key(model, mode));
    if (it == prices_.end()) {
        throw MissingPrice("no " +
                           std::string(mode == PricingMode::Realtime ? "realtime" : "batch") +
                           " price for model '" + model + "'");
    }
    return it->second;
}

bool PricingTable::has(const std::string& model, PricingMode mode) const {
    return prices_.count(price_key(model, mode)) > 0;
}

std::int64_t cost_pico_usd(std::int64_t input_tokens, std::int64_t output_tokens,
                           const Price& price) {
    return input_tokens * price.input_micro_usd_per_m +
           output_tokens * price.output_micro_usd_per_m;
}

double pico_usd_to_usd(std::int64_t pico) { return static_cast<double>(pico) / 1e12; }

}  // namespace sqleval

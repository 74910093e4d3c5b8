#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sqleval/rollout_env.hpp"

namespace sqleval {

struct GenerationRequest {
    std::vector<Message> messages;
    double temperature = 0.0;  // 0 means greedy decoding
    int max_output_tokens = 3076;
};

struct UsageRecord {
    std::int64_t input_tokens = 0;
    std::int64_t output_tokens = 0;
    double wall_time_s = 0.0;
};

struct GenerationResult {
    std::string message;
    UsageRecord usage;
};

class GenerationClient {
  public:
    virtual ~GenerationClient() = default;
    // One assistant message; throws ClientError on failure.
    virtual GenerationResult generate(const GenerationRequest& request) = 0;
};

struct RetryPolicy {
    int max_attempts = 3;
    std::chrono::milliseconds base_delay{250};  // doubled per attempt; 0 in tests
};

// generate with exponential backoff on transient failures.
GenerationResult generate_with_retry(GenerationClient& client, const GenerationRequest& request,
                                     const RetryPolicy& policy = {});

// ---------------------------------------------------------------------------
// Judge

enum class JudgeVerdict { Approved, Rejected, Unparseable };

struct JudgeRequest {
    std::string question;
    std::string external_knowledge;
    std::vector<std::string> sqls;          // all member SQL texts of the group
    std::vector<std::string> result_sample; // rendered rows, already capped
    std::size_t result_total_rows = 0;
};

struct JudgeReply {
    JudgeVerdict verdict = JudgeVerdict::Unparseable;
    std::string rationale;
    UsageRecord usage;
};

class JudgeClient {
  public:
    virtual ~JudgeClient() = default;
    // Throws ClientError on failure; an unparseable response is a reply,
    // not an error (the caller applies its fail-open policy).
    virtual JudgeReply judge(const JudgeRequest& request) = 0;
};

// Strict verdict parse: the first non-empty line must start with "yes" or
// "no" (case-insensitive); everything after is the rationale.
JudgeVerdict parse_judge_verdict(const std::string& response, std::string* rationale = nullptr);

std::string render_judge_prompt(const JudgeRequest& request);

// A judge built on any generation client with the universal prompt above.
class PromptJudgeClient : public JudgeClient {
  public:
    PromptJudgeClient(GenerationClient& client, RetryPolicy policy = {});
    JudgeReply judge(const JudgeRequest& request) override;

  private:
    GenerationClient& client_;
    RetryPolicy policy_;
};

// ---------------------------------------------------------------------------
// Mocks

// Deterministic scripted client: the hook maps a request to the response
// text. Usage is synthesized from message sizes so accounting is exercised
// deterministically. fail_first injects transient failures.
class ScriptedGenerationClient : public GenerationClient {
  public:
    using Script = std::function<std::string(const GenerationRequest&)>;

    explicit ScriptedGenerationClient(Script script);
    GenerationResult generate(const GenerationRequest& request) override;

    void fail_first(int failures) { failures_remaining_ = failures; }
    int calls() const { return calls_; }

  private:
    Script script_;
    int failures_remaining_ = 0;
    int calls_ = 0;
};

class ScriptedJudgeClient : public JudgeClient {
  public:
    using Script = std::function<JudgeReply(const JudgeRequest&)>;

    explicit ScriptedJudgeClient(Script script) : script_(std::move(script)) {}
    JudgeReply judge(const JudgeRequest& request) override { return script_(request); }

  private:
    Script script_;
};

// Deterministic token accounting used by mocks: ceil(chars / 4).
std::int64_t approximate_tokens(const std::string& text);
std::int64_t approximate_tokens(const std::vector<Message>& messages);

// ---------------------------------------------------------------------------
// HTTP client (chat-completion style wire contract)

// Bounds concurrent requests against one endpoint. Shared across every
// client the factory hands out.
class ConcurrencyLimiter {
  public:
    explicit ConcurrencyLimiter(int limit);
    void acquire();
    void release();

  private:
    std::mutex mutex_;
    std::condition_variable available_;
    int remaining_;
};

struct HttpClientConfig {
    std::string base_url;       // e.g. https://api.example.com
    std::string model;
    std::string api_key;        // resolved from api_key_env when empty
    std::string api_key_env = "SQLEVAL_API_KEY";
    std::string path = "/v1/chat/completions";
    std::chrono::milliseconds request_timeout{120000};
    int max_in_flight = 8;
};

class HttpChatClient : public GenerationClient {
  public:
    explicit HttpChatClient(HttpClientConfig config,
                            std::shared_ptr<ConcurrencyLimiter> limiter = nullptr);
    GenerationResult generate(const GenerationRequest& request) override;

  private:
    HttpClientConfig config_;
    std::shared_ptr<ConcurrencyLimiter> limiter_;
};

// ---------------------------------------------------------------------------
// Pricing

enum class PricingMode { Realtime, Batch };

struct Price {
    // Micro-USD per million tokens, kept integral so cost sums are exact.
    std::int64_t input_micro_usd_per_m = 0;
    std::int64_t output_micro_usd_per_m = 0;
};

class PricingTable {
  public:
    static PricingTable load(const std::filesystem::path& path);
    static PricingTable from_json_text(const std::string& text);

    // Throws MissingPrice when the (model, mode) pair is absent.
    Price lookup(const std::string& model, PricingMode mode) const;
    bool has(const std::string& model, PricingMode mode) const;

  private:
    // key: model + '\n' + mode
    std::map<std::string, Price> prices_;
};

// Exact cost of a usage total at a price, in pico-USD
// (tokens * micro_usd_per_m stays integral).
std::int64_t cost_pico_usd(std::int64_t input_tokens, std::int64_t output_tokens,
                           const Price& price);

double pico_usd_to_usd(std::int64_t pico);

}  // namespace sqleval

#pragma once

// Deterministic generation mocks for scale runs. A mock's behavior is a
// pure function of (seed, instance id, temperature, candidate index) plus
// its per-episode turn counter, so reports are reproducible under any
// thread scheduling.

#include <memory>
#include <string>
#include <vector>

#include "sqleval/harness.hpp"
#include "sqleval/value.hpp"

namespace mock_clients {

inline std::uint64_t mix(std::uint64_t seed, const std::string& id, double temperature,
                         int index) {
    std::string key = id + "|" + std::to_string(temperature) + "|" + std::to_string(index);
    std::uint64_t h = sqleval::fnv1a64(reinterpret_cast<const unsigned char*>(key.data()),
                                       key.size());
    h ^= seed + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    return h;
}

// Streams one scripted episode: optionally a tool call first, then a final
// answer drawn from the per-instance candidate list.
class EpisodeClient : public sqleval::GenerationClient {
  public:
    EpisodeClient(std::vector<std::string> turns) : turns_(std::move(turns)) {}

    sqleval::GenerationResult generate(const sqleval::GenerationRequest& request) override {
        sqleval::GenerationResult result;
        const std::size_t turn = std::min(turn_, turns_.size() - 1);
        result.message = turns_[turn];
        ++turn_;
        result.usage.input_tokens = sqleval::approximate_tokens(request.messages);
        result.usage.output_tokens = sqleval::approximate_tokens(result.message);
        return result;
    }

  private:
    std::vector<std::string> turns_;
    std::size_t turn_ = 0;
};

struct MockBehavior {
    // Candidate SQL texts an episode may end with, per instance id. The
    // first entry should be the gold query so greedy passes tend to be
    // right.
    std::map<std::string, std::vector<std::string>> candidate_sql;
    std::uint64_t seed = 0;
    bool tool_call_sometimes = true;
};

class SeededMockFactory : public sqleval::GenerationClientFactory {
  public:
    explicit SeededMockFactory(MockBehavior behavior) : behavior_(std::move(behavior)) {}

    std::unique_ptr<sqleval::GenerationClient> make(const std::string& instance_id,
                                                    double temperature,
                                                    int candidate_index) override {
        const auto& pool = behavior_.candidate_sql.at(instance_id);
        const std::uint64_t h = mix(behavior_.seed, instance_id, temperature, candidate_index);

        // Greedy decodes the first (gold) variant; sampled passes spread
        // over the whole list.
        const std::size_t pick = temperature == 0.0 ? 0 : h % pool.size();
        const std::string final_message =
            "<final_answer>\n```sql\n" + pool[pick] + "\n```\n</final_answer>";

        std::vector<std::string> turns;
        if (behavior_.tool_call_sometimes && h % 3 == 0) {
            turns.push_back("exploring first\n```sql\nSELECT COUNT(*) FROM student\n```");
        }
        turns.push_back(final_message);
        return std::make_unique<EpisodeClient>(std::move(turns));
    }

  private:
    MockBehavior behavior_;
};

// Judge approving exactly the groups whose first SQL carries no "/*bad*/"
// marker. Pure function of the request.
class MarkerJudge : public sqleval::JudgeClient {
  public:
    sqleval::JudgeReply judge(const sqleval::JudgeRequest& request) override {
        sqleval::JudgeReply reply;
        bool bad = false;
        for (const std::string& sql : request.sqls) {
            if (sql.find("/*bad*/") != std::string::npos) bad = true;
        }
        reply.verdict = bad ? sqleval::JudgeVerdict::Rejected : sqleval::JudgeVerdict::Approved;
        reply.rationale = bad ? "no: the candidate misses a stated constraint"
                              : "yes: constraints are covered";
        reply.usage.input_tokens = 64;
        reply.usage.output_tokens = 8;
        return reply;
    }
};

}  // namespace mock_clients

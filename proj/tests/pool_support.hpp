#pragma once

// Synthetic candidate pools for the reconciliation suites, plus an
// independent majority-voting reference built on string row encodings
// rather than the library's clustering.

#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "grading_oracle.hpp"
#include "sqleval/reconcile.hpp"

namespace pool_support {

inline sqleval::CanonicalTable result_table(int result_id) {
    sqleval::CanonicalTable table;
    table.n_cols = 1;
    table.rows = {{sqleval::Cell{static_cast<std::int64_t>(result_id)}}};
    return table;
}

// SQL text encodes the result id so scripted judges can recover it without
// executing anything.
inline std::string result_sql(int result_id, int candidate_index) {
    return "SELECT " + std::to_string(result_id) + " /* candidate " +
           std::to_string(candidate_index) + " */";
}

inline std::optional<int> result_id_of_sql(const std::string& sql) {
    const auto pos = sql.find("SELECT ");
    if (pos == std::string::npos) return std::nullopt;
    return std::atoi(sql.c_str() + pos + 7);
}

inline sqleval::Candidate make_candidate(int index, int result_id, bool error = false) {
    sqleval::Candidate candidate;
    candidate.index = index;
    candidate.source = index == 0 ? sqleval::CandidateSource::Greedy
                                  : sqleval::CandidateSource::Sampled;
    candidate.temperature = index == 0 ? 0.0 : 1.0;
    candidate.sql = error ? "SELECT broken /* candidate " + std::to_string(index) + " */"
                          : result_sql(result_id, index);
    if (error) {
        candidate.outcome.status = sqleval::ExecStatus::CompileError;
        candidate.outcome.message = "synthetic failure";
    } else {
        candidate.outcome.status = sqleval::ExecStatus::Ok;
        candidate.outcome.table = result_table(result_id);
    }
    return candidate;
}

struct SyntheticPool {
    std::vector<sqleval::Candidate> candidates;
    int correct_result = 0;
    bool has_correct_group = false;
};

// Pools of 3..12 candidates over a handful of execution results; roughly a
// tenth of the candidates fail to execute. The correct result is sometimes
// frequent, sometimes a minority, sometimes absent.
inline SyntheticPool random_pool(std::mt19937_64& rng) {
    SyntheticPool pool;
    const int n = 3 + static_cast<int>(rng() % 10);
    const int result_space = 2 + static_cast<int>(rng() % 4);
    pool.correct_result = static_cast<int>(rng() % result_space);

    for (int i = 0; i < n; ++i) {
        const bool error = rng() % 10 == 0;
        const int result_id = static_cast<int>(rng() % result_space);
        pool.candidates.push_back(make_candidate(i, result_id, error));
        if (!error && result_id == pool.correct_result) pool.has_correct_group = true;
    }
    return pool;
}

// Independent majority-vote reference: encode each Ok candidate's result
// row set, tally group sizes, pick the largest (ties prefer the group
// containing the greedy candidate, then the earliest first index), and
// return its greedy member when present, else its lowest-index member.
inline std::optional<int> reference_majority_winner(
    const std::vector<sqleval::Candidate>& candidates) {
    struct Group {
        std::vector<const sqleval::Candidate*> members;
        int first_index;
    };
    std::map<std::string, Group> groups;
    for (const auto& candidate : candidates) {
        if (candidate.outcome.status != sqleval::ExecStatus::Ok) continue;
        auto rows = grading_oracle::encode_rows(*candidate.outcome.table);
        std::sort(rows.begin(), rows.end());
        rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
        std::string key = std::to_string(candidate.outcome.table->n_cols) + "#";
        for (const auto& row : rows) key += row + "\x1e";
        auto [it, inserted] = groups.try_emplace(std::move(key), Group{{}, candidate.index});
        it->second.members.push_back(&candidate);
    }
    if (groups.empty()) return std::nullopt;

    const Group* best = nullptr;
    auto contains_greedy = [](const Group& g) {
        for (const auto* m : g.members) {
            if (m->source == sqleval::CandidateSource::Greedy) return true;
        }
        return false;
    };
    for (const auto& [key, group] : groups) {
        if (best == nullptr) {
            best = &group;
            continue;
        }
        if (group.members.size() != best->members.size()) {
            if (group.members.size() > best->members.size()) best = &group;
            continue;
        }
        const bool g_greedy = contains_greedy(group);
        const bool b_greedy = contains_greedy(*best);
        if (g_greedy != b_greedy) {
            if (g_greedy) best = &group;
            continue;
        }
        if (group.first_index < best->first_index) best = &group;
    }

    const sqleval::Candidate* winner = nullptr;
    for (const auto* member : best->members) {
        if (member->source == sqleval::CandidateSource::Greedy) return member->index;
        if (winner == nullptr || member->index < winner->index) winner = member;
    }
    return winner->index;
}

// Judges used across suites.
inline sqleval::ScriptedJudgeClient reject_all_judge() {
    return sqleval::ScriptedJudgeClient([](const sqleval::JudgeRequest&) {
        sqleval::JudgeReply reply;
        reply.verdict = sqleval::JudgeVerdict::Rejected;
        reply.rationale = "no: rejected by script";
        return reply;
    });
}

inline sqleval::ScriptedJudgeClient approve_all_judge() {
    return sqleval::ScriptedJudgeClient([](const sqleval::JudgeRequest&) {
        sqleval::JudgeReply reply;
        reply.verdict = sqleval::JudgeVerdict::Approved;
        reply.rationale = "yes: approved by script";
        return reply;
    });
}

// Perfect oracle: approves exactly the groups whose SQL encodes the
// designated correct result.
inline sqleval::ScriptedJudgeClient oracle_judge(int correct_result) {
    return sqleval::ScriptedJudgeClient([correct_result](const sqleval::JudgeRequest& request) {
        sqleval::JudgeReply reply;
        const auto id = result_id_of_sql(request.sqls.front());
        const bool approve = id.has_value() && *id == correct_result;
        reply.verdict = approve ? sqleval::JudgeVerdict::Approved : sqleval::JudgeVerdict::Rejected;
        reply.rationale = approve ? "yes: matches the expected result"
                                  : "no: result differs from the expected one";
        return reply;
    });
}

}  // namespace pool_support

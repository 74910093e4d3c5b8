#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sqleval/clients.hpp"
#include "sqleval/dataset.hpp"
#include "sqleval/executor.hpp"

namespace sqleval {

enum class CandidateSource { Greedy, Sampled };

struct Candidate {
    std::string sql;
    CandidateSource source = CandidateSource::Sampled;
    double temperature = 0.0;
    int index = 0;  // generation order, unique within a pool
    ExecutionOutcome outcome;
};

struct CandidateGroup {
    std::vector<Candidate> members;
    CanonicalTable representative_result;  // meaningful for votable groups
    bool is_error_group = false;

    bool votable() const { return !is_error_group; }
    int first_index() const { return members.front().index; }
    bool contains_greedy() const;
};

struct JudgeDecision {
    int group_index = 0;
    bool approved = false;
    std::string rationale;
};

// Partition candidates by canonical execution-result equality (row-set
// comparison). Non-Ok candidates land in one dedicated error group that is
// excluded from voting. Group order follows the first member's index.
std::vector<CandidateGroup> cluster(const std::vector<Candidate>& candidates);

struct ReconcileOptions {
    int judge_result_row_cap = 20;
    RetryPolicy judge_retry;
};

// Ask the judge whether a votable group's queries cover the question's
// constraints. Judge failure after retries and unparseable verdicts are
// fail-open: the group is approved with a warning rationale.
JudgeDecision decide(JudgeClient& judge, const TextToSqlInstance& instance,
                     const CandidateGroup& group, int group_index,
                     const ReconcileOptions& options = {});

// Majority voting over approved groups, falling back to all votable groups
// when none is approved. Equal sizes prefer the group containing the greedy
// candidate, then the lowest first-member index. The returned candidate is
// the winning group's greedy member when present, else its lowest-index
// member. Throws NoVotableGroup when every candidate errored.
const Candidate& select(const std::vector<CandidateGroup>& groups,
                        const std::vector<JudgeDecision>& decisions);

struct GroupAudit {
    std::vector<int> member_indices;
    std::size_t size = 0;
    bool is_error_group = false;
    std::string result_digest;  // rendered first rows, for the audit trail
};

struct ReconcileAudit {
    std::vector<GroupAudit> groups;
    std::vector<JudgeDecision> decisions;
    int winner_group = -1;      // index into groups
    int winner_candidate = -1;  // candidate index
    bool fallback_all_groups = false;   // no approved group, groups restored
    bool fallback_error_pool = false;   // no votable group, raw SQL fallback
};

struct ReconcileResult {
    std::string final_sql;
    ReconcileAudit audit;
};

// Algorithm: cluster -> judge each votable group (when a judge is given)
// -> majority voting with fallback. When every candidate errored, falls
// back to the greedy (lowest-index) candidate's raw SQL.
ReconcileResult reconcile_pipeline(const TextToSqlInstance& instance,
                                   const std::vector<Candidate>& candidates, JudgeClient* judge,
                                   const ReconcileOptions& options = {});

}  // namespace sqleval

#include "sqleval/grading.hpp"

#include <algorithm>

#include "sqleval/errors.hpp"
#include "sqleval/rollout_env.hpp"

namespace sqleval {

std::string_view to_string(GradeReason reason) {
    switch (reason) {
        case GradeReason::Match: return "match";
        case GradeReason::Mismatch: return "mismatch";
        case GradeReason::CandidateError: return "candidate_error";
        case GradeReason::GoldError: return "gold_error";
    }
    return "unknown";
}

namespace {

GradeVerdict verdict(bool correct) {
    return GradeVerdict{correct, correct ? GradeReason::Match : GradeReason::Mismatch};
}

bool grade_set(const CanonicalTable& candidate, const CanonicalTable& gold) {
    return table_set_equal(candidate, gold);
}

bool grade_subset(const CanonicalTable& candidate, const CanonicalTable& gold,
                  std::int64_t required_size) {
    if (candidate.n_cols != gold.n_cols) return false;
    const auto candidate_rows = sorted_distinct_rows(candidate);
    if (static_cast<std::int64_t>(candidate_rows.size()) != required_size) return false;
    const auto gold_rows = sorted_distinct_rows(gold);
    return std::includes(gold_rows.begin(), gold_rows.end(), candidate_rows.begin(),
                         candidate_rows.end(), row_less);
}

bool grade_list(const CanonicalTable& candidate, const CanonicalTable& gold) {
    return candidate.n_cols == gold.n_cols && candidate.rows == gold.rows;
}

}  // namespace

GradeVerdict grade(const CanonicalTable& candidate, const CanonicalTable& gold,
                   GradingMethod method, std::optional<std::int64_t> required_size) {
    switch (method) {
        case GradingMethod::SetBased:
            return verdict(grade_set(candidate, gold));
        case GradingMethod::SubsetBased:
            if (!required_size) {
                throw MissingRequiredSize("subset grading requires required_size");
            }
            return verdict(grade_subset(candidate, gold, *required_size));
        case GradingMethod::ListBased:
            return verdict(grade_list(candidate, gold));
    }
    return verdict(false);
}

GradeVerdict grade_outcomes(const ExecutionOutcome& candidate, const ExecutionOutcome& gold,
                            GradingMethod method, std::optional<std::int64_t> required_size) {
    if (!gold.ok()) return GradeVerdict{false, GradeReason::GoldError};
    if (!candidate.ok()) return GradeVerdict{false, GradeReason::CandidateError};
    return grade(*candidate.table, *gold.table, method, required_size);
}

Reward rollout_reward(const RolloutTranscript& transcript, const TextToSqlInstance& instance,
                      const Database& db, std::chrono::milliseconds timeout) {
    if (!transcript.final_sql) return Reward{-1};

    const auto gold = execute(db, instance.gold_sql, timeout);
    if (!gold.ok()) {
        throw GoldExecutionFailure("gold SQL of instance " + instance.id +
                                   " failed: " + gold.message);
    }
    const auto candidate = execute(db, *transcript.final_sql, timeout);
    const auto result = grade_outcomes(candidate, gold, instance.grading, instance.required_size);
    return Reward{result.correct ? 1 : 0};
}

}  // namespace sqleval

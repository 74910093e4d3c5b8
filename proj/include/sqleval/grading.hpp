#pragma once

#include <chrono>
#include <optional>
#include <string_view>

#include "sqleval/dataset.hpp"
#include "sqleval/executor.hpp"
#include "sqleval/value.hpp"

namespace sqleval {

enum class GradeReason { Match, Mismatch, CandidateError, GoldError };

std::string_view to_string(GradeReason reason);

struct GradeVerdict {
    bool correct = false;
    GradeReason reason = GradeReason::Mismatch;
};

// Compare a candidate result against the gold result.
//   set:    equal row sets (rows are ordered cell tuples, duplicates collapse)
//   subset: distinct candidate rows ⊆ gold rows and their count equals
//           required_size (throws MissingRequiredSize when absent)
//   list:   identical dimensions and cell-for-cell equality
GradeVerdict grade(const CanonicalTable& candidate, const CanonicalTable& gold,
                   GradingMethod method,
                   std::optional<std::int64_t> required_size = std::nullopt);

// Same, lifted over execution outcomes: a failed candidate is a
// CandidateError verdict, a failed gold a GoldError verdict.
GradeVerdict grade_outcomes(const ExecutionOutcome& candidate, const ExecutionOutcome& gold,
                            GradingMethod method,
                            std::optional<std::int64_t> required_size = std::nullopt);

struct Reward {
    int value = 0;  // in {-1, 0, 1}
};

struct RolloutTranscript;  // rollout_env

// Episode reward: +1 when the final SQL executes and matches gold under the
// instance's grading method, 0 when it errors, times out or mismatches, -1
// when the transcript carries no final SQL. Throws GoldExecutionFailure if
// the gold itself does not execute (a dataset defect, not candidate failure).
Reward rollout_reward(const RolloutTranscript& transcript, const TextToSqlInstance& instance,
                      const Database& db, std::chrono::milliseconds timeout);

}  // namespace sqleval

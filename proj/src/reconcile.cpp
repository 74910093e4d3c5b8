#include "sqleval/reconcile.hpp"

#include <algorithm>

#include "sqleval/errors.hpp"

namespace sqleval {

bool CandidateGroup::contains_greedy() const {
    return std::any_of(members.begin(), members.end(), [](const Candidate& c) {
        return c.source == CandidateSource::Greedy;
    });
}

std::vector<CandidateGroup> cluster(const std::vector<Candidate>& candidates) {
    std::vector<CandidateGroup> groups;
    std::optional<std::size_t> error_group;

    for (const Candidate& candidate : candidates) {
        if (!candidate.outcome.ok()) {
            if (!error_group) {
                CandidateGroup group;
                group.is_error_group = true;
                groups.push_back(std::move(group));
                error_group = groups.size() - 1;
            }
            groups[*error_group].members.push_back(candidate);
            continue;
        }
        const CanonicalTable& result = *candidate.outcome.table;
        auto match = std::find_if(groups.begin(), groups.end(), [&](const CandidateGroup& g) {
            return g.votable() && table_set_equal(g.representative_result, result);
        });
        if (match == groups.end()) {
            CandidateGroup group;
            group.representative_result = result;
            group.members.push_back(candidate);
            groups.push_back(std::move(group));
        } else {
            match->members.push_back(candidate);
        }
    }
    return groups;
}

JudgeDecision decide(JudgeClient& judge, const TextToSqlInstance& instance,
                     const CandidateGroup& group, int group_index,
                     const ReconcileOptions& options) {
    JudgeRequest request;
    request.question = instance.question;
    request.external_knowledge = instance.external_knowledge;
    for (const Candidate& member : group.members) request.sqls.push_back(member.sql);
    request.result_total_rows = group.representative_result.rows.size();
    const std::size_t sample =
        std::min(request.result_total_rows, static_cast<std::size_t>(options.judge_result_row_cap));
    for (std::size_t r = 0; r < sample; ++r) {
        request.result_sample.push_back(row_to_string(group.representative_result.rows[r]));
    }

    JudgeDecision decision;
    decision.group_index = group_index;
    try {
        const JudgeReply reply = judge.judge(request);
        switch (reply.verdict) {
            case JudgeVerdict::Approved:
                decision.approved = true;
                decision.rationale = reply.rationale;
                break;
            case JudgeVerdict::Rejected:
                decision.approved = false;
                decision.rationale = reply.rationale;
                break;
            case JudgeVerdict::Unparseable:
                decision.approved = true;
                decision.rationale = "fail-open: unparseable judge verdict";
                break;
        }
    } catch (const ClientError& e) {
        decision.approved = true;
        decision.rationale = std::string("fail-open: judge unavailable (") + e.what() + ")";
    }
    return decision;
}

namespace {

const Candidate& preferred_member(const CandidateGroup& group) {
    const Candidate* best = nullptr;
    for (const Candidate& member : group.members) {
        if (member.source == CandidateSource::Greedy) return member;
        if (best == nullptr || member.index < best->index) best = &member;
    }
    return *best;
}

// size desc, then greedy-containing group, then first-seen order.
bool group_wins(const CandidateGroup& a, const CandidateGroup& b) {
    if (a.members.size() != b.members.size()) return a.members.size() > b.members.size();
    const bool ag = a.contains_greedy();
    const bool bg = b.contains_greedy();
    if (ag != bg) return ag;
    return a.first_index() < b.first_index();
}

}  // namespace

const Candidate& select(const std::vector<CandidateGroup>& groups,
                        const std::vector<JudgeDecision>& decisions) {
    std::vector<const CandidateGroup*> votable;
    std::vector<const CandidateGroup*> approved;

    for (std::size_t i = 0; i < groups.size(); ++i) {
        if (!groups[i].votable()) continue;
        votable.push_back(&groups[i]);
        bool is_approved = false;
        for (const JudgeDecision& d : decisions) {
            if (d.group_index == static_cast<int>(i)) {
                is_approved = d.approved;
                break;
            }
        }
        if (is_approved) approved.push_back(&groups[i]);
    }

    if (votable.empty()) throw NoVotableGroup("every candidate failed to execute");

    const auto& pool = approved.empty() ? votable : approved;
    const CandidateGroup* winner = pool.front();
    for (const CandidateGroup* group : pool) {
        if (group_wins(*group, *winner)) winner = group;
    }
    return preferred_member(*winner);
}

ReconcileResult reconcile_pipeline(const TextToSqlInstance& instance,
                                   const std::vector<Candidate>& candidates, JudgeClient* judge,
                                   const ReconcileOptions& options) {
    if (candidates.empty()) throw Error("reconcile_pipeline: empty candidate pool");

    ReconcileResult result;
    const std::vector<CandidateGroup> groups = cluster(candidates);

    for (const CandidateGroup& group : groups) {
        GroupAudit audit;
        audit.size = group.members.size();
        audit.is_error_group = group.is_error_group;
        for (const Candidate& member : group.members) {
            audit.member_indices.push_back(member.index);
        }
        if (group.votable()) {
            const std::size_t sample = std::min<std::size_t>(3, group.representative_result.rows.size());
            for (std::size_t r = 0; r < sample; ++r) {
                if (r > 0) audit.result_digest += "; ";
                audit.result_digest += row_to_string(group.representative_result.rows[r]);
            }
        }
        result.audit.groups.push_back(std::move(audit));
    }

    if (judge != nullptr) {
        for (std::size_t i = 0; i < groups.size(); ++i) {
            if (!groups[i].votable()) continue;
            result.audit.decisions.push_back(
                decide(*judge, instance, groups[i], static_cast<int>(i), options));
        }
    }

    try {
        const Candidate& winner = select(groups, result.audit.decisions);
        result.final_sql = winner.sql;
        result.audit.winner_candidate = winner.index;
        for (std::size_t i = 0; i < groups.size(); ++i) {
            const auto& members = groups[i].members;
            if (std::any_of(members.begin(), members.end(),
                            [&](const Candidate& c) { return c.index == winner.index; })) {
                result.audit.winner_group = static_cast<int>(i);
                break;
            }
        }
        const bool any_approved = std::any_of(result.audit.decisions.begin(),
                                              result.audit.decisions.end(),
                                              [](const JudgeDecision& d) { return d.approved; });
        result.audit.fallback_all_groups = judge != nullptr && !any_approved;
    } catch (const NoVotableGroup&) {
        // Raw-SQL fallback: the greedy candidate when present, else the
        // lowest generation index.
        const Candidate* fallback = &candidates.front();
        for (const Candidate& candidate : candidates) {
            if (candidate.source == CandidateSource::Greedy) {
                fallback = &candidate;
                break;
            }
            if (candidate.index < fallback->index) fallback = &candidate;
        }
        result.final_sql = fallback->sql;
        result.audit.winner_candidate = fallback->index;
        result.audit.fallback_error_pool = true;
    }
    return result;
}

}  // namespace sqleval

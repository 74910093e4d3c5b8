#include <doctest.h>

#include <random>
#include <set>

#include "pool_support.hpp"
#include "sqleval/errors.hpp"
#include "sqleval/reconcile.hpp"
#include "test_support.hpp"

using namespace sqleval;
using pool_support::make_candidate;

namespace {

TextToSqlInstance dummy_instance() {
    return testsupport::make_instance("pool", "synthetic question", "SELECT 0");
}

// Partition check: each candidate in exactly one group; votable groups are
// internally result-equal and pairwise result-distinct.
void check_partition(const std::vector<Candidate>& candidates,
                     const std::vector<CandidateGroup>& groups) {
    std::set<int> seen;
    std::size_t total = 0;
    for (const CandidateGroup& group : groups) {
        REQUIRE_FALSE(group.members.empty());
        total += group.members.size();
        for (const Candidate& member : group.members) {
            CHECK(seen.insert(member.index).second);
            if (group.votable()) {
                CHECK(member.outcome.ok());
                CHECK(table_set_equal(*member.outcome.table, group.representative_result));
            } else {
                CHECK_FALSE(member.outcome.ok());
            }
        }
    }
    CHECK(total == candidates.size());
    for (std::size_t a = 0; a < groups.size(); ++a) {
        for (std::size_t b = a + 1; b < groups.size(); ++b) {
            if (groups[a].votable() && groups[b].votable()) {
                CHECK_FALSE(table_set_equal(groups[a].representative_result,
                                            groups[b].representative_result));
            }
        }
    }
}

}  // namespace

TEST_SUITE("reconcile") {

TEST_CASE("clustering partitions by execution result") {
    const std::vector<Candidate> pool = {make_candidate(0, 7), make_candidate(1, 7),
                                         make_candidate(2, 9)};
    const auto groups = cluster(pool);
    REQUIRE(groups.size() == 2);
    CHECK(groups[0].members.size() == 2);
    CHECK(groups[1].members.size() == 1);
    check_partition(pool, groups);
}

TEST_CASE("all-error pools have no votable group") {
    const std::vector<Candidate> pool = {make_candidate(0, 0, true), make_candidate(1, 0, true),
                                         make_candidate(2, 0, true)};
    const auto groups = cluster(pool);
    REQUIRE(groups.size() == 1);
    CHECK(groups[0].is_error_group);
    CHECK(groups[0].members.size() == 3);
    CHECK_THROWS_AS(select(groups, {}), NoVotableGroup);
}

TEST_CASE("groups appear in first-seen order") {
    const std::vector<Candidate> pool = {make_candidate(0, 1), make_candidate(1, 2),
                                         make_candidate(2, 1), make_candidate(3, 2),
                                         make_candidate(4, 1)};
    const auto groups = cluster(pool);
    REQUIRE(groups.size() == 2);
    CHECK(groups[0].members.size() == 3);  // result 1, first seen at index 0
    CHECK(groups[1].members.size() == 2);  // result 2, first seen at index 1
    CHECK(groups[0].first_index() == 0);
    CHECK(groups[1].first_index() == 1);
}

TEST_CASE("clustering equality collapses duplicate rows") {
    Candidate a = make_candidate(0, 5);
    Candidate b = make_candidate(1, 5);
    b.outcome.table->rows.push_back(b.outcome.table->rows.front());  // same set
    const auto groups = cluster({a, b});
    REQUIRE(groups.size() == 1);
    CHECK(groups[0].members.size() == 2);
}

TEST_CASE("decide forwards the group to the judge and parses verdicts") {
    auto approve = pool_support::approve_all_judge();
    auto reject = pool_support::reject_all_judge();
    const auto groups = cluster({make_candidate(0, 1), make_candidate(1, 1)});
    REQUIRE(groups.size() == 1);

    const JudgeDecision yes = decide(approve, dummy_instance(), groups[0], 0);
    CHECK(yes.approved);
    CHECK(yes.group_index == 0);
    const JudgeDecision no = decide(reject, dummy_instance(), groups[0], 0);
    CHECK_FALSE(no.approved);
}

TEST_CASE("judge requests carry at most the configured result rows") {
    Candidate big = make_candidate(0, 1);
    big.outcome.table->rows.clear();
    for (int i = 0; i < 100; ++i) {
        big.outcome.table->rows.push_back({Cell{static_cast<std::int64_t>(i)}});
    }
    std::size_t seen_rows = 0;
    ScriptedJudgeClient probe([&](const JudgeRequest& request) {
        seen_rows = request.result_sample.size();
        JudgeReply reply;
        reply.verdict = JudgeVerdict::Approved;
        return reply;
    });
    const auto groups = cluster({big});
    decide(probe, dummy_instance(), groups[0], 0);
    CHECK(seen_rows == 20);
}

TEST_CASE("judge failures and unparseable verdicts fail open") {
    ScriptedJudgeClient failing([](const JudgeRequest&) -> JudgeReply {
        throw ClientError("judge endpoint down", true);
    });
    const auto groups = cluster({make_candidate(0, 1)});
    const JudgeDecision open = decide(failing, dummy_instance(), groups[0], 0);
    CHECK(open.approved);
    CHECK(open.rationale.find("fail-open") != std::string::npos);

    ScriptedJudgeClient rambling([](const JudgeRequest&) {
        JudgeReply reply;
        reply.verdict = JudgeVerdict::Unparseable;
        reply.rationale = "let me think about this at length";
        return reply;
    });
    const JudgeDecision open2 = decide(rambling, dummy_instance(), groups[0], 0);
    CHECK(open2.approved);
}

TEST_CASE("selection follows majority, filtering, fallback and tie-break") {
    // sizes {A:3, B:2}, both approved -> A
    std::vector<Candidate> pool = {make_candidate(0, 1), make_candidate(1, 1),
                                   make_candidate(2, 1), make_candidate(3, 2),
                                   make_candidate(4, 2)};
    auto groups = cluster(pool);
    std::vector<JudgeDecision> both = {{0, true, ""}, {1, true, ""}};
    CHECK(pool_support::result_id_of_sql(select(groups, both).sql) == 1);

    // A rejected, B approved -> B despite being smaller
    std::vector<JudgeDecision> only_b = {{0, false, ""}, {1, true, ""}};
    CHECK(pool_support::result_id_of_sql(select(groups, only_b).sql) == 2);

    // both rejected -> all groups restored -> A
    std::vector<JudgeDecision> none = {{0, false, ""}, {1, false, ""}};
    CHECK(pool_support::result_id_of_sql(select(groups, none).sql) == 1);

    // equal sizes -> the group containing the greedy candidate
    std::vector<Candidate> tie = {make_candidate(0, 5), make_candidate(1, 6),
                                  make_candidate(2, 6), make_candidate(3, 5)};
    auto tie_groups = cluster(tie);
    std::vector<JudgeDecision> approve_both = {{0, true, ""}, {1, true, ""}};
    const Candidate& winner = select(tie_groups, approve_both);
    CHECK(pool_support::result_id_of_sql(winner.sql) == 5);
    CHECK(winner.index == 0);  // the greedy member is emitted
}

TEST_CASE("equal-size groups without greedy fall back to first-seen order") {
    std::vector<Candidate> pool = {make_candidate(0, 1, true), make_candidate(1, 3),
                                   make_candidate(2, 4)};
    auto groups = cluster(pool);
    const Candidate& winner = select(groups, {});
    CHECK(winner.index == 1);
}

TEST_CASE("pipeline composes cluster, decide and select with an audit") {
    auto judge = pool_support::oracle_judge(2);
    std::vector<Candidate> pool = {make_candidate(0, 1), make_candidate(1, 1),
                                   make_candidate(2, 2)};
    const ReconcileResult result = reconcile_pipeline(dummy_instance(), pool, &judge);
    CHECK(pool_support::result_id_of_sql(result.final_sql) == 2);
    CHECK(result.audit.groups.size() == 2);
    CHECK(result.audit.decisions.size() == 2);
    CHECK(result.audit.winner_group == 1);
    CHECK_FALSE(result.audit.fallback_all_groups);
    CHECK_FALSE(result.audit.fallback_error_pool);
}

TEST_CASE("minority-but-approved group beats the majority") {
    auto judge = pool_support::oracle_judge(9);
    std::vector<Candidate> pool = {make_candidate(0, 1), make_candidate(1, 1),
                                   make_candidate(2, 1), make_candidate(3, 9)};
    const ReconcileResult result = reconcile_pipeline(dummy_instance(), pool, &judge);
    CHECK(pool_support::result_id_of_sql(result.final_sql) == 9);
}

TEST_CASE("all-reject judge collapses to pure majority voting") {
    std::mt19937_64 rng(17);
    auto judge = pool_support::reject_all_judge();
    for (int i = 0; i < 500; ++i) {
        const auto pool = pool_support::random_pool(rng);
        const auto reference = pool_support::reference_majority_winner(pool.candidates);
        const ReconcileResult result =
            reconcile_pipeline(dummy_instance(), pool.candidates, &judge);
        if (reference) {
            CHECK(result.audit.winner_candidate == *reference);
        } else {
            CHECK(result.audit.fallback_error_pool);
        }
    }
}

TEST_CASE("no-judge pipeline equals pure majority voting") {
    std::mt19937_64 rng(18);
    for (int i = 0; i < 200; ++i) {
        const auto pool = pool_support::random_pool(rng);
        const auto reference = pool_support::reference_majority_winner(pool.candidates);
        const ReconcileResult result =
            reconcile_pipeline(dummy_instance(), pool.candidates, nullptr);
        if (reference) CHECK(result.audit.winner_candidate == *reference);
    }
}

TEST_CASE("cluster output is a partition on random pools") {
    std::mt19937_64 rng(19);
    for (int i = 0; i < 300; ++i) {
        const auto pool = pool_support::random_pool(rng);
        check_partition(pool.candidates, cluster(pool.candidates));
    }
}

TEST_CASE("singleton pools pass through regardless of the judge") {
    auto judge = pool_support::reject_all_judge();
    std::vector<Candidate> pool = {make_candidate(0, 3)};
    const ReconcileResult result = reconcile_pipeline(dummy_instance(), pool, &judge);
    CHECK(result.final_sql == pool[0].sql);
}

TEST_CASE("all-error pools fall back to the greedy raw SQL") {
    auto judge = pool_support::approve_all_judge();
    std::vector<Candidate> pool = {make_candidate(0, 0, true), make_candidate(1, 0, true)};
    const ReconcileResult result = reconcile_pipeline(dummy_instance(), pool, &judge);
    CHECK(result.final_sql == pool[0].sql);
    CHECK(result.audit.fallback_error_pool);
}

TEST_CASE("audit records are deterministic for a fixed pool and judge") {
    std::mt19937_64 rng(20);
    const auto pool = pool_support::random_pool(rng);
    auto judge = pool_support::oracle_judge(pool.correct_result);

    const ReconcileResult a = reconcile_pipeline(dummy_instance(), pool.candidates, &judge);
    const ReconcileResult b = reconcile_pipeline(dummy_instance(), pool.candidates, &judge);
    CHECK(a.final_sql == b.final_sql);
    CHECK(a.audit.winner_candidate == b.audit.winner_candidate);
    REQUIRE(a.audit.decisions.size() == b.audit.decisions.size());
    for (std::size_t i = 0; i < a.audit.decisions.size(); ++i) {
        CHECK(a.audit.decisions[i].approved == b.audit.decisions[i].approved);
        CHECK(a.audit.decisions[i].rationale == b.audit.decisions[i].rationale);
    }
}

}  // TEST_SUITE

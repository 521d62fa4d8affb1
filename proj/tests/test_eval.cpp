#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "oracles.hpp"
#include "scblock/eval.hpp"

using namespace scblock;

namespace {

CandidateSet candidates_of(std::vector<std::pair<std::string, std::string>> pairs, int k = 1) {
    CandidateSet c;
    c.pairs = std::move(pairs);
    c.k = k;
    c.blocker = "test";
    return c;
}

GroundTruth gt_of(const std::vector<oracle::Pair>& pos, const std::vector<oracle::Pair>& neg,
                  Split split = Split::Test) {
    GroundTruth gt;
    for (const auto& [a, b] : pos)
        gt.pairs.push_back({a, b, true, split});
    for (const auto& [a, b] : neg)
        gt.pairs.push_back({a, b, false, split});
    return gt;
}

}  // namespace

TEST_CASE("pairs_completeness basics") {
    GroundTruth gt = gt_of({{"a1", "b1"}, {"a2", "b2"}}, {});
    CHECK(pairs_completeness(candidates_of({{"a1", "b1"}, {"a2", "b2"}, {"a3", "b3"}}), gt,
                             Split::Test) == 1.0);
    CHECK(pairs_completeness(candidates_of({{"a9", "b9"}}), gt, Split::Test) == 0.0);

    GroundTruth four = gt_of({{"a1", "b1"}, {"a2", "b2"}, {"a3", "b3"}, {"a4", "b4"}}, {});
    CHECK(pairs_completeness(candidates_of({{"a1", "b1"}, {"a2", "b2"}, {"a3", "b3"}}), four,
                             Split::Test) == 0.75);

    // empty G_P convention
    CHECK(pairs_completeness(candidates_of({}), GroundTruth{}, Split::Test) == 1.0);
}

TEST_CASE("pairs_quality basics") {
    GroundTruth gt = gt_of({{"a1", "b1"}, {"a2", "b2"}},
                           {{"a1", "b2"}, {"a1", "b3"}, {"a2", "b1"}, {"a2", "b3"},
                            {"a3", "b1"}, {"a3", "b2"}});
    // covers 2 positives and 6 negatives
    CandidateSet c = candidates_of({{"a1", "b1"}, {"a2", "b2"}, {"a1", "b2"}, {"a1", "b3"},
                                    {"a2", "b1"}, {"a2", "b3"}, {"a3", "b1"}, {"a3", "b2"}});
    CHECK(pairs_quality(c, gt, Split::Test) == 0.25);

    CHECK(pairs_quality(candidates_of({{"x", "y"}}), gt, Split::Test) == 0.0);
    CHECK(pairs_quality(candidates_of({{"a1", "b1"}, {"a2", "b2"}}), gt, Split::Test) == 1.0);
}

TEST_CASE("matching_metrics basics") {
    GroundTruth gt = gt_of({{"a1", "b1"}, {"a2", "b2"}, {"a3", "b3"}, {"a4", "b4"}},
                           {{"a1", "b2"}, {"a2", "b1"}});
    MatchSet m;
    m.pairs = {{"a1", "b1", 1.0, true},
               {"a2", "b2", 1.0, true},
               {"a3", "b3", 1.0, true},
               {"a1", "b2", 1.0, true}};
    auto mm = matching_metrics(m, gt, Split::Test);
    CHECK(mm.recall == 0.75);
    CHECK(mm.precision == 0.75);
    CHECK(mm.f1 == doctest::Approx(0.75));

    MatchSet perfect;
    perfect.pairs = {{"a1", "b1", 1, true}, {"a2", "b2", 1, true}, {"a3", "b3", 1, true},
                     {"a4", "b4", 1, true}};
    auto pm = matching_metrics(perfect, gt, Split::Test);
    CHECK(pm.precision == 1.0);
    CHECK(pm.recall == 1.0);
    CHECK(pm.f1 == 1.0);

    auto em = matching_metrics(MatchSet{}, gt, Split::Test);
    CHECK(em.precision == 0.0);
    CHECK(em.recall == 0.0);
    CHECK(em.f1 == 0.0);
}

TEST_CASE("metrics equal brute-force set arithmetic on 1000 random instances") {
    std::mt19937_64 rng(61);
    for (int trial = 0; trial < 1000; ++trial) {
        oracle::MetricInstance inst;
        std::set<std::pair<int, int>> used;
        auto random_pair = [&] {
            return oracle::Pair{"a" + std::to_string(rng() % 8),
                                "b" + std::to_string(rng() % 8)};
        };
        std::set<oracle::Pair> pos, neg, cand;
        std::size_t n_pos = rng() % 5;
        std::size_t n_neg = rng() % 5;
        std::size_t n_cand = rng() % 12;
        while (pos.size() < n_pos)
            pos.insert(random_pair());
        while (neg.size() < n_neg) {
            auto p = random_pair();
            if (!pos.count(p))
                neg.insert(p);
        }
        while (cand.size() < n_cand)
            cand.insert(random_pair());
        inst.positives.assign(pos.begin(), pos.end());
        inst.negatives.assign(neg.begin(), neg.end());
        inst.candidates.assign(cand.begin(), cand.end());

        GroundTruth gt = gt_of(inst.positives, inst.negatives);
        CandidateSet c = candidates_of({inst.candidates.begin(), inst.candidates.end()});

        CHECK(pairs_completeness(c, gt, Split::Test) == oracle::pc(inst));
        CHECK(pairs_quality(c, gt, Split::Test) == oracle::pq(inst));

        MatchSet m;
        for (const auto& [a, b] : inst.candidates)
            m.pairs.push_back({a, b, 1.0, true});
        auto mm = matching_metrics(m, gt, Split::Test);
        CHECK(mm.precision == oracle::precision(inst));
        CHECK(mm.recall == oracle::recall(inst));
        CHECK(mm.f1 == oracle::f1(inst));

        CHECK(mm.precision >= 0.0);
        CHECK(mm.precision <= 1.0);
        CHECK(mm.recall >= 0.0);
        CHECK(mm.recall <= 1.0);
    }
}

TEST_CASE("metrics split selection only sees the chosen split") {
    GroundTruth gt;
    gt.pairs = {{"a1", "b1", true, Split::Val}, {"a2", "b2", true, Split::Test}};
    CandidateSet c = candidates_of({{"a1", "b1"}});
    CHECK(pairs_completeness(c, gt, Split::Val) == 1.0);
    CHECK(pairs_completeness(c, gt, Split::Test) == 0.0);
}

namespace {

// Deterministic fake blocker: neighbour order fixed per query by a seeded
// shuffle, independent of the library search paths.
class FakeBlocker : public Blocker {
public:
    FakeBlocker(const Table& a, const Table& b, uint64_t seed)
        : table_a_(&a), table_b_(&b) {
        std::mt19937_64 rng(seed);
        for (const auto& q : a.records) {
            std::vector<std::string> order;
            for (const auto& r : b.records)
                order.push_back(r.id);
            std::shuffle(order.begin(), order.end(), rng);
            ranked_[q.id] = order;
        }
    }

    const std::string& name() const override { return name_; }
    const Table& query_table() const override { return *table_a_; }
    const Table& index_table() const override { return *table_b_; }
    bool queries_are_a() const override { return true; }
    std::vector<std::string> neighbours(const std::string& query_id, int k) const override {
        auto order = ranked_.at(query_id);
        if (order.size() > static_cast<std::size_t>(k))
            order.resize(static_cast<std::size_t>(k));
        return order;
    }

private:
    std::string name_ = "fake";
    const Table* table_a_;
    const Table* table_b_;
    std::map<std::string, std::vector<std::string>> ranked_;
};

Table plain_table(Source source, const char* prefix, std::size_t n) {
    Table t;
    t.source = source;
    t.schema = {"name"};
    for (std::size_t i = 0; i < n; ++i)
        t.records.push_back({prefix + std::to_string(i), source, {std::string("v")}});
    t.rebuild_index();
    return t;
}

}  // namespace

TEST_CASE("tune_k returns the minimal qualifying k against an exhaustive sweep") {
    std::mt19937_64 rng(62);
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t na = 4 + rng() % 6;
        std::size_t nb = 6 + rng() % 10;
        Table a = plain_table(Source::A, "a", na);
        Table b = plain_table(Source::B, "b", nb);
        FakeBlocker blocker(a, b, rng());

        GroundTruth gt;
        std::set<std::pair<std::string, std::string>> used;
        std::size_t n_val = 1 + rng() % 6;
        while (gt.pairs.size() < n_val) {
            std::string ia = "a" + std::to_string(rng() % na);
            std::string ib = "b" + std::to_string(rng() % nb);
            if (used.emplace(ia, ib).second)
                gt.pairs.push_back({ia, ib, true, Split::Val});
        }

        int k_max = 1 + static_cast<int>(rng() % static_cast<uint64_t>(nb));
        double threshold = 0.5 + 0.4 * (static_cast<double>(rng() % 100) / 100.0);

        TuneResult tuned = tune_k(blocker, gt, threshold, k_max);

        // exhaustive sweep over block(k)
        int expected = -1;
        double last_pc = 0.0;
        for (int k = 1; k <= k_max; ++k) {
            CandidateSet c = blocker.block(k);
            last_pc = pairs_completeness(c, gt, Split::Val);
            if (last_pc > threshold) {
                expected = k;
                break;
            }
        }
        if (expected > 0) {
            CHECK(tuned.reached_threshold);
            CHECK(tuned.k == expected);
        } else {
            CHECK_FALSE(tuned.reached_threshold);
            CHECK(tuned.k == k_max);
            CHECK(tuned.val_pc == doctest::Approx(last_pc));
        }
    }
}

TEST_CASE("tune_k with PC(1) == 1 returns k = 1") {
    Table a = plain_table(Source::A, "a", 3);
    Table b = plain_table(Source::B, "b", 3);
    FakeBlocker blocker(a, b, 1);
    GroundTruth gt;
    for (const auto& rec : a.records)
        gt.pairs.push_back({rec.id, blocker.neighbours(rec.id, 1)[0], true, Split::Val});
    TuneResult tuned = tune_k(blocker, gt, 0.995, 10);
    CHECK(tuned.k == 1);
    CHECK(tuned.reached_threshold);
    CHECK(tuned.val_pc == 1.0);
}

TEST_CASE("tune_k caps and flags when the threshold is unreachable") {
    Table a = plain_table(Source::A, "a", 3);
    Table b = plain_table(Source::B, "b", 8);
    FakeBlocker blocker(a, b, 2);
    GroundTruth gt;
    // partner deliberately at the last rank for one query
    auto last = blocker.neighbours("a0", 8).back();
    gt.pairs.push_back({"a0", last, true, Split::Val});
    TuneResult tuned = tune_k(blocker, gt, 0.995, 3);
    CHECK_FALSE(tuned.reached_threshold);
    CHECK(tuned.k == 3);
    CHECK(tuned.val_pc == 0.0);
}

TEST_CASE("PC is monotone in k for a nesting blocker") {
    std::mt19937_64 rng(63);
    Table a = plain_table(Source::A, "a", 6);
    Table b = plain_table(Source::B, "b", 12);
    FakeBlocker blocker(a, b, 7);
    GroundTruth gt;
    std::set<std::pair<std::string, std::string>> used;
    while (gt.pairs.size() < 8) {
        std::string ia = "a" + std::to_string(rng() % 6);
        std::string ib = "b" + std::to_string(rng() % 12);
        if (used.emplace(ia, ib).second)
            gt.pairs.push_back({ia, ib, true, Split::Val});
    }
    double previous = 0.0;
    for (int k = 1; k <= 12; ++k) {
        double pc = pairs_completeness(blocker.block(k), gt, Split::Val);
        CHECK(pc >= previous);
        previous = pc;
    }
    CHECK(previous == 1.0);
}

TEST_CASE("non-strict comparison accepts PC equal to the threshold") {
    Table a = plain_table(Source::A, "a", 2);
    Table b = plain_table(Source::B, "b", 4);
    FakeBlocker blocker(a, b, 3);
    GroundTruth gt;
    // one covered pair at rank 1, one never covered -> PC caps at 0.5
    gt.pairs.push_back({"a0", blocker.neighbours("a0", 1)[0], true, Split::Val});
    gt.pairs.push_back({"a1", blocker.neighbours("a1", 4).back(), true, Split::Val});

    TuneResult strict = tune_k(blocker, gt, 0.5, 2, true);
    CHECK_FALSE(strict.reached_threshold);
    TuneResult loose = tune_k(blocker, gt, 0.5, 2, false);
    CHECK(loose.reached_threshold);
    CHECK(loose.k == 1);
}

#include "scblock/eval.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace scblock {

namespace {

std::string pair_key(const std::string& id_a, const std::string& id_b) {
    return id_a + '\x1f' + id_b;
}

std::unordered_set<std::string> candidate_keys(const CandidateSet& candidates) {
    std::unordered_set<std::string> keys;
    keys.reserve(candidates.pairs.size() * 2);
    for (const auto& [id_a, id_b] : candidates.pairs)
        keys.insert(pair_key(id_a, id_b));
    return keys;
}

}  // namespace

double pairs_completeness(const CandidateSet& candidates, const GroundTruth& gt, Split split) {
    auto keys = candidate_keys(candidates);
    std::size_t total = 0, covered = 0;
    for (const auto& p : gt.pairs) {
        if (p.split != split || !p.positive)
            continue;
        ++total;
        if (keys.count(pair_key(p.id_a, p.id_b)))
            ++covered;
    }
    if (total == 0)
        return 1.0;
    return static_cast<double>(covered) / static_cast<double>(total);
}

double pairs_quality(const CandidateSet& candidates, const GroundTruth& gt, Split split) {
    auto keys = candidate_keys(candidates);
    std::size_t covered_pos = 0, covered_neg = 0;
    for (const auto& p : gt.pairs) {
        if (p.split != split)
            continue;
        if (keys.count(pair_key(p.id_a, p.id_b)))
            (p.positive ? covered_pos : covered_neg) += 1;
    }
    std::size_t denom = covered_pos + covered_neg;
    if (denom == 0)
        return 0.0;
    return static_cast<double>(covered_pos) / static_cast<double>(denom);
}

BlockingMetrics blocking_metrics(const CandidateSet& candidates, const GroundTruth& gt,
                                 Split split) {
    BlockingMetrics m;
    m.pc = pairs_completeness(candidates, gt, split);
    m.pq = pairs_quality(candidates, gt, split);
    m.candidate_count = candidates.pairs.size();
    m.k = candidates.k;
    return m;
}

MatchingMetrics matching_metrics(const MatchSet& matches, const GroundTruth& gt, Split split) {
    std::unordered_set<std::string> matched;
    for (const auto& p : matches.pairs)
        if (p.is_match)
            matched.insert(pair_key(p.id_a, p.id_b));

    std::size_t total_pos = 0, hit_pos = 0, hit_neg = 0;
    for (const auto& p : gt.pairs) {
        if (p.split != split)
            continue;
        bool in_m = matched.count(pair_key(p.id_a, p.id_b)) > 0;
        if (p.positive) {
            ++total_pos;
            if (in_m)
                ++hit_pos;
        } else if (in_m) {
            ++hit_neg;
        }
    }

    MatchingMetrics m;
    m.recall = total_pos ? static_cast<double>(hit_pos) / static_cast<double>(total_pos) : 0.0;
    std::size_t pdenom = hit_pos + hit_neg;
    m.precision = pdenom ? static_cast<double>(hit_pos) / static_cast<double>(pdenom) : 0.0;
    m.f1 = (m.precision + m.recall) > 0.0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    return m;
}

CandidateSet Blocker::block(int k) const {
    if (k < 1)
        throw std::invalid_argument("k must be >= 1");
    CandidateSet candidates;
    candidates.k = k;
    candidates.blocker = name();
    candidates.query_count = query_table().size();
    candidates.pairs.reserve(
        expected_candidate_count(query_table().size(), index_table().size(), k));
    for (const auto& rec : query_table().records) {
        for (auto& id : neighbours(rec.id, k)) {
            if (queries_are_a())
                candidates.pairs.emplace_back(rec.id, std::move(id));
            else
                candidates.pairs.emplace_back(std::move(id), rec.id);
        }
    }
    return candidates;
}

NnBlocker::NnBlocker(std::string name, const EmbeddingModel& model, const Table& table_a,
                     const Table& table_b)
    : name_(std::move(name)) {
    if (table_a.size() == 0 || table_b.size() == 0)
        throw std::invalid_argument("cannot block empty tables");
    queries_are_a_ = table_a.size() <= table_b.size();
    query_table_ = queries_are_a_ ? &table_a : &table_b;
    index_table_ = queries_are_a_ ? &table_b : &table_a;

    std::vector<std::string> ids;
    ids.reserve(index_table_->size());
    std::vector<std::vector<double>> rows;
    rows.reserve(index_table_->size());
    for (const auto& rec : index_table_->records) {
        ids.push_back(rec.id);
        rows.push_back(encode(model, serialize_record(rec, index_table_->schema).text));
    }
    index_ = build_index(std::move(ids), rows);

    query_embeddings_.reserve(query_table_->size());
    for (const auto& rec : query_table_->records)
        query_embeddings_.push_back(
            encode(model, serialize_record(rec, query_table_->schema).text));
}

std::vector<std::string> NnBlocker::neighbours(const std::string& query_id, int k) const {
    const auto& query = query_embeddings_[query_table_->index_of(query_id)];
    std::vector<std::string> out;
    for (auto& hit : index_.query_top_k(query, k))
        out.push_back(std::move(hit.id));
    return out;
}

Bm25Blocker::Bm25Blocker(const Table& table_a, const Table& table_b, Bm25Mode mode, double k1,
                         double b)
    : mode_(mode) {
    if (table_a.size() == 0 || table_b.size() == 0)
        throw std::invalid_argument("cannot block empty tables");
    name_ = mode == Bm25Mode::Whitespace ? "bm25" : "bm25-3";
    queries_are_a_ = table_a.size() <= table_b.size();
    query_table_ = queries_are_a_ ? &table_a : &table_b;
    index_table_ = queries_are_a_ ? &table_b : &table_a;

    index_ = Bm25Index::build(*index_table_, mode, k1, b);
    query_tokens_.reserve(query_table_->size());
    for (const auto& rec : query_table_->records)
        query_tokens_.push_back(
            bm25_tokens(serialize_record(rec, query_table_->schema).text, mode));
}

std::vector<std::string> Bm25Blocker::neighbours(const std::string& query_id, int k) const {
    const auto& tokens = query_tokens_[query_table_->index_of(query_id)];
    std::vector<std::string> out;
    for (auto& hit : index_.query_top_k(tokens, mode_, k))
        out.push_back(std::move(hit.id));
    return out;
}

TuneResult tune_k(const Blocker& blocker, const GroundTruth& gt, double pc_threshold,
                  int k_max, bool strict_exceeds) {
    if (k_max < 1)
        throw std::invalid_argument("k_max must be >= 1");

    auto positives = gt.select(Split::Val, true);
    auto qualifies = [&](double pc) {
        return strict_exceeds ? pc > pc_threshold : pc >= pc_threshold;
    };

    if (positives.empty()) {
        // empty validation G_P: PC is 1 by convention for every k
        TuneResult r{1, qualifies(1.0), 1.0};
        return r;
    }

    // Candidate nesting makes PC(k) a prefix count over per-pair ranks, so one
    // ranked list per involved query record suffices.
    std::unordered_map<std::string, std::vector<const GtPair*>> by_query;
    for (const auto* p : positives)
        by_query[blocker.queries_are_a() ? p->id_a : p->id_b].push_back(p);

    std::vector<std::size_t> covered_at(static_cast<std::size_t>(k_max) + 1, 0);
    for (const auto& [query_id, pairs] : by_query) {
        auto ranked = blocker.neighbours(query_id, k_max);
        std::unordered_map<std::string, std::size_t> rank_of;
        rank_of.reserve(ranked.size());
        for (std::size_t r = 0; r < ranked.size(); ++r)
            rank_of.emplace(ranked[r], r + 1);
        for (const auto* p : pairs) {
            const std::string& partner = blocker.queries_are_a() ? p->id_b : p->id_a;
            auto it = rank_of.find(partner);
            if (it != rank_of.end())
                ++covered_at[it->second];
        }
    }

    double total = static_cast<double>(positives.size());
    std::size_t covered = 0;
    double pc = 0.0;
    for (int k = 1; k <= k_max; ++k) {
        covered += covered_at[static_cast<std::size_t>(k)];
        pc = static_cast<double>(covered) / total;
        if (qualifies(pc))
            return TuneResult{k, true, pc};
    }
    return TuneResult{k_max, false, pc};
}

}  // namespace scblock

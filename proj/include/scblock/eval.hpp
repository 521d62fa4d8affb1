#pragma once

#include <memory>
#include <string>
#include <vector>

#include "scblock/bm25.hpp"
#include "scblock/datamodel.hpp"
#include "scblock/matcher.hpp"
#include "scblock/vecindex.hpp"

namespace scblock {

/// PC = |C ∩ G_P| / |G_P| over the chosen split; 1 when the split has no
/// positives.
double pairs_completeness(const CandidateSet& candidates, const GroundTruth& gt, Split split);

/// PQ = |C ∩ G_P| / (|C ∩ G_P| + |C ∩ G_N|) over the chosen split; 0 when no
/// labeled pair of the split is covered.
double pairs_quality(const CandidateSet& candidates, const GroundTruth& gt, Split split);

struct BlockingMetrics {
    double pc = 0.0;
    double pq = 0.0;
    std::size_t candidate_count = 0;
    int k = 0;
};

BlockingMetrics blocking_metrics(const CandidateSet& candidates, const GroundTruth& gt,
                                 Split split);

struct MatchingMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// Precision and recall against the split's labeled pairs; zero denominators
/// yield 0 by convention.
MatchingMetrics matching_metrics(const MatchSet& matches, const GroundTruth& gt, Split split);

/// Handle over a ready-to-query blocker: a fixed query/index table assignment
/// plus ranked per-query retrieval. block(k) materializes the candidate set.
class Blocker {
public:
    virtual ~Blocker() = default;

    virtual const std::string& name() const = 0;
    virtual const Table& query_table() const = 0;
    virtual const Table& index_table() const = 0;
    virtual bool queries_are_a() const = 0;

    /// Ranked index-table ids for one query record, best first.
    virtual std::vector<std::string> neighbours(const std::string& query_id, int k) const = 0;

    CandidateSet block(int k) const;
};

/// Exact cosine retrieval over a trained embedding model. Embeds both tables
/// and builds the flat index at construction.
class NnBlocker : public Blocker {
public:
    NnBlocker(std::string name, const EmbeddingModel& model, const Table& table_a,
              const Table& table_b);

    const std::string& name() const override { return name_; }
    const Table& query_table() const override { return *query_table_; }
    const Table& index_table() const override { return *index_table_; }
    bool queries_are_a() const override { return queries_are_a_; }
    std::vector<std::string> neighbours(const std::string& query_id, int k) const override;

private:
    std::string name_;
    const Table* query_table_;
    const Table* index_table_;
    bool queries_are_a_;
    VectorIndex index_;
    std::vector<std::vector<double>> query_embeddings_;  // by query table order
};

class Bm25Blocker : public Blocker {
public:
    Bm25Blocker(const Table& table_a, const Table& table_b, Bm25Mode mode, double k1 = 1.2,
                double b = 0.75);

    const std::string& name() const override { return name_; }
    const Table& query_table() const override { return *query_table_; }
    const Table& index_table() const override { return *index_table_; }
    bool queries_are_a() const override { return queries_are_a_; }
    std::vector<std::string> neighbours(const std::string& query_id, int k) const override;

private:
    std::string name_;
    const Table* query_table_;
    const Table* index_table_;
    bool queries_are_a_;
    Bm25Mode mode_;
    Bm25Index index_;
    std::vector<std::vector<std::string>> query_tokens_;  // by query table order
};

struct TuneResult {
    int k = 0;
    bool reached_threshold = false;
    double val_pc = 0.0;  // PC at the returned k
};

/// Smallest k in 1..k_max whose validation PC exceeds pc_threshold
/// (strictly by default, >= when strict_exceeds is false). Returns k_max with
/// reached_threshold=false when no k qualifies.
TuneResult tune_k(const Blocker& blocker, const GroundTruth& gt, double pc_threshold = 0.995,
                  int k_max = 50, bool strict_exceeds = true);

}  // namespace scblock

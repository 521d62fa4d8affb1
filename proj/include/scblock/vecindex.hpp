#pragma once

#include <string>
#include <vector>

#include "scblock/datamodel.hpp"
#include "scblock/embedder.hpp"

namespace scblock {

struct ScoredId {
    std::string id;
    double score = 0.0;
};

/// Flat exact-search index over unit-norm embeddings. Immutable once built.
class VectorIndex {
public:
    VectorIndex() = default;

    std::size_t size() const { return ids_.size(); }
    std::size_t dim() const { return dim_; }
    const std::vector<std::string>& ids() const { return ids_; }

    friend VectorIndex build_index(std::vector<std::string> ids,
                                   const std::vector<std::vector<double>>& embeddings);

    /// Exact top-k by cosine, descending; exact ties broken by ascending id.
    std::vector<ScoredId> query_top_k(const std::vector<double>& query, int k) const;

private:
    std::size_t dim_ = 0;
    std::vector<std::string> ids_;
    std::vector<double> matrix_;  // row-major, one unit row per id
};

VectorIndex build_index(std::vector<std::string> ids,
                        const std::vector<std::vector<double>>& embeddings);

/// Blocker output pairs, always oriented (A record, B record).
struct CandidateSet {
    std::vector<std::pair<std::string, std::string>> pairs;
    int k = 0;
    std::string blocker;
    std::size_t query_count = 0;  // |Q_A|
};

/// |C| = |Q_A| * min(k, |I_B|): the expected candidate-set size law.
std::size_t expected_candidate_count(std::size_t query_count, std::size_t index_count,
                                     int k);

/// Embeds both tables, uses the smaller one as the query table (ties go to A)
/// and retrieves each query's top-k neighbours from the other table's index.
CandidateSet block_nn(const EmbeddingModel& model, const Table& table_a,
                      const Table& table_b, int k);

void save_candidates(const CandidateSet& candidates, const std::string& path);
CandidateSet load_candidates(const std::string& path);

}  // namespace scblock

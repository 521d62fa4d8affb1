#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scblock/datamodel.hpp"
#include "scblock/embedder.hpp"
#include "scblock/vecindex.hpp"

namespace scblock {

/// Logistic classifier over pair features, trained with binary cross-entropy
/// while the encoder stays frozen.
struct MatchHead {
    std::vector<double> weights;  // dimension 4D
    double bias = 0.0;
    double threshold = 0.5;  // decision rule: score >= threshold
};

struct MatchHeadConfig {
    int epochs = 500;
    double learning_rate = 0.5;
    double threshold = 0.5;
};

struct ScoredPair {
    std::string id_a;
    std::string id_b;
    double score = 0.0;
    bool is_match = false;
};

struct MatchSet {
    std::vector<ScoredPair> pairs;  // every candidate pair, scored
    std::string matcher;

    std::size_t match_count() const;
};

/// (z_x, z_y, |z_x - z_y|, z_x * z_y) concatenated to a 4D-dim vector.
std::vector<double> pair_features(const std::vector<double>& z_x,
                                  const std::vector<double>& z_y);

/// Fits the head on train-split pairs by full-batch gradient descent on BCE.
/// Appends the per-epoch loss to *loss_history when given.
MatchHead train_match_head(const EmbeddingModel& model, const Table& table_a,
                           const Table& table_b, const GroundTruth& gt,
                           const MatchHeadConfig& config,
                           std::vector<double>* loss_history = nullptr);

MatchSet apply_matcher(const MatchHead& head, const EmbeddingModel& model,
                       const Table& table_a, const Table& table_b,
                       const CandidateSet& candidates);

/// Training-free baseline: match iff cosine(z_x, z_y) >= theta.
MatchSet threshold_matcher(const EmbeddingModel& model, const Table& table_a,
                           const Table& table_b, const CandidateSet& candidates, double theta);

void save_matches(const MatchSet& matches, const std::string& path);

}  // namespace scblock

#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "scblock/datamodel.hpp"
#include "scblock/labeling.hpp"

namespace scblock {

/// Lowercases and splits on runs of whitespace.
std::vector<std::string> tokenize(const std::string& text);

/// Token -> dense index map with a reserved out-of-vocabulary index. Built
/// only from training corpora; indices assigned in sorted token order so the
/// mapping is independent of input order.
class Vocabulary {
public:
    Vocabulary() = default;

    static Vocabulary build(const std::vector<std::vector<std::string>>& token_lists,
                            std::size_t min_count);

    int32_t index_of(const std::string& token) const;
    int32_t oov_index() const { return static_cast<int32_t>(tokens_.size()); }
    std::size_t size() const { return tokens_.size(); }
    const std::vector<std::string>& tokens() const { return tokens_; }

private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, int32_t> index_;
};

struct TrainingConfig {
    enum class Mode { Supervised, SelfSupervised };

    double temperature = 0.07;
    int epochs = 20;
    double learning_rate = 0.05;
    int batch_size = 256;  // N records per batch; duplication yields 2N items
    int dim = 64;
    uint64_t seed = 1;
    Mode mode = Mode::Supervised;

    void validate() const;
    std::string canonical_string() const;
    std::string hash() const;
};

/// Vocabulary plus a trainable (vocab size + 1) x D embedding table; the
/// extra row embeds out-of-vocabulary tokens. Records encode as the L2
/// normalized mean of their token rows.
struct EmbeddingModel {
    Vocabulary vocab;
    int dim = 0;
    uint64_t seed = 0;
    std::string config_hash;
    std::vector<double> table;  // row-major, (vocab.size() + 1) rows

    const double* row(int32_t token_index) const { return table.data() + token_index * dim; }
    double* row(int32_t token_index) { return table.data() + token_index * dim; }
    std::size_t row_count() const { return vocab.size() + 1; }

    std::vector<int32_t> token_ids(const std::string& text) const;
};

EmbeddingModel init_model(Vocabulary vocab, const TrainingConfig& config);

/// Unit-norm record embedding. Empty token lists and zero pooled vectors fall
/// back to the first basis vector.
std::vector<double> encode(const EmbeddingModel& model, const std::string& record_text);
std::vector<double> encode_token_ids(const EmbeddingModel& model,
                                     const std::vector<int32_t>& token_ids);

void save_model(const EmbeddingModel& model, const std::string& path);
EmbeddingModel load_model(const std::string& path);

struct BatchItem {
    std::string record_id;
    std::vector<int32_t> token_ids;
    int64_t label = 0;
};

struct Batch {
    Source source = Source::A;
    std::vector<BatchItem> items;  // 2N entries; every label occurs >= 2 times
};

/// Removes one uniformly chosen token when the list has at least two entries.
std::vector<std::string> token_drop_augment(const std::vector<std::string>& tokens,
                                            std::mt19937_64& rng);
std::vector<int32_t> token_drop_augment_ids(const std::vector<int32_t>& token_ids,
                                            std::mt19937_64& rng);

/// Samples N corpus entries (without replacement unless N exceeds the corpus,
/// which falls back to replacement and sets *sampled_with_replacement) from
/// corpus A on even steps and corpus B on odd steps, then duplicates every
/// entry. Supervised batches carry entity labels on verbatim copies;
/// self-supervised batches carry fresh singleton labels and both copies get
/// token-drop augmentation. The model supplies the token-index mapping.
Batch build_training_batch(const EmbeddingModel& model, const Table& table_a,
                           const Table& table_b, const SourceAwareCorpus& corpus_a,
                           const SourceAwareCorpus& corpus_b, const TrainingConfig& config,
                           std::mt19937_64& rng, std::size_t step,
                           bool* sampled_with_replacement = nullptr);

struct SupConResult {
    double loss = 0.0;
    std::vector<double> grad;  // d loss / d embeddings, same shape as input
};

/// Supervised contrastive loss over row-major embeddings (rows x dim) and the
/// exact analytic gradient treating rows as free vectors. Every label must
/// occur at least twice.
SupConResult supcon_loss(const std::vector<double>& embeddings, std::size_t rows,
                         std::size_t dim, const std::vector<int64_t>& labels,
                         double temperature);

struct TrainResult {
    EmbeddingModel model;
    double training_seconds = 0.0;  // blocker training time (BTT)
    double final_epoch_loss = 0.0;
    std::vector<double> epoch_losses;
    std::vector<std::string> warnings;
};

/// Gradient descent on supcon_loss, back-propagated through L2 normalization,
/// mean pooling and the token lookup. Deterministic for a fixed config.
TrainResult train_blocker(const Table& table_a, const Table& table_b,
                          const SourceAwareCorpus& corpus_a,
                          const SourceAwareCorpus& corpus_b, const TrainingConfig& config);

}  // namespace scblock

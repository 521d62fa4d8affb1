#include "scblock/embedder.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace scblock {

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char ch : text) {
        unsigned char c = static_cast<unsigned char>(ch);
        if (std::isspace(c)) {
            if (!current.empty()) {
                tokens.push_back(std::move(current));
                current.clear();
            }
        } else {
            current.push_back(static_cast<char>(std::tolower(c)));
        }
    }
    if (!current.empty())
        tokens.push_back(std::move(current));
    return tokens;
}

Vocabulary Vocabulary::build(const std::vector<std::vector<std::string>>& token_lists,
                             std::size_t min_count) {
    if (token_lists.empty())
        throw std::invalid_argument("vocabulary: empty corpora");
    std::map<std::string, std::size_t> counts;
    for (const auto& list : token_lists)
        for (const auto& token : list)
            ++counts[token];

    Vocabulary vocab;
    for (const auto& [token, count] : counts) {
        if (count >= min_count) {
            vocab.index_.emplace(token, static_cast<int32_t>(vocab.tokens_.size()));
            vocab.tokens_.push_back(token);
        }
    }
    return vocab;
}

int32_t Vocabulary::index_of(const std::string& token) const {
    auto it = index_.find(token);
    return it == index_.end() ? oov_index() : it->second;
}

void TrainingConfig::validate() const {
    if (temperature <= 0.0)
        throw std::invalid_argument("temperature must be positive");
    if (epochs < 1)
        throw std::invalid_argument("epochs must be >= 1");
    if (batch_size < 1)
        throw std::invalid_argument("batch size must be >= 1");
    if (dim < 2)
        throw std::invalid_argument("embedding dimension must be >= 2");
    if (!(learning_rate > 0.0))
        throw std::invalid_argument("learning rate must be positive");
}

std::string TrainingConfig::canonical_string() const {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "T=%.17g;epochs=%d;lr=%.17g;N=%d;D=%d;seed=%llu;mode=%s",
                  temperature, epochs, learning_rate, batch_size, dim,
                  static_cast<unsigned long long>(seed),
                  mode == Mode::Supervised ? "supervised" : "self_supervised");
    return buf;
}

std::string TrainingConfig::hash() const {
    // FNV-1a 64
    uint64_t h = 14695981039346656037ull;
    for (unsigned char c : canonical_string()) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

EmbeddingModel init_model(Vocabulary vocab, const TrainingConfig& config) {
    config.validate();
    EmbeddingModel model;
    model.vocab = std::move(vocab);
    model.dim = config.dim;
    model.seed = config.seed;
    model.config_hash = config.hash();
    model.table.resize(model.row_count() * model.dim);
    std::mt19937_64 rng(config.seed);
    const double half = 0.5 / config.dim;
    std::uniform_real_distribution<double> dist(-half, half);
    for (double& v : model.table)
        v = dist(rng);
    return model;
}

std::vector<int32_t> EmbeddingModel::token_ids(const std::string& text) const {
    std::vector<int32_t> ids;
    for (const auto& token : tokenize(text))
        ids.push_back(vocab.index_of(token));
    return ids;
}

namespace {

void fallback_unit_vector(std::vector<double>& v) {
    std::fill(v.begin(), v.end(), 0.0);
    v[0] = 1.0;
}

}  // namespace

std::vector<double> encode_token_ids(const EmbeddingModel& model,
                                     const std::vector<int32_t>& token_ids) {
    std::vector<double> pooled(model.dim, 0.0);
    if (token_ids.empty()) {
        fallback_unit_vector(pooled);
        return pooled;
    }
    for (int32_t id : token_ids) {
        const double* r = model.row(id);
        for (int d = 0; d < model.dim; ++d)
            pooled[d] += r[d];
    }
    double inv_len = 1.0 / static_cast<double>(token_ids.size());
    double norm_sq = 0.0;
    for (int d = 0; d < model.dim; ++d) {
        pooled[d] *= inv_len;
        norm_sq += pooled[d] * pooled[d];
    }
    double norm = std::sqrt(norm_sq);
    if (norm < 1e-12) {
        fallback_unit_vector(pooled);
        return pooled;
    }
    for (int d = 0; d < model.dim; ++d)
        pooled[d] /= norm;
    return pooled;
}

std::vector<double> encode(const EmbeddingModel& model, const std::string& record_text) {
    return encode_token_ids(model, model.token_ids(record_text));
}

void save_model(const EmbeddingModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write model file: " + path);
    out << "scblock-model v1\n";
    out << "dim " << model.dim << "\n";
    out << "seed " << model.seed << "\n";
    out << "config_hash " << model.config_hash << "\n";
    out << "vocab " << model.vocab.size() << "\n";
    for (const auto& token : model.vocab.tokens())
        out << token << "\n";
    char buf[40];
    for (std::size_t r = 0; r < model.row_count(); ++r) {
        for (int d = 0; d < model.dim; ++d) {
            std::snprintf(buf, sizeof(buf), "%a", model.table[r * model.dim + d]);
            out << buf << (d + 1 == model.dim ? "\n" : " ");
        }
    }
}

EmbeddingModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open model file: " + path);
    std::string line;
    if (!std::getline(in, line) || line != "scblock-model v1")
        throw std::runtime_error(path + ": not a model file");

    EmbeddingModel model;
    std::size_t vocab_size = 0;
    std::string key;
    in >> key >> model.dim;
    if (key != "dim" || model.dim < 2)
        throw std::runtime_error(path + ": bad dim line");
    in >> key >> model.seed;
    if (key != "seed")
        throw std::runtime_error(path + ": bad seed line");
    in >> key >> model.config_hash;
    if (key != "config_hash")
        throw std::runtime_error(path + ": bad config_hash line");
    in >> key >> vocab_size;
    if (key != "vocab")
        throw std::runtime_error(path + ": bad vocab line");

    std::vector<std::vector<std::string>> lists(1);
    lists[0].reserve(vocab_size);
    for (std::size_t i = 0; i < vocab_size; ++i) {
        std::string token;
        if (!(in >> token))
            throw std::runtime_error(path + ": truncated vocabulary");
        lists[0].push_back(std::move(token));
    }
    model.vocab = vocab_size ? Vocabulary::build(lists, 1) : Vocabulary();
    if (model.vocab.size() != vocab_size)
        throw std::runtime_error(path + ": vocabulary contains duplicate tokens");

    model.table.resize(model.row_count() * model.dim);
    std::string value;
    for (double& v : model.table) {
        if (!(in >> value))
            throw std::runtime_error(path + ": truncated embedding table");
        v = std::strtod(value.c_str(), nullptr);
    }
    return model;
}

std::vector<std::string> token_drop_augment(const std::vector<std::string>& tokens,
                                            std::mt19937_64& rng) {
    if (tokens.size() < 2)
        return tokens;
    std::uniform_int_distribution<std::size_t> pick(0, tokens.size() - 1);
    std::size_t drop = pick(rng);
    std::vector<std::string> out;
    out.reserve(tokens.size() - 1);
    for (std::size_t i = 0; i < tokens.size(); ++i)
        if (i != drop)
            out.push_back(tokens[i]);
    return out;
}

std::vector<int32_t> token_drop_augment_ids(const std::vector<int32_t>& token_ids,
                                            std::mt19937_64& rng) {
    if (token_ids.size() < 2)
        return token_ids;
    std::uniform_int_distribution<std::size_t> pick(0, token_ids.size() - 1);
    std::size_t drop = pick(rng);
    std::vector<int32_t> out;
    out.reserve(token_ids.size() - 1);
    for (std::size_t i = 0; i < token_ids.size(); ++i)
        if (i != drop)
            out.push_back(token_ids[i]);
    return out;
}

namespace {

const Record& corpus_record(const Table& table_a, const Table& table_b, const CorpusEntry& e) {
    const Table& t = e.source == Source::A ? table_a : table_b;
    return t.records[e.record_index];
}

std::vector<int32_t> entry_token_ids(const EmbeddingModel& model, const Table& table_a,
                                     const Table& table_b, const CorpusEntry& e) {
    const Table& t = e.source == Source::A ? table_a : table_b;
    const Record& rec = t.records[e.record_index];
    return model.token_ids(serialize_record(rec, t.schema).text);
}

// Duplicates every sampled entry. Supervised copies are verbatim and carry the
// entity label; self-supervised copies get fresh singleton labels and
// independent token-drop augmentation.
Batch materialize_batch(const Table& table_a, const Table& table_b,
                        const SourceAwareCorpus& corpus, const std::vector<std::size_t>& picks,
                        const std::vector<std::vector<int32_t>>& entry_ids,
                        const TrainingConfig& config, std::mt19937_64& rng) {
    Batch batch;
    batch.source = corpus.side;
    batch.items.reserve(picks.size() * 2);
    int64_t fresh_label = 0;
    for (std::size_t pick : picks) {
        const CorpusEntry& entry = corpus.entries[pick];
        const Record& rec = corpus_record(table_a, table_b, entry);
        const std::vector<int32_t>& ids = entry_ids[pick];
        if (config.mode == TrainingConfig::Mode::Supervised) {
            batch.items.push_back({rec.id, ids, entry.label});
            batch.items.push_back({rec.id, ids, entry.label});
        } else {
            int64_t label = fresh_label++;
            batch.items.push_back({rec.id, token_drop_augment_ids(ids, rng), label});
            batch.items.push_back({rec.id, token_drop_augment_ids(ids, rng), label});
        }
    }
    return batch;
}

}  // namespace

Batch build_training_batch(const EmbeddingModel& model, const Table& table_a,
                           const Table& table_b, const SourceAwareCorpus& corpus_a,
                           const SourceAwareCorpus& corpus_b, const TrainingConfig& config,
                           std::mt19937_64& rng, std::size_t step,
                           bool* sampled_with_replacement) {
    config.validate();
    const SourceAwareCorpus& corpus = (step % 2 == 0) ? corpus_a : corpus_b;
    if (corpus.entries.empty())
        throw std::invalid_argument("cannot build a batch from an empty corpus");

    std::size_t n = static_cast<std::size_t>(config.batch_size);
    std::vector<std::size_t> picks;
    picks.reserve(n);
    bool with_replacement = n > corpus.entries.size();
    if (sampled_with_replacement)
        *sampled_with_replacement = with_replacement;
    if (with_replacement) {
        std::uniform_int_distribution<std::size_t> pick(0, corpus.entries.size() - 1);
        for (std::size_t i = 0; i < n; ++i)
            picks.push_back(pick(rng));
    } else {
        std::vector<std::size_t> order(corpus.entries.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        // partial Fisher-Yates over the first n positions
        for (std::size_t i = 0; i < n; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, order.size() - 1);
            std::swap(order[i], order[pick(rng)]);
            picks.push_back(order[i]);
        }
    }

    std::vector<std::vector<int32_t>> entry_ids(corpus.entries.size());
    for (std::size_t pick : picks)
        if (entry_ids[pick].empty())
            entry_ids[pick] = entry_token_ids(model, table_a, table_b, corpus.entries[pick]);
    return materialize_batch(table_a, table_b, corpus, picks, entry_ids, config, rng);
}

SupConResult supcon_loss(const std::vector<double>& embeddings, std::size_t rows,
                         std::size_t dim, const std::vector<int64_t>& labels,
                         double temperature) {
    if (temperature <= 0.0)
        throw std::invalid_argument("temperature must be positive");
    if (labels.size() != rows || embeddings.size() != rows * dim)
        throw std::invalid_argument("embedding/label shape mismatch");

    SupConResult result;
    result.grad.assign(rows * dim, 0.0);
    if (rows == 0)
        return result;

    std::vector<std::size_t> positive_count(rows, 0);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < rows; ++j)
            if (j != i && labels[j] == labels[i])
                ++positive_count[i];
        if (positive_count[i] == 0)
            throw std::invalid_argument("label of row " + std::to_string(i) +
                                        " occurs only once; P(i) is empty");
    }

    const double* z = embeddings.data();
    std::vector<double> scores(rows * rows, 0.0);  // z_i . z_j / T
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = i + 1; j < rows; ++j) {
            double dot = 0.0;
            for (std::size_t d = 0; d < dim; ++d)
                dot += z[i * dim + d] * z[j * dim + d];
            double s = dot / temperature;
            scores[i * rows + j] = s;
            scores[j * rows + i] = s;
        }
    }

    // W_ij = softmax_ij - [y_i == y_j]/|P(i)| over j != i; grad = (W + W^T) Z / T
    std::vector<double> w(rows * rows, 0.0);
    double loss = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
        double row_max = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < rows; ++j)
            if (j != i)
                row_max = std::max(row_max, scores[i * rows + j]);
        double denom = 0.0;
        for (std::size_t j = 0; j < rows; ++j)
            if (j != i)
                denom += std::exp(scores[i * rows + j] - row_max);
        double lse = row_max + std::log(denom);

        double inv_p = 1.0 / static_cast<double>(positive_count[i]);
        for (std::size_t j = 0; j < rows; ++j) {
            if (j == i)
                continue;
            double softmax = std::exp(scores[i * rows + j] - lse);
            double positive = labels[j] == labels[i] ? inv_p : 0.0;
            w[i * rows + j] = softmax - positive;
            if (positive > 0.0)
                loss += positive * (lse - scores[i * rows + j]);
        }
    }
    result.loss = loss;

    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < rows; ++j) {
            double coeff = (w[i * rows + j] + w[j * rows + i]) / temperature;
            if (coeff == 0.0)
                continue;
            for (std::size_t d = 0; d < dim; ++d)
                result.grad[i * dim + d] += coeff * z[j * dim + d];
        }
    }
    return result;
}

TrainResult train_blocker(const Table& table_a, const Table& table_b,
                          const SourceAwareCorpus& corpus_a,
                          const SourceAwareCorpus& corpus_b, const TrainingConfig& config) {
    config.validate();
    auto start = std::chrono::steady_clock::now();
    if (corpus_a.entries.empty() || corpus_b.entries.empty())
        throw std::invalid_argument("training corpora must be non-empty");

    TrainResult result;

    // Vocabulary over the serialized training corpora only.
    std::vector<std::vector<std::string>> token_lists;
    token_lists.reserve(corpus_a.entries.size() + corpus_b.entries.size());
    for (const auto* corpus : {&corpus_a, &corpus_b}) {
        for (const auto& entry : corpus->entries) {
            const Table& t = entry.source == Source::A ? table_a : table_b;
            const Record& rec = t.records[entry.record_index];
            token_lists.push_back(tokenize(serialize_record(rec, t.schema).text));
        }
    }
    Vocabulary vocab = Vocabulary::build(token_lists, 1);
    if (vocab.size() == 0)
        throw std::runtime_error("training vocabulary is empty");

    EmbeddingModel model = init_model(std::move(vocab), config);

    // Token-id sequences per corpus entry, computed once.
    auto ids_for = [&](const SourceAwareCorpus& corpus) {
        std::vector<std::vector<int32_t>> ids;
        ids.reserve(corpus.entries.size());
        for (const auto& entry : corpus.entries)
            ids.push_back(entry_token_ids(model, table_a, table_b, entry));
        return ids;
    };
    std::vector<std::vector<int32_t>> ids_a = ids_for(corpus_a);
    std::vector<std::vector<int32_t>> ids_b = ids_for(corpus_b);

    std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ull);
    std::size_t n = static_cast<std::size_t>(config.batch_size);
    std::size_t dim = static_cast<std::size_t>(config.dim);

    std::vector<double> table_grad(model.table.size(), 0.0);
    std::vector<uint32_t> touch_stamp(model.row_count(), 0);
    std::vector<int32_t> touched;
    uint32_t stamp = 0;

    std::vector<std::size_t> order_a(corpus_a.entries.size());
    std::vector<std::size_t> order_b(corpus_b.entries.size());
    std::iota(order_a.begin(), order_a.end(), std::size_t{0});
    std::iota(order_b.begin(), order_b.end(), std::size_t{0});

    double epoch_loss = 0.0;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::shuffle(order_a.begin(), order_a.end(), rng);
        std::shuffle(order_b.begin(), order_b.end(), rng);
        std::size_t next_a = 0, next_b = 0, step = 0;
        epoch_loss = 0.0;

        while (next_a < order_a.size() || next_b < order_b.size()) {
            // alternate corpora A/B per step while both have records left
            bool use_a;
            if (next_a < order_a.size() && next_b < order_b.size())
                use_a = step % 2 == 0;
            else
                use_a = next_a < order_a.size();
            ++step;

            const SourceAwareCorpus& corpus = use_a ? corpus_a : corpus_b;
            const auto& entry_ids = use_a ? ids_a : ids_b;
            auto& order = use_a ? order_a : order_b;
            std::size_t& next = use_a ? next_a : next_b;

            std::size_t take = std::min(n, order.size() - next);
            std::vector<std::size_t> picks(order.begin() + next, order.begin() + next + take);
            next += take;
            if (picks.size() < 1)
                continue;

            Batch batch =
                materialize_batch(table_a, table_b, corpus, picks, entry_ids, config, rng);
            std::size_t m = batch.items.size();

            // forward: pooled embeddings and normalization bookkeeping
            std::vector<double> z(m * dim, 0.0);
            std::vector<double> norms(m, 0.0);
            std::vector<int64_t> labels(m);
            for (std::size_t i = 0; i < m; ++i) {
                labels[i] = batch.items[i].label;
                const auto& ids = batch.items[i].token_ids;
                double* zi = z.data() + i * dim;
                if (ids.empty()) {
                    zi[0] = 1.0;
                    norms[i] = 0.0;  // fallback row, no gradient
                    continue;
                }
                for (int32_t id : ids) {
                    const double* r = model.row(id);
                    for (std::size_t d = 0; d < dim; ++d)
                        zi[d] += r[d];
                }
                double inv_len = 1.0 / static_cast<double>(ids.size());
                double norm_sq = 0.0;
                for (std::size_t d = 0; d < dim; ++d) {
                    zi[d] *= inv_len;
                    norm_sq += zi[d] * zi[d];
                }
                double norm = std::sqrt(norm_sq);
                if (norm < 1e-12) {
                    std::fill(zi, zi + dim, 0.0);
                    zi[0] = 1.0;
                    norms[i] = 0.0;
                } else {
                    for (std::size_t d = 0; d < dim; ++d)
                        zi[d] /= norm;
                    norms[i] = norm;
                }
            }

            SupConResult sc = supcon_loss(z, m, dim, labels, config.temperature);
            if (!std::isfinite(sc.loss)) {
                std::ostringstream msg;
                msg << "non-finite loss at epoch " << epoch << " step " << step
                    << " (batch of " << m << " from corpus "
                    << to_string(corpus.side) << ")";
                throw std::runtime_error(msg.str());
            }
            epoch_loss += sc.loss;

            // backward through normalization and mean pooling into the table
            ++stamp;
            for (std::size_t i = 0; i < m; ++i) {
                if (norms[i] == 0.0)
                    continue;  // fallback embedding is constant
                const double* zi = z.data() + i * dim;
                const double* gi = sc.grad.data() + i * dim;
                double g_dot_z = 0.0;
                for (std::size_t d = 0; d < dim; ++d)
                    g_dot_z += gi[d] * zi[d];
                const auto& ids = batch.items[i].token_ids;
                double scale = 1.0 / (norms[i] * static_cast<double>(ids.size()));
                for (int32_t id : ids) {
                    double* gr = table_grad.data() + static_cast<std::size_t>(id) * dim;
                    if (touch_stamp[id] != stamp) {
                        touch_stamp[id] = stamp;
                        touched.push_back(id);
                    }
                    for (std::size_t d = 0; d < dim; ++d)
                        gr[d] += (gi[d] - g_dot_z * zi[d]) * scale;
                }
            }

            for (int32_t id : touched) {
                double* row = model.row(id);
                double* gr = table_grad.data() + static_cast<std::size_t>(id) * dim;
                for (std::size_t d = 0; d < dim; ++d) {
                    row[d] -= config.learning_rate * gr[d];
                    gr[d] = 0.0;
                }
            }
            touched.clear();
        }
        result.epoch_losses.push_back(epoch_loss);
    }

    result.model = std::move(model);
    result.final_epoch_loss = epoch_loss;
    result.training_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

}  // namespace scblock

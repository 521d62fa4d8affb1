#include "scblock/matcher.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <unordered_map>

#include "scblock/csv.hpp"

namespace scblock {

std::size_t MatchSet::match_count() const {
    std::size_t n = 0;
    for (const auto& p : pairs)
        n += p.is_match ? 1 : 0;
    return n;
}

std::vector<double> pair_features(const std::vector<double>& z_x,
                                  const std::vector<double>& z_y) {
    if (z_x.size() != z_y.size())
        throw std::invalid_argument("pair_features: dimension mismatch");
    std::size_t d = z_x.size();
    std::vector<double> f;
    f.reserve(4 * d);
    f.insert(f.end(), z_x.begin(), z_x.end());
    f.insert(f.end(), z_y.begin(), z_y.end());
    for (std::size_t i = 0; i < d; ++i)
        f.push_back(std::fabs(z_x[i] - z_y[i]));
    for (std::size_t i = 0; i < d; ++i)
        f.push_back(z_x[i] * z_y[i]);
    return f;
}

namespace {

double sigmoid(double x) {
    return 1.0 / (1.0 + std::exp(-x));
}

// numerically stable -[y log s + (1-y) log(1-s)] for logit x
double bce_from_logit(double logit, double y) {
    double softplus = std::max(logit, 0.0) + std::log1p(std::exp(-std::fabs(logit)));
    return softplus - y * logit;
}

class EmbeddingCache {
public:
    EmbeddingCache(const EmbeddingModel& model, const Table& table_a, const Table& table_b)
        : model_(model), table_a_(table_a), table_b_(table_b) {}

    const std::vector<double>& get(Source source, const std::string& id) {
        auto& cache = source == Source::A ? cache_a_ : cache_b_;
        auto it = cache.find(id);
        if (it != cache.end())
            return it->second;
        const Table& t = source == Source::A ? table_a_ : table_b_;
        const Record& rec = t.record(id);  // throws on unknown id
        auto z = encode(model_, serialize_record(rec, t.schema).text);
        return cache.emplace(id, std::move(z)).first->second;
    }

private:
    const EmbeddingModel& model_;
    const Table& table_a_;
    const Table& table_b_;
    std::unordered_map<std::string, std::vector<double>> cache_a_;
    std::unordered_map<std::string, std::vector<double>> cache_b_;
};

}  // namespace

MatchHead train_match_head(const EmbeddingModel& model, const Table& table_a,
                           const Table& table_b, const GroundTruth& gt,
                           const MatchHeadConfig& config,
                           std::vector<double>* loss_history) {
    if (config.epochs < 1 || !(config.learning_rate > 0.0))
        throw std::invalid_argument("match head: bad training config");

    EmbeddingCache cache(model, table_a, table_b);
    std::vector<std::vector<double>> features;
    std::vector<double> targets;
    std::size_t positives = 0, negatives = 0;
    for (const auto& p : gt.pairs) {
        if (p.split != Split::Train)
            continue;
        features.push_back(
            pair_features(cache.get(Source::A, p.id_a), cache.get(Source::B, p.id_b)));
        targets.push_back(p.positive ? 1.0 : 0.0);
        (p.positive ? positives : negatives) += 1;
    }
    if (positives == 0 || negatives == 0)
        throw std::invalid_argument(
            "match head: training needs at least one positive and one negative pair");

    std::size_t fdim = features.front().size();
    MatchHead head;
    head.weights.assign(fdim, 0.0);
    head.threshold = config.threshold;

    double inv_m = 1.0 / static_cast<double>(features.size());
    std::vector<double> grad(fdim, 0.0);
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::fill(grad.begin(), grad.end(), 0.0);
        double grad_bias = 0.0;
        double loss = 0.0;
        for (std::size_t i = 0; i < features.size(); ++i) {
            const auto& f = features[i];
            double logit = head.bias;
            for (std::size_t d = 0; d < fdim; ++d)
                logit += head.weights[d] * f[d];
            loss += bce_from_logit(logit, targets[i]);
            double delta = sigmoid(logit) - targets[i];
            for (std::size_t d = 0; d < fdim; ++d)
                grad[d] += delta * f[d];
            grad_bias += delta;
        }
        if (loss_history)
            loss_history->push_back(loss * inv_m);
        for (std::size_t d = 0; d < fdim; ++d)
            head.weights[d] -= config.learning_rate * grad[d] * inv_m;
        head.bias -= config.learning_rate * grad_bias * inv_m;
    }
    return head;
}

MatchSet apply_matcher(const MatchHead& head, const EmbeddingModel& model,
                       const Table& table_a, const Table& table_b,
                       const CandidateSet& candidates) {
    EmbeddingCache cache(model, table_a, table_b);
    MatchSet matches;
    matches.matcher = "supcon-head";
    matches.pairs.reserve(candidates.pairs.size());
    for (const auto& [id_a, id_b] : candidates.pairs) {
        auto f = pair_features(cache.get(Source::A, id_a), cache.get(Source::B, id_b));
        if (f.size() != head.weights.size())
            throw std::invalid_argument("match head dimension does not fit the model");
        double logit = head.bias;
        for (std::size_t d = 0; d < f.size(); ++d)
            logit += head.weights[d] * f[d];
        double score = sigmoid(logit);
        matches.pairs.push_back({id_a, id_b, score, score >= head.threshold});
    }
    return matches;
}

MatchSet threshold_matcher(const EmbeddingModel& model, const Table& table_a,
                           const Table& table_b, const CandidateSet& candidates, double theta) {
    EmbeddingCache cache(model, table_a, table_b);
    MatchSet matches;
    matches.matcher = "threshold";
    matches.pairs.reserve(candidates.pairs.size());
    for (const auto& [id_a, id_b] : candidates.pairs) {
        const auto& zx = cache.get(Source::A, id_a);
        const auto& zy = cache.get(Source::B, id_b);
        double cosine = 0.0;
        for (std::size_t d = 0; d < zx.size(); ++d)
            cosine += zx[d] * zy[d];
        cosine = std::clamp(cosine, -1.0, 1.0);
        matches.pairs.push_back({id_a, id_b, cosine, cosine >= theta});
    }
    return matches;
}

void save_matches(const MatchSet& matches, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write file: " + path);
    out << csv::format_row({"ltable_id", "rtable_id", "score", "decision"});
    char buf[32];
    for (const auto& p : matches.pairs) {
        std::snprintf(buf, sizeof(buf), "%.6f", p.score);
        out << csv::format_row({p.id_a, p.id_b, buf, p.is_match ? "match" : "non-match"});
    }
}

}  // namespace scblock

#include "scblock/bm25.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

#include "scblock/embedder.hpp"

namespace scblock {

const char* to_string(Bm25Mode mode) {
    return mode == Bm25Mode::Whitespace ? "whitespace" : "trigram";
}

std::vector<std::string> bm25_tokens(const std::string& text, Bm25Mode mode) {
    if (mode == Bm25Mode::Whitespace)
        return tokenize(text);

    // lowercase and collapse whitespace runs to single spaces
    std::string normalized;
    normalized.reserve(text.size());
    bool pending_space = false;
    for (char ch : text) {
        unsigned char c = static_cast<unsigned char>(ch);
        if (std::isspace(c)) {
            pending_space = !normalized.empty();
        } else {
            if (pending_space) {
                normalized.push_back(' ');
                pending_space = false;
            }
            normalized.push_back(static_cast<char>(std::tolower(c)));
        }
    }

    std::vector<std::string> grams;
    if (normalized.size() >= 3) {
        grams.reserve(normalized.size() - 2);
        for (std::size_t i = 0; i + 3 <= normalized.size(); ++i)
            grams.push_back(normalized.substr(i, 3));
    }
    return grams;
}

Bm25Index Bm25Index::build(const Table& table, Bm25Mode mode, double k1, double b) {
    if (table.size() == 0)
        throw std::invalid_argument("bm25: cannot index an empty table");
    if (k1 < 0.0 || b < 0.0 || b > 1.0)
        throw std::invalid_argument("bm25: require k1 >= 0 and 0 <= b <= 1");

    Bm25Index index;
    index.mode_ = mode;
    index.k1_ = k1;
    index.b_ = b;
    index.doc_ids_.reserve(table.size());
    index.doc_lengths_.reserve(table.size());

    double total_length = 0.0;
    for (const auto& rec : table.records) {
        std::size_t doc = index.doc_ids_.size();
        index.doc_ids_.push_back(rec.id);
        index.doc_index_.emplace(rec.id, doc);
        auto tokens = bm25_tokens(serialize_record(rec, table.schema).text, mode);
        index.doc_lengths_.push_back(static_cast<double>(tokens.size()));
        total_length += static_cast<double>(tokens.size());

        std::unordered_map<std::string, double> tf;
        for (const auto& token : tokens)
            tf[token] += 1.0;
        for (const auto& [token, freq] : tf)
            index.postings_[token].emplace_back(doc, freq);
    }
    index.avgdl_ = total_length / static_cast<double>(table.size());
    return index;
}

std::size_t Bm25Index::document_frequency(const std::string& term) const {
    auto it = postings_.find(term);
    return it == postings_.end() ? 0 : it->second.size();
}

double Bm25Index::score_by_index(const std::vector<std::string>& query_tokens,
                                 std::size_t doc) const {
    double n = static_cast<double>(doc_count());
    double dl = doc_lengths_[doc];
    double length_norm = avgdl_ > 0.0 ? k1_ * (1.0 - b_ + b_ * dl / avgdl_) : k1_ * (1.0 - b_);
    double score = 0.0;
    for (const auto& token : query_tokens) {
        auto it = postings_.find(token);
        if (it == postings_.end())
            continue;
        const auto& posting = it->second;
        auto hit = std::find_if(posting.begin(), posting.end(),
                                [&](const auto& p) { return p.first == doc; });
        if (hit == posting.end())
            continue;
        double df = static_cast<double>(posting.size());
        double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
        double tf = hit->second;
        score += idf * tf * (k1_ + 1.0) / (tf + length_norm);
    }
    return score;
}

double Bm25Index::score(const std::vector<std::string>& query_tokens,
                        const std::string& doc_id) const {
    auto it = doc_index_.find(doc_id);
    if (it == doc_index_.end())
        throw std::invalid_argument("bm25: unknown doc id '" + doc_id + "'");
    return score_by_index(query_tokens, it->second);
}

std::vector<ScoredId> Bm25Index::query_top_k(const std::vector<std::string>& query_tokens,
                                             Bm25Mode query_mode, int k) const {
    if (query_mode != mode_)
        throw std::invalid_argument(std::string("bm25: query tokenized as ") +
                                    to_string(query_mode) + " against a " + to_string(mode_) +
                                    " index");
    if (k < 1)
        throw std::invalid_argument("k must be >= 1");

    // accumulate per-document scores over the query's postings
    std::vector<double> scores(doc_count(), 0.0);
    double n = static_cast<double>(doc_count());
    for (const auto& token : query_tokens) {
        auto it = postings_.find(token);
        if (it == postings_.end())
            continue;
        double df = static_cast<double>(it->second.size());
        double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
        for (const auto& [doc, tf] : it->second) {
            double dl = doc_lengths_[doc];
            double length_norm =
                avgdl_ > 0.0 ? k1_ * (1.0 - b_ + b_ * dl / avgdl_) : k1_ * (1.0 - b_);
            scores[doc] += idf * tf * (k1_ + 1.0) / (tf + length_norm);
        }
    }

    auto better = [&](const std::pair<double, std::size_t>& a,
                      const std::pair<double, std::size_t>& b) {
        if (a.first != b.first)
            return a.first > b.first;
        return doc_ids_[a.second] < doc_ids_[b.second];
    };
    std::vector<std::pair<double, std::size_t>> ranked;
    ranked.reserve(doc_count());
    for (std::size_t doc = 0; doc < doc_count(); ++doc)
        ranked.emplace_back(scores[doc], doc);
    std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(k), ranked.size());
    std::partial_sort(ranked.begin(), ranked.begin() + keep, ranked.end(), better);

    std::vector<ScoredId> out;
    out.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i)
        out.push_back({doc_ids_[ranked[i].second], ranked[i].first});
    return out;
}

CandidateSet block_bm25(const Table& table_a, const Table& table_b, int k, Bm25Mode mode,
                        double k1, double b) {
    if (k < 1)
        throw std::invalid_argument("k must be >= 1");
    if (table_a.size() == 0 || table_b.size() == 0)
        throw std::invalid_argument("cannot block empty tables");

    bool a_queries = table_a.size() <= table_b.size();
    const Table& query_table = a_queries ? table_a : table_b;
    const Table& index_table = a_queries ? table_b : table_a;

    Bm25Index index = Bm25Index::build(index_table, mode, k1, b);

    CandidateSet candidates;
    candidates.k = k;
    candidates.blocker = mode == Bm25Mode::Whitespace ? "bm25" : "bm25-3";
    candidates.query_count = query_table.size();
    candidates.pairs.reserve(expected_candidate_count(query_table.size(), index_table.size(), k));
    for (const auto& rec : query_table.records) {
        auto tokens = bm25_tokens(serialize_record(rec, query_table.schema).text, mode);
        for (const auto& hit : index.query_top_k(tokens, mode, k)) {
            if (a_queries)
                candidates.pairs.emplace_back(rec.id, hit.id);
            else
                candidates.pairs.emplace_back(hit.id, rec.id);
        }
    }
    return candidates;
}

}  // namespace scblock

#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "scblock/datamodel.hpp"
#include "scblock/vecindex.hpp"

namespace scblock {

enum class Bm25Mode { Whitespace, Trigram };

const char* to_string(Bm25Mode mode);

/// Whitespace mode lowercases and splits on whitespace runs; trigram mode
/// emits every contiguous character 3-gram of the lowercased text after
/// collapsing whitespace runs to single spaces.
std::vector<std::string> bm25_tokens(const std::string& text, Bm25Mode mode);

/// Okapi BM25 statistics over serialized record texts.
///   score(q, d) = sum over t in q of idf(t) * tf*(k1+1) / (tf + k1*(1 - b + b*dl/avgdl))
///   idf(t) = ln(1 + (N - df + 0.5) / (df + 0.5))
class Bm25Index {
public:
    Bm25Index() = default;

    static Bm25Index build(const Table& table, Bm25Mode mode, double k1 = 1.2,
                           double b = 0.75);

    std::size_t doc_count() const { return doc_ids_.size(); }
    double avgdl() const { return avgdl_; }
    Bm25Mode mode() const { return mode_; }
    std::size_t document_frequency(const std::string& term) const;

    double score(const std::vector<std::string>& query_tokens, const std::string& doc_id) const;

    /// Top-k by score, descending; exact ties broken by ascending id. The query
    /// mode must match the index mode.
    std::vector<ScoredId> query_top_k(const std::vector<std::string>& query_tokens,
                                      Bm25Mode query_mode, int k) const;

private:
    double score_by_index(const std::vector<std::string>& query_tokens, std::size_t doc) const;

    Bm25Mode mode_ = Bm25Mode::Whitespace;
    double k1_ = 1.2;
    double b_ = 0.75;
    double avgdl_ = 0.0;
    std::vector<std::string> doc_ids_;
    std::vector<double> doc_lengths_;
    std::unordered_map<std::string, std::size_t> doc_index_;
    // term -> postings (doc index, term frequency); doubles as df via size()
    std::unordered_map<std::string, std::vector<std::pair<std::size_t, double>>> postings_;
};

/// Smaller table queries the index built over the larger one (ties go to A);
/// pair orientation is always (A record, B record).
CandidateSet block_bm25(const Table& table_a, const Table& table_b, int k, Bm25Mode mode,
                        double k1 = 1.2, double b = 0.75);

}  // namespace scblock

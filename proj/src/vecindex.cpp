#include "scblock/vecindex.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "scblock/csv.hpp"

namespace scblock {

VectorIndex build_index(std::vector<std::string> ids,
                        const std::vector<std::vector<double>>& embeddings) {
    if (ids.size() != embeddings.size())
        throw std::invalid_argument("index: id/embedding count mismatch");
    VectorIndex index;
    index.ids_ = std::move(ids);
    if (embeddings.empty())
        return index;

    index.dim_ = embeddings.front().size();
    index.matrix_.reserve(embeddings.size() * index.dim_);
    for (std::size_t i = 0; i < embeddings.size(); ++i) {
        const auto& row = embeddings[i];
        if (row.size() != index.dim_)
            throw std::invalid_argument("index: dimension mismatch at row " + std::to_string(i));
        double norm_sq = 0.0;
        for (double v : row)
            norm_sq += v * v;
        if (std::fabs(std::sqrt(norm_sq) - 1.0) > 1e-6)
            throw std::invalid_argument("index: row " + std::to_string(i) +
                                        " is not unit-norm");
        index.matrix_.insert(index.matrix_.end(), row.begin(), row.end());
    }
    return index;
}

std::vector<ScoredId> VectorIndex::query_top_k(const std::vector<double>& query, int k) const {
    if (k < 1)
        throw std::invalid_argument("k must be >= 1");
    if (size() == 0)
        return {};
    if (query.size() != dim_)
        throw std::invalid_argument("query dimension mismatch");

    // better(a, b): higher cosine first, ascending id on exact ties
    auto better = [&](const std::pair<double, std::size_t>& a,
                      const std::pair<double, std::size_t>& b) {
        if (a.first != b.first)
            return a.first > b.first;
        return ids_[a.second] < ids_[b.second];
    };

    std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(k), size());
    // worst kept candidate sits at the end of this sorted scratch list
    std::vector<std::pair<double, std::size_t>> top;
    top.reserve(keep + 1);
    for (std::size_t i = 0; i < size(); ++i) {
        const double* row = matrix_.data() + i * dim_;
        double dot = 0.0;
        for (std::size_t d = 0; d < dim_; ++d)
            dot += row[d] * query[d];
        std::pair<double, std::size_t> cand{dot, i};
        if (top.size() == keep && !better(cand, top.back()))
            continue;
        auto pos = std::upper_bound(top.begin(), top.end(), cand, better);
        top.insert(pos, cand);
        if (top.size() > keep)
            top.pop_back();
    }

    std::vector<ScoredId> out;
    out.reserve(top.size());
    for (const auto& [score, idx] : top)
        out.push_back({ids_[idx], score});
    return out;
}

std::size_t expected_candidate_count(std::size_t query_count, std::size_t index_count,
                                     int k) {
    if (k < 1)
        throw std::invalid_argument("k must be >= 1");
    return query_count * std::min<std::size_t>(static_cast<std::size_t>(k), index_count);
}

CandidateSet block_nn(const EmbeddingModel& model, const Table& table_a,
                      const Table& table_b, int k) {
    if (k < 1)
        throw std::invalid_argument("k must be >= 1");
    if (table_a.size() == 0 || table_b.size() == 0)
        throw std::invalid_argument("cannot block empty tables");

    // smaller table queries; ties go to A
    bool a_queries = table_a.size() <= table_b.size();
    const Table& query_table = a_queries ? table_a : table_b;
    const Table& index_table = a_queries ? table_b : table_a;

    auto embed_table = [&](const Table& t) {
        std::vector<std::vector<double>> rows;
        rows.reserve(t.size());
        for (const auto& rec : t.records)
            rows.push_back(encode(model, serialize_record(rec, t.schema).text));
        return rows;
    };

    std::vector<std::string> index_ids;
    index_ids.reserve(index_table.size());
    for (const auto& rec : index_table.records)
        index_ids.push_back(rec.id);
    VectorIndex index = build_index(std::move(index_ids), embed_table(index_table));

    CandidateSet candidates;
    candidates.k = k;
    candidates.blocker = "nn";
    candidates.query_count = query_table.size();
    candidates.pairs.reserve(expected_candidate_count(query_table.size(), index_table.size(), k));
    for (const auto& rec : query_table.records) {
        auto query = encode(model, serialize_record(rec, query_table.schema).text);
        for (const auto& hit : index.query_top_k(query, k)) {
            if (a_queries)
                candidates.pairs.emplace_back(rec.id, hit.id);
            else
                candidates.pairs.emplace_back(hit.id, rec.id);
        }
    }
    return candidates;
}

void save_candidates(const CandidateSet& candidates, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write file: " + path);
    out << "# blocker=" << candidates.blocker << " k=" << candidates.k
        << " queries=" << candidates.query_count << " size=" << candidates.pairs.size() << "\n";
    out << "ltable_id,rtable_id\n";
    for (const auto& [id_a, id_b] : candidates.pairs)
        out << csv::format_row({id_a, id_b});
}

CandidateSet load_candidates(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open file: " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("# blocker=", 0) != 0)
        throw std::runtime_error(path + ": missing candidate metadata header");

    CandidateSet candidates;
    std::istringstream meta(line.substr(2));
    std::string field;
    while (meta >> field) {
        auto eq = field.find('=');
        if (eq == std::string::npos)
            continue;
        std::string key = field.substr(0, eq);
        std::string value = field.substr(eq + 1);
        if (key == "blocker")
            candidates.blocker = value;
        else if (key == "k")
            candidates.k = std::stoi(value);
        else if (key == "queries")
            candidates.query_count = std::stoul(value);
    }

    if (!std::getline(in, line) || line != "ltable_id,rtable_id")
        throw std::runtime_error(path + ": missing candidate header row");
    std::ostringstream rest;
    rest << in.rdbuf();
    for (const auto& row : csv::parse(rest.str())) {
        if (row.size() != 2)
            throw std::runtime_error(path + ": malformed candidate row");
        candidates.pairs.emplace_back(row[0], row[1]);
    }
    return candidates;
}

}  // namespace scblock

#include "scblock/labeling.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace scblock {

namespace {

// Union-find with path compression and union by size.
class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n), size_(n, 1) {
        std::iota(parent_.begin(), parent_.end(), std::size_t{0});
    }

    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b)
            return;
        if (size_[a] < size_[b])
            std::swap(a, b);
        parent_[b] = a;
        size_[a] += size_[b];
    }

private:
    std::vector<std::size_t> parent_;
    std::vector<std::size_t> size_;
};

}  // namespace

EntityLabeling::EntityLabeling(const Table* table_a, const Table* table_b,
                               std::vector<int64_t> labels)
    : table_a_(table_a), table_b_(table_b), labels_(std::move(labels)) {
    label_count_ = labels_.empty() ? 0 : *std::max_element(labels_.begin(), labels_.end()) + 1;
}

int64_t EntityLabeling::label_of(Source source, const std::string& id) const {
    const Table* table = source == Source::A ? table_a_ : table_b_;
    return label_at(source, table->index_of(id));
}

int64_t EntityLabeling::label_at(Source source, std::size_t record_index) const {
    std::size_t v = source == Source::A ? record_index : table_a_->size() + record_index;
    if (v >= labels_.size())
        throw std::out_of_range("record index outside labeling");
    return labels_[v];
}

std::string EntityLabeling::debug_dump() const {
    std::ostringstream out;
    out << "record_id,label_id\n";
    for (std::size_t i = 0; i < table_a_->size(); ++i)
        out << table_a_->records[i].id << "," << label_at(Source::A, i) << "\n";
    for (std::size_t i = 0; i < table_b_->size(); ++i)
        out << table_b_->records[i].id << "," << label_at(Source::B, i) << "\n";
    return out.str();
}

CorrespondenceGraph build_correspondence_graph(const Table& table_a, const Table& table_b,
                                               const GroundTruth& gt) {
    CorrespondenceGraph graph;
    graph.table_a = &table_a;
    graph.table_b = &table_b;
    for (const auto& p : gt.pairs) {
        if (!p.positive || p.split == Split::Test)
            continue;
        graph.edges.emplace_back(table_a.index_of(p.id_a), table_b.index_of(p.id_b));
    }
    return graph;
}

EntityLabeling assign_entity_labels(const CorrespondenceGraph& graph) {
    const Table& ta = *graph.table_a;
    const Table& tb = *graph.table_b;
    std::size_t n = graph.vertex_count();

    DisjointSets sets(n);
    for (const auto& [ia, ib] : graph.edges)
        sets.unite(ia, ta.size() + ib);

    // Order components by their smallest (source, id) member so labels do not
    // depend on record order.
    auto key_of = [&](std::size_t v) -> std::pair<int, const std::string*> {
        if (v < ta.size())
            return {0, &ta.records[v].id};
        return {1, &tb.records[v - ta.size()].id};
    };

    std::vector<std::size_t> root_min(n);
    std::iota(root_min.begin(), root_min.end(), std::size_t{0});
    std::vector<std::size_t> roots;
    for (std::size_t v = 0; v < n; ++v) {
        std::size_t r = sets.find(v);
        auto kv = key_of(v);
        auto km = key_of(root_min[r]);
        if (kv.first < km.first || (kv.first == km.first && *kv.second < *km.second))
            root_min[r] = v;
        if (r == v)
            roots.push_back(r);
    }
    std::sort(roots.begin(), roots.end(), [&](std::size_t a, std::size_t b) {
        auto ka = key_of(root_min[a]);
        auto kb = key_of(root_min[b]);
        return ka.first != kb.first ? ka.first < kb.first : *ka.second < *kb.second;
    });

    std::vector<int64_t> root_label(n, -1);
    for (std::size_t i = 0; i < roots.size(); ++i)
        root_label[roots[i]] = static_cast<int64_t>(i);

    std::vector<int64_t> labels(n);
    for (std::size_t v = 0; v < n; ++v)
        labels[v] = root_label[sets.find(v)];
    return EntityLabeling(graph.table_a, graph.table_b, std::move(labels));
}

std::pair<SourceAwareCorpus, SourceAwareCorpus> build_source_aware_corpora(
    const EntityLabeling& labeling, const Table& table_a, const Table& table_b) {
    std::unordered_set<int64_t> labels_in_a;
    std::unordered_set<int64_t> labels_in_b;
    for (std::size_t i = 0; i < table_a.size(); ++i)
        labels_in_a.insert(labeling.label_at(Source::A, i));
    for (std::size_t i = 0; i < table_b.size(); ++i)
        labels_in_b.insert(labeling.label_at(Source::B, i));

    SourceAwareCorpus corpus_a{Source::A, {}};
    SourceAwareCorpus corpus_b{Source::B, {}};
    for (std::size_t i = 0; i < table_a.size(); ++i) {
        int64_t label = labeling.label_at(Source::A, i);
        corpus_a.entries.push_back({Source::A, i, label});
        if (labels_in_b.count(label))
            corpus_b.entries.push_back({Source::A, i, label});
    }
    for (std::size_t i = 0; i < table_b.size(); ++i) {
        int64_t label = labeling.label_at(Source::B, i);
        corpus_b.entries.push_back({Source::B, i, label});
        if (labels_in_a.count(label))
            corpus_a.entries.push_back({Source::B, i, label});
    }
    return {std::move(corpus_a), std::move(corpus_b)};
}

}  // namespace scblock

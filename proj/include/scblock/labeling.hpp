#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "scblock/datamodel.hpp"

namespace scblock {

/// Records of A and B as vertices, positive train+val pairs as edges.
/// Test-split pairs never enter the graph.
struct CorrespondenceGraph {
    const Table* table_a = nullptr;
    const Table* table_b = nullptr;
    // Edges as (A record index, B record index).
    std::vector<std::pair<std::size_t, std::size_t>> edges;

    std::size_t vertex_count() const { return table_a->size() + table_b->size(); }
};

/// Record -> entity label. Two records share a label iff they lie in the same
/// connected component. Labels are dense from 0, ordered by each component's
/// smallest (source, id) member, so the assignment is independent of record
/// order in the input files.
class EntityLabeling {
public:
    EntityLabeling() = default;
    EntityLabeling(const Table* table_a, const Table* table_b, std::vector<int64_t> labels);

    int64_t label_of(Source source, const std::string& id) const;
    int64_t label_at(Source source, std::size_t record_index) const;
    int64_t label_count() const { return label_count_; }

    std::string debug_dump() const;  // record_id,label_id rows

private:
    const Table* table_a_ = nullptr;
    const Table* table_b_ = nullptr;
    std::vector<int64_t> labels_;  // A records first, then B records
    int64_t label_count_ = 0;
};

struct CorpusEntry {
    Source source = Source::A;
    std::size_t record_index = 0;  // into the record's own table
    int64_t label = 0;
};

/// Per-side training corpus: all records of the side plus those records from
/// the other table that share a label with some record of this side.
struct SourceAwareCorpus {
    Source side = Source::A;
    std::vector<CorpusEntry> entries;
};

CorrespondenceGraph build_correspondence_graph(const Table& table_a, const Table& table_b,
                                               const GroundTruth& gt);

EntityLabeling assign_entity_labels(const CorrespondenceGraph& graph);

std::pair<SourceAwareCorpus, SourceAwareCorpus> build_source_aware_corpora(
    const EntityLabeling& labeling, const Table& table_a, const Table& table_b);

}  // namespace scblock

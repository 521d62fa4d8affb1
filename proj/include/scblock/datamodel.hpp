#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace scblock {

enum class Source { A, B };
enum class Split { Train, Val, Test };

const char* to_string(Source source);
const char* to_string(Split split);
Split parse_split(const std::string& text);

/// One row of dataset A or B. Attribute values are stored in table schema
/// order; an absent cell is a disengaged optional.
struct Record {
    std::string id;
    Source source = Source::A;
    std::vector<std::optional<std::string>> values;
};

struct Table {
    Source source = Source::A;
    std::vector<std::string> schema;
    std::vector<Record> records;

    std::size_t size() const { return records.size(); }
    bool contains(const std::string& id) const { return index_of_.count(id) > 0; }
    const Record& record(const std::string& id) const;
    std::size_t index_of(const std::string& id) const;

    void rebuild_index();

private:
    std::unordered_map<std::string, std::size_t> index_of_;
};

struct GtPair {
    std::string id_a;
    std::string id_b;
    bool positive = false;
    Split split = Split::Train;
};

/// Labeled correspondences between tables A and B. Match-labeled pairs form
/// G_P, non-match-labeled pairs form G_N; every pair carries a split tag.
struct GroundTruth {
    std::vector<GtPair> pairs;

    std::size_t count(Split split, bool positive) const;
    std::vector<const GtPair*> select(Split split, bool positive) const;
    std::vector<const GtPair*> positives_all_splits() const;
};

struct RecordText {
    std::string record_id;
    std::string text;
};

struct DatasetStats {
    std::size_t count_a = 0;
    std::size_t count_b = 0;
    std::size_t pos_train = 0, neg_train = 0;
    std::size_t pos_val = 0, neg_val = 0;
    std::size_t pos_test = 0, neg_test = 0;
    std::size_t vocabulary_size = 0;
    std::size_t max_matching_neighbours = 0;
};

/// Reads a header-first delimited file into a Table. The header must contain
/// an `id` column; remaining columns become the schema in header order.
/// Empty cells load as absent values.
Table load_table(const std::string& path, Source source, char delimiter = ',');

void save_table(const Table& table, const std::string& path, char delimiter = ',');

/// Reads `ltable_id,rtable_id,label,split` rows. Every id must resolve in the
/// matching table, labels are 0/1, splits train/val/test, pairs unique.
GroundTruth load_ground_truth(const std::string& path, const Table& table_a,
                              const Table& table_b, char delimiter = ',');

void save_ground_truth(const GroundTruth& gt, const std::string& path, char delimiter = ',');

/// "[Col] <name> [Val] <value>" per attribute, parts joined by single spaces.
/// Absent values serialize exactly like empty ones.
RecordText serialize_record(const Record& record, const std::vector<std::string>& schema);

/// Whitespace tokenization over raw attribute values feeds vocabulary_size;
/// max_matching_neighbours is taken over G_P across all splits.
DatasetStats dataset_statistics(const Table& table_a, const Table& table_b,
                                const GroundTruth& gt);

std::string stats_to_kv(const DatasetStats& stats);

}  // namespace scblock

#include "scblock/datamodel.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "scblock/csv.hpp"

namespace scblock {

const char* to_string(Source source) {
    return source == Source::A ? "A" : "B";
}

const char* to_string(Split split) {
    switch (split) {
        case Split::Train: return "train";
        case Split::Val: return "val";
        case Split::Test: return "test";
    }
    return "?";
}

Split parse_split(const std::string& text) {
    if (text == "train")
        return Split::Train;
    if (text == "val")
        return Split::Val;
    if (text == "test")
        return Split::Test;
    throw std::runtime_error("invalid split: '" + text + "' (expected train/val/test)");
}

const Record& Table::record(const std::string& id) const {
    auto it = index_of_.find(id);
    if (it == index_of_.end())
        throw std::runtime_error("unknown record id '" + id + "' in table " + to_string(source));
    return records[it->second];
}

std::size_t Table::index_of(const std::string& id) const {
    auto it = index_of_.find(id);
    if (it == index_of_.end())
        throw std::runtime_error("unknown record id '" + id + "' in table " + to_string(source));
    return it->second;
}

void Table::rebuild_index() {
    index_of_.clear();
    index_of_.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        auto [it, inserted] = index_of_.emplace(records[i].id, i);
        if (!inserted)
            throw std::runtime_error("duplicate record id '" + records[i].id + "' in table " +
                                     to_string(source));
    }
}

std::size_t GroundTruth::count(Split split, bool positive) const {
    std::size_t n = 0;
    for (const auto& p : pairs)
        if (p.split == split && p.positive == positive)
            ++n;
    return n;
}

std::vector<const GtPair*> GroundTruth::select(Split split, bool positive) const {
    std::vector<const GtPair*> out;
    for (const auto& p : pairs)
        if (p.split == split && p.positive == positive)
            out.push_back(&p);
    return out;
}

std::vector<const GtPair*> GroundTruth::positives_all_splits() const {
    std::vector<const GtPair*> out;
    for (const auto& p : pairs)
        if (p.positive)
            out.push_back(&p);
    return out;
}

Table load_table(const std::string& path, Source source, char delimiter) {
    auto rows = csv::read_file(path, delimiter);
    if (rows.empty())
        throw std::runtime_error(path + ": empty file, expected a header row");

    const auto& header = rows.front();
    auto id_it = std::find(header.begin(), header.end(), "id");
    if (id_it == header.end())
        throw std::runtime_error(path + ": header has no 'id' column");
    std::size_t id_col = static_cast<std::size_t>(id_it - header.begin());

    Table table;
    table.source = source;
    for (std::size_t c = 0; c < header.size(); ++c)
        if (c != id_col)
            table.schema.push_back(header[c]);

    table.records.reserve(rows.size() - 1);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != header.size()) {
            std::ostringstream msg;
            msg << path << ": row " << r + 1 << " has " << row.size() << " fields, expected "
                << header.size();
            throw std::runtime_error(msg.str());
        }
        Record rec;
        rec.source = source;
        rec.id = row[id_col];
        if (rec.id.empty())
            throw std::runtime_error(path + ": empty id at row " + std::to_string(r + 1));
        rec.values.reserve(table.schema.size());
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c == id_col)
                continue;
            if (row[c].empty())
                rec.values.emplace_back(std::nullopt);
            else
                rec.values.emplace_back(row[c]);
        }
        table.records.push_back(std::move(rec));
    }
    table.rebuild_index();
    return table;
}

void save_table(const Table& table, const std::string& path, char delimiter) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write file: " + path);
    std::vector<std::string> header;
    header.push_back("id");
    header.insert(header.end(), table.schema.begin(), table.schema.end());
    out << csv::format_row(header, delimiter);
    std::vector<std::string> row(header.size());
    for (const auto& rec : table.records) {
        row[0] = rec.id;
        for (std::size_t c = 0; c < table.schema.size(); ++c)
            row[c + 1] = rec.values[c].value_or("");
        out << csv::format_row(row, delimiter);
    }
}

GroundTruth load_ground_truth(const std::string& path, const Table& table_a,
                              const Table& table_b, char delimiter) {
    auto rows = csv::read_file(path, delimiter);
    if (rows.empty())
        throw std::runtime_error(path + ": empty file, expected a header row");
    const std::vector<std::string> expected = {"ltable_id", "rtable_id", "label", "split"};
    if (rows.front() != expected)
        throw std::runtime_error(path + ": header must be ltable_id,rtable_id,label,split");

    GroundTruth gt;
    gt.pairs.reserve(rows.size() - 1);
    std::set<std::pair<std::string, std::string>> seen;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != 4)
            throw std::runtime_error(path + ": row " + std::to_string(r + 1) +
                                     " has wrong field count");
        GtPair pair;
        pair.id_a = row[0];
        pair.id_b = row[1];
        if (!table_a.contains(pair.id_a))
            throw std::runtime_error(path + ": unknown id '" + pair.id_a + "' in table A");
        if (!table_b.contains(pair.id_b))
            throw std::runtime_error(path + ": unknown id '" + pair.id_b + "' in table B");
        if (row[2] == "0")
            pair.positive = false;
        else if (row[2] == "1")
            pair.positive = true;
        else
            throw std::runtime_error(path + ": label '" + row[2] + "' outside {0,1}");
        pair.split = parse_split(row[3]);
        if (!seen.emplace(pair.id_a, pair.id_b).second)
            throw std::runtime_error(path + ": duplicate pair (" + pair.id_a + "," + pair.id_b +
                                     ")");
        gt.pairs.push_back(std::move(pair));
    }
    return gt;
}

void save_ground_truth(const GroundTruth& gt, const std::string& path, char delimiter) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write file: " + path);
    out << csv::format_row({"ltable_id", "rtable_id", "label", "split"}, delimiter);
    for (const auto& p : gt.pairs)
        out << csv::format_row({p.id_a, p.id_b, p.positive ? "1" : "0", to_string(p.split)},
                               delimiter);
}

RecordText serialize_record(const Record& record, const std::vector<std::string>& schema) {
    if (record.values.size() != schema.size())
        throw std::runtime_error("record '" + record.id + "' does not conform to schema");
    std::string text;
    for (std::size_t i = 0; i < schema.size(); ++i) {
        if (i)
            text.push_back(' ');
        text += "[Col] ";
        text += schema[i];
        text += " [Val] ";
        if (record.values[i])
            text += *record.values[i];
    }
    return RecordText{record.id, std::move(text)};
}

namespace {

void collect_value_tokens(const Table& table, std::unordered_set<std::string>& vocab) {
    for (const auto& rec : table.records) {
        for (const auto& value : rec.values) {
            if (!value)
                continue;
            std::size_t i = 0;
            const std::string& s = *value;
            while (i < s.size()) {
                while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i])))
                    ++i;
                std::size_t start = i;
                while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i])))
                    ++i;
                if (i > start)
                    vocab.insert(s.substr(start, i - start));
            }
        }
    }
}

}  // namespace

DatasetStats dataset_statistics(const Table& table_a, const Table& table_b,
                                const GroundTruth& gt) {
    DatasetStats stats;
    stats.count_a = table_a.size();
    stats.count_b = table_b.size();
    stats.pos_train = gt.count(Split::Train, true);
    stats.neg_train = gt.count(Split::Train, false);
    stats.pos_val = gt.count(Split::Val, true);
    stats.neg_val = gt.count(Split::Val, false);
    stats.pos_test = gt.count(Split::Test, true);
    stats.neg_test = gt.count(Split::Test, false);

    std::unordered_set<std::string> vocab;
    collect_value_tokens(table_a, vocab);
    collect_value_tokens(table_b, vocab);
    stats.vocabulary_size = vocab.size();

    std::unordered_map<std::string, std::size_t> neighbours;
    for (const auto& p : gt.pairs)
        if (p.positive)
            ++neighbours[p.id_a];
    for (const auto& [id, n] : neighbours)
        stats.max_matching_neighbours = std::max(stats.max_matching_neighbours, n);
    return stats;
}

std::string stats_to_kv(const DatasetStats& stats) {
    std::ostringstream out;
    out << "count_a=" << stats.count_a << "\n"
        << "count_b=" << stats.count_b << "\n"
        << "pos_train=" << stats.pos_train << "\n"
        << "neg_train=" << stats.neg_train << "\n"
        << "pos_val=" << stats.pos_val << "\n"
        << "neg_val=" << stats.neg_val << "\n"
        << "pos_test=" << stats.pos_test << "\n"
        << "neg_test=" << stats.neg_test << "\n"
        << "vocabulary_size=" << stats.vocabulary_size << "\n"
        << "max_matching_neighbours=" << stats.max_matching_neighbours << "\n";
    return out.str();
}

}  // namespace scblock

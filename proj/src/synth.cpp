#include "scblock/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace scblock {

namespace {

constexpr std::size_t kFamilySize = 5;
constexpr std::size_t kFamilyTokens = 8;
constexpr std::size_t kEntityTokens = 3;
constexpr std::size_t kFamilyTokensPerBase = 6;

std::string token_name(const char* prefix, std::size_t group, const char* sep,
                       std::size_t item) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%s%04zu%s%zu", prefix, group, sep, item);
    return buf;
}

struct Pools {
    std::vector<std::vector<std::string>> family;  // per family
    std::vector<std::vector<std::string>> entity;  // per entity
    std::vector<std::string> noise;
    std::vector<std::string> filler;
};

Pools build_pools(const SynthConfig& config) {
    Pools pools;
    std::size_t n_families = (config.n_entities + kFamilySize - 1) / kFamilySize;
    pools.family.resize(n_families);
    for (std::size_t f = 0; f < n_families; ++f)
        for (std::size_t j = 0; j < kFamilyTokens; ++j)
            pools.family[f].push_back(token_name("fam", f, "q", j));
    // entity tokens carry their family id up front, so entities of one family
    // look nearly identical at the character level
    pools.entity.resize(config.n_entities);
    for (std::size_t e = 0; e < config.n_entities; ++e) {
        std::size_t family = e / kFamilySize;
        std::size_t local = e % kFamilySize;
        for (std::size_t j = 0; j < kEntityTokens; ++j) {
            char buf[48];
            std::snprintf(buf, sizeof(buf), "it%04zue%zuu%zu", family, local, j);
            pools.entity[e].push_back(buf);
        }
    }

    std::size_t used = n_families * kFamilyTokens + config.n_entities * kEntityTokens;
    std::size_t remaining = config.base_vocabulary > used ? config.base_vocabulary - used : 0;
    std::size_t noise_count = std::max<std::size_t>(20, remaining * 3 / 5);
    std::size_t filler_count = std::max<std::size_t>(20, remaining - remaining * 3 / 5);
    for (std::size_t i = 0; i < noise_count; ++i)
        pools.noise.push_back("zz" + std::to_string(i));
    for (std::size_t i = 0; i < filler_count; ++i)
        pools.filler.push_back("fill" + std::to_string(i));
    return pools;
}

template <typename T>
std::vector<T> sample_without_replacement(const std::vector<T>& pool, std::size_t n,
                                          std::mt19937_64& rng) {
    std::vector<std::size_t> order(pool.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    n = std::min(n, pool.size());
    std::vector<T> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, order.size() - 1);
        std::swap(order[i], order[pick(rng)]);
        out.push_back(pool[order[i]]);
    }
    return out;
}

struct EntityBase {
    std::vector<std::string> tokens;  // entity tokens first, then family tokens
    std::size_t family = 0;
};

Record make_entity_record(const SynthConfig& config, const Pools& pools,
                          const EntityBase& base, Source source, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> coin(0.0, 1.0);

    std::vector<char> keep_entity_token(kEntityTokens, 1);
    std::size_t kept_entity = kEntityTokens;
    for (std::size_t i = 0; i < kEntityTokens; ++i) {
        if (kept_entity > 2 && coin(rng) < 0.05) {  // records keep >= 2 entity anchors
            keep_entity_token[i] = 0;
            --kept_entity;
        }
    }
    std::vector<std::string> core;
    for (std::size_t i = 0; i < kEntityTokens; ++i)
        if (keep_entity_token[i])
            core.push_back(base.tokens[i]);
    for (std::size_t i = kEntityTokens; i < base.tokens.size(); ++i)
        if (coin(rng) >= 0.25)
            core.push_back(base.tokens[i]);

    // occasional family-token substitution makes low-overlap same-entity pairs
    // while keeping all contention inside one family
    if (core.size() > kept_entity && coin(rng) < 0.2) {
        std::uniform_int_distribution<std::size_t> pick_slot(kept_entity, core.size() - 1);
        const auto& family_pool = pools.family[base.family];
        std::uniform_int_distribution<std::size_t> pick_token(0, family_pool.size() - 1);
        core[pick_slot(rng)] = family_pool[pick_token(rng)];
    }
    std::shuffle(core.begin(), core.end(), rng);

    std::size_t want = static_cast<std::size_t>(config.tokens_per_record);
    std::size_t n_noise = want > core.size() ? want - core.size() : 0;
    auto noise = sample_without_replacement(pools.noise, n_noise, rng);

    auto join = [](const std::vector<std::string>& tokens) {
        std::string s;
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            if (i)
                s.push_back(' ');
            s += tokens[i];
        }
        return s;
    };

    Record rec;
    rec.source = source;
    rec.values.emplace_back(join(core));
    rec.values.emplace_back(noise.empty() ? std::optional<std::string>{}
                                          : std::optional<std::string>{join(noise)});
    return rec;
}

Record make_filler_record(const SynthConfig& config, const Pools& pools,
                          std::mt19937_64& rng) {
    std::size_t want = static_cast<std::size_t>(config.tokens_per_record);
    auto tokens = sample_without_replacement(pools.filler, want, rng);
    std::size_t head = std::min<std::size_t>(tokens.size(), want / 2 + 1);

    auto join = [&](std::size_t from, std::size_t to) {
        std::string s;
        for (std::size_t i = from; i < to; ++i) {
            if (i > from)
                s.push_back(' ');
            s += tokens[i];
        }
        return s;
    };

    Record rec;
    rec.source = Source::B;
    rec.values.emplace_back(join(0, head));
    rec.values.emplace_back(head < tokens.size()
                                ? std::optional<std::string>{join(head, tokens.size())}
                                : std::optional<std::string>{});
    return rec;
}

std::unordered_set<std::string> record_token_set(const Record& rec) {
    std::unordered_set<std::string> tokens;
    for (const auto& value : rec.values) {
        if (!value)
            continue;
        std::istringstream in(*value);
        std::string token;
        while (in >> token)
            tokens.insert(token);
    }
    return tokens;
}

double jaccard(const std::unordered_set<std::string>& x,
               const std::unordered_set<std::string>& y) {
    if (x.empty() && y.empty())
        return 0.0;
    std::size_t inter = 0;
    const auto& small = x.size() <= y.size() ? x : y;
    const auto& large = x.size() <= y.size() ? y : x;
    for (const auto& t : small)
        inter += large.count(t);
    return static_cast<double>(inter) / static_cast<double>(x.size() + y.size() - inter);
}

struct ScoredPairRef {
    std::size_t a = 0;  // index into table A records
    std::size_t b = 0;  // index into table B records
    std::size_t entity_a = 0;
    std::size_t entity_b = 0;
    double similarity = 0.0;
};

}  // namespace

void SynthConfig::validate() const {
    if (n_entities == 0)
        throw std::invalid_argument("synth: need at least one entity");
    if (a_records_min < 0 || b_records_min < 0 || a_records_max < a_records_min ||
        b_records_max < b_records_min)
        throw std::invalid_argument("synth: bad records-per-entity range");
    if (corner_case_fraction < 0.0 || corner_case_fraction > 1.0)
        throw std::invalid_argument("synth: corner_case_fraction outside [0,1]");
    if (tokens_per_record < 1)
        throw std::invalid_argument("synth: tokens_per_record must be >= 1");
}

std::string SynthConfig::to_kv() const {
    std::ostringstream out;
    out << "n_entities=" << n_entities << "\n"
        << "a_records_min=" << a_records_min << "\n"
        << "a_records_max=" << a_records_max << "\n"
        << "b_records_min=" << b_records_min << "\n"
        << "b_records_max=" << b_records_max << "\n"
        << "base_vocabulary=" << base_vocabulary << "\n"
        << "tokens_per_record=" << tokens_per_record << "\n"
        << "corner_case_fraction=" << corner_case_fraction << "\n"
        << "n_filler_b=" << n_filler_b << "\n"
        << "pos_train=" << pos_train << "\n"
        << "pos_val=" << pos_val << "\n"
        << "pos_test=" << pos_test << "\n"
        << "neg_train=" << neg_train << "\n"
        << "neg_val=" << neg_val << "\n"
        << "neg_test=" << neg_test << "\n"
        << "seed=" << seed << "\n";
    return out.str();
}

GeneratedBenchmark generate_benchmark(const SynthConfig& config) {
    config.validate();
    std::mt19937_64 rng(config.seed);
    Pools pools = build_pools(config);

    std::vector<EntityBase> bases(config.n_entities);
    for (std::size_t e = 0; e < config.n_entities; ++e) {
        bases[e].family = e / kFamilySize;
        bases[e].tokens = pools.entity[e];
        auto family_part =
            sample_without_replacement(pools.family[bases[e].family], kFamilyTokensPerBase, rng);
        bases[e].tokens.insert(bases[e].tokens.end(), family_part.begin(), family_part.end());
    }

    GeneratedBenchmark bench;
    bench.table_a.source = Source::A;
    bench.table_a.schema = {"title", "description"};
    bench.table_b.source = Source::B;
    bench.table_b.schema = {"title", "description"};

    std::vector<std::size_t> entity_of_a;
    std::vector<std::size_t> entity_of_b;  // filler records get n_entities
    std::uniform_int_distribution<int> a_count(config.a_records_min, config.a_records_max);
    std::uniform_int_distribution<int> b_count(config.b_records_min, config.b_records_max);

    std::size_t next_a = 0, next_b = 0;
    for (std::size_t e = 0; e < config.n_entities; ++e) {
        int na = a_count(rng);
        for (int i = 0; i < na; ++i) {
            Record rec = make_entity_record(config, pools, bases[e], Source::A, rng);
            rec.id = "a" + std::to_string(next_a++);
            bench.table_a.records.push_back(std::move(rec));
            entity_of_a.push_back(e);
        }
        int nb = b_count(rng);
        for (int i = 0; i < nb; ++i) {
            Record rec = make_entity_record(config, pools, bases[e], Source::B, rng);
            rec.id = "b" + std::to_string(next_b++);
            bench.table_b.records.push_back(std::move(rec));
            entity_of_b.push_back(e);
        }
    }
    for (std::size_t i = 0; i < config.n_filler_b; ++i) {
        Record rec = make_filler_record(config, pools, rng);
        rec.id = "b" + std::to_string(next_b++);
        bench.filler_ids.push_back(rec.id);
        bench.table_b.records.push_back(std::move(rec));
        entity_of_b.push_back(config.n_entities);
    }

    // shuffle B so filler records interleave with entity records
    {
        std::vector<std::size_t> order(bench.table_b.records.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::shuffle(order.begin(), order.end(), rng);
        std::vector<Record> records;
        std::vector<std::size_t> entities;
        records.reserve(order.size());
        entities.reserve(order.size());
        for (std::size_t idx : order) {
            records.push_back(std::move(bench.table_b.records[idx]));
            entities.push_back(entity_of_b[idx]);
        }
        bench.table_b.records = std::move(records);
        entity_of_b = std::move(entities);
    }
    bench.table_a.rebuild_index();
    bench.table_b.rebuild_index();

    std::vector<std::unordered_set<std::string>> tokens_a(bench.table_a.size());
    std::vector<std::unordered_set<std::string>> tokens_b(bench.table_b.size());
    for (std::size_t i = 0; i < bench.table_a.size(); ++i)
        tokens_a[i] = record_token_set(bench.table_a.records[i]);
    for (std::size_t i = 0; i < bench.table_b.size(); ++i)
        tokens_b[i] = record_token_set(bench.table_b.records[i]);

    std::vector<std::vector<std::size_t>> b_of_entity(config.n_entities);
    for (std::size_t i = 0; i < bench.table_b.size(); ++i)
        if (entity_of_b[i] < config.n_entities)
            b_of_entity[entity_of_b[i]].push_back(i);

    auto order_pairs = [&](std::vector<ScoredPairRef>& pairs, bool ascending) {
        std::sort(pairs.begin(), pairs.end(), [&](const ScoredPairRef& x, const ScoredPairRef& y) {
            if (x.similarity != y.similarity)
                return ascending ? x.similarity < y.similarity : x.similarity > y.similarity;
            if (x.a != y.a)
                return x.a < y.a;
            return x.b < y.b;
        });
    };

    // positive universe: every cross-source same-entity pair
    std::vector<ScoredPairRef> pos_universe;
    for (std::size_t ia = 0; ia < bench.table_a.size(); ++ia) {
        std::size_t e = entity_of_a[ia];
        for (std::size_t ib : b_of_entity[e])
            pos_universe.push_back(
                {ia, ib, e, e, jaccard(tokens_a[ia], tokens_b[ib])});
    }
    order_pairs(pos_universe, /*ascending=*/true);

    std::size_t n_pos = config.pos_train + config.pos_val + config.pos_test;
    std::size_t n_pos_corner =
        static_cast<std::size_t>(std::llround(config.corner_case_fraction * n_pos));
    std::size_t pos_decile = pos_universe.size() / 10;
    if (n_pos > pos_universe.size())
        throw std::invalid_argument("synth: more positive pairs requested than exist");
    if (n_pos_corner > pos_decile)
        throw std::invalid_argument("synth: corner-case positives exceed the bottom decile");
    if (n_pos - n_pos_corner > pos_universe.size() - pos_decile)
        throw std::invalid_argument("synth: non-corner positives exceed the remaining pool");

    std::vector<ScoredPairRef> pos_corner_pool(pos_universe.begin(),
                                               pos_universe.begin() + pos_decile);
    std::vector<ScoredPairRef> pos_regular_pool(pos_universe.begin() + pos_decile,
                                                pos_universe.end());
    auto selected_pos = sample_without_replacement(pos_corner_pool, n_pos_corner, rng);
    auto regular_pos = sample_without_replacement(pos_regular_pool, n_pos - n_pos_corner, rng);
    selected_pos.insert(selected_pos.end(), regular_pos.begin(), regular_pos.end());
    std::shuffle(selected_pos.begin(), selected_pos.end(), rng);

    // test pairs prefer entities that keep another (train/val) pair, mirroring
    // a mostly-seen test split
    std::vector<char> is_test(selected_pos.size(), 0);
    {
        std::unordered_map<std::size_t, std::size_t> entity_pair_count;
        for (const auto& p : selected_pos)
            ++entity_pair_count[p.entity_a];
        std::unordered_set<std::size_t> anchored;
        std::vector<std::size_t> preferred, fallback;
        for (std::size_t i = 0; i < selected_pos.size(); ++i) {
            std::size_t e = selected_pos[i].entity_a;
            if (entity_pair_count[e] >= 2 && anchored.count(e))
                preferred.push_back(i);
            else {
                anchored.insert(e);
                fallback.push_back(i);
            }
        }
        std::size_t assigned = 0;
        for (std::size_t i : preferred) {
            if (assigned == config.pos_test)
                break;
            is_test[i] = 1;
            ++assigned;
        }
        for (std::size_t i : fallback) {
            if (assigned == config.pos_test)
                break;
            is_test[i] = 1;
            ++assigned;
        }
    }

    {
        std::size_t train_left = config.pos_train, val_left = config.pos_val;
        for (std::size_t i = 0; i < selected_pos.size(); ++i) {
            const auto& p = selected_pos[i];
            Split split;
            if (is_test[i]) {
                split = Split::Test;
            } else if (train_left) {
                split = Split::Train;
                --train_left;
            } else if (val_left) {
                split = Split::Val;
                --val_left;
            } else {
                split = Split::Test;
            }
            bench.gt.pairs.push_back({bench.table_a.records[p.a].id,
                                      bench.table_b.records[p.b].id, true, split});
        }
    }

    // negative pool: same-family cross-entity pairs plus random cross-entity pairs
    std::vector<ScoredPairRef> neg_pool;
    {
        std::set<std::pair<std::size_t, std::size_t>> seen;
        std::vector<std::size_t> non_filler_b;
        for (std::size_t ib = 0; ib < bench.table_b.size(); ++ib)
            if (entity_of_b[ib] < config.n_entities)
                non_filler_b.push_back(ib);

        for (std::size_t ia = 0; ia < bench.table_a.size(); ++ia) {
            std::size_t ea = entity_of_a[ia];
            std::size_t family = bases[ea].family;
            std::size_t family_begin = family * kFamilySize;
            std::size_t family_end =
                std::min(config.n_entities, family_begin + kFamilySize);
            for (std::size_t e = family_begin; e < family_end; ++e) {
                if (e == ea)
                    continue;
                for (std::size_t ib : b_of_entity[e])
                    if (seen.emplace(ia, ib).second)
                        neg_pool.push_back(
                            {ia, ib, ea, e, jaccard(tokens_a[ia], tokens_b[ib])});
            }
            if (!non_filler_b.empty()) {
                std::uniform_int_distribution<std::size_t> pick(0, non_filler_b.size() - 1);
                for (int r = 0; r < 10; ++r) {
                    std::size_t ib = non_filler_b[pick(rng)];
                    if (entity_of_b[ib] == ea)
                        continue;
                    if (seen.emplace(ia, ib).second)
                        neg_pool.push_back({ia, ib, ea, entity_of_b[ib],
                                            jaccard(tokens_a[ia], tokens_b[ib])});
                }
            }
        }
    }
    order_pairs(neg_pool, /*ascending=*/false);

    std::size_t n_neg = config.neg_train + config.neg_val + config.neg_test;
    std::size_t n_neg_corner =
        static_cast<std::size_t>(std::llround(config.corner_case_fraction * n_neg));
    std::size_t neg_decile = neg_pool.size() / 10;
    if (n_neg > neg_pool.size())
        throw std::invalid_argument("synth: more negative pairs requested than exist");
    if (n_neg_corner > neg_decile)
        throw std::invalid_argument("synth: corner-case negatives exceed the top decile");
    if (n_neg - n_neg_corner > neg_pool.size() - neg_decile)
        throw std::invalid_argument("synth: non-corner negatives exceed the remaining pool");

    std::vector<ScoredPairRef> neg_corner_pool(neg_pool.begin(), neg_pool.begin() + neg_decile);
    std::vector<ScoredPairRef> neg_regular_pool(neg_pool.begin() + neg_decile, neg_pool.end());
    auto selected_neg = sample_without_replacement(neg_corner_pool, n_neg_corner, rng);
    auto regular_neg = sample_without_replacement(neg_regular_pool, n_neg - n_neg_corner, rng);
    selected_neg.insert(selected_neg.end(), regular_neg.begin(), regular_neg.end());
    std::shuffle(selected_neg.begin(), selected_neg.end(), rng);

    for (std::size_t i = 0; i < selected_neg.size(); ++i) {
        const auto& p = selected_neg[i];
        Split split = i < config.neg_train                    ? Split::Train
                      : i < config.neg_train + config.neg_val ? Split::Val
                                                              : Split::Test;
        bench.gt.pairs.push_back(
            {bench.table_a.records[p.a].id, bench.table_b.records[p.b].id, false, split});
    }
    return bench;
}

VerifyReport verify_benchmark(const Table& table_a, const Table& table_b,
                              const GroundTruth& gt,
                              const std::vector<std::string>* filler_ids) {
    VerifyReport report;
    auto complain = [&](const std::string& what) { report.violations.push_back(what); };

    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& p : gt.pairs) {
        if (!table_a.contains(p.id_a))
            complain("pair references unknown A id '" + p.id_a + "'");
        if (!table_b.contains(p.id_b))
            complain("pair references unknown B id '" + p.id_b + "'");
        if (!seen.emplace(p.id_a, p.id_b).second)
            complain("pair (" + p.id_a + "," + p.id_b +
                     ") appears more than once across splits/labels");
    }

    if (filler_ids) {
        std::unordered_set<std::string> filler(filler_ids->begin(), filler_ids->end());
        for (const auto& p : gt.pairs)
            if (p.positive && filler.count(p.id_b))
                complain("filler record '" + p.id_b + "' appears in a positive pair");
    }

    report.stats = dataset_statistics(table_a, table_b, gt);
    return report;
}

std::string VerifyReport::to_string() const {
    std::ostringstream out;
    out << "violations=" << violations.size() << "\n";
    for (const auto& v : violations)
        out << "violation: " << v << "\n";
    out << stats_to_kv(stats);
    return out.str();
}

}  // namespace scblock

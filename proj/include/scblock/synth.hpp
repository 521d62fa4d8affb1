#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scblock/datamodel.hpp"

namespace scblock {

/// Controls the synthetic two-table benchmark. Entities come in families that
/// share token pools, records perturb an entity's base token multiset, and
/// dataset B is padded with filler records drawn from a disjoint pool.
struct SynthConfig {
    std::size_t n_entities = 500;
    int a_records_min = 1;
    int a_records_max = 1;
    int b_records_min = 2;
    int b_records_max = 10;  // caps max matching neighbours
    std::size_t base_vocabulary = 5000;
    int tokens_per_record = 14;
    double corner_case_fraction = 0.8;
    std::size_t n_filler_b = 2000;
    std::size_t pos_train = 240, pos_val = 60, pos_test = 60;
    std::size_t neg_train = 1200, neg_val = 400, neg_test = 400;
    uint64_t seed = 7;

    void validate() const;
    std::string to_kv() const;
};

struct GeneratedBenchmark {
    Table table_a;
    Table table_b;
    GroundTruth gt;
    std::vector<std::string> filler_ids;  // B records outside every positive pair
};

/// Deterministic in the config (seed included). Corner-case selection follows
/// token-overlap deciles: hardest tenth of same-entity pairs for positives,
/// most-similar tenth of cross-entity pairs for negatives.
GeneratedBenchmark generate_benchmark(const SynthConfig& config);

struct VerifyReport {
    std::vector<std::string> violations;
    DatasetStats stats;

    bool ok() const { return violations.empty(); }
    std::string to_string() const;
};

/// Checks id resolution, duplicate/conflicting pairs, split disjointness and,
/// when filler ids are supplied, filler isolation from G_P. Violations are
/// reported, never thrown.
VerifyReport verify_benchmark(const Table& table_a, const Table& table_b,
                              const GroundTruth& gt,
                              const std::vector<std::string>* filler_ids = nullptr);

}  // namespace scblock

#pragma once

#include <optional>
#include <string>

#include "scblock/eval.hpp"

namespace scblock {

enum class BlockerKind { ScBlock, SimClr, Bm25, Bm25Tri };
enum class MatcherKind { SupconHead, Threshold };

const char* to_string(BlockerKind kind);
const char* to_string(MatcherKind kind);
BlockerKind parse_blocker_kind(const std::string& text);
MatcherKind parse_matcher_kind(const std::string& text);

struct BlockerSpec {
    BlockerKind kind = BlockerKind::ScBlock;
    TrainingConfig training;  // sc-block and simclr only
    double bm25_k1 = 1.2;
    double bm25_b = 0.75;
    std::optional<int> fixed_k;  // disables tuning when set
    double pc_threshold = 0.995;
    int k_max = 50;
    bool strict_exceeds = true;
};

struct MatcherSpec {
    MatcherKind kind = MatcherKind::SupconHead;
    MatchHeadConfig head;
    double cosine_threshold = 0.5;
    // Encoder trained for the matcher when the blocker does not provide one
    // (lexical blockers); NN blockers share their encoder with the matcher.
    TrainingConfig encoder_training;
};

struct PipelineReport {
    std::string dataset;
    std::string blocker;
    std::string matcher;

    int k = 0;
    bool k_tuned = false;
    bool pc_threshold_reached = true;
    std::size_t candidate_count = 0;

    double pc = 0.0;
    double pq = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;

    double btt_seconds = 0.0;
    double blocking_seconds = 0.0;
    double tune_seconds = 0.0;  // k search on the validation split; not in RT
    double matcher_training_seconds = 0.0;
    double matching_seconds = 0.0;

    bool timed_out = false;
    std::string timed_out_phase;

    // Runtime excludes all training time and the k search.
    double rt_seconds() const { return blocking_seconds + matching_seconds; }
    double btt_rt_seconds() const { return btt_seconds + rt_seconds(); }

    std::string to_kv() const;
    static std::string table_header();
    std::string to_table_row() const;
};

/// Trains the blocker when trainable, tunes k on the validation split (unless
/// fixed), blocks, trains the matcher on train pairs, matches and evaluates on
/// the test split. Phases run sequentially under a monotonic clock; a phase
/// ending past the timeout aborts the run with a partial report.
PipelineReport run_pipeline(const BlockerSpec& blocker_spec, const MatcherSpec& matcher_spec,
                            const Table& table_a, const Table& table_b, const GroundTruth& gt,
                            double timeout_seconds = 10800.0,
                            const std::string& dataset_name = "");

void save_report(const PipelineReport& report, const std::string& path);

}  // namespace scblock

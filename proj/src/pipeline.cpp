#include "scblock/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "scblock/labeling.hpp"

namespace scblock {

const char* to_string(BlockerKind kind) {
    switch (kind) {
        case BlockerKind::ScBlock: return "sc-block";
        case BlockerKind::SimClr: return "simclr";
        case BlockerKind::Bm25: return "bm25";
        case BlockerKind::Bm25Tri: return "bm25-3";
    }
    return "?";
}

const char* to_string(MatcherKind kind) {
    return kind == MatcherKind::SupconHead ? "supcon-head" : "threshold";
}

BlockerKind parse_blocker_kind(const std::string& text) {
    if (text == "sc-block")
        return BlockerKind::ScBlock;
    if (text == "simclr")
        return BlockerKind::SimClr;
    if (text == "bm25")
        return BlockerKind::Bm25;
    if (text == "bm25-3")
        return BlockerKind::Bm25Tri;
    throw std::invalid_argument("unknown blocker '" + text +
                                "' (expected sc-block/simclr/bm25/bm25-3)");
}

MatcherKind parse_matcher_kind(const std::string& text) {
    if (text == "supcon-head")
        return MatcherKind::SupconHead;
    if (text == "threshold")
        return MatcherKind::Threshold;
    throw std::invalid_argument("unknown matcher '" + text +
                                "' (expected supcon-head/threshold)");
}

namespace {

bool is_nn_blocker(BlockerKind kind) {
    return kind == BlockerKind::ScBlock || kind == BlockerKind::SimClr;
}

/// Builds corpora for encoder training. Supervised mode labels records via the
/// correspondence graph; self-supervised mode sees every record unlabeled.
std::pair<SourceAwareCorpus, SourceAwareCorpus> corpora_for_mode(
    const Table& table_a, const Table& table_b, const GroundTruth& gt,
    TrainingConfig::Mode mode) {
    GroundTruth effective;
    if (mode == TrainingConfig::Mode::Supervised)
        effective = gt;
    auto graph = build_correspondence_graph(table_a, table_b, effective);
    auto labeling = assign_entity_labels(graph);
    return build_source_aware_corpora(labeling, table_a, table_b);
}

EmbeddingModel train_encoder(const Table& table_a, const Table& table_b,
                             const GroundTruth& gt, const TrainingConfig& config,
                             double* seconds) {
    auto [corpus_a, corpus_b] = corpora_for_mode(table_a, table_b, gt, config.mode);
    TrainResult result = train_blocker(table_a, table_b, corpus_a, corpus_b, config);
    if (seconds)
        *seconds = result.training_seconds;
    return std::move(result.model);
}

class PhaseClock {
public:
    explicit PhaseClock(double timeout_seconds) : timeout_(timeout_seconds) {
        start_ = std::chrono::steady_clock::now();
        last_ = start_;
    }

    // seconds spent since the previous mark
    double mark() {
        auto now = std::chrono::steady_clock::now();
        double s = std::chrono::duration<double>(now - last_).count();
        last_ = now;
        return s;
    }

    bool expired() const {
        double total =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        return total > timeout_;
    }

private:
    double timeout_;
    std::chrono::steady_clock::time_point start_;
    std::chrono::steady_clock::time_point last_;
};

}  // namespace

PipelineReport run_pipeline(const BlockerSpec& blocker_spec, const MatcherSpec& matcher_spec,
                            const Table& table_a, const Table& table_b, const GroundTruth& gt,
                            double timeout_seconds, const std::string& dataset_name) {
    PipelineReport report;
    report.dataset = dataset_name;
    report.blocker = to_string(blocker_spec.kind);
    report.matcher = to_string(matcher_spec.kind);

    PhaseClock clock(timeout_seconds);
    auto abort_if_expired = [&](const char* phase) {
        if (clock.expired()) {
            report.timed_out = true;
            report.timed_out_phase = phase;
            return true;
        }
        return false;
    };

    // Phase 1: blocker training (BTT); untrained blockers report 0.
    EmbeddingModel blocker_model;
    if (is_nn_blocker(blocker_spec.kind)) {
        TrainingConfig config = blocker_spec.training;
        config.mode = blocker_spec.kind == BlockerKind::ScBlock
                          ? TrainingConfig::Mode::Supervised
                          : TrainingConfig::Mode::SelfSupervised;
        blocker_model = train_encoder(table_a, table_b, gt, config, &report.btt_seconds);
    }
    clock.mark();
    if (abort_if_expired("blocker-training"))
        return report;

    // Phase 2: blocker setup (embedding/indexing counts toward blocking time).
    std::unique_ptr<Blocker> blocker;
    switch (blocker_spec.kind) {
        case BlockerKind::ScBlock:
        case BlockerKind::SimClr:
            blocker = std::make_unique<NnBlocker>(to_string(blocker_spec.kind), blocker_model,
                                                  table_a, table_b);
            break;
        case BlockerKind::Bm25:
            blocker = std::make_unique<Bm25Blocker>(table_a, table_b, Bm25Mode::Whitespace,
                                                    blocker_spec.bm25_k1, blocker_spec.bm25_b);
            break;
        case BlockerKind::Bm25Tri:
            blocker = std::make_unique<Bm25Blocker>(table_a, table_b, Bm25Mode::Trigram,
                                                    blocker_spec.bm25_k1, blocker_spec.bm25_b);
            break;
    }
    report.blocking_seconds += clock.mark();
    if (abort_if_expired("blocker-setup"))
        return report;

    // Phase 3: k from the validation split unless pinned.
    if (blocker_spec.fixed_k) {
        report.k = *blocker_spec.fixed_k;
        report.k_tuned = false;
        report.pc_threshold_reached = true;
        clock.mark();
    } else {
        TuneResult tuned = tune_k(*blocker, gt, blocker_spec.pc_threshold, blocker_spec.k_max,
                                  blocker_spec.strict_exceeds);
        report.k = tuned.k;
        report.k_tuned = true;
        report.pc_threshold_reached = tuned.reached_threshold;
        report.tune_seconds = clock.mark();
    }
    if (abort_if_expired("tune-k"))
        return report;

    // Phase 4: blocking.
    CandidateSet candidates = blocker->block(report.k);
    report.candidate_count = candidates.pairs.size();
    report.blocking_seconds += clock.mark();
    if (abort_if_expired("blocking"))
        return report;

    // Phase 5: matcher training. Lexical blockers bring no encoder, so the
    // matcher trains its own here; that cost is matcher training time, not BTT.
    const EmbeddingModel* matcher_model = &blocker_model;
    EmbeddingModel matcher_own_model;
    MatchHead head;
    if (!is_nn_blocker(blocker_spec.kind)) {
        double seconds = 0.0;
        matcher_own_model =
            train_encoder(table_a, table_b, gt, matcher_spec.encoder_training, &seconds);
        matcher_model = &matcher_own_model;
        report.matcher_training_seconds += seconds;
    }
    if (matcher_spec.kind == MatcherKind::SupconHead)
        head = train_match_head(*matcher_model, table_a, table_b, gt, matcher_spec.head);
    report.matcher_training_seconds += clock.mark();
    if (abort_if_expired("matcher-training"))
        return report;

    // Phase 6: matching.
    MatchSet matches;
    if (matcher_spec.kind == MatcherKind::SupconHead)
        matches = apply_matcher(head, *matcher_model, table_a, table_b, candidates);
    else
        matches = threshold_matcher(*matcher_model, table_a, table_b, candidates,
                                    matcher_spec.cosine_threshold);
    report.matching_seconds = clock.mark();
    if (abort_if_expired("matching"))
        return report;

    // Phase 7: test-split evaluation.
    report.pc = pairs_completeness(candidates, gt, Split::Test);
    report.pq = pairs_quality(candidates, gt, Split::Test);
    MatchingMetrics mm = matching_metrics(matches, gt, Split::Test);
    report.precision = mm.precision;
    report.recall = mm.recall;
    report.f1 = mm.f1;
    return report;
}

namespace {

std::string fmt(double v, const char* spec = "%.6f") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

}  // namespace

std::string PipelineReport::to_kv() const {
    std::ostringstream out;
    out << "dataset=" << dataset << "\n"
        << "blocker=" << blocker << "\n"
        << "matcher=" << matcher << "\n"
        << "k=" << k << "\n"
        << "k_tuned=" << (k_tuned ? 1 : 0) << "\n"
        << "pc_threshold_reached=" << (pc_threshold_reached ? 1 : 0) << "\n"
        << "candidates=" << candidate_count << "\n"
        << "pc=" << fmt(pc) << "\n"
        << "pq=" << fmt(pq) << "\n"
        << "precision=" << fmt(precision) << "\n"
        << "recall=" << fmt(recall) << "\n"
        << "f1=" << fmt(f1) << "\n"
        << "btt_seconds=" << fmt(btt_seconds) << "\n"
        << "blocking_seconds=" << fmt(blocking_seconds) << "\n"
        << "tune_seconds=" << fmt(tune_seconds) << "\n"
        << "matcher_training_seconds=" << fmt(matcher_training_seconds) << "\n"
        << "matching_seconds=" << fmt(matching_seconds) << "\n"
        << "rt_seconds=" << fmt(rt_seconds()) << "\n"
        << "btt_rt_seconds=" << fmt(btt_rt_seconds()) << "\n"
        << "timed_out=" << (timed_out ? 1 : 0) << "\n"
        << "timed_out_phase=" << timed_out_phase << "\n";
    return out.str();
}

std::string PipelineReport::table_header() {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-10s %-12s %3s %10s %8s %10s %10s %10s", "blocker",
                  "matcher", "k", "|C|", "F1", "RT", "BTT", "BTT+RT");
    return buf;
}

std::string PipelineReport::to_table_row() const {
    char buf[160];
    if (timed_out) {
        std::snprintf(buf, sizeof(buf), "%-10s %-12s %3d %10zu %8s %10s %10s %10s",
                      blocker.c_str(), matcher.c_str(), k, candidate_count, "-", "time out",
                      fmt(btt_seconds, "%.2f").c_str(), "-");
        return buf;
    }
    std::snprintf(buf, sizeof(buf), "%-10s %-12s %3d %10zu %8s %10s %10s %10s", blocker.c_str(),
                  matcher.c_str(), k, candidate_count, fmt(f1, "%.4f").c_str(),
                  fmt(rt_seconds(), "%.2f").c_str(), fmt(btt_seconds, "%.2f").c_str(),
                  fmt(btt_rt_seconds(), "%.2f").c_str());
    return buf;
}

void save_report(const PipelineReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write file: " + path);
    out << report.to_kv();
}

}  // namespace scblock

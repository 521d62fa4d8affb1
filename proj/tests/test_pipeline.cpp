#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "scblock/pipeline.hpp"
#include "scblock/synth.hpp"
#include "testutil.hpp"

using namespace scblock;

namespace {

// Fully separable toy dataset: every entity has a private vocabulary, so a
// trained blocker plus a cosine threshold must resolve it perfectly.
struct SeparableDataset {
    Table table_a;
    Table table_b;
    GroundTruth gt;

    SeparableDataset() {
        table_a.source = Source::A;
        table_a.schema = {"name"};
        table_b.source = Source::B;
        table_b.schema = {"name"};
        const char* vocab[6] = {"aa bb cc", "dd ee ff", "gg hh ii",
                                "jj kk ll", "mm nn oo", "pp qq rr"};
        for (int e = 0; e < 6; ++e) {
            std::string id_a = "a" + std::to_string(e);
            std::string id_b = "b" + std::to_string(e);
            table_a.records.push_back({id_a, Source::A, {std::string(vocab[e])}});
            table_b.records.push_back({id_b, Source::B, {std::string(vocab[e])}});
        }
        table_a.rebuild_index();
        table_b.rebuild_index();

        for (int e = 0; e < 6; ++e) {
            Split split = e < 3 ? Split::Train : (e < 5 ? Split::Val : Split::Test);
            gt.pairs.push_back({"a" + std::to_string(e), "b" + std::to_string(e), true, split});
            // one negative per entity against its neighbour
            gt.pairs.push_back({"a" + std::to_string(e), "b" + std::to_string((e + 1) % 6),
                                false, split});
        }
    }
};

BlockerSpec fast_sc_block() {
    BlockerSpec spec;
    spec.kind = BlockerKind::ScBlock;
    spec.training.dim = 16;
    spec.training.epochs = 30;
    spec.training.batch_size = 4;
    spec.training.seed = 11;
    spec.k_max = 6;
    return spec;
}

}  // namespace

TEST_CASE("separable dataset: SC-Block with a threshold matcher reaches F1 = 1") {
    SeparableDataset ds;
    MatcherSpec matcher;
    matcher.kind = MatcherKind::Threshold;
    matcher.cosine_threshold = 0.9;

    PipelineReport report =
        run_pipeline(fast_sc_block(), matcher, ds.table_a, ds.table_b, ds.gt, 600.0, "toy");
    CHECK_FALSE(report.timed_out);
    CHECK(report.pc == 1.0);
    CHECK(report.f1 == 1.0);
    CHECK(report.precision == 1.0);
    CHECK(report.recall == 1.0);
    CHECK(report.btt_seconds > 0.0);
    CHECK(report.k_tuned);
}

TEST_CASE("BM25 blockers report zero BTT and BTT+RT equals RT") {
    SeparableDataset ds;
    BlockerSpec blocker;
    blocker.kind = BlockerKind::Bm25Tri;
    blocker.k_max = 6;
    MatcherSpec matcher;
    matcher.kind = MatcherKind::Threshold;
    matcher.cosine_threshold = 0.9;
    matcher.encoder_training.dim = 16;
    matcher.encoder_training.epochs = 10;
    matcher.encoder_training.batch_size = 4;

    PipelineReport report =
        run_pipeline(blocker, matcher, ds.table_a, ds.table_b, ds.gt, 600.0, "toy");
    CHECK(report.btt_seconds == 0.0);
    CHECK(report.btt_rt_seconds() == doctest::Approx(report.rt_seconds()));
    // the threshold matcher still needed an encoder, charged to matcher training
    CHECK(report.matcher_training_seconds > 0.0);
}

TEST_CASE("report arithmetic: BTT+RT = BTT + RT and RT = blocking + matching") {
    SeparableDataset ds;
    MatcherSpec matcher;
    matcher.kind = MatcherKind::SupconHead;
    matcher.head.epochs = 50;
    PipelineReport report =
        run_pipeline(fast_sc_block(), matcher, ds.table_a, ds.table_b, ds.gt, 600.0, "toy");
    CHECK(report.rt_seconds() ==
          doctest::Approx(report.blocking_seconds + report.matching_seconds));
    CHECK(report.btt_rt_seconds() == doctest::Approx(report.btt_seconds + report.rt_seconds()));
}

TEST_CASE("fixed k skips tuning") {
    SeparableDataset ds;
    BlockerSpec blocker = fast_sc_block();
    blocker.fixed_k = 2;
    MatcherSpec matcher;
    matcher.kind = MatcherKind::Threshold;
    PipelineReport report =
        run_pipeline(blocker, matcher, ds.table_a, ds.table_b, ds.gt, 600.0, "toy");
    CHECK(report.k == 2);
    CHECK_FALSE(report.k_tuned);
    CHECK(report.candidate_count == 12);  // 6 queries * k=2
    CHECK(report.tune_seconds == 0.0);
}

TEST_CASE("a zero timeout aborts with a partial report") {
    SeparableDataset ds;
    MatcherSpec matcher;
    matcher.kind = MatcherKind::Threshold;
    PipelineReport report =
        run_pipeline(fast_sc_block(), matcher, ds.table_a, ds.table_b, ds.gt, 0.0, "toy");
    CHECK(report.timed_out);
    CHECK_FALSE(report.timed_out_phase.empty());
    CHECK(report.f1 == 0.0);  // evaluation never ran
}

TEST_CASE("reports serialize as key/value documents and table rows") {
    SeparableDataset ds;
    MatcherSpec matcher;
    matcher.kind = MatcherKind::Threshold;
    matcher.cosine_threshold = 0.9;
    PipelineReport report =
        run_pipeline(fast_sc_block(), matcher, ds.table_a, ds.table_b, ds.gt, 600.0, "toy");

    std::string kv = report.to_kv();
    CHECK(kv.find("blocker=sc-block\n") != std::string::npos);
    CHECK(kv.find("matcher=threshold\n") != std::string::npos);
    CHECK(kv.find("f1=1.000000\n") != std::string::npos);
    CHECK(kv.find("rt_seconds=") != std::string::npos);

    std::string row = report.to_table_row();
    CHECK(row.find("sc-block") != std::string::npos);

    testutil::TempDir tmp;
    save_report(report, tmp.file("report.txt"));
    CHECK(testutil::read_file(tmp.file("report.txt")) == kv);
}

TEST_CASE("pipeline runs end to end on a generated benchmark") {
    SynthConfig config;
    config.n_entities = 30;
    config.b_records_min = 2;
    config.b_records_max = 4;
    config.base_vocabulary = 600;
    config.corner_case_fraction = 0.3;
    config.n_filler_b = 20;
    config.pos_train = 6;
    config.pos_val = 2;
    config.pos_test = 2;
    config.neg_train = 30;
    config.neg_val = 8;
    config.neg_test = 8;
    config.seed = 9;
    GeneratedBenchmark bench = generate_benchmark(config);

    BlockerSpec blocker = fast_sc_block();
    blocker.training.epochs = 10;
    blocker.training.batch_size = 16;
    blocker.k_max = 10;
    MatcherSpec matcher;
    matcher.kind = MatcherKind::SupconHead;
    matcher.head.epochs = 100;

    PipelineReport report = run_pipeline(blocker, matcher, bench.table_a, bench.table_b,
                                         bench.gt, 600.0, "synth");
    CHECK_FALSE(report.timed_out);
    CHECK(report.candidate_count ==
          expected_candidate_count(bench.table_a.size(), bench.table_b.size(), report.k));
    CHECK(report.pc >= 0.0);
    CHECK(report.pc <= 1.0);
    CHECK(report.f1 >= 0.0);
    CHECK(report.f1 <= 1.0);
}

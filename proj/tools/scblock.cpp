// Command-line front end: dataset generation, statistics, blocker training,
// blocking, k tuning, matching and full pipeline runs.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "scblock/bm25.hpp"
#include "scblock/datamodel.hpp"
#include "scblock/embedder.hpp"
#include "scblock/eval.hpp"
#include "scblock/labeling.hpp"
#include "scblock/matcher.hpp"
#include "scblock/pipeline.hpp"
#include "scblock/synth.hpp"
#include "scblock/vecindex.hpp"

namespace {

using namespace scblock;

struct CommonPaths {
    std::string table_a;
    std::string table_b;
    std::string pairs;
};

void add_table_options(CLI::App* cmd, CommonPaths& paths, bool need_pairs) {
    cmd->add_option("--table-a", paths.table_a, "table A file")->required();
    cmd->add_option("--table-b", paths.table_b, "table B file")->required();
    auto* pairs = cmd->add_option("--pairs", paths.pairs, "ground-truth pair file");
    if (need_pairs)
        pairs->required();
}

struct LoadedDataset {
    Table table_a;
    Table table_b;
    GroundTruth gt;
};

LoadedDataset load_dataset(const CommonPaths& paths, bool need_pairs) {
    LoadedDataset ds;
    ds.table_a = load_table(paths.table_a, Source::A);
    ds.table_b = load_table(paths.table_b, Source::B);
    if (!paths.pairs.empty())
        ds.gt = load_ground_truth(paths.pairs, ds.table_a, ds.table_b);
    else if (need_pairs)
        throw std::runtime_error("--pairs is required for this command");
    return ds;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write file: " + path);
    out << text;
}

TrainingConfig* add_training_options(CLI::App* cmd, TrainingConfig& config) {
    cmd->add_option("--epochs", config.epochs, "training epochs");
    cmd->add_option("--batch-size", config.batch_size, "records per batch (pre-duplication)");
    cmd->add_option("--dim", config.dim, "embedding dimension");
    cmd->add_option("--temperature", config.temperature, "softmax temperature");
    cmd->add_option("--lr", config.learning_rate, "learning rate");
    cmd->add_option("--seed", config.seed, "random seed");
    return &config;
}

int run(int argc, char** argv) {
    CLI::App app{"supervised contrastive blocking for entity resolution"};
    app.require_subcommand(1);

    // ---- train ----
    auto* train_cmd = app.add_subcommand("train", "train a blocker embedding model");
    CommonPaths train_paths;
    add_table_options(train_cmd, train_paths, true);
    TrainingConfig train_config;
    add_training_options(train_cmd, train_config);
    std::string train_mode = "sc-block";
    train_cmd->add_option("--blocker", train_mode, "sc-block or simclr")
        ->check(CLI::IsMember({"sc-block", "simclr"}));
    std::string train_out = "model.txt";
    train_cmd->add_option("--out", train_out, "model output path");
    train_cmd->callback([&] {
        auto ds = load_dataset(train_paths, true);
        train_config.mode = train_mode == "sc-block" ? TrainingConfig::Mode::Supervised
                                                     : TrainingConfig::Mode::SelfSupervised;
        GroundTruth effective =
            train_config.mode == TrainingConfig::Mode::Supervised ? ds.gt : GroundTruth{};
        auto graph = build_correspondence_graph(ds.table_a, ds.table_b, effective);
        auto labeling = assign_entity_labels(graph);
        auto [corpus_a, corpus_b] = build_source_aware_corpora(labeling, ds.table_a, ds.table_b);
        TrainResult result =
            train_blocker(ds.table_a, ds.table_b, corpus_a, corpus_b, train_config);
        for (const auto& w : result.warnings)
            std::cerr << "warning: " << w << "\n";
        save_model(result.model, train_out);
        std::cout << "model=" << train_out << "\n"
                  << "btt_seconds=" << result.training_seconds << "\n"
                  << "final_epoch_loss=" << result.final_epoch_loss << "\n";
    });

    // ---- block ----
    auto* block_cmd = app.add_subcommand("block", "produce a candidate set");
    CommonPaths block_paths;
    add_table_options(block_cmd, block_paths, false);
    std::string block_blocker = "sc-block";
    block_cmd->add_option("--blocker", block_blocker, "sc-block, simclr, bm25 or bm25-3")
        ->check(CLI::IsMember({"sc-block", "simclr", "bm25", "bm25-3"}));
    std::string block_model;
    block_cmd->add_option("--model", block_model, "trained model path (NN blockers)");
    int block_k = 0;
    auto* block_k_opt = block_cmd->add_option("--k", block_k, "fixed neighbour count");
    bool block_tune = false;
    auto* block_tune_opt =
        block_cmd->add_flag("--tune-k", block_tune, "tune k on the validation split");
    block_tune_opt->excludes(block_k_opt);
    double block_pc_threshold = 0.995;
    block_cmd->add_option("--pc-threshold", block_pc_threshold, "validation PC target");
    int block_k_max = 50;
    block_cmd->add_option("--k-max", block_k_max, "k search cap");
    std::string block_out = "candidates.csv";
    block_cmd->add_option("--out", block_out, "candidate output path");
    block_cmd->callback([&] {
        if (!block_tune && block_k < 1)
            throw CLI::ValidationError("--k", "provide --k >= 1 or --tune-k");
        auto ds = load_dataset(block_paths, block_tune);

        std::unique_ptr<Blocker> blocker;
        EmbeddingModel model;
        if (block_blocker == "sc-block" || block_blocker == "simclr") {
            if (block_model.empty())
                throw CLI::ValidationError("--model", "NN blockers need a trained --model");
            model = load_model(block_model);
            blocker = std::make_unique<NnBlocker>(block_blocker, model, ds.table_a, ds.table_b);
        } else {
            blocker = std::make_unique<Bm25Blocker>(
                ds.table_a, ds.table_b,
                block_blocker == "bm25" ? Bm25Mode::Whitespace : Bm25Mode::Trigram);
        }

        int k = block_k;
        if (block_tune) {
            TuneResult tuned = tune_k(*blocker, ds.gt, block_pc_threshold, block_k_max);
            k = tuned.k;
            std::cout << "k=" << tuned.k << "\n"
                      << "val_pc=" << tuned.val_pc << "\n"
                      << "pc_threshold_reached=" << (tuned.reached_threshold ? 1 : 0) << "\n";
        }
        CandidateSet candidates = blocker->block(k);
        save_candidates(candidates, block_out);
        std::cout << "candidates=" << candidates.pairs.size() << "\n"
                  << "out=" << block_out << "\n";
    });

    // ---- tune-k ----
    auto* tune_cmd = app.add_subcommand("tune-k", "report the smallest qualifying k");
    CommonPaths tune_paths;
    add_table_options(tune_cmd, tune_paths, true);
    std::string tune_blocker = "sc-block";
    tune_cmd->add_option("--blocker", tune_blocker, "sc-block, simclr, bm25 or bm25-3")
        ->check(CLI::IsMember({"sc-block", "simclr", "bm25", "bm25-3"}));
    std::string tune_model;
    tune_cmd->add_option("--model", tune_model, "trained model path (NN blockers)");
    double tune_pc_threshold = 0.995;
    tune_cmd->add_option("--pc-threshold", tune_pc_threshold, "validation PC target");
    int tune_k_max = 50;
    tune_cmd->add_option("--k-max", tune_k_max, "k search cap");
    tune_cmd->callback([&] {
        auto ds = load_dataset(tune_paths, true);
        std::unique_ptr<Blocker> blocker;
        EmbeddingModel model;
        if (tune_blocker == "sc-block" || tune_blocker == "simclr") {
            if (tune_model.empty())
                throw CLI::ValidationError("--model", "NN blockers need a trained --model");
            model = load_model(tune_model);
            blocker = std::make_unique<NnBlocker>(tune_blocker, model, ds.table_a, ds.table_b);
        } else {
            blocker = std::make_unique<Bm25Blocker>(
                ds.table_a, ds.table_b,
                tune_blocker == "bm25" ? Bm25Mode::Whitespace : Bm25Mode::Trigram);
        }
        TuneResult tuned = tune_k(*blocker, ds.gt, tune_pc_threshold, tune_k_max);
        std::cout << "k=" << tuned.k << "\n"
                  << "val_pc=" << tuned.val_pc << "\n"
                  << "pc_threshold_reached=" << (tuned.reached_threshold ? 1 : 0) << "\n";
    });

    // ---- match ----
    auto* match_cmd = app.add_subcommand("match", "classify a candidate set");
    CommonPaths match_paths;
    add_table_options(match_cmd, match_paths, false);
    std::string match_candidates;
    match_cmd->add_option("--candidates", match_candidates, "candidate set file")->required();
    std::string match_model;
    match_cmd->add_option("--model", match_model, "trained model path")->required();
    std::string match_matcher = "supcon-head";
    match_cmd->add_option("--matcher", match_matcher, "supcon-head or threshold")
        ->check(CLI::IsMember({"supcon-head", "threshold"}));
    double match_threshold = 0.5;
    match_cmd->add_option("--threshold", match_threshold,
                          "decision threshold (score or cosine)");
    std::string match_out = "matches.csv";
    match_cmd->add_option("--out", match_out, "match output path");
    match_cmd->callback([&] {
        bool needs_pairs = match_matcher == "supcon-head";
        auto ds = load_dataset(match_paths, needs_pairs);
        EmbeddingModel model = load_model(match_model);
        CandidateSet candidates = load_candidates(match_candidates);
        MatchSet matches;
        if (match_matcher == "supcon-head") {
            MatchHeadConfig head_config;
            head_config.threshold = match_threshold;
            MatchHead head = train_match_head(model, ds.table_a, ds.table_b, ds.gt, head_config);
            matches = apply_matcher(head, model, ds.table_a, ds.table_b, candidates);
        } else {
            matches = threshold_matcher(model, ds.table_a, ds.table_b, candidates,
                                        match_threshold);
        }
        save_matches(matches, match_out);
        std::cout << "matches=" << matches.match_count() << "\n"
                  << "out=" << match_out << "\n";
    });

    // ---- pipeline ----
    auto* pipe_cmd = app.add_subcommand("pipeline", "blocker + matcher end to end");
    CommonPaths pipe_paths;
    add_table_options(pipe_cmd, pipe_paths, true);
    BlockerSpec pipe_blocker;
    MatcherSpec pipe_matcher;
    std::string pipe_blocker_name = "sc-block";
    pipe_cmd->add_option("--blocker", pipe_blocker_name, "sc-block, simclr, bm25 or bm25-3")
        ->check(CLI::IsMember({"sc-block", "simclr", "bm25", "bm25-3"}));
    std::string pipe_matcher_name = "supcon-head";
    pipe_cmd->add_option("--matcher", pipe_matcher_name, "supcon-head or threshold")
        ->check(CLI::IsMember({"supcon-head", "threshold"}));
    add_training_options(pipe_cmd, pipe_blocker.training);
    int pipe_k = 0;
    auto* pipe_k_opt = pipe_cmd->add_option("--k", pipe_k, "fixed neighbour count");
    bool pipe_tune = false;
    auto* pipe_tune_opt =
        pipe_cmd->add_flag("--tune-k", pipe_tune, "tune k on the validation split (default)");
    pipe_tune_opt->excludes(pipe_k_opt);
    pipe_cmd->add_option("--pc-threshold", pipe_blocker.pc_threshold, "validation PC target");
    pipe_cmd->add_option("--k-max", pipe_blocker.k_max, "k search cap");
    double pipe_threshold = 0.5;
    pipe_cmd->add_option("--threshold", pipe_threshold, "matcher decision threshold");
    double pipe_timeout = 10800.0;
    pipe_cmd->add_option("--timeout", pipe_timeout, "pipeline timeout in seconds");
    std::string pipe_out;
    pipe_cmd->add_option("--out", pipe_out, "report output path");
    pipe_cmd->callback([&] {
        auto ds = load_dataset(pipe_paths, true);
        pipe_blocker.kind = parse_blocker_kind(pipe_blocker_name);
        pipe_matcher.kind = parse_matcher_kind(pipe_matcher_name);
        pipe_matcher.head.threshold = pipe_threshold;
        pipe_matcher.cosine_threshold = pipe_threshold;
        pipe_matcher.encoder_training = pipe_blocker.training;
        if (pipe_k > 0)
            pipe_blocker.fixed_k = pipe_k;
        PipelineReport report =
            run_pipeline(pipe_blocker, pipe_matcher, ds.table_a, ds.table_b, ds.gt,
                         pipe_timeout, std::filesystem::path(pipe_paths.table_a).stem().string());
        std::cout << PipelineReport::table_header() << "\n"
                  << report.to_table_row() << "\n";
        if (!pipe_out.empty()) {
            save_report(report, pipe_out);
            std::cout << "out=" << pipe_out << "\n";
        }
    });

    // ---- generate ----
    auto* gen_cmd = app.add_subcommand("generate", "write a synthetic benchmark dataset");
    SynthConfig gen_config;
    std::string gen_dir = ".";
    gen_cmd->add_option("--out", gen_dir, "output directory");
    gen_cmd->add_option("--entities", gen_config.n_entities, "entity count");
    gen_cmd->add_option("--b-min", gen_config.b_records_min, "min B records per entity");
    gen_cmd->add_option("--b-max", gen_config.b_records_max, "max B records per entity");
    gen_cmd->add_option("--vocab", gen_config.base_vocabulary, "base vocabulary size");
    gen_cmd->add_option("--tokens-per-record", gen_config.tokens_per_record,
                        "tokens per record");
    gen_cmd->add_option("--corner-fraction", gen_config.corner_case_fraction,
                        "corner-case fraction of labeled pairs");
    gen_cmd->add_option("--filler-b", gen_config.n_filler_b, "unmatched filler B records");
    gen_cmd->add_option("--pos-train", gen_config.pos_train, "positive train pairs");
    gen_cmd->add_option("--pos-val", gen_config.pos_val, "positive val pairs");
    gen_cmd->add_option("--pos-test", gen_config.pos_test, "positive test pairs");
    gen_cmd->add_option("--neg-train", gen_config.neg_train, "negative train pairs");
    gen_cmd->add_option("--neg-val", gen_config.neg_val, "negative val pairs");
    gen_cmd->add_option("--neg-test", gen_config.neg_test, "negative test pairs");
    gen_cmd->add_option("--seed", gen_config.seed, "random seed");
    gen_cmd->callback([&] {
        GeneratedBenchmark bench = generate_benchmark(gen_config);
        std::filesystem::create_directories(gen_dir);
        auto path = [&](const char* name) {
            return (std::filesystem::path(gen_dir) / name).string();
        };
        save_table(bench.table_a, path("tableA.csv"));
        save_table(bench.table_b, path("tableB.csv"));
        save_ground_truth(bench.gt, path("pairs.csv"));
        write_text(path("config.txt"), gen_config.to_kv());
        VerifyReport verify = verify_benchmark(bench.table_a, bench.table_b, bench.gt,
                                               &bench.filler_ids);
        write_text(path("verify.txt"), verify.to_string());
        std::cout << "out=" << gen_dir << "\n"
                  << "records_a=" << bench.table_a.size() << "\n"
                  << "records_b=" << bench.table_b.size() << "\n"
                  << "pairs=" << bench.gt.pairs.size() << "\n"
                  << "violations=" << verify.violations.size() << "\n";
    });

    // ---- stats ----
    auto* stats_cmd = app.add_subcommand("stats", "dataset statistics");
    CommonPaths stats_paths;
    add_table_options(stats_cmd, stats_paths, true);
    std::string stats_out;
    stats_cmd->add_option("--out", stats_out, "stats output path (default stdout)");
    stats_cmd->callback([&] {
        auto ds = load_dataset(stats_paths, true);
        DatasetStats stats = dataset_statistics(ds.table_a, ds.table_b, ds.gt);
        std::string kv = stats_to_kv(stats);
        if (stats_out.empty())
            std::cout << kv;
        else
            write_text(stats_out, kv);
    });

    CLI11_PARSE(app, argc, argv);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

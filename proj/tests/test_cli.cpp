// Drives the installed CLI binary end to end through a generate -> stats ->
// train -> block -> match -> pipeline flow in a scratch directory.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <string>

#include "testutil.hpp"

namespace {

int run_cli(const std::string& args) {
    std::string cmd = std::string(SCBLOCK_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    return std::system(cmd.c_str());
}

struct CliFixture {
    testutil::TempDir tmp;
    std::string data_args;

    CliFixture() {
        std::string gen = "generate --out " + tmp.file("data") +
                          " --entities 30 --b-min 2 --b-max 4 --vocab 600"
                          " --corner-fraction 0.3 --filler-b 20"
                          " --pos-train 6 --pos-val 2 --pos-test 2"
                          " --neg-train 30 --neg-val 8 --neg-test 8 --seed 9";
        REQUIRE(run_cli(gen) == 0);
        data_args = " --table-a " + tmp.file("data/tableA.csv") + " --table-b " +
                    tmp.file("data/tableB.csv") + " --pairs " + tmp.file("data/pairs.csv");
    }
};

}  // namespace

TEST_CASE("unknown subcommands and missing options fail with nonzero exit") {
    CHECK(run_cli("definitely-not-a-command") != 0);
    CHECK(run_cli("train") != 0);  // table paths missing
    CHECK(run_cli("block --table-a nope.csv --table-b nope.csv --k 1") != 0);
}

TEST_CASE("generate, stats, train, block, match and pipeline chain together") {
    CliFixture fx;

    SUBCASE("generated files verify clean and stats are reproducible") {
        std::string stats1 = fx.tmp.file("stats1.txt");
        std::string stats2 = fx.tmp.file("stats2.txt");
        REQUIRE(run_cli("stats" + fx.data_args + " --out " + stats1) == 0);
        REQUIRE(run_cli("stats" + fx.data_args + " --out " + stats2) == 0);
        std::string text = testutil::read_file(stats1);
        CHECK(text == testutil::read_file(stats2));
        CHECK(text.find("count_a=30") != std::string::npos);
        CHECK(text.find("pos_train=6") != std::string::npos);
        std::string verify = testutil::read_file(fx.tmp.file("data/verify.txt"));
        CHECK(verify.find("violations=0") != std::string::npos);
    }

    SUBCASE("training is reproducible byte for byte") {
        std::string train_args = fx.data_args +
                                 " --epochs 4 --batch-size 8 --dim 16 --seed 13 --out ";
        REQUIRE(run_cli("train" + train_args + fx.tmp.file("m1.txt")) == 0);
        REQUIRE(run_cli("train" + train_args + fx.tmp.file("m2.txt")) == 0);
        CHECK(testutil::read_file(fx.tmp.file("m1.txt")) ==
              testutil::read_file(fx.tmp.file("m2.txt")));
        CHECK(testutil::read_file(fx.tmp.file("m1.txt")).find("scblock-model v1") == 0);
    }

    SUBCASE("block, match and pipeline write their artifacts") {
        REQUIRE(run_cli("train" + fx.data_args +
                        " --epochs 4 --batch-size 8 --dim 16 --seed 13 --out " +
                        fx.tmp.file("model.txt")) == 0);

        REQUIRE(run_cli("block" + fx.data_args + " --blocker sc-block --model " +
                        fx.tmp.file("model.txt") + " --tune-k --k-max 8 --out " +
                        fx.tmp.file("cand.csv")) == 0);
        std::string cand = testutil::read_file(fx.tmp.file("cand.csv"));
        CHECK(cand.find("# blocker=sc-block") == 0);
        CHECK(cand.find("ltable_id,rtable_id") != std::string::npos);

        // determinism across runs: identical candidate files
        REQUIRE(run_cli("block" + fx.data_args + " --blocker sc-block --model " +
                        fx.tmp.file("model.txt") + " --tune-k --k-max 8 --out " +
                        fx.tmp.file("cand2.csv")) == 0);
        CHECK(cand == testutil::read_file(fx.tmp.file("cand2.csv")));

        REQUIRE(run_cli("block" + fx.data_args + " --blocker bm25-3 --k 3 --out " +
                        fx.tmp.file("cand_bm25.csv")) == 0);
        CHECK(testutil::read_file(fx.tmp.file("cand_bm25.csv")).find("# blocker=bm25-3") == 0);

        REQUIRE(run_cli("match" + fx.data_args + " --candidates " + fx.tmp.file("cand.csv") +
                        " --model " + fx.tmp.file("model.txt") +
                        " --matcher threshold --threshold 0.8 --out " +
                        fx.tmp.file("matches.csv")) == 0);
        CHECK(testutil::read_file(fx.tmp.file("matches.csv"))
                  .find("ltable_id,rtable_id,score,decision") == 0);

        REQUIRE(run_cli("pipeline" + fx.data_args +
                        " --blocker sc-block --matcher threshold --threshold 0.8"
                        " --epochs 4 --batch-size 8 --dim 16 --seed 13 --tune-k --k-max 8"
                        " --out " + fx.tmp.file("report.txt")) == 0);
        std::string report = testutil::read_file(fx.tmp.file("report.txt"));
        CHECK(report.find("blocker=sc-block") != std::string::npos);
        CHECK(report.find("rt_seconds=") != std::string::npos);
    }

    SUBCASE("conflicting k flags are rejected") {
        CHECK(run_cli("block" + fx.data_args + " --blocker bm25 --k 3 --tune-k --out " +
                      fx.tmp.file("x.csv")) != 0);
        CHECK(run_cli("block" + fx.data_args + " --blocker bm25 --out " +
                      fx.tmp.file("x.csv")) != 0);
    }
}

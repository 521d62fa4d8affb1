#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "oracles.hpp"
#include "scblock/bm25.hpp"

using namespace scblock;

namespace {

Table table_of(Source source, const char* prefix,
               const std::vector<std::string>& names) {
    Table t;
    t.source = source;
    t.schema = {"name"};
    for (std::size_t i = 0; i < names.size(); ++i)
        t.records.push_back({prefix + std::to_string(i), source, {names[i]}});
    t.rebuild_index();
    return t;
}

}  // namespace

TEST_CASE("bm25_tokens covers both modes") {
    CHECK(bm25_tokens("abc", Bm25Mode::Trigram) == std::vector<std::string>{"abc"});
    CHECK(bm25_tokens("abcd", Bm25Mode::Trigram) == std::vector<std::string>{"abc", "bcd"});
    CHECK(bm25_tokens("A b", Bm25Mode::Whitespace) == std::vector<std::string>{"a", "b"});
    CHECK(bm25_tokens("ab", Bm25Mode::Trigram).empty());
    // whitespace runs collapse before gram extraction
    CHECK(bm25_tokens("A  b", Bm25Mode::Trigram) == std::vector<std::string>{"a b"});
}

TEST_CASE("index statistics") {
    Table one = table_of(Source::B, "d", {"a b"});
    Bm25Index index = Bm25Index::build(one, Bm25Mode::Whitespace);
    CHECK(index.doc_count() == 1);
    // serialized text is "[Col] name [Val] a b" -> 5 whitespace tokens
    CHECK(index.avgdl() == doctest::Approx(5.0));

    Table two = table_of(Source::B, "d", {"a", "a b"});
    Bm25Index index2 = Bm25Index::build(two, Bm25Mode::Whitespace);
    CHECK(index2.document_frequency("a") == 2);
    CHECK(index2.document_frequency("b") == 1);
    // doc lengths 4 and 5 after serialization markers
    CHECK(index2.avgdl() == doctest::Approx(4.5));

    Table empty;
    empty.schema = {"name"};
    CHECK_THROWS_AS(Bm25Index::build(empty, Bm25Mode::Whitespace), std::invalid_argument);
}

TEST_CASE("query mode must match the index mode") {
    Table t = table_of(Source::B, "d", {"alpha"});
    Bm25Index index = Bm25Index::build(t, Bm25Mode::Trigram);
    CHECK_THROWS_AS(index.query_top_k({"alpha"}, Bm25Mode::Whitespace, 1),
                    std::invalid_argument);
}

TEST_CASE("hand-evaluated single-term score: ln 2") {
    // two single-token docs; query hits doc 0 only; dl == avgdl
    // idf = ln(1 + (2-1+0.5)/(1+0.5)) = ln 2, tf factor = (1*(k1+1))/(1+k1) = 1
    std::vector<std::vector<std::string>> docs{{"a"}, {"b"}};
    double got = oracle::bm25_score(docs, {"a"}, 0, 1.2, 0.75);
    CHECK(got == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("scores match the stated formula on small corpora") {
    std::mt19937_64 rng(51);
    const char* words[] = {"red", "green", "blue", "plum", "pear", "fig"};
    for (int trial = 0; trial < 40; ++trial) {
        std::size_t n_docs = 2 + rng() % 8;  // <= 10 docs
        std::vector<std::string> names;
        std::vector<std::vector<std::string>> serialized_docs;
        for (std::size_t d = 0; d < n_docs; ++d) {
            std::string name;
            std::size_t len = 1 + rng() % 5;
            for (std::size_t w = 0; w < len; ++w) {
                if (w)
                    name += " ";
                name += words[rng() % 6];
            }
            names.push_back(name);
        }
        Table t = table_of(Source::B, "d", names);
        for (const auto& rec : t.records)
            serialized_docs.push_back(
                bm25_tokens(serialize_record(rec, t.schema).text, Bm25Mode::Whitespace));

        Bm25Index index = Bm25Index::build(t, Bm25Mode::Whitespace);
        for (int q = 0; q < 5; ++q) {
            std::vector<std::string> query{words[rng() % 6], words[rng() % 6]};
            std::size_t doc = rng() % n_docs;
            double got = index.score(query, "d" + std::to_string(doc));
            double expected = oracle::bm25_score(serialized_docs, query, doc, 1.2, 0.75);
            CHECK(got == doctest::Approx(expected).epsilon(1e-11));
            CHECK(std::fabs(got - expected) < 1e-9);
        }
    }
}

TEST_CASE("score is zero without term overlap and positive for ubiquitous terms") {
    Table t = table_of(Source::B, "d", {"red fig", "red plum", "red pear"});
    Bm25Index index = Bm25Index::build(t, Bm25Mode::Whitespace);
    CHECK(index.score({"absent"}, "d0") == 0.0);

    // "red" occurs in all docs: idf = ln(1 + 0.5/(N+0.5)) > 0
    double everywhere = index.score({"red"}, "d0");
    CHECK(everywhere > 0.0);
    CHECK(everywhere < index.score({"fig"}, "d0"));  // rare term outweighs common term

    CHECK_THROWS_AS(index.score({"red"}, "nope"), std::invalid_argument);
}

TEST_CASE("score grows with term frequency, all else fixed") {
    // equal-length docs so only tf varies
    Table t = table_of(Source::B, "d", {"fig pear plum", "fig fig plum", "fig fig fig"});
    Bm25Index index = Bm25Index::build(t, Bm25Mode::Whitespace);
    double s1 = index.score({"fig"}, "d0");
    double s2 = index.score({"fig"}, "d1");
    double s3 = index.score({"fig"}, "d2");
    CHECK(s1 < s2);
    CHECK(s2 < s3);
}

TEST_CASE("a unique shared rare token wins at k=1") {
    std::mt19937_64 rng(52);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<std::string> index_names;
        for (int i = 0; i < 12; ++i)
            index_names.push_back("common words everywhere");
        std::size_t special = rng() % index_names.size();
        index_names[special] = "common words everywhere raretoken";
        Table b = table_of(Source::B, "b", index_names);
        Table a = table_of(Source::A, "a", {"raretoken query"});

        CandidateSet c = block_bm25(a, b, 1, Bm25Mode::Whitespace);
        REQUIRE(c.pairs.size() == 1);
        CHECK(c.pairs[0].second == "b" + std::to_string(special));
    }
}

TEST_CASE("block_bm25 sizes follow the candidate law and nest over k") {
    Table a = table_of(Source::A, "a", {"red fig", "green plum", "blue pear"});
    std::vector<std::string> b_names;
    for (int i = 0; i < 9; ++i)
        b_names.push_back(std::string(i % 2 ? "red" : "green") + " item" + std::to_string(i));
    Table b = table_of(Source::B, "b", b_names);

    std::set<std::pair<std::string, std::string>> previous;
    for (int k = 1; k <= 11; ++k) {
        CandidateSet c = block_bm25(a, b, k, Bm25Mode::Trigram);
        CHECK(c.pairs.size() == expected_candidate_count(a.size(), b.size(), k));
        std::set<std::pair<std::string, std::string>> current(c.pairs.begin(), c.pairs.end());
        for (const auto& p : previous)
            CHECK(current.count(p) == 1);
        previous = std::move(current);
    }

    // k >= |I_B| covers the cartesian product
    CandidateSet all = block_bm25(a, b, 20, Bm25Mode::Whitespace);
    CHECK(all.pairs.size() == a.size() * b.size());
}

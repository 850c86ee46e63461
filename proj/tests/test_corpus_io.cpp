#include <cmath>
#include <string>

#include "doctest.h"
#include "smoothrank/candidates.hpp"
#include "smoothrank/corpus_io.hpp"
#include "smoothrank/errors.hpp"
#include "smoothrank/retrieval.hpp"
#include "support.hpp"

using namespace smoothrank;
using test_support::TempDir;
using test_support::write_text;

namespace {

std::string error_of(auto&& fn) {
    try {
        fn();
    } catch (const std::exception& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("documents load in file order") {
    TempDir dir;
    auto path = write_text(dir / "docs.jsonl", "{\"id\":\"d1\",\"text\":\"a\"}\n{\"id\":\"d2\",\"text\":\"b\"}\n");
    auto corpus = load_documents(path);
    REQUIRE(corpus.size() == 2);
    CHECK(corpus[0].id == "d1");
    CHECK(corpus[1].text == "b");
    CHECK(corpus.position("d2") == 1);
}

TEST_CASE("empty files give empty collections") {
    TempDir dir;
    CHECK(load_documents(write_text(dir / "d.jsonl", "")).size() == 0);
    CHECK(load_queries(write_text(dir / "q.jsonl", "")).size() == 0);
    CHECK(load_qrels(write_text(dir / "r.txt", "")).judgments.empty());
}

TEST_CASE("blank lines are skipped and empty text is kept") {
    TempDir dir;
    auto corpus = load_documents(write_text(dir / "d.jsonl", "\n{\"id\":\"d1\",\"text\":\"\"}\n\n"));
    REQUIRE(corpus.size() == 1);
    CHECK(corpus[0].text.empty());
}

TEST_CASE("duplicate document ids are rejected by name") {
    TempDir dir;
    auto path = write_text(dir / "docs.jsonl", "{\"id\":\"d1\",\"text\":\"a\"}\n{\"id\":\"d1\",\"text\":\"b\"}\n");
    CHECK_THROWS_AS(load_documents(path), DataError);
    CHECK(error_of([&] { load_documents(path); }).find("d1") != std::string::npos);
}

TEST_CASE("malformed lines report their line number") {
    TempDir dir;
    auto path = write_text(dir / "q.jsonl", "{\"id\":\"q1\",\"text\":\"cat\"}\n{\"id\": \"q2\", \n");
    CHECK_THROWS_AS(load_queries(path), DataError);
    CHECK(error_of([&] { load_queries(path); }).find(":2") != std::string::npos);

    auto missing_field = write_text(dir / "q2.jsonl", "{\"id\":\"q1\"}\n");
    CHECK_THROWS_AS(load_queries(missing_field), DataError);
    auto empty_id = write_text(dir / "q3.jsonl", "{\"id\":\"\",\"text\":\"x\"}\n");
    CHECK_THROWS_AS(load_queries(empty_id), DataError);
}

TEST_CASE("single query loads") {
    TempDir dir;
    auto queries = load_queries(write_text(dir / "q.jsonl", "{\"id\":\"q1\",\"text\":\"cat\"}\n"));
    REQUIRE(queries.size() == 1);
    CHECK(queries[0].text == "cat");
}

TEST_CASE("missing files are IO errors naming the path") {
    CHECK_THROWS_AS(load_documents("/nonexistent/docs.jsonl"), IoError);
    CHECK(error_of([] { load_qrels("/nonexistent/qrels.txt"); }).find("/nonexistent/qrels.txt") !=
          std::string::npos);
}

TEST_CASE("qrels keep only relevant judgments") {
    TempDir dir;
    auto qrels = load_qrels(write_text(dir / "r.txt", "q1 0 d1 1\nq1 0 d2 0\nq2\t0\td3\t1\n"));
    REQUIRE(qrels.relevant_for("q1") != nullptr);
    CHECK(*qrels.relevant_for("q1") == std::set<std::string>{"d1"});
    CHECK(qrels.pair_count() == 2);

    auto only_zero = load_qrels(write_text(dir / "z.txt", "q1 0 d2 0\n"));
    CHECK(only_zero.relevant_for("q1") == nullptr);
}

TEST_CASE("non-binary or malformed qrels are errors") {
    TempDir dir;
    CHECK_THROWS_AS(load_qrels(write_text(dir / "a.txt", "q1 0 d1 3\n")), DataError);
    CHECK_THROWS_AS(load_qrels(write_text(dir / "b.txt", "q1 0 d1\n")), DataError);
    CHECK_THROWS_AS(load_qrels(write_text(dir / "c.txt", "q1 0 d1 x\n")), DataError);
}

TEST_CASE("qrels validation checks referenced ids") {
    Corpus corpus;
    corpus.add({"d1", "a"});
    QuerySet queries;
    queries.add({"q1", "a"});
    Qrels ok{{{"q1", {"d1"}}}};
    CHECK_NOTHROW(validate_qrels(ok, queries, corpus));
    Qrels bad_doc{{{"q1", {"d9"}}}};
    CHECK_THROWS_AS(validate_qrels(bad_doc, queries, corpus), DataError);
    Qrels bad_query{{{"q9", {"d1"}}}};
    CHECK_THROWS_AS(validate_qrels(bad_query, queries, corpus), DataError);
}

TEST_CASE("writers round-trip through the loaders") {
    TempDir dir;
    Corpus corpus;
    corpus.add({"d1", "tabs\tand \"quotes\" and unicode \xc3\xa9"});
    corpus.add({"d2", ""});
    QuerySet queries;
    queries.add({"q1", "cat"});
    Qrels qrels{{{"q1", {"d1", "d2"}}}};

    write_documents(dir / "d.jsonl", corpus);
    write_queries(dir / "q.jsonl", queries);
    write_qrels(dir / "r.txt", qrels);
    CHECK(load_documents(dir / "d.jsonl") == corpus);
    CHECK(load_queries(dir / "q.jsonl") == queries);
    CHECK(load_qrels(dir / "r.txt") == qrels);
}

namespace {

struct Collection {
    Corpus corpus;
    QuerySet queries;
    Qrels qrels;
};

Collection two_doc_collection() {
    Collection c;
    c.corpus.add({"d1", "cat"});
    c.corpus.add({"d2", "dog"});
    c.queries.add({"q1", "cat"});
    c.qrels.judgments["q1"] = {"d1"};
    return c;
}

}  // namespace

TEST_CASE("n = 2 on a two-document corpus is forced") {
    auto c = two_doc_collection();
    auto index = InvertedIndex::build(c.corpus);
    for (auto kind : {SamplerKind::Bm25, SamplerKind::Random}) {
        auto lists = build_candidate_lists(c.queries, c.qrels, index, {kind, 3}, 2);
        REQUIRE(lists.size() == 1);
        REQUIRE(lists[0].n() == 2);
        CHECK(lists[0].candidates[0].doc_id == "d1");
        CHECK(lists[0].candidates[0].label == Label::Relevant);
        CHECK(lists[0].candidates[1].doc_id == "d2");
        CHECK(lists[0].candidates[1].label == Label::NonRelevant);
    }
}

TEST_CASE("candidate list preconditions") {
    auto c = two_doc_collection();
    auto index = InvertedIndex::build(c.corpus);
    c.corpus.add({"d3", "bird"});
    auto index3 = InvertedIndex::build(c.corpus);
    CHECK_THROWS_AS(build_candidate_lists(c.queries, c.qrels, index3, {}, 5), DataError);
    CHECK_THROWS_AS(build_candidate_lists(c.queries, c.qrels, index, {}, 1), UsageError);

    c.queries.add({"q2", "bird"});
    std::string message = error_of([&] { build_candidate_lists(c.queries, c.qrels, index3, {}, 2); });
    CHECK(message.find("q2") != std::string::npos);
}

TEST_CASE("first relevant document by id is the positive and the rest are excluded") {
    Corpus corpus;
    for (auto id : {"a", "b", "c", "d", "e"}) {
        corpus.add({id, std::string("cat ") + id});
    }
    QuerySet queries;
    queries.add({"q", "cat"});
    Qrels qrels{{{"q", {"c", "b"}}}};
    auto index = InvertedIndex::build(corpus);
    auto lists = build_candidate_lists(queries, qrels, index, {SamplerKind::Bm25, 1}, 4);
    REQUIRE(lists[0].n() == 4);
    CHECK(lists[0].relevant_id() == "b");
    for (std::size_t i = 1; i < 4; ++i) {
        CHECK(lists[0].candidates[i].doc_id != "c");
        CHECK(lists[0].candidates[i].doc_id != "b");
    }
}

TEST_CASE("candidate lists on the fixture satisfy their invariants") {
    auto corpus = load_documents(test_support::fixture("small/docs.jsonl"));
    auto queries = load_queries(test_support::fixture("small/queries.jsonl"));
    auto qrels = load_qrels(test_support::fixture("small/qrels.txt"));
    auto index = InvertedIndex::build(corpus);
    for (auto kind : {SamplerKind::Bm25, SamplerKind::Random}) {
        auto lists = build_candidate_lists(queries, qrels, index, {kind, 11}, 10);
        CHECK(lists == build_candidate_lists(queries, qrels, index, {kind, 11}, 10));
        REQUIRE(lists.size() == queries.size());
        for (const auto& list : lists) {
            CHECK(list.n() == 10);
            CHECK_NOTHROW(validate_candidate_list(list));
            std::set<std::string> ids;
            int positives = 0;
            for (const auto& c : list.candidates) {
                ids.insert(c.doc_id);
                positives += c.label == Label::Relevant;
                CHECK(c.ns_score >= 0.0);
                CHECK(c.ns_score <= 1.0);
                if (kind == SamplerKind::Random) {
                    CHECK(c.ns_score == 0.5);
                }
            }
            CHECK(ids.size() == 10);
            CHECK(positives == 1);
        }
    }
}

TEST_CASE("candidate files round-trip after six-decimal quantization") {
    TempDir dir;
    auto corpus = load_documents(test_support::fixture("small/docs.jsonl"));
    auto queries = load_queries(test_support::fixture("small/queries.jsonl"));
    auto qrels = load_qrels(test_support::fixture("small/qrels.txt"));
    auto index = InvertedIndex::build(corpus);
    auto lists = build_candidate_lists(queries, qrels, index, {SamplerKind::Bm25, 5}, 10);

    write_candidates(dir / "a.tsv", lists);
    auto loaded = load_candidates(dir / "a.tsv");
    REQUIRE(loaded.size() == lists.size());
    for (std::size_t i = 0; i < lists.size(); ++i) {
        REQUIRE(loaded[i].n() == lists[i].n());
        CHECK(loaded[i].query_id == lists[i].query_id);
        for (std::size_t j = 0; j < lists[i].n(); ++j) {
            CHECK(loaded[i].candidates[j].doc_id == lists[i].candidates[j].doc_id);
            CHECK(loaded[i].candidates[j].label == lists[i].candidates[j].label);
            CHECK(std::abs(loaded[i].candidates[j].ns_score - lists[i].candidates[j].ns_score) <= 5e-7);
        }
    }
    write_candidates(dir / "b.tsv", loaded);
    CHECK(load_candidates(dir / "b.tsv") == loaded);
    CHECK(test_support::read_text(dir / "a.tsv") == test_support::read_text(dir / "b.tsv"));
}

TEST_CASE("malformed candidate files are rejected") {
    TempDir dir;
    const std::string header = "qid\tdocid\tlabel\tns_score\n";
    CHECK_THROWS_AS(load_candidates(write_text(dir / "a.tsv", header + "q1\td1\t2\t0.5\n")), DataError);
    CHECK_THROWS_AS(load_candidates(write_text(dir / "b.tsv", header + "q1\td1\t1\tx\n")), DataError);
    CHECK_THROWS_AS(load_candidates(write_text(dir / "c.tsv", header + "q1\td1\t1\t1.5\n")), DataError);
    CHECK_THROWS_AS(
        load_candidates(write_text(dir / "d.tsv", header + "q1\td1\t1\t0.5\nq2\td2\t1\t0.5\nq1\td3\t0\t0.5\n")),
        DataError);
}

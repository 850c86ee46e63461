#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "doctest.h"
#include "smoothrank/candidates.hpp"
#include "smoothrank/corpus_io.hpp"
#include "smoothrank/errors.hpp"
#include "smoothrank/retrieval.hpp"
#include "smoothrank/trainer.hpp"
#include "support.hpp"

using namespace smoothrank;

namespace {

struct Fixture {
    Corpus corpus;
    QuerySet queries;
    InvertedIndex index;
    std::vector<CandidateList> lists;
    FeatureStore features;
};

const Fixture& fixture() {
    static const Fixture f = [] {
        Fixture x;
        x.corpus = load_documents(test_support::fixture("small/docs.jsonl"));
        x.queries = load_queries(test_support::fixture("small/queries.jsonl"));
        auto qrels = load_qrels(test_support::fixture("small/qrels.txt"));
        x.index = InvertedIndex::build(x.corpus);
        x.lists = build_candidate_lists(x.queries, qrels, x.index, {SamplerKind::Bm25, 1}, 10);
        x.features = FeatureStore::build(x.queries, x.corpus, x.index, x.lists);
        return x;
    }();
    return f;
}

TrainConfig small_config(const std::string& policy, double epsilon, std::uint64_t total) {
    TrainConfig c;
    const auto spec = parse_policy(policy);
    c.policy = {spec.kind, epsilon};
    if (spec.two_stage) {
        c.schedule = {ScheduleKind::TwoStage, total / 2};
    }
    c.total_instances = total;
    return c;
}

void check_same(const TrainResult& a, const TrainResult& b) {
    CHECK(a.params == b.params);
    CHECK(a.state == b.state);
    CHECK(a.log.entries == b.log.entries);
    CHECK(serialize_checkpoint(a.params, a.state) == serialize_checkpoint(b.params, b.state));
}

}  // namespace

TEST_CASE("instance stream covers every pair once per pass") {
    const auto& f = fixture();
    const std::vector<CandidateList> one{f.lists[0]};
    auto stream = make_instance_stream(one, 20, 3);
    REQUIRE(stream.size() == 20);
    std::map<std::string, int> counts;
    for (const auto& i : stream) {
        counts[i.doc_id]++;
    }
    CHECK(counts.size() == 10);
    for (const auto& [id, c] : counts) {
        CHECK(c == 2);
    }
    std::set<std::string> first_pass;
    for (std::size_t i = 0; i < 10; ++i) {
        first_pass.insert(stream[i].doc_id);
    }
    CHECK(first_pass.size() == 10);

    CHECK(make_instance_stream(one, 20, 3) == stream);
    auto seven = make_instance_stream(one, 7, 3);
    CHECK(seven == std::vector<TrainInstance>(stream.begin(), stream.begin() + 7));
    CHECK_THROWS_AS(make_instance_stream({}, 5, 1), DataError);
}

TEST_CASE("config validation and ids") {
    auto c = small_config("t-wsls", 0.4, 50000);
    c.schedule.switch_at = 25000;
    CHECK(config_id(c) == "t-wsls_eps0.4_x25000");
    CHECK(config_id(small_config("hard", 0.0, 10)) == "hard");
    CHECK(config_id(small_config("ls", 0.2, 10)) == "ls_eps0.2");

    auto bad = c;
    bad.batch_size = 0;
    CHECK_THROWS_AS(bad.validate(), UsageError);
    bad = c;
    bad.schedule.switch_at = 60000;
    CHECK_THROWS_AS(bad.validate(), UsageError);
    bad = c;
    bad.total_instances = 0;
    CHECK_THROWS_AS(bad.validate(), UsageError);
}

TEST_CASE("hard labels equal label smoothing with zero epsilon") {
    const auto& f = fixture();
    auto hard = train(small_config("hard", 0.0, 1000), f.features, f.lists);
    auto ls0 = train(small_config("ls", 0.0, 1000), f.features, f.lists);
    check_same(hard, ls0);
    auto wsls0 = train(small_config("wsls", 0.0, 1000), f.features, f.lists);
    check_same(hard, wsls0);
}

TEST_CASE("two-stage switching at the budget equals the constant schedule") {
    const auto& f = fixture();
    for (const char* policy : {"ls", "wsls"}) {
        auto constant = small_config(policy, 0.3, 1000);
        auto two_stage = constant;
        two_stage.schedule = {ScheduleKind::TwoStage, 1000};
        check_same(train(constant, f.features, f.lists), train(two_stage, f.features, f.lists));
    }
}

TEST_CASE("training is reproducible and seed dependent") {
    const auto& f = fixture();
    auto config = small_config("t-wsls", 0.2, 800);
    auto a = train(config, f.features, f.lists);
    check_same(a, train(config, f.features, f.lists));
    config.seed = 2;
    CHECK_FALSE(train(config, f.features, f.lists).params == a.params);
}

TEST_CASE("train log records one epsilon transition at the batch holding the switch") {
    const auto& f = fixture();
    auto config = small_config("t-ls", 0.2, 1000);
    config.schedule.switch_at = 250;
    auto result = train(config, f.features, f.lists);
    const auto& entries = result.log.entries;
    REQUIRE(entries.size() == 32);  // ceil(1000 / 32)
    CHECK(entries.back().instances_seen == 1000);
    int transitions = 0;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        CHECK(std::isfinite(entries[i].loss));
        if (i > 0) {
            CHECK(entries[i].instances_seen > entries[i - 1].instances_seen);
            if (entries[i].epsilon != entries[i - 1].epsilon) {
                ++transitions;
                // Instance 250 (0-based) is the 251st, which falls in the batch ending at 256.
                CHECK(entries[i].instances_seen == 256);
                CHECK(entries[i].epsilon == 0.0);
            }
        }
        const double expected = epsilon_at(config.schedule, config.policy, entries[i].instances_seen - 1);
        CHECK(entries[i].epsilon == expected);
    }
    CHECK(transitions == 1);
    CHECK(entries.front().epsilon == 0.2);
}

TEST_CASE("mismatched list sizes are rejected") {
    const auto& f = fixture();
    auto config = small_config("hard", 0.0, 100);
    config.n = 5;
    CHECK_THROWS_AS(train(config, f.features, f.lists), DataError);
}

TEST_CASE("a single-instance dataset is fitted") {
    const auto& f = fixture();
    const auto& source = f.lists[0];
    const auto positive = std::find_if(source.candidates.begin(), source.candidates.end(),
                                       [](const Candidate& c) { return c.label == Label::Relevant; });
    REQUIRE(positive != source.candidates.end());
    CandidateList single{source.query_id, {*positive}};
    auto config = small_config("hard", 0.0, 500);
    config.batch_size = 1;
    config.n = 1;
    auto result = train(config, f.features, {single});
    for (const auto& c : single.candidates) {
        const double p_rel = relevance_probability(result.params, f.features.get(single.query_id, c.doc_id));
        const double loss = -std::log(c.label == Label::Relevant ? p_rel : 1.0 - p_rel);
        CHECK(loss < 1e-2);
    }
}

TEST_CASE("train log csv") {
    test_support::TempDir dir;
    TrainLog log;
    log.entries = {{32, 0.2, 0.5}, {64, 0.0, 0.25}};
    write_trainlog_csv(dir / "log.csv", log);
    CHECK(test_support::read_text(dir / "log.csv") ==
          "instances_seen,epsilon,loss\n32,0.200000,0.500000\n64,0.000000,0.250000\n");
}

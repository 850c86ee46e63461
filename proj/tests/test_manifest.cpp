#include "doctest.h"
#include "smoothrank/errors.hpp"
#include "smoothrank/manifest.hpp"
#include "support.hpp"

using namespace smoothrank;

TEST_CASE("sha256 reference digests") {
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("train configs round-trip through json") {
    TrainConfig c;
    c.policy = {SmoothingKind::WSLS, 0.4};
    c.schedule = {ScheduleKind::TwoStage, 1234};
    c.batch_size = 16;
    c.total_instances = 4000;
    c.adam.lr = 5e-6;
    c.seed = 9;
    c.n = 7;
    auto back = train_config_from_json(train_config_to_json(c));
    CHECK(config_id(back) == config_id(c));
    CHECK(back.batch_size == 16);
    CHECK(back.total_instances == 4000);
    CHECK(back.adam.lr == 5e-6);
    CHECK(back.seed == 9);
    CHECK(back.n == 7);
}

TEST_CASE("sweep configs round-trip through json") {
    SweepConfig s;
    s.epsilons = {0.0, 0.25};
    s.seeds = {4, 5, 6};
    s.k = 3;
    auto back = sweep_config_from_json(sweep_config_to_json(s, 2));
    CHECK(back.epsilons == s.epsilons);
    CHECK(back.seeds == s.seeds);
    CHECK(back.policies == s.policies);
    CHECK(back.k == 3);
}

TEST_CASE("manifests record and verify input digests") {
    test_support::TempDir dir;
    auto input = test_support::write_text(dir / "in.txt", "hello");
    RunManifest m;
    m.kind = "train";
    m.config = train_config_to_json(TrainConfig{});
    m.inputs.push_back(digest_file("candidates", input));
    write_manifest(dir / "manifest.json", m);

    auto loaded = load_manifest(dir / "manifest.json");
    CHECK(loaded.kind == "train");
    CHECK(loaded.inputs == m.inputs);
    CHECK(changed_inputs(loaded).empty());
    CHECK(find_digest(loaded.inputs, "candidates") != nullptr);
    CHECK(find_digest(loaded.inputs, "index") == nullptr);

    test_support::write_text(input, "hello!");
    CHECK(changed_inputs(loaded) == std::vector<std::string>{input.string()});
    std::filesystem::remove(input);
    CHECK(changed_inputs(loaded).size() == 1);

    CHECK_THROWS_AS(load_manifest(test_support::write_text(dir / "bad.json", "[1, 2")), DataError);
}

#include <algorithm>
#include <array>
#include <cstdio>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "doctest.h"
#include "smoothrank/manifest.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using test_support::fixture;
using test_support::read_text;
using test_support::TempDir;
using test_support::write_text;

namespace {

struct Outcome {
    int code = -1;
    std::string output;  // stdout and stderr
};

Outcome run(const std::string& args) {
    const std::string command = std::string("\"") + SMOOTHRANK_BINARY + "\" " + args + " 2>&1";
    Outcome out;
    FILE* pipe = ::popen(command.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::array<char, 4096> buffer{};
    std::size_t n = 0;
    while ((n = std::fread(buffer.data(), 1, buffer.size(), pipe)) > 0) {
        out.output.append(buffer.data(), n);
    }
    const int status = ::pclose(pipe);
    out.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return out;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

std::size_t count_lines(const std::string& text) {
    return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

// Index and candidates for the 100-document fixture.
struct Prepared {
    TempDir dir;
    fs::path index = dir / "index.json";
    fs::path queries = fixture("small/queries.jsonl");
    fs::path candidates = dir / "candidates.tsv";

    Prepared() {
        REQUIRE(run("index --docs " + q(fixture("small/docs.jsonl")) + " --out " + q(index)).code == 0);
        REQUIRE(run("sample --index " + q(index) + " --queries " + q(queries) + " --qrels " +
                    q(fixture("small/qrels.txt")) + " --ns bm25 --n 10 --seed 1 --out " + q(candidates))
                    .code == 0);
    }
    [[nodiscard]] std::string inputs() const {
        return "--candidates " + q(candidates) + " --index " + q(index) + " --queries " + q(queries);
    }
};

}  // namespace

TEST_CASE("index reports the document count") {
    TempDir dir;
    auto docs = write_text(dir / "docs.jsonl", "{\"id\":\"d1\",\"text\":\"a b\"}\n{\"id\":\"d2\",\"text\":\"c\"}\n");
    auto r = run("index --docs " + q(docs) + " --out " + q(dir / "index.json"));
    CHECK(r.code == 0);
    CHECK(r.output.find("N=2") != std::string::npos);
    CHECK(fs::exists(dir / "index.json"));
}

TEST_CASE("index error exit codes") {
    TempDir dir;
    auto missing = run("index --docs " + q(dir / "nope.jsonl") + " --out " + q(dir / "i.json"));
    CHECK(missing.code == 2);
    CHECK(missing.output.find("nope.jsonl") != std::string::npos);

    auto dup = write_text(dir / "dup.jsonl", "{\"id\":\"dx\",\"text\":\"a\"}\n{\"id\":\"dx\",\"text\":\"b\"}\n");
    auto duplicate = run("index --docs " + q(dup) + " --out " + q(dir / "i.json"));
    CHECK(duplicate.code == 1);
    CHECK(duplicate.output.find("dx") != std::string::npos);

    CHECK(run("index --docs").code == 2);
    CHECK(run("frobnicate").code == 2);
}

TEST_CASE("sample writes n rows per query") {
    Prepared p;
    const auto text = read_text(p.candidates);
    CHECK(count_lines(text) == 1 + 20 * 10);

    auto a = p.dir / "r1.tsv", b = p.dir / "r2.tsv";
    const std::string common = "sample --index " + q(p.index) + " --queries " + q(p.queries) + " --qrels " +
                               q(fixture("small/qrels.txt")) + " --ns random --n 10 --seed 4 --out ";
    CHECK(run(common + q(a)).code == 0);
    CHECK(run(common + q(b)).code == 0);
    CHECK(read_text(a) == read_text(b));

    CHECK(run("sample --index " + q(p.index) + " --queries " + q(p.queries) + " --qrels " +
              q(fixture("small/qrels.txt")) + " --n 1 --out " + q(p.dir / "x.tsv"))
              .code == 2);
}

TEST_CASE("train usage errors") {
    Prepared p;
    CHECK(run("train " + p.inputs() + " --policy hard --epsilon 0.3 --out " + q(p.dir / "t")).code == 2);
    CHECK(run("train " + p.inputs() + " --policy ls --epsilon 1.5 --out " + q(p.dir / "t")).code == 2);
    CHECK(run("train " + p.inputs() + " --policy ls --switch-at 10 --out " + q(p.dir / "t")).code == 2);
    CHECK(run("train " + p.inputs() + " --policy t-ls --switch-at 900 --instances 500 --out " + q(p.dir / "t"))
              .code == 2);
    CHECK(run("train " + p.inputs() + " --policy bogus --out " + q(p.dir / "t")).code == 2);
}

TEST_CASE("train is deterministic and logs the switch") {
    Prepared p;
    const std::string args = "train " + p.inputs() + " --policy t-wsls --epsilon 0.4 --switch-at 250 --instances 500";
    REQUIRE(run(args + " --out " + q(p.dir / "a")).code == 0);
    REQUIRE(run(args + " --out " + q(p.dir / "b")).code == 0);
    CHECK(smoothrank::sha256_file(p.dir / "a" / "checkpoint.smrk") ==
          smoothrank::sha256_file(p.dir / "b" / "checkpoint.smrk"));

    std::istringstream log(read_text(p.dir / "a" / "trainlog.csv"));
    std::string line;
    std::getline(log, line);
    CHECK(line == "instances_seen,epsilon,loss");
    std::string previous_eps;
    int transitions = 0;
    while (std::getline(log, line)) {
        const auto first = line.find(',');
        const auto second = line.find(',', first + 1);
        const auto seen = std::stoull(line.substr(0, first));
        const auto eps = line.substr(first + 1, second - first - 1);
        if (!previous_eps.empty() && eps != previous_eps) {
            ++transitions;
            CHECK(seen == 256);
            CHECK(eps == "0.000000");
        }
        previous_eps = eps;
    }
    CHECK(transitions == 1);

    auto manifest = smoothrank::load_manifest(p.dir / "a" / "manifest.json");
    CHECK(manifest.kind == "train");
    auto rerun = run("rerun --manifest " + q(p.dir / "a" / "manifest.json") + " --out " + q(p.dir / "c"));
    CHECK(rerun.code == 0);
    CHECK(rerun.output.find("reproduced") != std::string::npos);
}

TEST_CASE("evaluate names the metric and is repeatable") {
    Prepared p;
    REQUIRE(run("train " + p.inputs() + " --policy hard --instances 200 --out " + q(p.dir / "m")).code == 0);
    const std::string args =
        "evaluate --checkpoint " + q(p.dir / "m" / "checkpoint.smrk") + " " + p.inputs() + " --k 1 --out " +
        q(p.dir / "results.csv");
    REQUIRE(run(args).code == 0);
    REQUIRE(run(args).code == 0);
    std::istringstream in(read_text(p.dir / "results.csv"));
    std::string header, row1, row2;
    std::getline(in, header);
    std::getline(in, row1);
    std::getline(in, row2);
    CHECK(header == "config_id,policy,epsilon,seed,metric,value");
    CHECK(row1.find(",R10@1,") != std::string::npos);
    CHECK(row1.rfind("hard,hard,", 0) == 0);
    CHECK(row1 == row2);

    CHECK(run("evaluate --checkpoint " + q(p.dir / "m" / "checkpoint.smrk") + " " + p.inputs() +
              " --k 11 --out " + q(p.dir / "x.csv"))
              .code == 2);
    auto corrupt = write_text(p.dir / "bad.smrk", "SMRK");
    CHECK(run("evaluate --checkpoint " + q(corrupt) + " " + p.inputs() + " --out " + q(p.dir / "x.csv")).code == 1);
}

TEST_CASE("sweep and score analysis") {
    Prepared p;
    auto r = run("sweep " + p.inputs() + " --epsilons 0,0.2 --seeds 1,2 --instances 200 --out " + q(p.dir / "s"));
    REQUIRE(r.code == 0);
    const auto sweep = read_text(p.dir / "s" / "sweep.csv");
    CHECK(sweep.rfind("policy,epsilon,mean,std,ci95,runs\n", 0) == 0);
    CHECK(count_lines(sweep) == 1 + 5);
    CHECK(count_lines(read_text(p.dir / "s" / "results.csv")) == 1 + 10);
    CHECK(fs::exists(p.dir / "s" / "significance.txt"));

    auto hist = run("analyze-ns --candidates " + q(p.candidates) + " --out " + q(p.dir / "h.csv"));
    CHECK(hist.code == 0);
    const auto text = read_text(p.dir / "h.csv");
    CHECK(text.rfind("bin_lower,bin_upper,count\n", 0) == 0);
    CHECK(text.find("\nmean,") != std::string::npos);
}

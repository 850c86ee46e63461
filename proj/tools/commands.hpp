#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "smoothrank/evaluation.hpp"
#include "smoothrank/manifest.hpp"
#include "smoothrank/synthetic.hpp"
#include "smoothrank/trainer.hpp"

namespace smoothrank::cli {

namespace fs = std::filesystem;

struct GenerateArgs {
    SyntheticSpec spec;
    std::size_t eval_queries = 0;
    fs::path out;
};
void cmd_generate(const GenerateArgs& args);

void cmd_index(const fs::path& docs, const fs::path& out);

struct SampleArgs {
    fs::path index;
    fs::path queries;
    fs::path qrels;
    std::string ns = "bm25";
    std::size_t n = 10;
    std::uint64_t seed = 1;
    fs::path out;
};
void cmd_sample(const SampleArgs& args);

struct TrainInputs {
    fs::path candidates;
    fs::path index;
    fs::path queries;
};

/// Trains, writes checkpoint.smrk, trainlog.csv and manifest.json into out.
RunManifest cmd_train(const TrainInputs& inputs, TrainConfig config, const fs::path& out);

struct EvaluateArgs {
    fs::path checkpoint;
    fs::path candidates;
    fs::path index;
    fs::path queries;
    std::size_t k = 1;
    std::optional<std::string> config_id;
    fs::path out;
};
void cmd_evaluate(const EvaluateArgs& args);

struct SweepInputs {
    fs::path candidates;
    fs::path eval_candidates;
    fs::path index;
    fs::path queries;
};

/// Writes sweep.csv, results.csv, significance.txt and manifest.json into out.
RunManifest cmd_sweep(const SweepInputs& inputs, SweepConfig config, std::size_t bonferroni_m, const fs::path& out);

void cmd_analyze_ns(const fs::path& candidates, const fs::path& out);

/// Re-executes a train or sweep manifest into out; returns true when the
/// primary output digest matches the recorded one.
bool cmd_rerun(const fs::path& manifest, const fs::path& out);

/// SMOOTHRANK_THREADS, default 1.
std::size_t thread_budget();

}  // namespace smoothrank::cli

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "smoothrank/evaluation.hpp"
#include "smoothrank/trainer.hpp"

namespace smoothrank {

inline constexpr const char* kVersion = "0.1.0";

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

struct FileDigest {
    std::string role;
    std::string path;
    std::string sha256;

    bool operator==(const FileDigest&) const = default;
};

FileDigest digest_file(const std::string& role, const std::filesystem::path& path);

/// Everything needed to rerun a train or sweep command and check that it
/// reproduces the same outputs.
struct RunManifest {
    std::string kind;  // "train" or "sweep"
    std::string version = kVersion;
    nlohmann::json config;
    std::vector<FileDigest> inputs;
    std::vector<FileDigest> outputs;
};

nlohmann::json train_config_to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const nlohmann::json& j);

nlohmann::json sweep_config_to_json(const SweepConfig& config, std::size_t bonferroni_m);
SweepConfig sweep_config_from_json(const nlohmann::json& j);

void write_manifest(const std::filesystem::path& path, const RunManifest& manifest);
RunManifest load_manifest(const std::filesystem::path& path);

/// Inputs whose current digest differs from the recorded one (missing files
/// count as mismatches). Empty means the run is reproducible from its inputs.
std::vector<std::string> changed_inputs(const RunManifest& manifest);

const FileDigest* find_digest(const std::vector<FileDigest>& digests, const std::string& role);

}  // namespace smoothrank

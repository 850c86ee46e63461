#include "smoothrank/manifest.hpp"

#include <openssl/evp.h>

#include <cstdio>

#include "io_util.hpp"
#include "smoothrank/errors.hpp"

namespace smoothrank {

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
        throw IoError("SHA-256 computation failed");
    }
    std::string hex;
    char buf[3];
    for (unsigned int i = 0; i < length; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", digest[i]);
        hex += buf;
    }
    return hex;
}

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(detail::read_file(path)); }

FileDigest digest_file(const std::string& role, const std::filesystem::path& path) {
    return FileDigest{role, path.string(), sha256_file(path)};
}

nlohmann::json train_config_to_json(const TrainConfig& c) {
    return {{"policy", policy_name(c.policy.kind, c.schedule.kind)},
            {"epsilon", c.policy.epsilon},
            {"switch_at", c.schedule.switch_at},
            {"batch_size", c.batch_size},
            {"instances", c.total_instances},
            {"lr", c.adam.lr},
            {"beta1", c.adam.beta1},
            {"beta2", c.adam.beta2},
            {"eps_adam", c.adam.eps},
            {"seed", c.seed},
            {"n", c.n}};
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
    try {
        TrainConfig c;
        const auto spec = parse_policy(j.at("policy").get<std::string>());
        c.policy = SmoothingPolicy{spec.kind, j.at("epsilon").get<double>()};
        c.schedule = Schedule{spec.two_stage ? ScheduleKind::TwoStage : ScheduleKind::Constant,
                              j.at("switch_at").get<std::uint64_t>()};
        c.batch_size = j.at("batch_size").get<std::size_t>();
        c.total_instances = j.at("instances").get<std::uint64_t>();
        c.adam = AdamConfig{j.at("lr").get<double>(), j.at("beta1").get<double>(), j.at("beta2").get<double>(),
                            j.at("eps_adam").get<double>()};
        c.seed = j.at("seed").get<std::uint64_t>();
        c.n = j.at("n").get<std::size_t>();
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed training configuration: ") + e.what());
    }
}

nlohmann::json sweep_config_to_json(const SweepConfig& config, std::size_t bonferroni_m) {
    return {{"base", train_config_to_json(config.base)},
            {"policies", config.policies},
            {"epsilons", config.epsilons},
            {"seeds", config.seeds},
            {"k", config.k},
            {"bonferroni_m", bonferroni_m}};
}

SweepConfig sweep_config_from_json(const nlohmann::json& j) {
    try {
        SweepConfig c;
        c.base = train_config_from_json(j.at("base"));
        c.policies = j.at("policies").get<std::vector<std::string>>();
        c.epsilons = j.at("epsilons").get<std::vector<double>>();
        c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
        c.k = j.at("k").get<std::size_t>();
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed sweep configuration: ") + e.what());
    }
}

namespace {

nlohmann::json digests_to_json(const std::vector<FileDigest>& digests) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& d : digests) {
        arr.push_back({{"role", d.role}, {"path", d.path}, {"sha256", d.sha256}});
    }
    return arr;
}

std::vector<FileDigest> digests_from_json(const nlohmann::json& arr) {
    std::vector<FileDigest> out;
    for (const auto& d : arr) {
        out.push_back(FileDigest{d.at("role").get<std::string>(), d.at("path").get<std::string>(),
                                 d.at("sha256").get<std::string>()});
    }
    return out;
}

}  // namespace

void write_manifest(const std::filesystem::path& path, const RunManifest& manifest) {
    nlohmann::json root{{"kind", manifest.kind},
                        {"version", manifest.version},
                        {"config", manifest.config},
                        {"inputs", digests_to_json(manifest.inputs)},
                        {"outputs", digests_to_json(manifest.outputs)}};
    detail::write_file_atomic(path, root.dump(2) + "\n");
}

RunManifest load_manifest(const std::filesystem::path& path) {
    const auto contents = detail::read_file(path);
    try {
        const auto root = nlohmann::json::parse(contents);
        RunManifest m;
        m.kind = root.at("kind").get<std::string>();
        m.version = root.at("version").get<std::string>();
        m.config = root.at("config");
        m.inputs = digests_from_json(root.at("inputs"));
        m.outputs = digests_from_json(root.at("outputs"));
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path.string() + ": malformed manifest: " + e.what());
    }
}

std::vector<std::string> changed_inputs(const RunManifest& manifest) {
    std::vector<std::string> changed;
    for (const auto& input : manifest.inputs) {
        try {
            if (sha256_file(input.path) != input.sha256) {
                changed.push_back(input.path);
            }
        } catch (const IoError&) {
            changed.push_back(input.path);
        }
    }
    return changed;
}

const FileDigest* find_digest(const std::vector<FileDigest>& digests, const std::string& role) {
    for (const auto& d : digests) {
        if (d.role == role) {
            return &d;
        }
    }
    return nullptr;
}

}  // namespace smoothrank

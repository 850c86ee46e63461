#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "smoothrank/candidates.hpp"
#include "smoothrank/ranker.hpp"
#include "smoothrank/smoothing.hpp"

namespace smoothrank {

struct TrainConfig {
    SmoothingPolicy policy;
    Schedule schedule;
    std::size_t batch_size = 32;
    std::uint64_t total_instances = 50000;
    AdamConfig adam;
    std::uint64_t seed = 1;
    std::size_t n = 10;

    /// Throws UsageError on an inconsistent configuration.
    void validate() const;
};

/// Stable identifier of a configuration across seeds, e.g. "t-wsls_eps0.4_x25000".
std::string config_id(const TrainConfig& config);

/// Feature vectors of every (query, candidate) pair, computed once and shared
/// read-only by training and evaluation.
class FeatureStore {
  public:
    static FeatureStore build(const QuerySet& queries, const Corpus& corpus, const InvertedIndex& index,
                              const std::vector<CandidateList>& lists);

    /// Adds the pairs of more lists; already present pairs are skipped.
    void extend(const QuerySet& queries, const Corpus& corpus, const InvertedIndex& index,
                const std::vector<CandidateList>& lists);

    /// Throws DataError when the pair was never extracted.
    [[nodiscard]] const FeatureVector& get(const std::string& query_id, const std::string& doc_id) const;
    [[nodiscard]] std::size_t size() const { return features_.size(); }

  private:
    std::unordered_map<std::string, FeatureVector> features_;
};

/// Flattens all pairs and emits them in passes, each pass a permutation
/// seeded with seed + pass index, until total_instances are produced.
std::vector<TrainInstance> make_instance_stream(const std::vector<CandidateList>& lists,
                                                std::uint64_t total_instances, std::uint64_t seed);

struct TrainLogEntry {
    std::uint64_t instances_seen = 0;  // after the batch
    double epsilon = 0.0;              // epsilon of the batch's last instance
    double loss = 0.0;                 // mean cross-entropy over the batch

    bool operator==(const TrainLogEntry&) const = default;
};

struct TrainLog {
    std::vector<TrainLogEntry> entries;
    std::filesystem::path checkpoint;
};

struct TrainResult {
    ModelParams params;
    AdamState state;
    TrainLog log;
};

/// Minibatch training from init_params(seed). Epsilon is evaluated per
/// instance, so a two-stage switch may fall inside a batch.
TrainResult train(const TrainConfig& config, const FeatureStore& features,
                  const std::vector<CandidateList>& lists);

/// trainlog.csv: "instances_seen,epsilon,loss".
void write_trainlog_csv(const std::filesystem::path& path, const TrainLog& log);

}  // namespace smoothrank

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "smoothrank/retrieval.hpp"
#include "smoothrank/smoothing.hpp"

namespace smoothrank {

inline constexpr std::size_t kHashedDims = 256;
inline constexpr std::size_t kScalarFeatures = 6;
inline constexpr std::size_t kFeatureDim = kHashedDims + kScalarFeatures;
inline constexpr std::size_t kHiddenDim = 64;

/// 32-bit FNV-1a.
std::uint32_t fnv1a(std::string_view bytes);

/// Dense input of the ranker: the elementwise product of the L2-normalized
/// hashed term-frequency vectors of query and document, followed by
/// log1p-transformed [bm25, unique overlap, idf-weighted overlap,
/// query length, doc length, doc length / average length].
struct FeatureVector {
    std::vector<double> values;

    [[nodiscard]] std::size_t size() const { return values.size(); }
    bool operator==(const FeatureVector&) const = default;
};

FeatureVector extract_features(std::string_view query_text, std::string_view doc_text,
                               const InvertedIndex& index);

/// Two-layer perceptron weights. Matrices are row-major:
/// w1 is dim x hidden, w2 is hidden x 2.
struct ModelParams {
    std::size_t dim = 0;
    std::size_t hidden = 0;
    std::vector<double> w1;
    std::vector<double> b1;
    std::vector<double> w2;
    std::vector<double> b2;

    /// Zero-filled parameters of the given shape.
    static ModelParams zeros(std::size_t dim, std::size_t hidden);

    [[nodiscard]] std::array<std::span<double>, 4> arrays();
    [[nodiscard]] std::array<std::span<const double>, 4> arrays() const;
    [[nodiscard]] std::size_t parameter_count() const;

    bool operator==(const ModelParams&) const = default;
};

struct AdamState {
    ModelParams m;
    ModelParams v;
    std::uint64_t t = 0;

    static AdamState zeros(std::size_t dim, std::size_t hidden);
    bool operator==(const AdamState&) const = default;
};

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Xavier-uniform weights from a seeded generator, zero biases.
ModelParams init_params(std::uint64_t seed, std::size_t dim = kFeatureDim, std::size_t hidden = kHiddenDim);

struct ForwardPass {
    Logits logits{};
    std::vector<double> hidden;
};

/// hidden = relu(w1^T x + b1), logits = w2^T hidden + b2.
ForwardPass forward(const ModelParams& params, std::span<const double> features);

inline ForwardPass forward(const ModelParams& params, const FeatureVector& features) {
    return forward(params, std::span<const double>(features.values));
}

/// Probability of the relevant class.
double relevance_probability(const ModelParams& params, const FeatureVector& features);

/// Gradient of cross_entropy(target, logits) for every parameter, reusing
/// the hidden activations of the matching forward pass. relu'(0) = 0.
ModelParams backward(const ModelParams& params, std::span<const double> features,
                     std::span<const double> hidden, const TargetDistribution& target);

/// Adds the gradient of one instance into `grads` (same shape as params).
void accumulate_gradient(ModelParams& grads, const ModelParams& params, std::span<const double> features,
                         std::span<const double> hidden, const TargetDistribution& target);

/// One bias-corrected Adam update; increments state.t.
void adam_step(ModelParams& params, const ModelParams& grads, AdamState& state, const AdamConfig& config);

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
    ModelParams params;
    AdamState state;
};

/// Little-endian "SMRK" | u32 version | u32 dim | u32 hidden | u64 t |
/// w1 b1 w2 b2 m v as f64.
std::string serialize_checkpoint(const ModelParams& params, const AdamState& state);
Checkpoint parse_checkpoint(std::string_view bytes);

/// Written to a temporary file and renamed into place.
void save_checkpoint(const ModelParams& params, const AdamState& state, const std::filesystem::path& path);

/// Throws CheckpointVersionError, CheckpointDimError (when expected dims are
/// given and differ) or CheckpointCorruptError.
Checkpoint load_checkpoint(const std::filesystem::path& path, std::size_t expected_dim = kFeatureDim,
                           std::size_t expected_hidden = kHiddenDim);

}  // namespace smoothrank

#include "smoothrank/ranker.hpp"

#include <bit>
#include <cmath>
#include <unordered_set>

#include "io_util.hpp"
#include "smoothrank/errors.hpp"
#include "smoothrank/rng.hpp"

namespace smoothrank {

std::uint32_t fnv1a(std::string_view bytes) {
    std::uint32_t hash = 2166136261u;
    for (char c : bytes) {
        hash ^= static_cast<unsigned char>(c);
        hash *= 16777619u;
    }
    return hash;
}

namespace {

std::vector<double> hashed_unit_tf(std::span<const std::string> terms) {
    std::vector<double> v(kHashedDims, 0.0);
    for (const auto& t : terms) {
        v[fnv1a(t) % kHashedDims] += 1.0;
    }
    double norm = 0.0;
    for (double x : v) {
        norm += x * x;
    }
    if (norm > 0.0) {
        norm = std::sqrt(norm);
        for (double& x : v) {
            x /= norm;
        }
    }
    return v;
}

}  // namespace

FeatureVector extract_features(std::string_view query_text, std::string_view doc_text, const InvertedIndex& index) {
    const auto query_terms = tokenize(query_text);
    const auto doc_terms = tokenize(doc_text);

    FeatureVector f;
    f.values.reserve(kFeatureDim);
    const auto q = hashed_unit_tf(query_terms);
    const auto d = hashed_unit_tf(doc_terms);
    for (std::size_t i = 0; i < kHashedDims; ++i) {
        f.values.push_back(q[i] * d[i]);
    }

    const std::unordered_set<std::string> doc_vocab(doc_terms.begin(), doc_terms.end());
    double overlap = 0.0;
    double idf_overlap = 0.0;
    for (const auto& term : unique_terms(query_terms)) {
        if (doc_vocab.count(term) != 0) {
            overlap += 1.0;
            idf_overlap += index.idf(term);
        }
    }
    const auto doc_length = static_cast<double>(doc_terms.size());
    const double scalars[kScalarFeatures] = {
        bm25_score_tokens(index, query_terms, doc_terms),
        overlap,
        idf_overlap,
        static_cast<double>(query_terms.size()),
        doc_length,
        doc_length / index.avg_doc_length(),
    };
    for (double s : scalars) {
        f.values.push_back(std::log1p(s));
    }
    return f;
}

// ---------------------------------------------------------------------------
// Parameters

ModelParams ModelParams::zeros(std::size_t dim, std::size_t hidden) {
    ModelParams p;
    p.dim = dim;
    p.hidden = hidden;
    p.w1.assign(dim * hidden, 0.0);
    p.b1.assign(hidden, 0.0);
    p.w2.assign(hidden * 2, 0.0);
    p.b2.assign(2, 0.0);
    return p;
}

std::array<std::span<double>, 4> ModelParams::arrays() { return {w1, b1, w2, b2}; }

std::array<std::span<const double>, 4> ModelParams::arrays() const { return {w1, b1, w2, b2}; }

std::size_t ModelParams::parameter_count() const { return w1.size() + b1.size() + w2.size() + b2.size(); }

AdamState AdamState::zeros(std::size_t dim, std::size_t hidden) {
    return AdamState{ModelParams::zeros(dim, hidden), ModelParams::zeros(dim, hidden), 0};
}

ModelParams init_params(std::uint64_t seed, std::size_t dim, std::size_t hidden) {
    if (dim == 0 || hidden == 0) {
        throw UsageError("model dimensions must be >= 1");
    }
    ModelParams p = ModelParams::zeros(dim, hidden);
    Rng gen(seed);
    const double a1 = std::sqrt(6.0 / static_cast<double>(dim + hidden));
    for (double& w : p.w1) {
        w = uniform_real(gen, -a1, a1);
    }
    const double a2 = std::sqrt(6.0 / static_cast<double>(hidden + 2));
    for (double& w : p.w2) {
        w = uniform_real(gen, -a2, a2);
    }
    return p;
}

// ---------------------------------------------------------------------------
// Forward / backward

ForwardPass forward(const ModelParams& params, std::span<const double> features) {
    if (features.size() != params.dim || params.w1.size() != params.dim * params.hidden ||
        params.b1.size() != params.hidden || params.w2.size() != params.hidden * 2 || params.b2.size() != 2) {
        throw DataError("feature/parameter shape mismatch: got " + std::to_string(features.size()) +
                        " features for a " + std::to_string(params.dim) + "x" + std::to_string(params.hidden) +
                        " model");
    }
    const std::size_t h = params.hidden;
    ForwardPass out;
    out.hidden = params.b1;
    for (std::size_t i = 0; i < params.dim; ++i) {
        const double x = features[i];
        if (x == 0.0) {
            continue;
        }
        const double* row = &params.w1[i * h];
        for (std::size_t j = 0; j < h; ++j) {
            out.hidden[j] += row[j] * x;
        }
    }
    out.logits = {params.b2[0], params.b2[1]};
    for (std::size_t j = 0; j < h; ++j) {
        double& a = out.hidden[j];
        if (!(a > 0.0)) {
            a = 0.0;
        }
        out.logits[0] += params.w2[j * 2] * a;
        out.logits[1] += params.w2[j * 2 + 1] * a;
    }
    return out;
}

double relevance_probability(const ModelParams& params, const FeatureVector& features) {
    return softmax(forward(params, features).logits)[1];
}

void accumulate_gradient(ModelParams& grads, const ModelParams& params, std::span<const double> features,
                         std::span<const double> hidden, const TargetDistribution& target) {
    const std::size_t h = params.hidden;
    Logits logits = {params.b2[0], params.b2[1]};
    for (std::size_t j = 0; j < h; ++j) {
        logits[0] += params.w2[j * 2] * hidden[j];
        logits[1] += params.w2[j * 2 + 1] * hidden[j];
    }
    const auto g = ce_gradient(target, logits);

    grads.b2[0] += g[0];
    grads.b2[1] += g[1];
    std::vector<double> delta(h, 0.0);
    for (std::size_t j = 0; j < h; ++j) {
        grads.w2[j * 2] += hidden[j] * g[0];
        grads.w2[j * 2 + 1] += hidden[j] * g[1];
        if (hidden[j] > 0.0) {
            delta[j] = params.w2[j * 2] * g[0] + params.w2[j * 2 + 1] * g[1];
        }
    }
    for (std::size_t j = 0; j < h; ++j) {
        grads.b1[j] += delta[j];
    }
    for (std::size_t i = 0; i < params.dim; ++i) {
        const double x = features[i];
        if (x == 0.0) {
            continue;
        }
        double* row = &grads.w1[i * h];
        for (std::size_t j = 0; j < h; ++j) {
            row[j] += x * delta[j];
        }
    }
}

ModelParams backward(const ModelParams& params, std::span<const double> features, std::span<const double> hidden,
                     const TargetDistribution& target) {
    ModelParams grads = ModelParams::zeros(params.dim, params.hidden);
    accumulate_gradient(grads, params, features, hidden, target);
    return grads;
}

void adam_step(ModelParams& params, const ModelParams& grads, AdamState& state, const AdamConfig& config) {
    state.t += 1;
    const double t = static_cast<double>(state.t);
    const double correction1 = 1.0 - std::pow(config.beta1, t);
    const double correction2 = 1.0 - std::pow(config.beta2, t);
    auto p = params.arrays();
    auto g = grads.arrays();
    auto m = state.m.arrays();
    auto v = state.v.arrays();
    for (std::size_t a = 0; a < p.size(); ++a) {
        for (std::size_t i = 0; i < p[a].size(); ++i) {
            m[a][i] = config.beta1 * m[a][i] + (1.0 - config.beta1) * g[a][i];
            v[a][i] = config.beta2 * v[a][i] + (1.0 - config.beta2) * g[a][i] * g[a][i];
            const double m_hat = m[a][i] / correction1;
            const double v_hat = v[a][i] / correction2;
            p[a][i] -= config.lr * m_hat / (std::sqrt(v_hat) + config.eps);
        }
    }
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

constexpr char kMagic[4] = {'S', 'M', 'R', 'K'};
constexpr std::size_t kHeaderBytes = 4 + 4 + 4 + 4 + 8;

template <typename T>
void put_le(std::string& out, T value) {
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        out.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
    }
}

template <typename T>
T get_le(std::string_view bytes, std::size_t offset) {
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        value |= static_cast<T>(static_cast<unsigned char>(bytes[offset + i])) << (8 * i);
    }
    return value;
}

void put_array(std::string& out, std::span<const double> values) {
    for (double v : values) {
        put_le(out, std::bit_cast<std::uint64_t>(v));
    }
}

void get_array(std::string_view bytes, std::size_t& offset, std::span<double> values) {
    for (double& v : values) {
        v = std::bit_cast<double>(get_le<std::uint64_t>(bytes, offset));
        offset += 8;
    }
}

}  // namespace

std::string serialize_checkpoint(const ModelParams& params, const AdamState& state) {
    std::string out(kMagic, sizeof kMagic);
    put_le(out, kCheckpointVersion);
    put_le(out, static_cast<std::uint32_t>(params.dim));
    put_le(out, static_cast<std::uint32_t>(params.hidden));
    put_le(out, state.t);
    for (const auto* p : {&params, &state.m, &state.v}) {
        for (auto a : p->arrays()) {
            put_array(out, a);
        }
    }
    return out;
}

Checkpoint parse_checkpoint(std::string_view bytes) {
    if (bytes.size() < kHeaderBytes || bytes.substr(0, 4) != std::string_view(kMagic, 4)) {
        throw CheckpointCorruptError("not a checkpoint (bad magic or truncated header)");
    }
    const auto version = get_le<std::uint32_t>(bytes, 4);
    if (version != kCheckpointVersion) {
        throw CheckpointVersionError("unsupported checkpoint version " + std::to_string(version) + " (expected " +
                                     std::to_string(kCheckpointVersion) + ")");
    }
    const auto dim = get_le<std::uint32_t>(bytes, 8);
    const auto hidden = get_le<std::uint32_t>(bytes, 12);
    if (dim == 0 || hidden == 0) {
        throw CheckpointCorruptError("checkpoint has zero dimensions");
    }
    Checkpoint cp{ModelParams::zeros(dim, hidden), AdamState::zeros(dim, hidden)};
    cp.state.t = get_le<std::uint64_t>(bytes, 16);
    const std::size_t expected = kHeaderBytes + 3 * 8 * cp.params.parameter_count();
    if (bytes.size() != expected) {
        throw CheckpointCorruptError("checkpoint has " + std::to_string(bytes.size()) + " bytes, expected " +
                                     std::to_string(expected));
    }
    std::size_t offset = kHeaderBytes;
    for (auto* p : {&cp.params, &cp.state.m, &cp.state.v}) {
        for (auto a : p->arrays()) {
            get_array(bytes, offset, a);
        }
    }
    for (auto a : cp.state.v.arrays()) {
        for (double x : a) {
            if (!(x >= 0.0)) {
                throw CheckpointCorruptError("checkpoint second-moment estimate is negative or NaN");
            }
        }
    }
    return cp;
}

void save_checkpoint(const ModelParams& params, const AdamState& state, const std::filesystem::path& path) {
    detail::write_file_atomic(path, serialize_checkpoint(params, state));
}

Checkpoint load_checkpoint(const std::filesystem::path& path, std::size_t expected_dim, std::size_t expected_hidden) {
    const std::string bytes = detail::read_file(path);
    Checkpoint cp;
    try {
        cp = parse_checkpoint(bytes);
    } catch (const DataError& e) {
        // Re-throw with the path while keeping the error's type.
        if (dynamic_cast<const CheckpointVersionError*>(&e) != nullptr) {
            throw CheckpointVersionError(path.string() + ": " + e.what());
        }
        throw CheckpointCorruptError(path.string() + ": " + e.what());
    }
    if (cp.params.dim != expected_dim || cp.params.hidden != expected_hidden) {
        throw CheckpointDimError(path.string() + ": checkpoint is " + std::to_string(cp.params.dim) + "x" +
                                 std::to_string(cp.params.hidden) + ", expected " + std::to_string(expected_dim) +
                                 "x" + std::to_string(expected_hidden));
    }
    return cp;
}

}  // namespace smoothrank

#include "smoothrank/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>

#include "io_util.hpp"
#include "smoothrank/errors.hpp"
#include "smoothrank/rng.hpp"

namespace smoothrank {

void TrainConfig::validate() const {
    policy.validate();
    schedule.validate();
    if (batch_size < 1) {
        throw UsageError("batch size must be >= 1");
    }
    if (total_instances < 1) {
        throw UsageError("instance budget must be >= 1");
    }
    if (schedule.kind == ScheduleKind::TwoStage && schedule.switch_at > total_instances) {
        throw UsageError("switch point " + std::to_string(schedule.switch_at) + " exceeds the instance budget " +
                         std::to_string(total_instances));
    }
    if (n < 1) {
        throw UsageError("candidate lists need n >= 1");
    }
    if (!(adam.lr >= 0.0) || !(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0) ||
        !(adam.eps > 0.0)) {
        throw UsageError("invalid Adam hyperparameters");
    }
}

std::string config_id(const TrainConfig& config) {
    std::string id = policy_name(config.policy.kind, config.schedule.kind);
    if (config.policy.kind == SmoothingKind::Hard) {
        return id;
    }
    char eps[32];
    std::snprintf(eps, sizeof eps, "%g", config.policy.epsilon);
    id += "_eps";
    id += eps;
    if (config.schedule.kind == ScheduleKind::TwoStage) {
        id += "_x" + std::to_string(config.schedule.switch_at);
    }
    return id;
}

// ---------------------------------------------------------------------------

namespace {
std::string pair_key(const std::string& query_id, const std::string& doc_id) {
    std::string key;
    key.reserve(query_id.size() + doc_id.size() + 1);
    key += query_id;
    key += '\x1f';
    key += doc_id;
    return key;
}
}  // namespace

FeatureStore FeatureStore::build(const QuerySet& queries, const Corpus& corpus, const InvertedIndex& index,
                                 const std::vector<CandidateList>& lists) {
    FeatureStore store;
    store.extend(queries, corpus, index, lists);
    return store;
}

void FeatureStore::extend(const QuerySet& queries, const Corpus& corpus, const InvertedIndex& index,
                          const std::vector<CandidateList>& lists) {
    for (const auto& list : lists) {
        const Query* query = queries.find(list.query_id);
        if (query == nullptr) {
            throw DataError("candidate list references unknown query " + list.query_id);
        }
        for (const auto& c : list.candidates) {
            auto key = pair_key(list.query_id, c.doc_id);
            if (features_.count(key) != 0) {
                continue;
            }
            const Document* doc = corpus.find(c.doc_id);
            if (doc == nullptr) {
                throw DataError("candidate list references unknown document " + c.doc_id);
            }
            features_.emplace(std::move(key), extract_features(query->text, doc->text, index));
        }
    }
}

const FeatureVector& FeatureStore::get(const std::string& query_id, const std::string& doc_id) const {
    auto it = features_.find(pair_key(query_id, doc_id));
    if (it == features_.end()) {
        throw DataError("no features for query " + query_id + ", document " + doc_id);
    }
    return it->second;
}

// ---------------------------------------------------------------------------

std::vector<TrainInstance> make_instance_stream(const std::vector<CandidateList>& lists,
                                                std::uint64_t total_instances, std::uint64_t seed) {
    const auto pairs = flatten(lists);
    if (pairs.empty()) {
        throw DataError("no training pairs");
    }
    std::vector<TrainInstance> stream;
    stream.reserve(total_instances);
    std::vector<std::size_t> order(pairs.size());
    for (std::uint64_t pass = 0; stream.size() < total_instances; ++pass) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng gen(seed + pass);
        shuffle(std::span<std::size_t>(order), gen);
        for (std::size_t i = 0; i < order.size() && stream.size() < total_instances; ++i) {
            stream.push_back(pairs[order[i]]);
        }
    }
    return stream;
}

TrainResult train(const TrainConfig& config, const FeatureStore& features, const std::vector<CandidateList>& lists) {
    config.validate();
    for (const auto& list : lists) {
        if (list.n() != config.n) {
            throw DataError("query " + list.query_id + " has " + std::to_string(list.n()) + " candidates, expected " +
                            std::to_string(config.n));
        }
    }
    const auto stream = make_instance_stream(lists, config.total_instances, config.seed);
    std::vector<const FeatureVector*> inputs;
    inputs.reserve(stream.size());
    for (const auto& inst : stream) {
        inputs.push_back(&features.get(inst.query_id, inst.doc_id));
    }

    TrainResult result{init_params(config.seed, kFeatureDim, kHiddenDim), AdamState::zeros(kFeatureDim, kHiddenDim),
                       {}};
    ModelParams grads = ModelParams::zeros(kFeatureDim, kHiddenDim);
    for (std::size_t start = 0; start < stream.size(); start += config.batch_size) {
        const std::size_t end = std::min(stream.size(), start + config.batch_size);
        for (auto a : grads.arrays()) {
            std::fill(a.begin(), a.end(), 0.0);
        }
        double loss = 0.0;
        double epsilon = 0.0;
        for (std::size_t i = start; i < end; ++i) {
            epsilon = epsilon_at(config.schedule, config.policy, i);
            const auto target = make_target(config.policy.kind, stream[i], epsilon);
            const auto& x = inputs[i]->values;
            const auto pass = forward(result.params, x);
            loss += cross_entropy(target, pass.logits);
            accumulate_gradient(grads, result.params, x, pass.hidden, target);
        }
        const auto count = static_cast<double>(end - start);
        for (auto a : grads.arrays()) {
            for (double& g : a) {
                g /= count;
            }
        }
        adam_step(result.params, grads, result.state, config.adam);
        loss /= count;
        if (!std::isfinite(loss)) {
            throw DataError("training loss became non-finite after " + std::to_string(end) + " instances");
        }
        result.log.entries.push_back(TrainLogEntry{end, epsilon, loss});
    }
    return result;
}

void write_trainlog_csv(const std::filesystem::path& path, const TrainLog& log) {
    std::string out = "instances_seen,epsilon,loss\n";
    for (const auto& e : log.entries) {
        out += std::to_string(e.instances_seen) + "," + detail::fixed(e.epsilon) + "," + detail::fixed(e.loss) + "\n";
    }
    detail::write_file_atomic(path, out);
}

}  // namespace smoothrank

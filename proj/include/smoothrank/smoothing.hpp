#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "smoothrank/types.hpp"

namespace smoothrank {

/// Two-class target distribution q'(k|x).
struct TargetDistribution {
    double p_nonrel = 0.0;
    double p_rel = 0.0;

    [[nodiscard]] double operator[](int k) const { return k == 0 ? p_nonrel : p_rel; }
    bool operator==(const TargetDistribution&) const = default;
};

using Logits = std::array<double, 2>;

enum class SmoothingKind { Hard, LS, WSLS };

struct SmoothingPolicy {
    SmoothingKind kind = SmoothingKind::Hard;
    double epsilon = 0.0;

    /// Throws UsageError unless epsilon is in [0, 1] and Hard has epsilon 0.
    void validate() const;
};

enum class ScheduleKind { Constant, TwoStage };

struct Schedule {
    ScheduleKind kind = ScheduleKind::Constant;
    std::uint64_t switch_at = 0;  // TwoStage only: first instance trained with epsilon 0

    void validate() const;
};

/// Policy and schedule as named on the command line:
/// hard, ls, wsls, t-ls, t-wsls.
struct PolicySpec {
    SmoothingKind kind = SmoothingKind::Hard;
    bool two_stage = false;
};

PolicySpec parse_policy(const std::string& name);
std::string policy_name(SmoothingKind kind, ScheduleKind schedule);

TargetDistribution hard_target(Label y);

/// (1 - eps) * delta(k, y) + eps / 2.
TargetDistribution ls_target(Label y, double epsilon);

/// Positives fall back to ls_target. For a sampled negative with normalized
/// sampler score s the smoothing mass eps * s goes to the relevant class:
/// p_rel = eps * s, p_nonrel = (1 - eps) + eps * (1 - s).
TargetDistribution wsls_target(Label y, double ns_score, double epsilon);

/// Target for one instance under the given policy with an explicit epsilon.
TargetDistribution make_target(SmoothingKind kind, const TrainInstance& instance, double epsilon);

/// The policy's epsilon, except 0 from instance `switch_at` on under TwoStage.
double epsilon_at(const Schedule& schedule, const SmoothingPolicy& policy, std::uint64_t instances_seen);

std::array<double, 2> softmax(const Logits& logits);

/// -sum_k q(k) log p(k) via log-sum-exp; classes with q(k) == 0 add nothing.
/// Throws DataError for non-finite logits.
double cross_entropy(const TargetDistribution& target, const Logits& logits);

/// d loss / d z_k = p(k) - q(k).
std::array<double, 2> ce_gradient(const TargetDistribution& target, const Logits& logits);

}  // namespace smoothrank

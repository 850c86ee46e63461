#include "smoothrank/smoothing.hpp"

#include <algorithm>
#include <cmath>

#include "smoothrank/errors.hpp"

namespace smoothrank {

namespace {

bool in_unit_interval(double x) { return x >= 0.0 && x <= 1.0; }

void require_unit(double x, const char* what) {
    if (!in_unit_interval(x)) {
        throw UsageError(std::string(what) + " must be in [0, 1], got " + std::to_string(x));
    }
}

}  // namespace

void SmoothingPolicy::validate() const {
    require_unit(epsilon, "epsilon");
    if (kind == SmoothingKind::Hard && epsilon != 0.0) {
        throw UsageError("hard labels take no epsilon");
    }
}

void Schedule::validate() const {
    if (kind == ScheduleKind::TwoStage && switch_at < 1) {
        throw UsageError("two-stage schedule needs switch_at >= 1");
    }
}

PolicySpec parse_policy(const std::string& name) {
    if (name == "hard") {
        return {SmoothingKind::Hard, false};
    }
    if (name == "ls") {
        return {SmoothingKind::LS, false};
    }
    if (name == "wsls") {
        return {SmoothingKind::WSLS, false};
    }
    if (name == "t-ls") {
        return {SmoothingKind::LS, true};
    }
    if (name == "t-wsls") {
        return {SmoothingKind::WSLS, true};
    }
    throw UsageError("unknown policy \"" + name + "\" (expected hard, ls, wsls, t-ls or t-wsls)");
}

std::string policy_name(SmoothingKind kind, ScheduleKind schedule) {
    std::string base;
    switch (kind) {
        case SmoothingKind::Hard:
            return "hard";
        case SmoothingKind::LS:
            base = "ls";
            break;
        case SmoothingKind::WSLS:
            base = "wsls";
            break;
    }
    return schedule == ScheduleKind::TwoStage ? "t-" + base : base;
}

TargetDistribution hard_target(Label y) {
    return y == Label::Relevant ? TargetDistribution{0.0, 1.0} : TargetDistribution{1.0, 0.0};
}

TargetDistribution ls_target(Label y, double epsilon) {
    require_unit(epsilon, "epsilon");
    const double on = (1.0 - epsilon) + epsilon / 2.0;
    const double off = epsilon / 2.0;
    return y == Label::Relevant ? TargetDistribution{off, on} : TargetDistribution{on, off};
}

TargetDistribution wsls_target(Label y, double ns_score, double epsilon) {
    require_unit(epsilon, "epsilon");
    require_unit(ns_score, "ns_score");
    if (y == Label::Relevant) {
        return ls_target(y, epsilon);
    }
    // Same arithmetic as ls_target so that s = 0.5 reproduces it bit for bit.
    const double off = epsilon * ns_score;
    const double on = (1.0 - epsilon) + epsilon * (1.0 - ns_score);
    return TargetDistribution{on, off};
}

TargetDistribution make_target(SmoothingKind kind, const TrainInstance& instance, double epsilon) {
    switch (kind) {
        case SmoothingKind::Hard:
            return hard_target(instance.label);
        case SmoothingKind::LS:
            return ls_target(instance.label, epsilon);
        case SmoothingKind::WSLS:
            return wsls_target(instance.label, instance.ns_score, epsilon);
    }
    return hard_target(instance.label);
}

double epsilon_at(const Schedule& schedule, const SmoothingPolicy& policy, std::uint64_t instances_seen) {
    if (schedule.kind == ScheduleKind::TwoStage && instances_seen >= schedule.switch_at) {
        return 0.0;
    }
    return policy.epsilon;
}

std::array<double, 2> softmax(const Logits& logits) {
    const double m = std::max(logits[0], logits[1]);
    const double e0 = std::exp(logits[0] - m);
    const double e1 = std::exp(logits[1] - m);
    const double sum = e0 + e1;
    return {e0 / sum, e1 / sum};
}

double cross_entropy(const TargetDistribution& target, const Logits& logits) {
    if (!std::isfinite(logits[0]) || !std::isfinite(logits[1])) {
        throw DataError("non-finite logits");
    }
    // -log p_k = log(1 + exp(z_other - z_k)), evaluated on the logit gap so
    // equal logits give exactly ln 2 at any magnitude.
    const auto neg_log_p = [](double gap) {
        return gap > 0.0 ? gap + std::log1p(std::exp(-gap)) : std::log1p(std::exp(gap));
    };
    const double gap = logits[1] - logits[0];
    double loss = 0.0;
    if (target[0] != 0.0) {
        loss += target[0] * neg_log_p(gap);
    }
    if (target[1] != 0.0) {
        loss += target[1] * neg_log_p(-gap);
    }
    return std::max(loss, 0.0);
}

std::array<double, 2> ce_gradient(const TargetDistribution& target, const Logits& logits) {
    const auto p = softmax(logits);
    return {p[0] - target.p_nonrel, p[1] - target.p_rel};
}

}  // namespace smoothrank

#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "smoothrank/ranker.hpp"
#include "smoothrank/rng.hpp"
#include "smoothrank/smoothing.hpp"

namespace test_support {

// Relative error with a floor on the denominator. The floor sits well above
// the round-off of a central difference at h = 1e-5 (about 1e-11 for an O(1)
// loss), so near-zero gradients are compared on an absolute scale.
inline double relative_error(double analytic, double numeric) {
    return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-4});
}

struct GradCase {
    smoothrank::ModelParams params;
    std::vector<double> features;
    smoothrank::TargetDistribution target;
};

// Random parameters, features and target, redrawn until every hidden
// pre-activation is at least `margin` away from the ReLU kink.
inline GradCase random_grad_case(smoothrank::Rng& gen, std::size_t dim, std::size_t hidden, double margin) {
    using namespace smoothrank;
    for (;;) {
        GradCase c{ModelParams::zeros(dim, hidden), std::vector<double>(dim), {}};
        for (auto array : c.params.arrays()) {
            for (auto& x : array) {
                x = uniform_real(gen, -0.5, 0.5);
            }
        }
        for (auto& x : c.features) {
            x = uniform_real(gen, 0.0, 2.0);
        }
        const double q = uniform_unit(gen);
        c.target = {1.0 - q, q};
        bool clear = true;
        for (std::size_t j = 0; j < hidden && clear; ++j) {
            double pre = c.params.b1[j];
            for (std::size_t i = 0; i < dim; ++i) {
                pre += c.features[i] * c.params.w1[i * hidden + j];
            }
            clear = std::abs(pre) >= margin;
        }
        if (clear) {
            return c;
        }
    }
}

inline double loss_of(const smoothrank::ModelParams& params, const std::vector<double>& features,
                      const smoothrank::TargetDistribution& target) {
    return smoothrank::cross_entropy(target, smoothrank::forward(params, features).logits);
}

// Largest relative error between backward() and central differences over
// the given flat parameter coordinates (all of them when `coords` is empty).
inline double max_gradient_error(const GradCase& c, double h, const std::vector<std::size_t>& coords = {}) {
    using namespace smoothrank;
    const auto pass = forward(c.params, c.features);
    const auto grads = backward(c.params, c.features, pass.hidden, c.target);

    std::vector<double> analytic;
    for (auto array : grads.arrays()) {
        analytic.insert(analytic.end(), array.begin(), array.end());
    }
    auto perturbed = c.params;
    auto coordinate = [&](std::size_t flat) -> double& {
        for (auto array : perturbed.arrays()) {
            if (flat < array.size()) {
                return array[flat];
            }
            flat -= array.size();
        }
        return perturbed.b2[0];
    };

    std::vector<std::size_t> all = coords;
    if (all.empty()) {
        for (std::size_t i = 0; i < analytic.size(); ++i) {
            all.push_back(i);
        }
    }
    double worst = 0.0;
    for (std::size_t flat : all) {
        double& x = coordinate(flat);
        const double saved = x;
        x = saved + h;
        const double up = loss_of(perturbed, c.features, c.target);
        x = saved - h;
        const double down = loss_of(perturbed, c.features, c.target);
        x = saved;
        worst = std::max(worst, relative_error(analytic[flat], (up - down) / (2 * h)));
    }
    return worst;
}

}  // namespace test_support

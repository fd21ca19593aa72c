#pragma once

#include <cmath>

#include "hoidet/grid.hpp"

namespace hoidet {

struct LossConfig {
    double epsilon = 1e-7;  // prediction clamp for log stability
    double lambda_actor = 1.0;
    double lambda_object = 1.0;
};

/// Elementwise product of two same-shaped grids, used to merge the Hanning
/// and scale weight maps into the weight seen by the loss.
inline ChannelGrid combine_weights(const ChannelGrid& a, const ChannelGrid& b) {
    require_same_shape(a, b, "combine_weights");
    ChannelGrid out = a;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] *= b.data[i];
    return out;
}

/// Weighted cross entropy over all cells and channels of one branch:
///   L = -sum w * [f * log(p) + (1 - f) * log(1 - p)]
/// with p clamped to [eps, 1 - eps]. The reduction is a plain sum in data
/// order, so results are bit-reproducible.
inline double wce_forward(const ChannelGrid& pred, const ChannelGrid& target,
                          const ChannelGrid& weights, double eps = 1e-7) {
    require_same_shape(pred, target, "wce_forward");
    require_same_shape(pred, weights, "wce_forward");
    double loss = 0.0;
    for (std::size_t i = 0; i < pred.data.size(); ++i) {
        const double p = std::min(std::max(pred.data[i], eps), 1.0 - eps);
        const double f = target.data[i];
        loss -= weights.data[i] * (f * std::log(p) + (1.0 - f) * std::log1p(-p));
    }
    return loss;
}

/// Gradient of wce_forward with respect to the raw predictions. Elements in
/// the clamped region get zero gradient, matching the flat forward there.
inline ChannelGrid wce_backward(const ChannelGrid& pred, const ChannelGrid& target,
                                const ChannelGrid& weights, double eps = 1e-7) {
    require_same_shape(pred, target, "wce_backward");
    require_same_shape(pred, weights, "wce_backward");
    ChannelGrid grad(pred.width, pred.height, pred.channels, 0.0);
    for (std::size_t i = 0; i < pred.data.size(); ++i) {
        const double p = pred.data[i];
        if (p < eps || p > 1.0 - eps) continue;
        const double f = target.data[i];
        grad.data[i] = weights.data[i] * ((1.0 - f) / (1.0 - p) - f / p);
    }
    return grad;
}

struct BranchLosses {
    double actor = 0.0;
    double object = 0.0;
    double total = 0.0;
};

inline BranchLosses total_loss(double actor, double object, const LossConfig& cfg) {
    BranchLosses out;
    out.actor = actor;
    out.object = object;
    out.total = cfg.lambda_actor * actor + cfg.lambda_object * object;
    return out;
}

}  // namespace hoidet

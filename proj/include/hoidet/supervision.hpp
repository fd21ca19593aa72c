#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "hoidet/geometry.hpp"
#include "hoidet/grid.hpp"
#include "hoidet/scene.hpp"

namespace hoidet {

/// How the selected actor is communicated to the network.
enum class MaskMode {
    Rgbm,    // RGB + binary actor mask channel
    Rgb,     // plain image, actor position not indicated
    Rgb255,  // actor region saturated to white inside the RGB channels
};

/// Which branches carry the without-interaction channel as supervision.
enum class WoPlacement { None, Actor, Object, Both };

inline bool wo_on_actor(WoPlacement p) {
    return p == WoPlacement::Actor || p == WoPlacement::Both;
}
inline bool wo_on_object(WoPlacement p) {
    return p == WoPlacement::Object || p == WoPlacement::Both;
}

/// A box with the verb set it is supervised with.
struct LabeledBox {
    BBox box;
    VerbSet verbs;
};

/// Concatenates the image with a binary actor-position mask. A pixel is
/// masked when its center lies inside the actor box.
inline ChannelGrid make_rgbm(const ChannelGrid& image, const BBox& actor) {
    if (image.channels != 3) throw std::invalid_argument("make_rgbm expects a 3-channel image");
    ChannelGrid out(image.width, image.height, 4);
    std::copy(image.data.begin(), image.data.end(), out.data.begin());
    for (int y = 0; y < image.height; ++y) {
        const double cy = y + 0.5;
        for (int x = 0; x < image.width; ++x) {
            const double cx = x + 0.5;
            const bool in = cx >= actor.x1 && cx < actor.x2 && cy >= actor.y1 && cy < actor.y2;
            out.at(x, y, 3) = in ? 1.0 : 0.0;
        }
    }
    return out;
}

/// Builds the network input for the requested mask mode.
inline ChannelGrid make_model_input(const ChannelGrid& image, const BBox& actor, MaskMode mode) {
    switch (mode) {
        case MaskMode::Rgbm:
            return make_rgbm(image, actor);
        case MaskMode::Rgb:
            return image;
        case MaskMode::Rgb255: {
            // 8-bit saturating "+255": the actor region becomes pure white.
            ChannelGrid out = image;
            for (int y = 0; y < image.height; ++y) {
                const double cy = y + 0.5;
                for (int x = 0; x < image.width; ++x) {
                    const double cx = x + 0.5;
                    if (cx >= actor.x1 && cx < actor.x2 && cy >= actor.y1 && cy < actor.y2) {
                        for (int c = 0; c < 3; ++c) out.at(x, y, c) = 1.0;
                    }
                }
            }
            return out;
        }
    }
    throw std::invalid_argument("unknown mask mode");
}

inline int input_channels(MaskMode mode) { return mode == MaskMode::Rgbm ? 4 : 3; }

/// Supervision geometry of one entity on the output grid: the full box, its
/// central area, and the channels set to 1 over that area.
struct SupervisionBox {
    GridBox full;
    GridBox zone;
    std::vector<int> channels;
};

/// Maps a verb set to target channels. Channel K is the without-interaction
/// category and participates only when the placement enables it.
inline std::vector<int> target_channels(const VerbSet& verbs, int num_verbs, bool include_wo) {
    std::vector<int> out = verbs.verbs;
    if (verbs.without_interaction && include_wo) out.push_back(num_verbs);
    return out;
}

inline std::vector<SupervisionBox> make_supervision_boxes(const std::vector<LabeledBox>& boxes,
                                                          const GridShape& shape, double ratio,
                                                          int num_verbs, bool include_wo) {
    std::vector<SupervisionBox> out;
    out.reserve(boxes.size());
    for (const auto& lb : boxes) {
        SupervisionBox sb;
        sb.full = box_to_grid(lb.box, shape);
        sb.zone = box_to_grid(center_area(lb.box, ratio), shape);
        sb.channels = target_channels(lb.verbs, num_verbs, include_wo);
        out.push_back(std::move(sb));
    }
    return out;
}

/// Pixel-wise branch target: channel c is 1 over the central area of every
/// box whose verb set contains c's category; overlapping boxes merge by
/// elementwise maximum. Grid has num_verbs + 1 channels.
inline ChannelGrid branch_target(const std::vector<LabeledBox>& boxes, const GridShape& shape,
                                 double ratio, int num_verbs, bool include_wo) {
    ChannelGrid target(shape.width, shape.height, num_verbs + 1, 0.0);
    for (const auto& sb : make_supervision_boxes(boxes, shape, ratio, num_verbs, include_wo)) {
        for (int c : sb.channels)
            for (int y = sb.zone.y1; y <= sb.zone.y2; ++y)
                for (int x = sb.zone.x1; x <= sb.zone.x2; ++x) target.at(x, y, c) = 1.0;
    }
    return target;
}

/// Two-dimensional Hanning window, 1 at the center and 0 at the edges
/// x = +-(w-1)/2. Callers keep |x| <= (w-1)/2 and |y| <= (h-1)/2.
/// Degenerate extents (w <= 1 or h <= 1) contribute a factor of 1.
inline double hanning(double x, double y, double w, double h) {
    const double fx = w > 1.0 ? 0.5 * (1.0 + std::cos(2.0 * std::numbers::pi * x / (w - 1.0))) : 1.0;
    const double fy = h > 1.0 ? 0.5 * (1.0 + std::cos(2.0 * std::numbers::pi * y / (h - 1.0))) : 1.0;
    return fx * fy;
}

/// Hanning weight map over a built target. Cells outside every box weigh 1.
/// Inside a box, positive cells take the window value (max over the boxes
/// that produced the 1), negative cells take 1 - window (min over all
/// covering boxes), so the loss is soft near box centers and boundaries.
inline ChannelGrid hanning_weight_map(const std::vector<SupervisionBox>& boxes,
                                      const ChannelGrid& target) {
    const int W = target.width, H = target.height, C = target.channels;
    std::vector<char> covered(static_cast<std::size_t>(W) * H, 0);
    std::vector<double> neg_min(static_cast<std::size_t>(W) * H,
                                std::numeric_limits<double>::infinity());
    ChannelGrid pos_max(W, H, C, 0.0);

    for (const auto& sb : boxes) {
        const double w = sb.full.width();
        const double h = sb.full.height();
        const double x0 = (sb.full.x1 + sb.full.x2) / 2.0;
        const double y0 = (sb.full.y1 + sb.full.y2) / 2.0;
        for (int y = sb.full.y1; y <= sb.full.y2; ++y) {
            for (int x = sb.full.x1; x <= sb.full.x2; ++x) {
                const double hv = hanning(x - x0, y - y0, w, h);
                const std::size_t i = static_cast<std::size_t>(y) * W + x;
                covered[i] = 1;
                neg_min[i] = std::min(neg_min[i], 1.0 - hv);
                if (sb.zone.contains(x, y))
                    for (int c : sb.channels)
                        pos_max.at(x, y, c) = std::max(pos_max.at(x, y, c), hv);
            }
        }
    }

    ChannelGrid weights(W, H, C, 1.0);
    for (int c = 0; c < C; ++c)
        for (int y = 0; y < H; ++y)
            for (int x = 0; x < W; ++x) {
                const std::size_t i = static_cast<std::size_t>(y) * W + x;
                if (!covered[i]) continue;
                weights.at(x, y, c) = target.at(x, y, c) == 1.0 ? pos_max.at(x, y, c) : neg_min[i];
            }
    return weights;
}

/// Scale weight map: cells inside a box weigh min(cap, lambda * max(W', H')
/// / max(w, h)) so small boxes are not drowned out by large supervision
/// areas; the maximum wins where boxes overlap, outside cells weigh 1. The
/// value is identical across channels.
inline ChannelGrid scale_weight_map(const std::vector<GridBox>& boxes, const GridShape& shape,
                                    int channels, double lambda_s = 0.5, double cap = 10.0) {
    ChannelGrid weights(shape.width, shape.height, channels, 1.0);
    std::vector<double> cell(static_cast<std::size_t>(shape.width) * shape.height, 0.0);
    const double longest = std::max(shape.width, shape.height);
    for (const auto& b : boxes) {
        const double w = std::min(cap, lambda_s * longest / std::max(b.width(), b.height()));
        for (int y = b.y1; y <= b.y2; ++y)
            for (int x = b.x1; x <= b.x2; ++x) {
                const std::size_t i = static_cast<std::size_t>(y) * shape.width + x;
                cell[i] = std::max(cell[i], w);
            }
    }
    for (int c = 0; c < channels; ++c)
        for (int y = 0; y < shape.height; ++y)
            for (int x = 0; x < shape.width; ++x) {
                const std::size_t i = static_cast<std::size_t>(y) * shape.width + x;
                if (cell[i] > 0.0) weights.at(x, y, c) = cell[i];
            }
    return weights;
}

}  // namespace hoidet

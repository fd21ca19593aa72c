#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "hoidet/geometry.hpp"
#include "hoidet/grid.hpp"
#include "hoidet/rng.hpp"
#include "hoidet/scene.hpp"

namespace hoidet {

/// Seed streams: every per-item random decision hangs off the dataset seed,
/// the item index, and which stage is asking.
enum class SeedStream : std::uint64_t { SceneGen = 0, Detect = 1, ModelInit = 2, Balance = 3, Shuffle = 4 };

inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index, SeedStream stream) {
    return item_seed(seed, index, static_cast<std::uint64_t>(stream));
}

inline double horizontal_gap(const BBox& a, const BBox& b) {
    return std::max(std::max(b.x1 - a.x2, a.x1 - b.x2), 0.0);
}

inline double vertical_gap(const BBox& a, const BBox& b) {
    return std::max(std::max(b.y1 - a.y2, a.y1 - b.y2), 0.0);
}

inline bool boxes_overlap(const BBox& a, const BBox& b) {
    return std::min(a.x2, b.x2) > std::max(a.x1, b.x1) &&
           std::min(a.y2, b.y2) > std::max(a.y1, b.y1);
}

inline bool predicate_holds(SpatialPredicate p, const BBox& human, const BBox& object,
                            double reach) {
    const bool overlap = boxes_overlap(human, object);
    const double gx = horizontal_gap(human, object);
    const double gy = vertical_gap(human, object);
    switch (p) {
        case SpatialPredicate::Overlap:
            return overlap;
        case SpatialPredicate::Beside:
            return !overlap && gy == 0.0 && gx <= reach;
        case SpatialPredicate::Stacked:
            return !overlap && gx == 0.0 && gy <= reach;
        case SpatialPredicate::Near:
            return !overlap && gx <= reach && gy <= reach;
    }
    return false;
}

/// Recomputes the triplet list from the boxes. generate_scene emits exactly
/// this, so labels always agree with the rendered geometry.
inline std::vector<Triplet> triplets_from_geometry(const SceneAnnotation& ann,
                                                   const std::vector<SpatialPredicate>& predicates,
                                                   double reach) {
    std::vector<Triplet> out;
    for (int h = 0; h < static_cast<int>(ann.humans.size()); ++h)
        for (int v = 0; v < static_cast<int>(predicates.size()); ++v)
            for (int o = 0; o < static_cast<int>(ann.objects.size()); ++o)
                if (predicate_holds(predicates[v], ann.humans[h], ann.objects[o].box, reach))
                    out.push_back({h, v, o});
    return out;
}

struct Rgb {
    double r, g, b;
};

inline constexpr Rgb kHumanColor{0.25, 0.75, 0.35};

inline Rgb object_color(int category) {
    static constexpr std::array<Rgb, 6> palette = {{{0.85, 0.25, 0.20},
                                                    {0.20, 0.35, 0.85},
                                                    {0.90, 0.80, 0.20},
                                                    {0.80, 0.20, 0.80},
                                                    {0.20, 0.80, 0.80},
                                                    {0.95, 0.55, 0.10}}};
    return palette[static_cast<std::size_t>(category) % palette.size()];
}

namespace detail {

inline void fill_box(ChannelGrid& img, const BBox& box, const Rgb& color) {
    for (int y = 0; y < img.height; ++y) {
        const double cy = y + 0.5;
        if (cy < box.y1 || cy >= box.y2) continue;
        for (int x = 0; x < img.width; ++x) {
            const double cx = x + 0.5;
            if (cx < box.x1 || cx >= box.x2) continue;
            img.at(x, y, 0) = color.r;
            img.at(x, y, 1) = color.g;
            img.at(x, y, 2) = color.b;
        }
    }
}

inline BBox clamp_to_image(BBox b, double W, double H) {
    b.x1 = std::clamp(b.x1, 0.0, W);
    b.x2 = std::clamp(b.x2, 0.0, W);
    b.y1 = std::clamp(b.y1, 0.0, H);
    b.y2 = std::clamp(b.y2, 0.0, H);
    return b;
}

/// Slides a box fully inside the image without shrinking it, so placement
/// near a border never produces a degenerate sliver.
inline BBox shift_inside(BBox b, double W, double H) {
    const double w = std::min(b.x2 - b.x1, W);
    const double h = std::min(b.y2 - b.y1, H);
    const double x1 = std::clamp(b.x1, 0.0, W - w);
    const double y1 = std::clamp(b.y1, 0.0, H - h);
    return {x1, y1, x1 + w, y1 + h};
}

/// Draws an object box whose relation to `anchor` is biased toward the
/// requested predicate; the final labels come from the geometry either way.
inline BBox place_object(Rng& rng, const SynthConfig& cfg, const BBox& anchor, double ow,
                         double oh, int mode) {
    const double W = cfg.image_width, H = cfg.image_height;
    if (mode >= static_cast<int>(cfg.verb_predicates.size())) {
        const double x1 = rng.uniform(0.0, W - ow);
        const double y1 = rng.uniform(0.0, H - oh);
        return {x1, y1, x1 + ow, y1 + oh};
    }
    switch (cfg.verb_predicates[static_cast<std::size_t>(mode)]) {
        case SpatialPredicate::Overlap: {
            // Keep the object center in the inner part of the anchor so the
            // typical overlap is visually deep rather than a grazing touch.
            const double mx = 0.2 * (anchor.x2 - anchor.x1);
            const double my = 0.2 * (anchor.y2 - anchor.y1);
            const double cx = rng.uniform(anchor.x1 + mx, anchor.x2 - mx);
            const double cy = rng.uniform(anchor.y1 + my, anchor.y2 - my);
            return {cx - ow / 2, cy - oh / 2, cx + ow / 2, cy + oh / 2};
        }
        case SpatialPredicate::Beside: {
            // Gap floor of 1.5px keeps a visible background seam between the
            // boxes, so adjacency never renders identically to a touch.
            const double gap = rng.uniform(std::min(1.5, cfg.interaction_reach), cfg.interaction_reach);
            const bool right_ok = anchor.x2 + gap + ow <= W;
            const bool left_ok = anchor.x1 - gap - ow >= 0.0;
            bool right = rng.bernoulli(0.5);
            if (right_ok != left_ok) right = right_ok;  // prefer the side that fits
            const double x1 = right ? anchor.x2 + gap : anchor.x1 - gap - ow;
            // Center-aligned vertically so the canonical arrangement is a
            // crisp template; off-template pairs still get labeled by the
            // geometry when they happen to satisfy the predicate.
            const double yc = (anchor.y1 + anchor.y2) / 2.0 + rng.uniform(-1.5, 1.5);
            const double y1 = yc - oh / 2.0;
            return {x1, y1, x1 + ow, y1 + oh};
        }
        case SpatialPredicate::Stacked: {
            const double gap = rng.uniform(std::min(1.5, cfg.interaction_reach), cfg.interaction_reach);
            const bool below_ok = anchor.y2 + gap + oh <= H;
            const bool above_ok = anchor.y1 - gap - oh >= 0.0;
            bool below = rng.bernoulli(0.5);
            if (below_ok != above_ok) below = below_ok;  // prefer the side that fits
            const double y1 = below ? anchor.y2 + gap : anchor.y1 - gap - oh;
            const double xc = (anchor.x1 + anchor.x2) / 2.0 + rng.uniform(-1.5, 1.5);
            const double x1 = xc - ow / 2.0;
            return {x1, y1, x1 + ow, y1 + oh};
        }
        case SpatialPredicate::Near: {
            const double gx = rng.uniform(std::min(1.5, cfg.interaction_reach), cfg.interaction_reach);
            const double gy = rng.uniform(std::min(1.5, cfg.interaction_reach), cfg.interaction_reach);
            const double x1 = rng.bernoulli(0.5) ? anchor.x2 + gx : anchor.x1 - gx - ow;
            const double y1 = rng.bernoulli(0.5) ? anchor.y2 + gy : anchor.y1 - gy - oh;
            return {x1, y1, x1 + ow, y1 + oh};
        }
    }
    return {0, 0, ow, oh};
}

/// Picks a placement mode index in [0, n_modes), honoring the configured
/// weights when present and falling back to a uniform draw otherwise.
inline int pick_mode(Rng& rng, const SynthConfig& cfg, int n_modes) {
    if (static_cast<int>(cfg.placement_weights.size()) != n_modes)
        return rng.uniform_int(n_modes);
    double total = 0;
    for (double w : cfg.placement_weights) total += w;
    double r = rng.uniform(0.0, total);
    for (int m = 0; m < n_modes; ++m) {
        r -= cfg.placement_weights[static_cast<std::size_t>(m)];
        if (r < 0) return m;
    }
    return n_modes - 1;
}

}  // namespace detail

struct Scene {
    SceneAnnotation annotation;
    ChannelGrid image{0, 0, 0};
};

/// Renders flat-colored boxes over a noisy background. Humans go down
/// first, objects after, so an interacting object stays visible on top of
/// the person it overlaps.
inline ChannelGrid render_scene(const SceneAnnotation& ann, Rng& rng) {
    ChannelGrid img(ann.width, ann.height, 3);
    for (int y = 0; y < ann.height; ++y)
        for (int x = 0; x < ann.width; ++x)
            for (int c = 0; c < 3; ++c) img.at(x, y, c) = 0.15 + rng.uniform(-0.03, 0.03);
    for (const auto& h : ann.humans) detail::fill_box(img, h, kHumanColor);
    for (const auto& o : ann.objects) detail::fill_box(img, o.box, object_color(o.category));
    return img;
}

/// Generates one scene from its own seed (use stream_seed(cfg.seed, index,
/// SeedStream::SceneGen)). Object placement is biased: each object picks a
/// random human and either one of the verb predicates or free placement.
inline Scene generate_scene(const SynthConfig& cfg, std::uint64_t scene_seed) {
    Rng rng(scene_seed);
    const double W = cfg.image_width, H = cfg.image_height;

    SceneAnnotation ann;
    ann.width = cfg.image_width;
    ann.height = cfg.image_height;

    const auto inter_area = [](const BBox& a, const BBox& b) {
        const double ix = std::max(0.0, std::min(a.x2, b.x2) - std::max(a.x1, b.x1));
        const double iy = std::max(0.0, std::min(a.y2, b.y2) - std::max(a.y1, b.y1));
        return ix * iy;
    };

    // Humans repel each other so two actors never merge into one blob of the
    // same color; after the attempt budget the last draw is kept regardless.
    const int n_humans = cfg.humans_min + rng.uniform_int(cfg.humans_max - cfg.humans_min + 1);
    for (int i = 0; i < n_humans; ++i) {
        BBox hb{0, 0, 0, 0};
        for (int attempt = 0; attempt < 12; ++attempt) {
            const double h = rng.uniform(cfg.human_height_min, cfg.human_height_max);
            const double w = h * rng.uniform(cfg.human_aspect_min, cfg.human_aspect_max);
            const double x1 = rng.uniform(0.0, W - w);
            const double y1 = rng.uniform(0.0, H - h);
            hb = {x1, y1, x1 + w, y1 + h};
            const bool clear = std::none_of(
                ann.humans.begin(), ann.humans.end(),
                [&](const BBox& other) { return inter_area(hb, other) > 0.0; });
            if (clear) break;
        }
        ann.humans.push_back(hb);
    }

    const int n_objects = cfg.objects_min + rng.uniform_int(cfg.objects_max - cfg.objects_min + 1);
    const int n_modes = static_cast<int>(cfg.verb_predicates.size()) + 1;
    for (int i = 0; i < n_objects; ++i) {
        const double ow = rng.uniform(cfg.object_side_min, cfg.object_side_max);
        const double oh = rng.uniform(cfg.object_side_min, cfg.object_side_max);
        const int category = rng.uniform_int(cfg.num_object_categories);
        const int mode = detail::pick_mode(rng, cfg, n_modes);
        const BBox anchor = n_humans > 0 ? ann.humans[static_cast<std::size_t>(
                                               rng.uniform_int(n_humans))]
                                         : BBox{0, 0, W, H};
        BBox box{0, 0, ow, oh};
        for (int attempt = 0; attempt < 8; ++attempt) {
            box = detail::shift_inside(detail::place_object(rng, cfg, anchor, ow, oh, mode),
                                       W, H);
            // Avoid objects heavily burying earlier objects; a light overlap
            // is fine and interactions with humans are untouched.
            const bool buried = std::any_of(
                ann.objects.begin(), ann.objects.end(), [&](const AnnotatedObject& other) {
                    const double cap = 0.25 * std::min(box.area(), other.box.area());
                    return inter_area(box, other.box) > cap;
                });
            if (buried) continue;
            if (mode >= static_cast<int>(cfg.verb_predicates.size())) break;
            if (predicate_holds(cfg.verb_predicates[static_cast<std::size_t>(mode)], anchor, box,
                                cfg.interaction_reach))
                break;
        }
        ann.objects.push_back({box, category});
    }

    ann.triplets = triplets_from_geometry(ann, cfg.verb_predicates, cfg.interaction_reach);

    Scene scene;
    scene.image = render_scene(ann, rng);
    scene.annotation = std::move(ann);
    return scene;
}

/// Detector stand-in: every ground-truth entity comes back with jittered
/// coordinates and a confidence that starts at 1 for exact boxes and drops
/// with the jitter level (never below 0.5); false positives are sampled per
/// entity with low confidence. Output is sorted by score, ties keeping
/// emission order, and capped at max_detections after dropping scores below
/// score_threshold.
inline std::vector<Detection> stub_detect(const SceneAnnotation& ann, const SynthConfig& cfg,
                                          std::uint64_t det_seed) {
    Rng rng(det_seed);
    const double W = ann.width, H = ann.height;
    std::vector<Detection> dets;

    auto emit = [&](const BBox& gt, int category) {
        const double w = gt.width(), h = gt.height();
        BBox b;
        b.x1 = gt.x1 + rng.uniform(-cfg.jitter * w, cfg.jitter * w);
        b.x2 = gt.x2 + rng.uniform(-cfg.jitter * w, cfg.jitter * w);
        b.y1 = gt.y1 + rng.uniform(-cfg.jitter * h, cfg.jitter * h);
        b.y2 = gt.y2 + rng.uniform(-cfg.jitter * h, cfg.jitter * h);
        if (b.x2 < b.x1) std::swap(b.x1, b.x2);
        if (b.y2 < b.y1) std::swap(b.y1, b.y2);
        b = detail::clamp_to_image(b, W, H);
        if (b.width() < 1.0) b.x2 = std::min(W, b.x1 + 1.0), b.x1 = b.x2 - 1.0;
        if (b.height() < 1.0) b.y2 = std::min(H, b.y1 + 1.0), b.y1 = b.y2 - 1.0;
        dets.push_back({b, category, 1.0 - rng.uniform(0.0, std::min(0.5, 2.0 * cfg.jitter))});

        if (rng.bernoulli(cfg.false_positive_rate)) {
            const int cat = rng.uniform_int(cfg.num_object_categories + 1) - 1;
            const double fw = rng.uniform(8.0, 20.0);
            const double fh = rng.uniform(8.0, 20.0);
            const double x1 = rng.uniform(0.0, std::max(1.0, W - fw));
            const double y1 = rng.uniform(0.0, std::max(1.0, H - fh));
            dets.push_back({detail::clamp_to_image({x1, y1, x1 + fw, y1 + fh}, W, H),
                            cat == -1 ? kHumanCategory : cat, rng.uniform(0.0, 0.5)});
        }
    };

    for (const auto& h : ann.humans) emit(h, kHumanCategory);
    for (const auto& o : ann.objects) emit(o.box, o.category);

    std::erase_if(dets, [&](const Detection& d) { return d.score < cfg.score_threshold; });
    std::stable_sort(dets.begin(), dets.end(),
                     [](const Detection& a, const Detection& b) { return a.score > b.score; });
    if (static_cast<int>(dets.size()) > cfg.max_detections)
        dets.resize(static_cast<std::size_t>(cfg.max_detections));
    return dets;
}

/// Pairs each detected person with the annotated human it covers (IoU
/// strictly above the threshold, best IoU wins, earlier annotation on a
/// tie). A matched actor inherits the ground-truth objects it interacts
/// with, grouped per object with the shared verbs; an unmatched or
/// interaction-free actor becomes a negative example.
inline std::vector<ActorExample> arrange_annotations(const SceneAnnotation& ann,
                                                     const std::vector<Detection>& detections,
                                                     double iou_threshold = 0.5) {
    std::vector<ActorExample> out;
    for (const auto& det : detections) {
        if (det.category != kHumanCategory) continue;
        int best = -1;
        double best_iou = iou_threshold;
        for (int i = 0; i < static_cast<int>(ann.humans.size()); ++i) {
            const double v = iou(det.box, ann.humans[i]);
            if (v > best_iou) {
                best_iou = v;
                best = i;
            }
        }

        ActorExample ex;
        ex.actor_box = det.box;
        ex.actor_score = det.score;
        if (best >= 0) {
            std::vector<int> verbs_by_object(ann.objects.size(), 0);
            std::vector<std::vector<int>> verbs(ann.objects.size());
            for (const auto& t : ann.triplets) {
                if (t.human != best) continue;
                verbs[static_cast<std::size_t>(t.object)].push_back(t.verb);
                verbs_by_object[static_cast<std::size_t>(t.object)] = 1;
            }
            for (int o = 0; o < static_cast<int>(ann.objects.size()); ++o) {
                if (!verbs_by_object[static_cast<std::size_t>(o)]) continue;
                auto& vs = verbs[static_cast<std::size_t>(o)];
                std::sort(vs.begin(), vs.end());
                vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
                ex.objects.push_back(
                    {ann.objects[static_cast<std::size_t>(o)].box,
                     ann.objects[static_cast<std::size_t>(o)].category, vs, o});
            }
        }
        ex.positive = !ex.objects.empty();
        out.push_back(std::move(ex));
    }
    return out;
}

/// Keeps every positive example and at most ceil(positives * ratio)
/// negatives, sampled without replacement; surviving examples keep their
/// original order.
inline std::vector<ActorExample> balance_examples(const std::vector<ActorExample>& examples,
                                                  double negative_ratio, std::uint64_t seed) {
    std::size_t n_pos = 0;
    std::vector<std::size_t> neg_idx;
    for (std::size_t i = 0; i < examples.size(); ++i) {
        if (examples[i].positive)
            ++n_pos;
        else
            neg_idx.push_back(i);
    }
    const auto cap = static_cast<std::size_t>(
        std::ceil(static_cast<double>(n_pos) * negative_ratio));
    std::vector<char> keep(examples.size(), 1);
    if (neg_idx.size() > cap) {
        Rng rng(seed);
        rng.shuffle(neg_idx);
        for (std::size_t i = cap; i < neg_idx.size(); ++i) keep[neg_idx[i]] = 0;
    }
    std::vector<ActorExample> out;
    for (std::size_t i = 0; i < examples.size(); ++i)
        if (keep[i]) out.push_back(examples[i]);
    return out;
}

}  // namespace hoidet

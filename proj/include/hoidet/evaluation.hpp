#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <vector>

#include "hoidet/geometry.hpp"
#include "hoidet/inference.hpp"
#include "hoidet/scene.hpp"

namespace hoidet {

struct EvalConfig {
    double iou_threshold = 0.5;
    bool known_object = false;     // score a class only against scenes containing its category
    int rare_train_threshold = 10; // classes seen fewer times in training count as rare
};

/// An interaction class: verb paired with object category.
struct ClassKey {
    int verb = 0;
    int category = 0;

    bool operator==(const ClassKey&) const = default;
    bool operator<(const ClassKey& o) const {
        return verb != o.verb ? verb < o.verb : category < o.category;
    }
};

struct ClassCount {
    ClassKey key;
    int count = 0;
};

struct EvalScene {
    int id = 0;
    SceneAnnotation annotation;
};

/// Interaction instances per class across the training split; used for the
/// rare / non-rare break-down of the final report.
inline std::vector<ClassCount> class_counts(const std::vector<SceneAnnotation>& scenes) {
    std::map<ClassKey, int> counts;
    for (const auto& ann : scenes)
        for (const auto& t : ann.triplets)
            ++counts[{t.verb, ann.objects[static_cast<std::size_t>(t.object)].category}];
    std::vector<ClassCount> out;
    out.reserve(counts.size());
    for (const auto& [key, count] : counts) out.push_back({key, count});
    return out;
}

/// Average precision over a detection list already sorted by rank, with
/// all-point interpolation: precision at each rank is replaced by the best
/// precision at that rank or later, and true-positive ranks contribute
/// their interpolated precision divided by the ground-truth count.
inline double average_precision(const std::vector<char>& tp, std::size_t n_gt) {
    const std::size_t n = tp.size();
    if (n_gt == 0) return 0.0;
    std::vector<double> prec(n);
    std::size_t cum = 0;
    for (std::size_t i = 0; i < n; ++i) {
        cum += tp[i] ? 1u : 0u;
        prec[i] = static_cast<double>(cum) / static_cast<double>(i + 1);
    }
    for (std::size_t i = n; i-- > 1;) prec[i - 1] = std::max(prec[i - 1], prec[i]);
    double ap = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        if (tp[i]) ap += prec[i] / static_cast<double>(n_gt);
    return ap;
}

namespace detail {

struct GtInstance {
    int scene = 0;
    BBox human;
    BBox object;
    bool matched = false;
};

inline bool hoi_pred_order(const HoiPrediction& a, const HoiPrediction& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.scene != b.scene) return a.scene < b.scene;
    if (a.human_index != b.human_index) return a.human_index < b.human_index;
    return a.object_index < b.object_index;
}

inline bool agent_pred_order(const AgentPrediction& a, const AgentPrediction& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.scene != b.scene) return a.scene < b.scene;
    return a.human_index < b.human_index;
}

/// Greedy matching in rank order: a prediction is a true positive when an
/// unmatched ground-truth instance of its scene overlaps it with IoU at or
/// above the threshold on both boxes; the candidate maximizing the smaller
/// of the two IoUs wins, earlier instances winning ties.
inline std::vector<char> match_class(const std::vector<HoiPrediction>& ranked,
                                     std::vector<GtInstance>& gt, double thr) {
    std::vector<char> tp(ranked.size(), 0);
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        const auto& p = ranked[i];
        int best = -1;
        double best_q = -1.0;
        for (int g = 0; g < static_cast<int>(gt.size()); ++g) {
            auto& cand = gt[static_cast<std::size_t>(g)];
            if (cand.matched || cand.scene != p.scene) continue;
            const double q = std::min(iou(p.human_box, cand.human), iou(p.object_box, cand.object));
            if (q >= thr && q > best_q) {
                best_q = q;
                best = g;
            }
        }
        if (best >= 0) {
            gt[static_cast<std::size_t>(best)].matched = true;
            tp[i] = 1;
        }
    }
    return tp;
}

}  // namespace detail

struct ClassResult {
    ClassKey key;
    double ap = 0.0;
    int gt_count = 0;
    int train_count = 0;
};

/// Per-class AP over the scenes enabled by `include` (one flag per entry of
/// `scenes`). Classes are emitted in (verb, category) order; only classes
/// with ground truth in the included scenes appear.
inline std::vector<ClassResult> evaluate_hoi_classes(const std::vector<EvalScene>& scenes,
                                                     const std::vector<char>& include,
                                                     const std::vector<HoiPrediction>& predictions,
                                                     const EvalConfig& cfg) {
    std::map<ClassKey, std::vector<detail::GtInstance>> gt;
    std::map<int, std::vector<char>> scene_has_category;  // category -> per-scene flag
    std::map<int, std::size_t> scene_pos;
    for (std::size_t s = 0; s < scenes.size(); ++s) {
        scene_pos[scenes[s].id] = s;
        if (!include[s]) continue;
        const auto& ann = scenes[s].annotation;
        for (const auto& o : ann.objects) {
            auto& flags = scene_has_category[o.category];
            flags.resize(scenes.size(), 0);
            flags[s] = 1;
        }
        for (const auto& t : ann.triplets) {
            const auto& obj = ann.objects[static_cast<std::size_t>(t.object)];
            gt[{t.verb, obj.category}].push_back(
                {scenes[s].id, ann.humans[static_cast<std::size_t>(t.human)], obj.box, false});
        }
    }

    std::map<ClassKey, std::vector<HoiPrediction>> preds;
    for (const auto& p : predictions) {
        const auto pos = scene_pos.find(p.scene);
        if (pos == scene_pos.end() || !include[pos->second]) continue;
        const ClassKey key{p.verb, p.object_category};
        if (!gt.count(key)) continue;  // classes without ground truth are not scored
        if (cfg.known_object) {
            const auto flags = scene_has_category.find(key.category);
            if (flags == scene_has_category.end() || !flags->second[pos->second]) continue;
        }
        preds[key].push_back(p);
    }

    std::vector<ClassResult> out;
    for (auto& [key, instances] : gt) {
        auto& ranked = preds[key];
        std::sort(ranked.begin(), ranked.end(), detail::hoi_pred_order);
        const std::vector<char> tp = detail::match_class(ranked, instances, cfg.iou_threshold);
        ClassResult r;
        r.key = key;
        r.gt_count = static_cast<int>(instances.size());
        r.ap = average_precision(tp, instances.size());
        out.push_back(r);
    }
    return out;
}

struct AgentResult {
    int verb = 0;
    double ap = 0.0;
    int gt_count = 0;
};

/// Verb-level AP: a human is an agent of a verb when any of their triplets
/// carries it; matching needs only the human box.
inline std::vector<AgentResult> evaluate_agent_classes(const std::vector<EvalScene>& scenes,
                                                       const std::vector<AgentPrediction>& predictions,
                                                       const EvalConfig& cfg) {
    struct AgentGt {
        int scene;
        BBox human;
        bool matched;
    };
    std::map<int, std::vector<AgentGt>> gt;
    for (const auto& s : scenes) {
        std::map<std::pair<int, int>, char> seen;  // (human, verb) emitted once
        for (const auto& t : s.annotation.triplets) {
            if (seen.contains({t.human, t.verb})) continue;
            seen[{t.human, t.verb}] = 1;
            gt[t.verb].push_back(
                {s.id, s.annotation.humans[static_cast<std::size_t>(t.human)], false});
        }
    }

    std::map<int, std::vector<AgentPrediction>> preds;
    for (const auto& p : predictions)
        if (gt.count(p.verb)) preds[p.verb].push_back(p);

    std::vector<AgentResult> out;
    for (auto& [verb, instances] : gt) {
        auto& ranked = preds[verb];
        std::sort(ranked.begin(), ranked.end(), detail::agent_pred_order);
        std::vector<char> tp(ranked.size(), 0);
        for (std::size_t i = 0; i < ranked.size(); ++i) {
            int best = -1;
            double best_q = -1.0;
            for (int g = 0; g < static_cast<int>(instances.size()); ++g) {
                auto& cand = instances[static_cast<std::size_t>(g)];
                if (cand.matched || cand.scene != ranked[i].scene) continue;
                const double q = iou(ranked[i].human_box, cand.human);
                if (q >= cfg.iou_threshold && q > best_q) {
                    best_q = q;
                    best = g;
                }
            }
            if (best >= 0) {
                instances[static_cast<std::size_t>(best)].matched = true;
                tp[i] = 1;
            }
        }
        out.push_back({verb, average_precision(tp, instances.size()),
                       static_cast<int>(instances.size())});
    }
    return out;
}

struct SubsetResult {
    double map = 0.0;
    int classes = 0;
    int scenes = 0;
};

struct EvalReport {
    double map = 0.0;
    double map_rare = 0.0;
    double map_non_rare = 0.0;
    double agent_map = 0.0;
    int classes = 0;
    int rare_classes = 0;
    int non_rare_classes = 0;
    std::vector<ClassResult> per_class;
    std::vector<AgentResult> per_verb;
    SubsetResult sh_so, mh_so, sh_mo, mh_mo;  // single/multiple humans x objects
};

namespace detail {

inline double mean_ap(const std::vector<ClassResult>& classes) {
    if (classes.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& c : classes) sum += c.ap;
    return sum / static_cast<double>(classes.size());
}

}  // namespace detail

/// Full evaluation: class APs and mAP, rare / non-rare split by training
/// frequency, verb-level agent mAP, and scene-composition subsets.
inline EvalReport evaluate(const std::vector<EvalScene>& scenes,
                           const std::vector<HoiPrediction>& hoi,
                           const std::vector<AgentPrediction>& agents,
                           const std::vector<ClassCount>& train_counts, const EvalConfig& cfg) {
    EvalReport report;
    std::map<ClassKey, int> train_map;
    for (const auto& c : train_counts) train_map[c.key] = c.count;

    const std::vector<char> all(scenes.size(), 1);
    report.per_class = evaluate_hoi_classes(scenes, all, hoi, cfg);
    std::vector<ClassResult> rare, non_rare;
    for (auto& c : report.per_class) {
        const auto it = train_map.find(c.key);
        c.train_count = it == train_map.end() ? 0 : it->second;
        (c.train_count < cfg.rare_train_threshold ? rare : non_rare).push_back(c);
    }
    report.map = detail::mean_ap(report.per_class);
    report.map_rare = detail::mean_ap(rare);
    report.map_non_rare = detail::mean_ap(non_rare);
    report.classes = static_cast<int>(report.per_class.size());
    report.rare_classes = static_cast<int>(rare.size());
    report.non_rare_classes = static_cast<int>(non_rare.size());

    report.per_verb = evaluate_agent_classes(scenes, agents, cfg);
    double agent_sum = 0.0;
    for (const auto& v : report.per_verb) agent_sum += v.ap;
    report.agent_map = report.per_verb.empty()
                           ? 0.0
                           : agent_sum / static_cast<double>(report.per_verb.size());

    auto subset = [&](bool multi_human, bool multi_object) {
        std::vector<char> include(scenes.size(), 0);
        int n = 0;
        for (std::size_t s = 0; s < scenes.size(); ++s) {
            const auto& ann = scenes[s].annotation;
            const bool mh = ann.humans.size() > 1;
            const bool mo = ann.objects.size() > 1;
            if (mh == multi_human && mo == multi_object) {
                include[s] = 1;
                ++n;
            }
        }
        const auto classes = evaluate_hoi_classes(scenes, include, hoi, cfg);
        return SubsetResult{detail::mean_ap(classes), static_cast<int>(classes.size()), n};
    };
    report.sh_so = subset(false, false);
    report.mh_so = subset(true, false);
    report.sh_mo = subset(false, true);
    report.mh_mo = subset(true, true);
    return report;
}

}  // namespace hoidet

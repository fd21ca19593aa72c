#pragma once

// Independent reimplementations used to cross-check the library. These
// favor obviousness over speed: nested loops, no shared helpers beyond
// basic geometry.

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "hoidet/evaluation.hpp"
#include "hoidet/geometry.hpp"
#include "hoidet/inference.hpp"
#include "hoidet/scene.hpp"

namespace oracle {

inline double box_iou(const hoidet::BBox& a, const hoidet::BBox& b) {
    const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
    const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
    if (iw <= 0.0 || ih <= 0.0) return 0.0;
    const double inter = iw * ih;
    const double uni = a.area() + b.area() - inter;
    return uni <= 0.0 ? 0.0 : inter / uni;
}

/// All-point interpolated AP, written out naively: precision at each rank,
/// then for every true-positive rank take the best precision at or after
/// it (O(n^2) scan) and add it divided by the ground-truth count, in rank
/// order. Must agree bit for bit with the library.
inline double average_precision(const std::vector<char>& tp, std::size_t n_gt) {
    if (n_gt == 0) return 0.0;
    const std::size_t n = tp.size();
    std::vector<double> prec(n);
    std::size_t cum = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (tp[i]) ++cum;
        prec[i] = static_cast<double>(cum) / static_cast<double>(i + 1);
    }
    double ap = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!tp[i]) continue;
        double best = 0.0;
        for (std::size_t j = i; j < n; ++j) best = std::max(best, prec[j]);
        ap += best / static_cast<double>(n_gt);
    }
    return ap;
}

struct GtPair {
    int scene;
    hoidet::BBox human;
    hoidet::BBox object;
    bool matched = false;
};

/// Greedy TP assignment in rank order, mirroring the documented rules:
/// both IoUs at or above the threshold, the unmatched candidate with the
/// largest min-IoU wins, first (lowest index) candidate on ties.
inline std::vector<char> match_ranked(const std::vector<hoidet::HoiPrediction>& ranked,
                                      std::vector<GtPair>& gt, double thr) {
    std::vector<char> tp(ranked.size(), 0);
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        int best = -1;
        double best_q = -1.0;
        for (std::size_t g = 0; g < gt.size(); ++g) {
            if (gt[g].matched || gt[g].scene != ranked[i].scene) continue;
            const double qh = box_iou(ranked[i].human_box, gt[g].human);
            const double qo = box_iou(ranked[i].object_box, gt[g].object);
            const double q = qh < qo ? qh : qo;
            if (qh >= thr && qo >= thr && q > best_q) {
                best_q = q;
                best = static_cast<int>(g);
            }
        }
        if (best >= 0) {
            gt[static_cast<std::size_t>(best)].matched = true;
            tp[i] = 1;
        }
    }
    return tp;
}

struct ClassAp {
    hoidet::ClassKey key;
    double ap;
    int gt_count;
};

/// Per-class AP over the included scenes, same conventions as the library:
/// classes exist where ground truth exists, known-object mode drops
/// predictions from scenes lacking the category, candidates are ranked by
/// score with (scene, human, object) index tie-breaks.
inline std::vector<ClassAp> hoi_class_aps(const std::vector<hoidet::EvalScene>& scenes,
                                          const std::vector<char>& include,
                                          const std::vector<hoidet::HoiPrediction>& preds,
                                          const hoidet::EvalConfig& cfg) {
    std::vector<hoidet::ClassKey> keys;
    for (std::size_t s = 0; s < scenes.size(); ++s) {
        if (!include[s]) continue;
        for (const auto& t : scenes[s].annotation.triplets)
            keys.push_back({t.verb,
                            scenes[s].annotation.objects[static_cast<std::size_t>(t.object)].category});
    }
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());

    std::vector<ClassAp> out;
    for (const auto& key : keys) {
        std::vector<GtPair> gt;
        for (std::size_t s = 0; s < scenes.size(); ++s) {
            if (!include[s]) continue;
            const auto& ann = scenes[s].annotation;
            for (const auto& t : ann.triplets) {
                const auto& obj = ann.objects[static_cast<std::size_t>(t.object)];
                if (t.verb == key.verb && obj.category == key.category)
                    gt.push_back({scenes[s].id, ann.humans[static_cast<std::size_t>(t.human)],
                                  obj.box});
            }
        }

        std::vector<hoidet::HoiPrediction> ranked;
        for (const auto& p : preds) {
            if (p.verb != key.verb || p.object_category != key.category) continue;
            bool in_scope = false, has_cat = false;
            for (std::size_t s = 0; s < scenes.size(); ++s) {
                if (scenes[s].id != p.scene) continue;
                in_scope = include[s];
                for (const auto& o : scenes[s].annotation.objects)
                    if (o.category == key.category) has_cat = true;
            }
            if (!in_scope) continue;
            if (cfg.known_object && !has_cat) continue;
            ranked.push_back(p);
        }
        std::sort(ranked.begin(), ranked.end(),
                  [](const hoidet::HoiPrediction& a, const hoidet::HoiPrediction& b) {
                      if (a.score != b.score) return a.score > b.score;
                      if (a.scene != b.scene) return a.scene < b.scene;
                      if (a.human_index != b.human_index) return a.human_index < b.human_index;
                      return a.object_index < b.object_index;
                  });

        const std::vector<char> tp = match_ranked(ranked, gt, cfg.iou_threshold);
        out.push_back({key, average_precision(tp, gt.size()), static_cast<int>(gt.size())});
    }
    return out;
}

inline double mean_ap(const std::vector<ClassAp>& classes) {
    if (classes.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& c : classes) sum += c.ap;
    return sum / static_cast<double>(classes.size());
}

struct AgentAp {
    int verb;
    double ap;
    int gt_count;
};

inline std::vector<AgentAp> agent_aps(const std::vector<hoidet::EvalScene>& scenes,
                                      const std::vector<hoidet::AgentPrediction>& preds,
                                      const hoidet::EvalConfig& cfg) {
    std::vector<int> verbs;
    for (const auto& s : scenes)
        for (const auto& t : s.annotation.triplets) verbs.push_back(t.verb);
    std::sort(verbs.begin(), verbs.end());
    verbs.erase(std::unique(verbs.begin(), verbs.end()), verbs.end());

    std::vector<AgentAp> out;
    for (int verb : verbs) {
        struct Gt {
            int scene;
            hoidet::BBox human;
            bool matched = false;
        };
        std::vector<Gt> gt;
        for (const auto& s : scenes) {
            std::vector<int> seen;
            for (const auto& t : s.annotation.triplets) {
                if (t.verb != verb) continue;
                if (std::find(seen.begin(), seen.end(), t.human) != seen.end()) continue;
                seen.push_back(t.human);
                gt.push_back({s.id, s.annotation.humans[static_cast<std::size_t>(t.human)]});
            }
        }

        std::vector<hoidet::AgentPrediction> ranked;
        for (const auto& p : preds)
            if (p.verb == verb) ranked.push_back(p);
        std::sort(ranked.begin(), ranked.end(),
                  [](const hoidet::AgentPrediction& a, const hoidet::AgentPrediction& b) {
                      if (a.score != b.score) return a.score > b.score;
                      if (a.scene != b.scene) return a.scene < b.scene;
                      return a.human_index < b.human_index;
                  });

        std::vector<char> tp(ranked.size(), 0);
        for (std::size_t i = 0; i < ranked.size(); ++i) {
            int best = -1;
            double best_q = -1.0;
            for (std::size_t g = 0; g < gt.size(); ++g) {
                if (gt[g].matched || gt[g].scene != ranked[i].scene) continue;
                const double q = box_iou(ranked[i].human_box, gt[g].human);
                if (q >= cfg.iou_threshold && q > best_q) {
                    best_q = q;
                    best = static_cast<int>(g);
                }
            }
            if (best >= 0) {
                gt[static_cast<std::size_t>(best)].matched = true;
                tp[i] = 1;
            }
        }
        out.push_back({verb, average_precision(tp, gt.size()), static_cast<int>(gt.size())});
    }
    return out;
}

/// Full report rebuilt from scratch; field-for-field comparable with
/// hoidet::evaluate.
inline hoidet::EvalReport evaluate(const std::vector<hoidet::EvalScene>& scenes,
                                   const std::vector<hoidet::HoiPrediction>& hoi,
                                   const std::vector<hoidet::AgentPrediction>& agents,
                                   const std::vector<hoidet::ClassCount>& train_counts,
                                   const hoidet::EvalConfig& cfg) {
    hoidet::EvalReport r;
    const std::vector<char> all(scenes.size(), 1);
    const auto classes = hoi_class_aps(scenes, all, hoi, cfg);

    std::vector<ClassAp> rare, non_rare;
    for (const auto& c : classes) {
        int train_count = 0;
        for (const auto& t : train_counts)
            if (t.key == c.key) train_count = t.count;
        hoidet::ClassResult cr;
        cr.key = c.key;
        cr.ap = c.ap;
        cr.gt_count = c.gt_count;
        cr.train_count = train_count;
        r.per_class.push_back(cr);
        (train_count < cfg.rare_train_threshold ? rare : non_rare).push_back(c);
    }
    r.map = mean_ap(classes);
    r.map_rare = mean_ap(rare);
    r.map_non_rare = mean_ap(non_rare);
    r.classes = static_cast<int>(classes.size());
    r.rare_classes = static_cast<int>(rare.size());
    r.non_rare_classes = static_cast<int>(non_rare.size());

    const auto agent_results = agent_aps(scenes, agents, cfg);
    double agent_sum = 0.0;
    for (const auto& a : agent_results) {
        r.per_verb.push_back({a.verb, a.ap, a.gt_count});
        agent_sum += a.ap;
    }
    r.agent_map =
        agent_results.empty() ? 0.0 : agent_sum / static_cast<double>(agent_results.size());

    auto subset = [&](bool multi_human, bool multi_object) {
        std::vector<char> include(scenes.size(), 0);
        int n = 0;
        for (std::size_t s = 0; s < scenes.size(); ++s) {
            const bool mh = scenes[s].annotation.humans.size() > 1;
            const bool mo = scenes[s].annotation.objects.size() > 1;
            if (mh == multi_human && mo == multi_object) {
                include[s] = 1;
                ++n;
            }
        }
        const auto sub = hoi_class_aps(scenes, include, hoi, cfg);
        return hoidet::SubsetResult{mean_ap(sub), static_cast<int>(sub.size()), n};
    };
    r.sh_so = subset(false, false);
    r.mh_so = subset(true, false);
    r.sh_mo = subset(false, true);
    r.mh_mo = subset(true, true);
    return r;
}

}  // namespace oracle

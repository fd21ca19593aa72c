#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "hoidet/geometry.hpp"
#include "hoidet/grid.hpp"
#include "hoidet/model.hpp"
#include "hoidet/scene.hpp"
#include "hoidet/supervision.hpp"

namespace hoidet {

/// Which role the actor branch plays at inference time. Off and Train both
/// score interactions from the object branch alone; Full multiplies both
/// branch scores. Off additionally disables the branch's loss in training.
enum class ActorBranchMode { Off, Train, Full };

/// One scored <human, verb, object> candidate. Indices refer to the
/// detection list the candidate was built from and break score ties.
struct HoiPrediction {
    int scene = 0;
    int human_index = 0;
    int object_index = 0;
    int verb = 0;
    int object_category = 0;
    BBox human_box;
    BBox object_box;
    double score = 0.0;
};

/// Agent candidate: a human performing a verb, no object committed.
struct AgentPrediction {
    int scene = 0;
    int human_index = 0;
    int verb = 0;
    BBox human_box;
    double score = 0.0;
};

struct InferenceStats {
    std::uint64_t forwards = 0;
};

/// Per-channel scores of one branch map at the output cell holding the
/// box's center point.
inline std::vector<double> scores_at_center(const ChannelGrid& branch, const BBox& box,
                                            const GridShape& shape) {
    const GridCell cell = to_grid(center_point(box), shape);
    std::vector<double> out(static_cast<std::size_t>(branch.channels));
    for (int c = 0; c < branch.channels; ++c)
        out[static_cast<std::size_t>(c)] = branch.at(cell.x, cell.y, c);
    return out;
}

/// Interaction score of one <human, verb, object> triple from the branch
/// readouts and the two detection confidences. The without-interaction
/// channel never takes part.
inline double compose_score(double actor_verb, double object_verb, double human_conf,
                            double object_conf, ActorBranchMode mode) {
    const double branch = mode == ActorBranchMode::Full ? actor_verb * object_verb : object_verb;
    return branch * human_conf * object_conf;
}

struct InferenceResult {
    std::vector<HoiPrediction> hoi;
    std::vector<AgentPrediction> agents;
};

/// Runs the actor loop over one image: one forward pass per detected
/// person, then center-point readouts for every detected object and verb.
inline InferenceResult detect_hoi(const Model& model, const ChannelGrid& image,
                                  const std::vector<Detection>& detections, int scene_id,
                                  MaskMode mask_mode, ActorBranchMode branch_mode,
                                  InferenceStats* stats = nullptr) {
    InferenceResult result;
    const int K = model.config().num_verbs;
    const GridShape shape = GridShape::from_image(image.width, image.height,
                                                  model.config().stride());
    for (int h = 0; h < static_cast<int>(detections.size()); ++h) {
        const Detection& human = detections[static_cast<std::size_t>(h)];
        if (human.category != kHumanCategory) continue;
        const ChannelGrid input = make_model_input(image, human.box, mask_mode);
        const ForwardCache cache = model.forward(input);
        if (stats) ++stats->forwards;

        const std::vector<double> actor = scores_at_center(cache.actor, human.box, shape);
        for (int v = 0; v < K; ++v)
            result.agents.push_back({scene_id, h, v, human.box,
                                     actor[static_cast<std::size_t>(v)] * human.score});

        for (int o = 0; o < static_cast<int>(detections.size()); ++o) {
            const Detection& object = detections[static_cast<std::size_t>(o)];
            if (object.category == kHumanCategory) continue;
            const std::vector<double> obj = scores_at_center(cache.object, object.box, shape);
            for (int v = 0; v < K; ++v) {
                HoiPrediction p;
                p.scene = scene_id;
                p.human_index = h;
                p.object_index = o;
                p.verb = v;
                p.object_category = object.category;
                p.human_box = human.box;
                p.object_box = object.box;
                p.score = compose_score(actor[static_cast<std::size_t>(v)],
                                        obj[static_cast<std::size_t>(v)], human.score,
                                        object.score, branch_mode);
                result.hoi.push_back(p);
            }
        }
    }
    return result;
}

/// Keeps the top k interaction candidates of one image by score; ties keep
/// the earlier candidate. k <= 0 keeps everything.
inline std::vector<HoiPrediction> top_k(std::vector<HoiPrediction> preds, int k) {
    if (k <= 0 || static_cast<int>(preds.size()) <= k) return preds;
    std::stable_sort(preds.begin(), preds.end(),
                     [](const HoiPrediction& a, const HoiPrediction& b) { return a.score > b.score; });
    preds.resize(static_cast<std::size_t>(k));
    return preds;
}

}  // namespace hoidet

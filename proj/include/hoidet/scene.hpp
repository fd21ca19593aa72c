#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "hoidet/geometry.hpp"

namespace hoidet {

/// Category id carried by human detections; real object categories are >= 0.
inline constexpr int kHumanCategory = -1;

/// Set of verb ids in [0, K), or the single without-interaction marker.
/// The two are mutually exclusive.
struct VerbSet {
    std::vector<int> verbs;  // sorted, unique
    bool without_interaction = false;

    static VerbSet of(std::vector<int> ids) {
        VerbSet s;
        s.verbs = std::move(ids);
        std::sort(s.verbs.begin(), s.verbs.end());
        s.verbs.erase(std::unique(s.verbs.begin(), s.verbs.end()), s.verbs.end());
        return s;
    }

    static VerbSet no_interaction() {
        VerbSet s;
        s.without_interaction = true;
        return s;
    }

    bool empty() const { return verbs.empty() && !without_interaction; }
    bool contains(int verb) const {
        return std::binary_search(verbs.begin(), verbs.end(), verb);
    }
};

/// <human, verb, object> ground-truth triplet, indices into the annotation.
struct Triplet {
    int human = 0;
    int verb = 0;
    int object = 0;

    bool operator==(const Triplet&) const = default;
};

struct AnnotatedObject {
    BBox box;
    int category = 0;

    bool operator==(const AnnotatedObject&) const = default;
};

/// Ground truth for one image: humans, categorized objects, and the
/// interaction triplets between them.
struct SceneAnnotation {
    int width = 0;
    int height = 0;
    std::vector<BBox> humans;
    std::vector<AnnotatedObject> objects;
    std::vector<Triplet> triplets;

    bool operator==(const SceneAnnotation&) const = default;
};

/// Detector output: box, category (kHumanCategory for persons), confidence.
struct Detection {
    BBox box;
    int category = 0;
    double score = 1.0;
};

/// One object assigned to a training actor, with the verbs they share.
struct InteractingObject {
    BBox box;
    int category = 0;
    std::vector<int> verbs;   // sorted, unique
    int gt_index = -1;        // index into SceneAnnotation::objects
};

/// Per-actor training example produced by annotation arrangement.
/// A negative example carries no interacting objects.
struct ActorExample {
    BBox actor_box;
    double actor_score = 1.0;
    std::vector<InteractingObject> objects;
    bool positive = false;
};

/// Geometric predicates a verb can be tied to. Every recorded triplet is
/// decided by its verb's predicate on the final (clamped) boxes, so the
/// labels are always inferable from what is rendered.
enum class SpatialPredicate : int {
    Overlap = 0,   // boxes intersect with positive area
    Beside = 1,    // disjoint, horizontal gap <= reach, vertical ranges overlap
    Stacked = 2,   // disjoint, vertical gap <= reach, horizontal ranges overlap
    Near = 3,      // disjoint, gap <= reach in both axes
};

/// Configuration of the synthetic-scene generator and its detector stub.
struct SynthConfig {
    int image_width = 32;
    int image_height = 32;
    int num_verbs = 3;
    int num_object_categories = 2;
    std::vector<SpatialPredicate> verb_predicates = {
        SpatialPredicate::Overlap, SpatialPredicate::Beside, SpatialPredicate::Near};

    int humans_min = 1;
    int humans_max = 2;
    int objects_min = 2;
    int objects_max = 3;

    double human_height_min = 14.0;
    double human_height_max = 16.0;
    double human_aspect_min = 0.85;  // width / height
    double human_aspect_max = 1.05;
    double object_side_min = 8.5;
    double object_side_max = 10.5;

    /// Maximum edge-to-edge gap at which Beside/Stacked/Near hold.
    double interaction_reach = 3.5;

    /// Relative draw weights for the placement modes: one per verb predicate
    /// plus a trailing entry for free placement. Empty means uniform.
    std::vector<double> placement_weights{1.2, 2.9, 1.2, 0.7};

    // Detector stub.
    double jitter = 0.0;           // coordinate shift up to jitter * side length
    double false_positive_rate = 0.0;
    int max_detections = 100;
    double score_threshold = 0.05;

    int train_scenes = 200;
    int test_scenes = 50;
    std::uint64_t seed = 0;

    void validate() const {
        if (num_verbs < 1) throw std::invalid_argument("num_verbs must be >= 1");
        if (num_object_categories < 1)
            throw std::invalid_argument("num_object_categories must be >= 1");
        if (static_cast<int>(verb_predicates.size()) != num_verbs)
            throw std::invalid_argument("verb_predicates must have one entry per verb");
        if (humans_min < 0 || humans_max < humans_min)
            throw std::invalid_argument("invalid humans-per-image range");
        if (objects_min < 0 || objects_max < objects_min)
            throw std::invalid_argument("invalid objects-per-image range");
        if (human_height_max > std::min(image_width, image_height) ||
            object_side_max > std::min(image_width, image_height))
            throw std::invalid_argument("box size range does not fit in the image");
        if (human_height_min <= 0 || human_height_min > human_height_max ||
            object_side_min <= 0 || object_side_min > object_side_max)
            throw std::invalid_argument("invalid box size range");
        if (!placement_weights.empty()) {
            if (static_cast<int>(placement_weights.size()) != num_verbs + 1)
                throw std::invalid_argument(
                    "placement_weights needs one entry per verb plus one for free placement");
            double total = 0;
            for (double w : placement_weights) {
                if (w < 0) throw std::invalid_argument("placement_weights must be >= 0");
                total += w;
            }
            if (total <= 0) throw std::invalid_argument("placement_weights must not all be zero");
        }
        if (jitter < 0 || false_positive_rate < 0 || false_positive_rate > 1)
            throw std::invalid_argument("invalid detector stub parameters");
        if (max_detections < 1) throw std::invalid_argument("max_detections must be >= 1");
    }
};

}  // namespace hoidet

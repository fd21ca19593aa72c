#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"

#include "hoidet/checkpoint.hpp"
#include "hoidet/dataset_io.hpp"
#include "hoidet/evaluation.hpp"
#include "hoidet/inference.hpp"
#include "hoidet/scene.hpp"
#include "hoidet/supervision.hpp"

namespace hoidet {

NLOHMANN_JSON_SERIALIZE_ENUM(MaskMode, {
                                           {MaskMode::Rgbm, "rgbm"},
                                           {MaskMode::Rgb, "rgb"},
                                           {MaskMode::Rgb255, "rgb255"},
                                       })

NLOHMANN_JSON_SERIALIZE_ENUM(ActorBranchMode, {
                                                  {ActorBranchMode::Off, "off"},
                                                  {ActorBranchMode::Train, "train"},
                                                  {ActorBranchMode::Full, "full"},
                                              })

NLOHMANN_JSON_SERIALIZE_ENUM(WoPlacement, {
                                              {WoPlacement::None, "none"},
                                              {WoPlacement::Actor, "actor"},
                                              {WoPlacement::Object, "object"},
                                              {WoPlacement::Both, "both"},
                                          })

/// Input and supervision variants used by the ablation studies.
struct AblationConfig {
    MaskMode mask_mode = MaskMode::Rgbm;
    ActorBranchMode actor_branch = ActorBranchMode::Full;
    WoPlacement wo_channel = WoPlacement::Object;
    bool hanning = true;
    bool scale_weight = true;
};

inline void to_json(nlohmann::json& j, const AblationConfig& c) {
    j = {{"mask_mode", c.mask_mode},
         {"actor_branch", c.actor_branch},
         {"wo_channel", c.wo_channel},
         {"hanning", c.hanning},
         {"scale_weight", c.scale_weight}};
}
inline void from_json(const nlohmann::json& j, AblationConfig& c) {
    c.mask_mode = j.value("mask_mode", c.mask_mode);
    c.actor_branch = j.value("actor_branch", c.actor_branch);
    c.wo_channel = j.value("wo_channel", c.wo_channel);
    c.hanning = j.value("hanning", c.hanning);
    c.scale_weight = j.value("scale_weight", c.scale_weight);
}

struct TrainConfig {
    int epochs = 20;
    double lr = 1e-3;
    std::uint64_t seed = 0;
    double negative_ratio = 1.0;  // kept negatives per positive example
    double center_ratio = 0.3;    // side fraction of the supervised central area
    double lambda_actor = 1.0;
    double lambda_object = 1.0;
    double scale_lambda = 0.5;
    double scale_cap = 10.0;
    double match_iou = 0.5;  // actor-to-annotation matching during arrangement
};

inline void to_json(nlohmann::json& j, const TrainConfig& c) {
    j = {{"epochs", c.epochs},
         {"lr", c.lr},
         {"seed", c.seed},
         {"negative_ratio", c.negative_ratio},
         {"center_ratio", c.center_ratio},
         {"lambda_actor", c.lambda_actor},
         {"lambda_object", c.lambda_object},
         {"scale_lambda", c.scale_lambda},
         {"scale_cap", c.scale_cap},
         {"match_iou", c.match_iou}};
}
inline void from_json(const nlohmann::json& j, TrainConfig& c) {
    c.epochs = j.value("epochs", c.epochs);
    c.lr = j.value("lr", c.lr);
    c.seed = j.value("seed", c.seed);
    c.negative_ratio = j.value("negative_ratio", c.negative_ratio);
    c.center_ratio = j.value("center_ratio", c.center_ratio);
    c.lambda_actor = j.value("lambda_actor", c.lambda_actor);
    c.lambda_object = j.value("lambda_object", c.lambda_object);
    c.scale_lambda = j.value("scale_lambda", c.scale_lambda);
    c.scale_cap = j.value("scale_cap", c.scale_cap);
    c.match_iou = j.value("match_iou", c.match_iou);
}

inline void to_json(nlohmann::json& j, const EvalConfig& c) {
    j = {{"iou_threshold", c.iou_threshold},
         {"known_object", c.known_object},
         {"rare_train_threshold", c.rare_train_threshold}};
}
inline void from_json(const nlohmann::json& j, EvalConfig& c) {
    c.iou_threshold = j.value("iou_threshold", c.iou_threshold);
    c.known_object = j.value("known_object", c.known_object);
    c.rare_train_threshold = j.value("rare_train_threshold", c.rare_train_threshold);
}

/// Everything one experiment needs. `finalize` derives the model's input
/// and output widths from the data and ablation settings so the sections
/// cannot drift apart.
struct RunConfig {
    SynthConfig synth;
    ModelConfig model;
    TrainConfig train;
    EvalConfig eval;
    AblationConfig ablation;
    int top_k = 100;  // interaction candidates kept per image

    void finalize() {
        model.input_channels = input_channels(ablation.mask_mode);
        model.num_verbs = synth.num_verbs;
        synth.validate();
    }
};

inline void to_json(nlohmann::json& j, const RunConfig& c) {
    j = {{"synth", c.synth},       {"model", c.model}, {"train", c.train},
         {"eval", c.eval},         {"ablation", c.ablation},
         {"top_k", c.top_k}};
}
inline void from_json(const nlohmann::json& j, RunConfig& c) {
    if (j.contains("synth")) j.at("synth").get_to(c.synth);
    if (j.contains("model")) j.at("model").get_to(c.model);
    if (j.contains("train")) j.at("train").get_to(c.train);
    if (j.contains("eval")) j.at("eval").get_to(c.eval);
    if (j.contains("ablation")) j.at("ablation").get_to(c.ablation);
    c.top_k = j.value("top_k", c.top_k);
}

inline RunConfig load_run_config(const std::string& path) {
    RunConfig cfg = detail::load_json_file(path).get<RunConfig>();
    cfg.finalize();
    return cfg;
}

inline void save_run_config(const std::string& path, const RunConfig& cfg) {
    detail::save_json_file(path, nlohmann::json(cfg));
}

}  // namespace hoidet

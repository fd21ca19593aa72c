#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "hoidet/adam.hpp"
#include "hoidet/checkpoint.hpp"
#include "hoidet/config.hpp"
#include "hoidet/dataset_io.hpp"
#include "hoidet/evaluation.hpp"
#include "hoidet/image_io.hpp"
#include "hoidet/inference.hpp"
#include "hoidet/loss.hpp"
#include "hoidet/model.hpp"
#include "hoidet/supervision.hpp"
#include "hoidet/synth.hpp"

namespace hoidet {

/// Dataset plus its rendered images, parallel to Dataset::scenes. Images
/// are kept on the 8-bit lattice so the in-memory pipeline and a disk round
/// trip see identical pixels.
struct BuiltDataset {
    Dataset meta;
    std::vector<ChannelGrid> images;
};

inline std::string scene_image_name(int id) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "images/scene_%06d.ppm", id);
    return buf;
}

inline BuiltDataset build_dataset(const SynthConfig& cfg) {
    cfg.validate();
    BuiltDataset ds;
    ds.meta.config = cfg;
    const int n = cfg.train_scenes + cfg.test_scenes;
    for (int i = 0; i < n; ++i) {
        Scene scene = generate_scene(cfg, stream_seed(cfg.seed, static_cast<std::uint64_t>(i),
                                                      SeedStream::SceneGen));
        quantize_image(scene.image);
        DatasetScene entry;
        entry.id = i;
        entry.image = scene_image_name(i);
        entry.detections = stub_detect(scene.annotation, cfg,
                                       stream_seed(cfg.seed, static_cast<std::uint64_t>(i),
                                                   SeedStream::Detect));
        entry.annotation = std::move(scene.annotation);
        ds.meta.scenes.push_back(std::move(entry));
        ds.images.push_back(std::move(scene.image));
        (i < cfg.train_scenes ? ds.meta.train_ids : ds.meta.test_ids).push_back(i);
    }
    return ds;
}

inline void save_built_dataset(const std::string& dir, const BuiltDataset& ds) {
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(dir) / "images");
    for (std::size_t i = 0; i < ds.meta.scenes.size(); ++i)
        write_ppm((fs::path(dir) / ds.meta.scenes[i].image).string(), ds.images[i]);
    save_dataset(dir, ds.meta);
}

inline BuiltDataset load_built_dataset(const std::string& dir) {
    BuiltDataset ds;
    ds.meta = load_dataset(dir);
    ds.images.reserve(ds.meta.scenes.size());
    for (const auto& s : ds.meta.scenes) ds.images.push_back(load_scene_image(dir, s));
    return ds;
}

/// Supervision of one actor example: inputs for both branch targets and the
/// combined loss weights, all on the output grid.
struct ExampleSupervision {
    ChannelGrid actor_target{0, 0, 0};
    ChannelGrid object_target{0, 0, 0};
    ChannelGrid actor_weights{0, 0, 0};
    ChannelGrid object_weights{0, 0, 0};
};

/// Assembles targets per the two-branch scheme: the actor box carries the
/// union of its verbs (or the without-interaction marker), every annotated
/// object carries the verbs it shares with this actor, the others the
/// marker. Weight maps follow the ablation switches.
inline ExampleSupervision make_supervision(const ActorExample& ex, const SceneAnnotation& ann,
                                           const GridShape& shape, int num_verbs,
                                           const TrainConfig& train, const AblationConfig& abl) {
    std::vector<int> actor_verbs;
    for (const auto& o : ex.objects)
        actor_verbs.insert(actor_verbs.end(), o.verbs.begin(), o.verbs.end());
    std::vector<LabeledBox> actor_boxes{
        {ex.actor_box,
         actor_verbs.empty() ? VerbSet::no_interaction() : VerbSet::of(actor_verbs)}};

    std::vector<LabeledBox> object_boxes;
    for (int j = 0; j < static_cast<int>(ann.objects.size()); ++j) {
        const auto it = std::find_if(ex.objects.begin(), ex.objects.end(),
                                     [&](const InteractingObject& o) { return o.gt_index == j; });
        object_boxes.push_back({ann.objects[static_cast<std::size_t>(j)].box,
                                it == ex.objects.end() ? VerbSet::no_interaction()
                                                       : VerbSet::of(it->verbs)});
    }

    ExampleSupervision sup;
    auto build = [&](const std::vector<LabeledBox>& boxes, bool include_wo, ChannelGrid& target,
                     ChannelGrid& weights) {
        target = branch_target(boxes, shape, train.center_ratio, num_verbs, include_wo);
        const auto sup_boxes =
            make_supervision_boxes(boxes, shape, train.center_ratio, num_verbs, include_wo);
        weights = abl.hanning ? hanning_weight_map(sup_boxes, target)
                              : ChannelGrid(shape.width, shape.height, num_verbs + 1, 1.0);
        if (abl.scale_weight) {
            std::vector<GridBox> full;
            full.reserve(sup_boxes.size());
            for (const auto& b : sup_boxes) full.push_back(b.full);
            weights = combine_weights(weights,
                                      scale_weight_map(full, shape, num_verbs + 1,
                                                       train.scale_lambda, train.scale_cap));
        }
    };
    build(actor_boxes, wo_on_actor(abl.wo_channel), sup.actor_target, sup.actor_weights);
    build(object_boxes, wo_on_object(abl.wo_channel), sup.object_target, sup.object_weights);
    return sup;
}

struct TrainResult {
    Model model;
    Adam optimizer;
    std::vector<double> epoch_mean_loss;
    std::vector<std::size_t> epoch_examples;
};

namespace detail {

struct PoolItem {
    std::size_t scene_pos = 0;  // position in Dataset::scenes
    std::size_t example = 0;    // position in the scene's arranged examples
    bool positive = false;
};

/// Epoch example pool: all positives plus ceil(positives * ratio) sampled
/// negatives, then a full shuffle. Distinct seed streams keep the two
/// random choices independent of each other across epochs.
inline std::vector<PoolItem> epoch_pool(const std::vector<PoolItem>& all, double negative_ratio,
                                        std::uint64_t balance_seed, std::uint64_t shuffle_seed) {
    std::size_t n_pos = 0;
    std::vector<std::size_t> negatives;
    for (std::size_t i = 0; i < all.size(); ++i) {
        if (all[i].positive)
            ++n_pos;
        else
            negatives.push_back(i);
    }
    std::vector<char> keep(all.size(), 1);
    const auto cap =
        static_cast<std::size_t>(std::ceil(static_cast<double>(n_pos) * negative_ratio));
    if (negatives.size() > cap) {
        Rng rng(balance_seed);
        rng.shuffle(negatives);
        for (std::size_t i = cap; i < negatives.size(); ++i) keep[negatives[i]] = 0;
    }
    std::vector<PoolItem> pool;
    for (std::size_t i = 0; i < all.size(); ++i)
        if (keep[i]) pool.push_back(all[i]);
    Rng rng(shuffle_seed);
    rng.shuffle(pool);
    return pool;
}

}  // namespace detail

/// Single-threaded training over the train split: one Adam step per actor
/// example, examples rebalanced and reshuffled every epoch. Deterministic
/// for a fixed dataset and configuration.
inline TrainResult train_on(const BuiltDataset& ds, const RunConfig& cfg,
                            std::ostream* log = nullptr) {
    const int K = cfg.model.num_verbs;
    Model model = Model::init(cfg.model, cfg.train.seed);
    Adam opt(AdamConfig{cfg.train.lr, 0.9, 0.999, 1e-8}, model.params().total_size());

    std::map<int, std::size_t> pos_by_id;
    for (std::size_t i = 0; i < ds.meta.scenes.size(); ++i) pos_by_id[ds.meta.scenes[i].id] = i;

    std::vector<std::size_t> train_pos;
    std::vector<std::vector<ActorExample>> arranged;
    std::vector<detail::PoolItem> all_items;
    for (int id : ds.meta.train_ids) {
        const std::size_t pos = pos_by_id.at(id);
        const auto& scene = ds.meta.scenes[pos];
        auto examples =
            arrange_annotations(scene.annotation, scene.detections, cfg.train.match_iou);
        for (std::size_t e = 0; e < examples.size(); ++e)
            all_items.push_back({pos, e, examples[e].positive});
        train_pos.push_back(pos);
        arranged.push_back(std::move(examples));
    }
    std::map<std::size_t, std::size_t> arranged_by_pos;
    for (std::size_t i = 0; i < train_pos.size(); ++i) arranged_by_pos[train_pos[i]] = i;

    LossConfig loss_cfg;
    loss_cfg.lambda_actor =
        cfg.ablation.actor_branch == ActorBranchMode::Off ? 0.0 : cfg.train.lambda_actor;
    loss_cfg.lambda_object = cfg.train.lambda_object;

    TrainResult result{std::move(model), std::move(opt), {}, {}};
    Parameters grads = zeros_like(result.model.params());
    for (int epoch = 0; epoch < cfg.train.epochs; ++epoch) {
        const auto pool = detail::epoch_pool(
            all_items, cfg.train.negative_ratio,
            stream_seed(cfg.train.seed, static_cast<std::uint64_t>(epoch), SeedStream::Balance),
            stream_seed(cfg.train.seed, static_cast<std::uint64_t>(epoch), SeedStream::Shuffle));
        double loss_sum = 0.0;
        for (const auto& item : pool) {
            const auto& scene = ds.meta.scenes[item.scene_pos];
            const auto& ex = arranged[arranged_by_pos.at(item.scene_pos)][item.example];
            const ChannelGrid& image = ds.images[item.scene_pos];
            const GridShape shape =
                GridShape::from_image(image.width, image.height, cfg.model.stride());

            const ChannelGrid input =
                make_model_input(image, ex.actor_box, cfg.ablation.mask_mode);
            const ForwardCache cache = result.model.forward(input);
            const ExampleSupervision sup = make_supervision(ex, scene.annotation, shape, K,
                                                            cfg.train, cfg.ablation);

            const double la = wce_forward(cache.actor, sup.actor_target, sup.actor_weights);
            const double lo = wce_forward(cache.object, sup.object_target, sup.object_weights);
            loss_sum += total_loss(la, lo, loss_cfg).total;

            ChannelGrid dactor = wce_backward(cache.actor, sup.actor_target, sup.actor_weights);
            for (double& v : dactor.data) v *= loss_cfg.lambda_actor;
            ChannelGrid dobject =
                wce_backward(cache.object, sup.object_target, sup.object_weights);
            for (double& v : dobject.data) v *= loss_cfg.lambda_object;

            for (auto& t : grads.tensors) std::fill(t.data.begin(), t.data.end(), 0.0);
            result.model.backward(cache, dactor, dobject, grads);
            result.optimizer.step(result.model.params(), grads);
        }
        result.epoch_mean_loss.push_back(pool.empty() ? 0.0
                                                      : loss_sum / static_cast<double>(pool.size()));
        result.epoch_examples.push_back(pool.size());
        if (log)
            *log << "epoch " << epoch + 1 << "/" << cfg.train.epochs << "  examples "
                 << pool.size() << "  mean loss " << result.epoch_mean_loss.back() << "\n";
    }
    return result;
}

struct EvalOutput {
    std::vector<HoiPrediction> hoi;
    std::vector<AgentPrediction> agents;
    EvalReport report;
    InferenceStats stats;
};

/// Runs the detector over one split and scores it against the ground
/// truth. Rare classes come from interaction counts on the train split.
inline EvalOutput eval_on(const BuiltDataset& ds, const Model& model, const RunConfig& cfg,
                          bool test_split = true) {
    std::map<int, std::size_t> pos_by_id;
    for (std::size_t i = 0; i < ds.meta.scenes.size(); ++i) pos_by_id[ds.meta.scenes[i].id] = i;

    EvalOutput out;
    std::vector<EvalScene> eval_scenes;
    for (int id : test_split ? ds.meta.test_ids : ds.meta.train_ids) {
        const std::size_t pos = pos_by_id.at(id);
        const auto& scene = ds.meta.scenes[pos];
        InferenceResult res =
            detect_hoi(model, ds.images[pos], scene.detections, id, cfg.ablation.mask_mode,
                       cfg.ablation.actor_branch, &out.stats);
        auto kept = top_k(std::move(res.hoi), cfg.top_k);
        out.hoi.insert(out.hoi.end(), kept.begin(), kept.end());
        out.agents.insert(out.agents.end(), res.agents.begin(), res.agents.end());
        eval_scenes.push_back({id, scene.annotation});
    }

    std::vector<SceneAnnotation> train_annotations;
    for (int id : ds.meta.train_ids)
        train_annotations.push_back(ds.meta.scenes[pos_by_id.at(id)].annotation);

    out.report = evaluate(eval_scenes, out.hoi, out.agents, class_counts(train_annotations),
                          cfg.eval);
    return out;
}

inline void cmd_synth(const RunConfig& cfg, const std::string& out_dir,
                      std::ostream* log = nullptr) {
    const BuiltDataset ds = build_dataset(cfg.synth);
    save_built_dataset(out_dir, ds);
    save_run_config((std::filesystem::path(out_dir) / "config.json").string(), cfg);
    if (log) {
        std::size_t triplets = 0;
        for (const auto& s : ds.meta.scenes) triplets += s.annotation.triplets.size();
        *log << "wrote " << ds.meta.scenes.size() << " scenes (" << ds.meta.train_ids.size()
             << " train, " << ds.meta.test_ids.size() << " test), " << triplets
             << " interaction triplets to " << out_dir << "\n";
    }
}

inline TrainResult cmd_train(RunConfig cfg, const std::string& dataset_dir,
                             const std::string& out_dir, std::ostream* log = nullptr) {
    const BuiltDataset ds = load_built_dataset(dataset_dir);
    cfg.synth = ds.meta.config;
    cfg.finalize();
    TrainResult result = train_on(ds, cfg, log);

    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    save_checkpoint((fs::path(out_dir) / "checkpoint.bin").string(), result.model,
                    result.optimizer);
    save_run_config((fs::path(out_dir) / "config.json").string(), cfg);
    nlohmann::json train_log = {{"epoch_mean_loss", result.epoch_mean_loss},
                                {"epoch_examples", result.epoch_examples}};
    detail::save_json_file((fs::path(out_dir) / "training_log.json").string(), train_log);
    if (log) *log << "wrote checkpoint to " << (fs::path(out_dir) / "checkpoint.bin").string() << "\n";
    return result;
}

inline EvalOutput cmd_eval(RunConfig cfg, const std::string& dataset_dir,
                           const std::string& checkpoint_path, const std::string& out_dir,
                           bool test_split = true, std::ostream* log = nullptr) {
    const BuiltDataset ds = load_built_dataset(dataset_dir);
    cfg.synth = ds.meta.config;
    cfg.finalize();
    const LoadedCheckpoint ckpt = load_checkpoint(checkpoint_path, cfg.model);
    EvalOutput out = eval_on(ds, ckpt.model, cfg, test_split);

    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    save_predictions((fs::path(out_dir) / "predictions.json").string(), out.hoi, out.agents);
    save_report((fs::path(out_dir) / "report.json").string(), out.report);
    save_run_config((fs::path(out_dir) / "config.json").string(), cfg);
    if (log)
        *log << "mAP " << out.report.map << "  (rare " << out.report.map_rare << ", non-rare "
             << out.report.map_non_rare << ", agent " << out.report.agent_map << ") over "
             << out.report.classes << " classes\n";
    return out;
}

inline InferenceResult cmd_infer(RunConfig cfg, const std::string& dataset_dir,
                                 const std::string& checkpoint_path, int image_id,
                                 const std::string& out_path, std::ostream* log = nullptr) {
    const BuiltDataset ds = load_built_dataset(dataset_dir);
    cfg.synth = ds.meta.config;
    cfg.finalize();
    const LoadedCheckpoint ckpt = load_checkpoint(checkpoint_path, cfg.model);

    std::size_t pos = ds.meta.scenes.size();
    for (std::size_t i = 0; i < ds.meta.scenes.size(); ++i)
        if (ds.meta.scenes[i].id == image_id) pos = i;
    if (pos == ds.meta.scenes.size())
        throw std::invalid_argument("no scene with id " + std::to_string(image_id));

    InferenceResult res =
        detect_hoi(ckpt.model, ds.images[pos], ds.meta.scenes[pos].detections, image_id,
                   cfg.ablation.mask_mode, cfg.ablation.actor_branch);
    res.hoi = top_k(std::move(res.hoi), cfg.top_k);
    if (!out_path.empty()) save_predictions(out_path, res.hoi, res.agents);
    if (log) {
        for (const auto& p : res.hoi)
            *log << "human " << p.human_index << " verb " << p.verb << " object "
                 << p.object_index << " (category " << p.object_category << ") score " << p.score
                 << "\n";
    }
    return res;
}

/// Writes the branch score maps of one actor pass as grayscale images plus
/// a small manifest, for eyeballing what the network learned.
inline void cmd_heatmap(RunConfig cfg, const std::string& dataset_dir,
                        const std::string& checkpoint_path, int image_id, int actor_index,
                        const std::string& out_dir, std::ostream* log = nullptr) {
    const BuiltDataset ds = load_built_dataset(dataset_dir);
    cfg.synth = ds.meta.config;
    cfg.finalize();
    const LoadedCheckpoint ckpt = load_checkpoint(checkpoint_path, cfg.model);

    std::size_t pos = ds.meta.scenes.size();
    for (std::size_t i = 0; i < ds.meta.scenes.size(); ++i)
        if (ds.meta.scenes[i].id == image_id) pos = i;
    if (pos == ds.meta.scenes.size())
        throw std::invalid_argument("no scene with id " + std::to_string(image_id));

    std::vector<Detection> humans;
    for (const auto& d : ds.meta.scenes[pos].detections)
        if (d.category == kHumanCategory) humans.push_back(d);
    if (actor_index < 0 || actor_index >= static_cast<int>(humans.size()))
        throw std::invalid_argument("actor index out of range, scene has " +
                                    std::to_string(humans.size()) + " detected humans");

    const Detection& actor = humans[static_cast<std::size_t>(actor_index)];
    const ChannelGrid input =
        make_model_input(ds.images[pos], actor.box, cfg.ablation.mask_mode);
    const ForwardCache cache = ckpt.model.forward(input);

    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    nlohmann::json manifest = {{"scene", image_id},
                               {"actor_index", actor_index},
                               {"actor_box", actor.box},
                               {"actor_maps", nlohmann::json::array()},
                               {"object_maps", nlohmann::json::array()}};
    for (int c = 0; c < cache.actor.channels; ++c) {
        const std::string name = "actor_ch" + std::to_string(c) + ".pgm";
        write_pgm((fs::path(out_dir) / name).string(), cache.actor, c);
        manifest["actor_maps"].push_back(name);
    }
    for (int c = 0; c < cache.object.channels; ++c) {
        const std::string name = "object_ch" + std::to_string(c) + ".pgm";
        write_pgm((fs::path(out_dir) / name).string(), cache.object, c);
        manifest["object_maps"].push_back(name);
    }
    if (cfg.ablation.mask_mode == MaskMode::Rgbm) {
        write_pgm((fs::path(out_dir) / "actor_mask.pgm").string(), input, 3);
        manifest["actor_mask"] = "actor_mask.pgm";
    }
    detail::save_json_file((fs::path(out_dir) / "heatmap.json").string(), manifest);
    if (log) *log << "wrote " << cache.actor.channels + cache.object.channels << " maps to "
                  << out_dir << "\n";
}

}  // namespace hoidet

#pragma once

#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "hoidet/evaluation.hpp"
#include "hoidet/geometry.hpp"
#include "hoidet/image_io.hpp"
#include "hoidet/inference.hpp"
#include "hoidet/scene.hpp"

namespace hoidet {

inline void to_json(nlohmann::json& j, const BBox& b) { j = {b.x1, b.y1, b.x2, b.y2}; }
inline void from_json(const nlohmann::json& j, BBox& b) {
    if (!j.is_array() || j.size() != 4) throw std::invalid_argument("box must be [x1,y1,x2,y2]");
    b = {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

inline void to_json(nlohmann::json& j, const Triplet& t) { j = {t.human, t.verb, t.object}; }
inline void from_json(const nlohmann::json& j, Triplet& t) {
    if (!j.is_array() || j.size() != 3)
        throw std::invalid_argument("triplet must be [human,verb,object]");
    t = {j[0].get<int>(), j[1].get<int>(), j[2].get<int>()};
}

inline void to_json(nlohmann::json& j, const AnnotatedObject& o) {
    j = {{"box", o.box}, {"category", o.category}};
}
inline void from_json(const nlohmann::json& j, AnnotatedObject& o) {
    j.at("box").get_to(o.box);
    j.at("category").get_to(o.category);
}

inline void to_json(nlohmann::json& j, const Detection& d) {
    j = {{"box", d.box}, {"category", d.category}, {"score", d.score}};
}
inline void from_json(const nlohmann::json& j, Detection& d) {
    j.at("box").get_to(d.box);
    j.at("category").get_to(d.category);
    j.at("score").get_to(d.score);
}

inline void to_json(nlohmann::json& j, const SceneAnnotation& a) {
    j = {{"width", a.width},
         {"height", a.height},
         {"humans", a.humans},
         {"objects", a.objects},
         {"triplets", a.triplets}};
}
inline void from_json(const nlohmann::json& j, SceneAnnotation& a) {
    j.at("width").get_to(a.width);
    j.at("height").get_to(a.height);
    j.at("humans").get_to(a.humans);
    j.at("objects").get_to(a.objects);
    j.at("triplets").get_to(a.triplets);
}

NLOHMANN_JSON_SERIALIZE_ENUM(SpatialPredicate, {
                                                   {SpatialPredicate::Overlap, "overlap"},
                                                   {SpatialPredicate::Beside, "beside"},
                                                   {SpatialPredicate::Stacked, "stacked"},
                                                   {SpatialPredicate::Near, "near"},
                                               })

inline void to_json(nlohmann::json& j, const SynthConfig& c) {
    j = {{"image_width", c.image_width},
         {"image_height", c.image_height},
         {"num_verbs", c.num_verbs},
         {"num_object_categories", c.num_object_categories},
         {"verb_predicates", c.verb_predicates},
         {"humans_min", c.humans_min},
         {"humans_max", c.humans_max},
         {"objects_min", c.objects_min},
         {"objects_max", c.objects_max},
         {"human_height_min", c.human_height_min},
         {"human_height_max", c.human_height_max},
         {"human_aspect_min", c.human_aspect_min},
         {"human_aspect_max", c.human_aspect_max},
         {"object_side_min", c.object_side_min},
         {"object_side_max", c.object_side_max},
         {"interaction_reach", c.interaction_reach},
         {"placement_weights", c.placement_weights},
         {"jitter", c.jitter},
         {"false_positive_rate", c.false_positive_rate},
         {"max_detections", c.max_detections},
         {"score_threshold", c.score_threshold},
         {"train_scenes", c.train_scenes},
         {"test_scenes", c.test_scenes},
         {"seed", c.seed}};
}
inline void from_json(const nlohmann::json& j, SynthConfig& c) {
    c.image_width = j.value("image_width", c.image_width);
    c.image_height = j.value("image_height", c.image_height);
    c.num_verbs = j.value("num_verbs", c.num_verbs);
    c.num_object_categories = j.value("num_object_categories", c.num_object_categories);
    c.verb_predicates = j.value("verb_predicates", c.verb_predicates);
    c.humans_min = j.value("humans_min", c.humans_min);
    c.humans_max = j.value("humans_max", c.humans_max);
    c.objects_min = j.value("objects_min", c.objects_min);
    c.objects_max = j.value("objects_max", c.objects_max);
    c.human_height_min = j.value("human_height_min", c.human_height_min);
    c.human_height_max = j.value("human_height_max", c.human_height_max);
    c.human_aspect_min = j.value("human_aspect_min", c.human_aspect_min);
    c.human_aspect_max = j.value("human_aspect_max", c.human_aspect_max);
    c.object_side_min = j.value("object_side_min", c.object_side_min);
    c.object_side_max = j.value("object_side_max", c.object_side_max);
    c.interaction_reach = j.value("interaction_reach", c.interaction_reach);
    c.placement_weights = j.value("placement_weights", c.placement_weights);
    c.jitter = j.value("jitter", c.jitter);
    c.false_positive_rate = j.value("false_positive_rate", c.false_positive_rate);
    c.max_detections = j.value("max_detections", c.max_detections);
    c.score_threshold = j.value("score_threshold", c.score_threshold);
    c.train_scenes = j.value("train_scenes", c.train_scenes);
    c.test_scenes = j.value("test_scenes", c.test_scenes);
    c.seed = j.value("seed", c.seed);
}

/// One stored scene: ground truth, the frozen detector-stub output, and the
/// image file it was rendered to (path relative to the dataset root).
struct DatasetScene {
    int id = 0;
    std::string image;
    SceneAnnotation annotation;
    std::vector<Detection> detections;
};

struct Dataset {
    SynthConfig config;
    std::vector<int> train_ids;
    std::vector<int> test_ids;
    std::vector<DatasetScene> scenes;
};

inline void to_json(nlohmann::json& j, const DatasetScene& s) {
    j = {{"id", s.id},
         {"image", s.image},
         {"annotation", s.annotation},
         {"detections", s.detections}};
}
inline void from_json(const nlohmann::json& j, DatasetScene& s) {
    j.at("id").get_to(s.id);
    j.at("image").get_to(s.image);
    j.at("annotation").get_to(s.annotation);
    j.at("detections").get_to(s.detections);
}

inline constexpr const char* kDatasetFormat = "hoidet-dataset";
inline constexpr const char* kPredictionsFormat = "hoidet-predictions";
inline constexpr const char* kReportFormat = "hoidet-report";
inline constexpr int kJsonVersion = 1;

namespace detail {

inline nlohmann::json load_json_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path);
    nlohmann::json j;
    is >> j;
    return j;
}

inline void save_json_file(const std::string& path, const nlohmann::json& j) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path);
    os << j.dump(2) << "\n";
    if (!os) throw std::runtime_error("write failed for " + path);
}

inline void check_format(const nlohmann::json& j, const char* format) {
    if (j.value("format", "") != format)
        throw std::runtime_error(std::string("expected a ") + format + " file");
    if (j.value("version", 0) != kJsonVersion)
        throw std::runtime_error("unsupported file version");
}

}  // namespace detail

inline void save_dataset(const std::string& dir, const Dataset& ds) {
    nlohmann::json j = {{"format", kDatasetFormat},
                        {"version", kJsonVersion},
                        {"config", ds.config},
                        {"train_ids", ds.train_ids},
                        {"test_ids", ds.test_ids},
                        {"scenes", ds.scenes}};
    detail::save_json_file((std::filesystem::path(dir) / "dataset.json").string(), j);
}

inline Dataset load_dataset(const std::string& dir) {
    const nlohmann::json j =
        detail::load_json_file((std::filesystem::path(dir) / "dataset.json").string());
    detail::check_format(j, kDatasetFormat);
    Dataset ds;
    j.at("config").get_to(ds.config);
    j.at("train_ids").get_to(ds.train_ids);
    j.at("test_ids").get_to(ds.test_ids);
    j.at("scenes").get_to(ds.scenes);
    return ds;
}

inline ChannelGrid load_scene_image(const std::string& dir, const DatasetScene& scene) {
    return read_ppm((std::filesystem::path(dir) / scene.image).string());
}

inline void to_json(nlohmann::json& j, const HoiPrediction& p) {
    j = {{"scene", p.scene},
         {"human_index", p.human_index},
         {"object_index", p.object_index},
         {"verb", p.verb},
         {"object_category", p.object_category},
         {"human_box", p.human_box},
         {"object_box", p.object_box},
         {"score", p.score}};
}
inline void from_json(const nlohmann::json& j, HoiPrediction& p) {
    j.at("scene").get_to(p.scene);
    j.at("human_index").get_to(p.human_index);
    j.at("object_index").get_to(p.object_index);
    j.at("verb").get_to(p.verb);
    j.at("object_category").get_to(p.object_category);
    j.at("human_box").get_to(p.human_box);
    j.at("object_box").get_to(p.object_box);
    j.at("score").get_to(p.score);
}

inline void to_json(nlohmann::json& j, const AgentPrediction& p) {
    j = {{"scene", p.scene},
         {"human_index", p.human_index},
         {"verb", p.verb},
         {"human_box", p.human_box},
         {"score", p.score}};
}
inline void from_json(const nlohmann::json& j, AgentPrediction& p) {
    j.at("scene").get_to(p.scene);
    j.at("human_index").get_to(p.human_index);
    j.at("verb").get_to(p.verb);
    j.at("human_box").get_to(p.human_box);
    j.at("score").get_to(p.score);
}

inline void save_predictions(const std::string& path, const std::vector<HoiPrediction>& hoi,
                             const std::vector<AgentPrediction>& agents) {
    detail::save_json_file(path, {{"format", kPredictionsFormat},
                                  {"version", kJsonVersion},
                                  {"hoi", hoi},
                                  {"agents", agents}});
}

struct Predictions {
    std::vector<HoiPrediction> hoi;
    std::vector<AgentPrediction> agents;
};

inline Predictions load_predictions(const std::string& path) {
    const nlohmann::json j = detail::load_json_file(path);
    detail::check_format(j, kPredictionsFormat);
    Predictions p;
    j.at("hoi").get_to(p.hoi);
    j.at("agents").get_to(p.agents);
    return p;
}

inline void to_json(nlohmann::json& j, const ClassKey& k) {
    j = {{"verb", k.verb}, {"category", k.category}};
}
inline void from_json(const nlohmann::json& j, ClassKey& k) {
    j.at("verb").get_to(k.verb);
    j.at("category").get_to(k.category);
}

inline void to_json(nlohmann::json& j, const ClassCount& c) {
    j = {{"verb", c.key.verb}, {"category", c.key.category}, {"count", c.count}};
}
inline void from_json(const nlohmann::json& j, ClassCount& c) {
    j.at("verb").get_to(c.key.verb);
    j.at("category").get_to(c.key.category);
    j.at("count").get_to(c.count);
}

inline void to_json(nlohmann::json& j, const ClassResult& r) {
    j = {{"verb", r.key.verb},
         {"category", r.key.category},
         {"ap", r.ap},
         {"gt_count", r.gt_count},
         {"train_count", r.train_count}};
}
inline void from_json(const nlohmann::json& j, ClassResult& r) {
    j.at("verb").get_to(r.key.verb);
    j.at("category").get_to(r.key.category);
    j.at("ap").get_to(r.ap);
    j.at("gt_count").get_to(r.gt_count);
    j.at("train_count").get_to(r.train_count);
}

inline void to_json(nlohmann::json& j, const AgentResult& r) {
    j = {{"verb", r.verb}, {"ap", r.ap}, {"gt_count", r.gt_count}};
}
inline void from_json(const nlohmann::json& j, AgentResult& r) {
    j.at("verb").get_to(r.verb);
    j.at("ap").get_to(r.ap);
    j.at("gt_count").get_to(r.gt_count);
}

inline void to_json(nlohmann::json& j, const SubsetResult& r) {
    j = {{"map", r.map}, {"classes", r.classes}, {"scenes", r.scenes}};
}
inline void from_json(const nlohmann::json& j, SubsetResult& r) {
    j.at("map").get_to(r.map);
    j.at("classes").get_to(r.classes);
    j.at("scenes").get_to(r.scenes);
}

inline void to_json(nlohmann::json& j, const EvalReport& r) {
    j = {{"map", r.map},
         {"map_rare", r.map_rare},
         {"map_non_rare", r.map_non_rare},
         {"agent_map", r.agent_map},
         {"classes", r.classes},
         {"rare_classes", r.rare_classes},
         {"non_rare_classes", r.non_rare_classes},
         {"per_class", r.per_class},
         {"per_verb", r.per_verb},
         {"subsets",
          {{"sh_so", r.sh_so}, {"mh_so", r.mh_so}, {"sh_mo", r.sh_mo}, {"mh_mo", r.mh_mo}}}};
}
inline void from_json(const nlohmann::json& j, EvalReport& r) {
    j.at("map").get_to(r.map);
    j.at("map_rare").get_to(r.map_rare);
    j.at("map_non_rare").get_to(r.map_non_rare);
    j.at("agent_map").get_to(r.agent_map);
    j.at("classes").get_to(r.classes);
    j.at("rare_classes").get_to(r.rare_classes);
    j.at("non_rare_classes").get_to(r.non_rare_classes);
    j.at("per_class").get_to(r.per_class);
    j.at("per_verb").get_to(r.per_verb);
    j.at("subsets").at("sh_so").get_to(r.sh_so);
    j.at("subsets").at("mh_so").get_to(r.mh_so);
    j.at("subsets").at("sh_mo").get_to(r.sh_mo);
    j.at("subsets").at("mh_mo").get_to(r.mh_mo);
}

inline void save_report(const std::string& path, const EvalReport& report) {
    nlohmann::json j = report;
    j["format"] = kReportFormat;
    j["version"] = kJsonVersion;
    detail::save_json_file(path, j);
}

inline EvalReport load_report(const std::string& path) {
    const nlohmann::json j = detail::load_json_file(path);
    detail::check_format(j, kReportFormat);
    return j.get<EvalReport>();
}

}  // namespace hoidet

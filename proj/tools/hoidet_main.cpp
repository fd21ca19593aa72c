#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "hoidet/checkpoint.hpp"
#include "hoidet/config.hpp"
#include "hoidet/pipeline.hpp"

namespace {

using hoidet::RunConfig;

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> mask_mode;
    std::optional<std::string> actor_branch;
    std::optional<std::string> wo_channel;
    std::optional<bool> hanning;
    std::optional<bool> scale_weight;
    std::optional<int> epochs;
    std::optional<double> lr;
    std::optional<int> top_k;
};

void add_override_options(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--seed", o.seed, "Seed for data generation and training");
    cmd->add_option("--mask-mode", o.mask_mode, "Actor input encoding")
        ->check(CLI::IsMember({"rgbm", "rgb", "rgb255"}));
    cmd->add_option("--actor-branch", o.actor_branch, "Actor branch role")
        ->check(CLI::IsMember({"off", "train", "full"}));
    cmd->add_option("--wo-channel", o.wo_channel, "Branches carrying the without-interaction channel")
        ->check(CLI::IsMember({"none", "actor", "object", "both"}));
    cmd->add_flag_callback("--hanning", [&o] { o.hanning = true; },
                           "Enable Hanning loss weighting");
    cmd->add_flag_callback("--no-hanning", [&o] { o.hanning = false; },
                           "Disable Hanning loss weighting");
    cmd->add_flag_callback("--scale-weight", [&o] { o.scale_weight = true; },
                           "Enable scale loss weighting");
    cmd->add_flag_callback("--no-scale-weight", [&o] { o.scale_weight = false; },
                           "Disable scale loss weighting");
    cmd->add_option("--epochs", o.epochs, "Training epochs");
    cmd->add_option("--lr", o.lr, "Adam learning rate");
    cmd->add_option("--top-k", o.top_k, "Interaction candidates kept per image (0 keeps all)");
}

RunConfig make_config(const std::string& config_path, const Overrides& o) {
    RunConfig cfg;
    if (!config_path.empty()) cfg = hoidet::load_run_config(config_path);
    if (o.seed) {
        cfg.synth.seed = *o.seed;
        cfg.train.seed = *o.seed;
    }
    auto mask_mode = [](const std::string& s) {
        return s == "rgbm" ? hoidet::MaskMode::Rgbm
                           : s == "rgb" ? hoidet::MaskMode::Rgb : hoidet::MaskMode::Rgb255;
    };
    auto branch_mode = [](const std::string& s) {
        return s == "off" ? hoidet::ActorBranchMode::Off
                          : s == "train" ? hoidet::ActorBranchMode::Train
                                         : hoidet::ActorBranchMode::Full;
    };
    auto wo_place = [](const std::string& s) {
        if (s == "none") return hoidet::WoPlacement::None;
        if (s == "actor") return hoidet::WoPlacement::Actor;
        if (s == "object") return hoidet::WoPlacement::Object;
        return hoidet::WoPlacement::Both;
    };
    if (o.mask_mode) cfg.ablation.mask_mode = mask_mode(*o.mask_mode);
    if (o.actor_branch) cfg.ablation.actor_branch = branch_mode(*o.actor_branch);
    if (o.wo_channel) cfg.ablation.wo_channel = wo_place(*o.wo_channel);
    if (o.hanning) cfg.ablation.hanning = *o.hanning;
    if (o.scale_weight) cfg.ablation.scale_weight = *o.scale_weight;
    if (o.epochs) cfg.train.epochs = *o.epochs;
    if (o.lr) cfg.train.lr = *o.lr;
    if (o.top_k) cfg.top_k = *o.top_k;
    cfg.finalize();
    return cfg;
}

std::string default_out(const std::string& leaf) {
    const char* root = std::getenv("HOIDET_OUT");
    return ((root ? std::filesystem::path(root) : std::filesystem::path("out")) / leaf).string();
}

const char* checkpoint_error_code(hoidet::CheckpointError::Code code) {
    using Code = hoidet::CheckpointError::Code;
    switch (code) {
        case Code::Io: return "io";
        case Code::BadMagic: return "bad_magic";
        case Code::BadVersion: return "bad_version";
        case Code::ConfigMismatch: return "config_mismatch";
        case Code::BadLayout: return "bad_layout";
        case Code::Truncated: return "truncated";
    }
    return "unknown";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Actor-conditioned human-object interaction detection on synthetic scenes"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "Run configuration JSON")
        ->check(CLI::ExistingFile);

    Overrides o;
    std::string out_dir, dataset_dir, checkpoint_path, split = "test";
    int image_index = 0, actor_index = 0;

    CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
    synth->add_option("--out", out_dir, "Output directory");
    add_override_options(synth, o);

    CLI::App* train = app.add_subcommand("train", "Train a model on a dataset");
    train->add_option("--dataset", dataset_dir, "Dataset directory")->required();
    train->add_option("--out", out_dir, "Output directory");
    add_override_options(train, o);

    CLI::App* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
    eval->add_option("--dataset", dataset_dir, "Dataset directory")->required();
    eval->add_option("--checkpoint", checkpoint_path, "Checkpoint file")->required();
    eval->add_option("--out", out_dir, "Output directory");
    eval->add_option("--split", split, "Split to score")->check(CLI::IsMember({"train", "test"}));
    add_override_options(eval, o);

    CLI::App* infer = app.add_subcommand("infer", "Score one image");
    infer->add_option("--dataset", dataset_dir, "Dataset directory")->required();
    infer->add_option("--checkpoint", checkpoint_path, "Checkpoint file")->required();
    infer->add_option("--image-index", image_index, "Scene id")->required();
    infer->add_option("--out", out_dir, "Predictions JSON path (optional)");
    add_override_options(infer, o);

    CLI::App* heatmap = app.add_subcommand("heatmap", "Export branch score maps for one actor");
    heatmap->add_option("--dataset", dataset_dir, "Dataset directory")->required();
    heatmap->add_option("--checkpoint", checkpoint_path, "Checkpoint file")->required();
    heatmap->add_option("--image-index", image_index, "Scene id")->required();
    heatmap->add_option("--actor-index", actor_index, "Detected human to condition on");
    heatmap->add_option("--out", out_dir, "Output directory");
    add_override_options(heatmap, o);

    CLI11_PARSE(app, argc, argv);

    try {
        const RunConfig cfg = make_config(config_path, o);
        if (synth->parsed()) {
            hoidet::cmd_synth(cfg, out_dir.empty() ? default_out("dataset") : out_dir, &std::cout);
        } else if (train->parsed()) {
            hoidet::cmd_train(cfg, dataset_dir, out_dir.empty() ? default_out("run") : out_dir,
                              &std::cout);
        } else if (eval->parsed()) {
            hoidet::cmd_eval(cfg, dataset_dir, checkpoint_path,
                             out_dir.empty() ? default_out("eval") : out_dir, split == "test",
                             &std::cout);
        } else if (infer->parsed()) {
            hoidet::cmd_infer(cfg, dataset_dir, checkpoint_path, image_index, out_dir, &std::cout);
        } else if (heatmap->parsed()) {
            hoidet::cmd_heatmap(cfg, dataset_dir, checkpoint_path, image_index, actor_index,
                                out_dir.empty() ? default_out("heatmap") : out_dir, &std::cout);
        }
    } catch (const hoidet::CheckpointError& e) {
        std::cerr << nlohmann::json{{"error", e.what()},
                                    {"code", checkpoint_error_code(e.code())}}
                         .dump()
                  << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << nlohmann::json{{"error", e.what()}}.dump() << "\n";
        return 1;
    }
    return 0;
}

// Acceptance gate: ten end-to-end checks, one PASS/FAIL line each.
// Exit code is the number of failed checks.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <random>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "hoidet/pipeline.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace hoidet;

namespace {

struct Result {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, ...) {
    char buf[256];
    va_list args;
    va_start(args, f);
    std::vsnprintf(buf, sizeof(buf), f, args);
    va_end(args);
    return buf;
}

std::vector<char> file_bytes(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    return std::vector<char>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("hoidet_accept_" + std::to_string(std::random_device{}()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

// ---------------------------------------------------------------- check 1

Result check_loss_gradient() {
    Rng rng(101);
    const double h = 1e-5;
    double max_rel = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        ChannelGrid pred(8, 8, 4), target(8, 8, 4), weights(8, 8, 4);
        for (std::size_t i = 0; i < pred.data.size(); ++i) {
            pred.data[i] = rng.uniform(0.02, 0.98);
            target.data[i] = rng.bernoulli(0.3) ? 1.0 : 0.0;
            weights.data[i] = rng.uniform(0.5, 8.0);
        }
        const ChannelGrid grad = wce_backward(pred, target, weights);
        for (std::size_t i = 0; i < pred.data.size(); ++i) {
            ChannelGrid plus = pred, minus = pred;
            plus.data[i] += h;
            minus.data[i] -= h;
            const double fd = (wce_forward(plus, target, weights) -
                               wce_forward(minus, target, weights)) /
                              (2.0 * h);
            const double g = grad.data[i];
            const double rel = std::fabs(g - fd) / std::max(std::fabs(g), std::fabs(fd));
            max_rel = std::max(max_rel, rel);
        }
    }
    Result r;
    r.pass = max_rel < 1e-6;
    r.detail = fmt("max rel %.2e over 100 random 8x8x4 grids (tol 1e-6)", max_rel);
    return r;
}

// ---------------------------------------------------------------- check 2

Result check_model_gradient() {
    ModelConfig mc;
    mc.input_channels = 4;
    mc.num_verbs = 2;
    const Model model = Model::init(mc, 11);

    Rng rng(13);
    ChannelGrid input(16, 16, 4);
    for (auto& v : input.data) v = rng.uniform(0.0, 1.0);
    const GridShape shape = GridShape::from_image(16, 16, mc.stride());
    ChannelGrid ta(shape.width, shape.height, mc.head_channels());
    ChannelGrid to = ta, wa = ta, wo = ta;
    for (std::size_t i = 0; i < ta.data.size(); ++i) {
        ta.data[i] = rng.bernoulli(0.2) ? 1.0 : 0.0;
        to.data[i] = rng.bernoulli(0.2) ? 1.0 : 0.0;
        wa.data[i] = rng.uniform(0.5, 4.0);
        wo.data[i] = rng.uniform(0.5, 4.0);
    }
    const LossConfig lcfg;
    auto loss_of = [&](const Model& m) {
        const ForwardCache c = m.forward(input);
        return total_loss(wce_forward(c.actor, ta, wa, lcfg.epsilon),
                          wce_forward(c.object, to, wo, lcfg.epsilon), lcfg)
            .total;
    };

    const ForwardCache cache = model.forward(input);
    const ChannelGrid da = wce_backward(cache.actor, ta, wa, lcfg.epsilon);
    const ChannelGrid dobj = wce_backward(cache.object, to, wo, lcfg.epsilon);
    Parameters grads = zeros_like(model.params());
    model.backward(cache, da, dobj, grads);

    const double h = 1e-5;
    double max_rel = 0.0;
    int checked = 0;
    for (std::size_t t = 0; t < model.params().count(); ++t) {
        const std::size_t size = model.params()[t].data.size();
        const std::size_t stride = std::max<std::size_t>(1, size / 33);
        for (std::size_t i = 0; i < size; i += stride) {
            Model plus(model.config(), model.params());
            Model minus(model.config(), model.params());
            plus.params()[t].data[i] += h;
            minus.params()[t].data[i] -= h;
            const double fd = (loss_of(plus) - loss_of(minus)) / (2.0 * h);
            const double g = grads[t].data[i];
            const double rel =
                std::fabs(g - fd) / std::max({std::fabs(g), std::fabs(fd), 1e-6});
            max_rel = std::max(max_rel, rel);
            ++checked;
        }
    }
    Result r;
    r.pass = max_rel < 1e-4;
    r.detail = fmt("max rel %.2e over %d sampled parameters (tol 1e-4)", max_rel, checked);
    return r;
}

// ---------------------------------------------------------------- check 3

Result check_window_weighting() {
    Rng rng(31);
    bool center_ok = true;
    double edge_max = 0.0, sym_max = 0.0;
    for (int trial = 0; trial < 500; ++trial) {
        const double w = rng.uniform(1.001, 50.0);
        const double hh = rng.uniform(1.001, 50.0);
        if (hanning(0.0, 0.0, w, hh) != 1.0) center_ok = false;
        edge_max = std::max(edge_max, std::fabs(hanning((w - 1.0) / 2.0, 0.0, w, hh)));
        edge_max = std::max(edge_max, std::fabs(hanning(-(w - 1.0) / 2.0, 0.0, w, hh)));
        edge_max = std::max(edge_max, std::fabs(hanning(0.0, (hh - 1.0) / 2.0, w, hh)));
        const double x = rng.uniform(0.0, (w - 1.0) / 2.0);
        const double y = rng.uniform(0.0, (hh - 1.0) / 2.0);
        sym_max = std::max(sym_max, std::fabs(hanning(x, y, w, hh) - hanning(-x, y, w, hh)));
        sym_max = std::max(sym_max, std::fabs(hanning(x, y, w, hh) - hanning(x, -y, w, hh)));
        sym_max = std::max(sym_max, std::fabs(hanning(x, y, w, hh) - hanning(-x, -y, w, hh)));
    }
    // degenerate extents contribute a flat factor of one
    if (hanning(0.4, 0.0, 1.0, 5.0) != hanning(0.0, 0.0, 1.0, 5.0)) center_ok = false;
    if (hanning(0.0, 0.0, 0.5, 0.5) != 1.0) center_ok = false;

    Result r;
    r.pass = center_ok && edge_max <= 1e-12 && sym_max <= 1e-12;
    r.detail = fmt("center exact: %s, max |edge| %.1e, max asymmetry %.1e (tol 1e-12)",
                   center_ok ? "yes" : "no", edge_max, sym_max);
    return r;
}

// ---------------------------------------------------------------- check 4

Result check_scale_weighting() {
    bool ok = true;
    std::string why;

    {
        const GridShape shape{128, 128};
        const auto big = scale_weight_map({GridBox{0, 0, 15, 15}}, shape, 1);
        if (big.at(5, 5, 0) != 4.0) { ok = false; why = "16-cell box in a 128 grid != 4"; }
        if (big.at(60, 60, 0) != 1.0) { ok = false; why = "outside-box weight != 1"; }
        const auto tiny = scale_weight_map({GridBox{3, 3, 3, 3}}, shape, 1);
        if (tiny.at(3, 3, 0) != 10.0) { ok = false; why = "cap not hit exactly"; }
    }

    Rng rng(41);
    double checked = 0;
    for (int trial = 0; trial < 40 && ok; ++trial) {
        const GridShape shape{4 + rng.uniform_int(157), 4 + rng.uniform_int(157)};
        std::vector<GridBox> boxes;
        const int n = 1 + rng.uniform_int(3);
        for (int b = 0; b < n; ++b) {
            const int x1 = rng.uniform_int(shape.width);
            const int y1 = rng.uniform_int(shape.height);
            const int x2 = std::min(shape.width - 1, x1 + rng.uniform_int(20));
            const int y2 = std::min(shape.height - 1, y1 + rng.uniform_int(20));
            boxes.push_back({x1, y1, x2, y2});
        }
        const auto map = scale_weight_map(boxes, shape, 2);
        const double longest = std::max(shape.width, shape.height);
        for (int y = 0; y < shape.height && ok; ++y)
            for (int x = 0; x < shape.width && ok; ++x) {
                double covered = 0.0;
                for (const auto& b : boxes)
                    if (b.contains(x, y))
                        covered = std::max(
                            covered,
                            std::min(10.0, 0.5 * longest / std::max(b.width(), b.height())));
                const double expect = covered > 0.0 ? covered : 1.0;
                for (int c = 0; c < 2; ++c)
                    if (map.at(x, y, c) != expect) {
                        ok = false;
                        why = fmt("cell (%d,%d) trial %d mismatch", x, y, trial);
                    }
                ++checked;
            }
    }
    Result r;
    r.pass = ok;
    r.detail = ok ? fmt("hand values exact, %.0f random cells match the reference", checked)
                  : why;
    return r;
}

// ---------------------------------------------------------------- check 5

bool reports_equal(const EvalReport& a, const EvalReport& b, std::string& why) {
    auto fail = [&why](const std::string& f) {
        why = "mismatch in " + f;
        return false;
    };
    if (a.map != b.map) return fail("map");
    if (a.map_rare != b.map_rare) return fail("map_rare");
    if (a.map_non_rare != b.map_non_rare) return fail("map_non_rare");
    if (a.agent_map != b.agent_map) return fail("agent_map");
    if (a.classes != b.classes || a.rare_classes != b.rare_classes ||
        a.non_rare_classes != b.non_rare_classes)
        return fail("class counts");
    if (a.per_class.size() != b.per_class.size()) return fail("per_class size");
    for (std::size_t i = 0; i < a.per_class.size(); ++i) {
        if (!(a.per_class[i].key == b.per_class[i].key)) return fail("per_class key");
        if (a.per_class[i].ap != b.per_class[i].ap) return fail("per_class ap");
        if (a.per_class[i].gt_count != b.per_class[i].gt_count) return fail("per_class gt");
        if (a.per_class[i].train_count != b.per_class[i].train_count)
            return fail("per_class train_count");
    }
    if (a.per_verb.size() != b.per_verb.size()) return fail("per_verb size");
    for (std::size_t i = 0; i < a.per_verb.size(); ++i) {
        if (a.per_verb[i].verb != b.per_verb[i].verb) return fail("per_verb verb");
        if (a.per_verb[i].ap != b.per_verb[i].ap) return fail("per_verb ap");
        if (a.per_verb[i].gt_count != b.per_verb[i].gt_count) return fail("per_verb gt");
    }
    const SubsetResult EvalReport::* subsets[] = {&EvalReport::sh_so, &EvalReport::mh_so,
                                                  &EvalReport::sh_mo, &EvalReport::mh_mo};
    for (auto pick : subsets) {
        if ((a.*pick).map != (b.*pick).map) return fail("subset map");
        if ((a.*pick).classes != (b.*pick).classes) return fail("subset classes");
        if ((a.*pick).scenes != (b.*pick).scenes) return fail("subset scenes");
    }
    return true;
}

Result check_evaluator_against_reference() {
    Rng rng(51);
    Result r;
    for (int trial = 0; trial < 1000; ++trial) {
        const testgen::RandomInstance inst = testgen::random_instance(rng);
        const EvalReport lib =
            evaluate(inst.scenes, inst.hoi, inst.agents, inst.train_counts, inst.cfg);
        const EvalReport ref =
            oracle::evaluate(inst.scenes, inst.hoi, inst.agents, inst.train_counts, inst.cfg);
        std::string why;
        if (!reports_equal(lib, ref, why)) {
            r.pass = false;
            r.detail = fmt("trial %d: %s", trial, why.c_str());
            return r;
        }
    }
    r.pass = true;
    r.detail = "1000 random instances, every report field bit-identical";
    return r;
}

// ---------------------------------------------------------------- check 6

struct BenchArtifacts {
    bool ok = false;
    RunConfig cfg;
    BuiltDataset ds;
    Model model;
    double map = 0.0;
};

Result check_default_benchmark(BenchArtifacts& bench) {
    bench.cfg = RunConfig{};  // the defaults are the benchmark
    bench.cfg.finalize();
    bench.ds = build_dataset(bench.cfg.synth);
    const TrainResult tr = train_on(bench.ds, bench.cfg);
    const EvalOutput out = eval_on(bench.ds, tr.model, bench.cfg, true);
    bench.model = tr.model;
    bench.map = out.report.map;
    bench.ok = true;

    const double ratio = tr.epoch_mean_loss.back() / tr.epoch_mean_loss.front();
    Result r;
    r.pass = out.report.map >= 0.80 && ratio < 0.25;
    r.detail = fmt("test mAP %.4f (need >= 0.80), final/first loss %.3f (need < 0.25)",
                   out.report.map, ratio);
    return r;
}

// ---------------------------------------------------------------- check 7

Result check_ablation_ordering() {
    // Two actors per scene plus detector noise: attribution has to bind each
    // object to the right human, which is where the mask input and the actor
    // branch earn their keep.
    RunConfig base;
    base.synth.humans_min = 2;
    base.synth.humans_max = 2;
    base.synth.jitter = 0.1;
    base.synth.false_positive_rate = 0.3;
    base.finalize();
    const BuiltDataset ds = build_dataset(base.synth);

    RunConfig rgb = base;
    rgb.ablation.mask_mode = MaskMode::Rgb;
    rgb.finalize();

    const TrainResult with_mask = train_on(ds, base);
    const TrainResult without_mask = train_on(ds, rgb);
    const double map_rgbm = eval_on(ds, with_mask.model, base, true).report.map;
    const double map_rgb = eval_on(ds, without_mask.model, rgb, true).report.map;

    RunConfig object_only = base;
    object_only.ablation.actor_branch = ActorBranchMode::Train;
    const double map_fused = eval_on(ds, with_mask.model, base, true).report.map;
    const double map_object = eval_on(ds, with_mask.model, object_only, true).report.map;

    Result r;
    r.pass = map_rgbm > map_rgb && map_fused >= map_object;
    r.detail = fmt("mAP mask %.4f > no-mask %.4f: %s; fused %.4f >= object-only %.4f: %s",
                   map_rgbm, map_rgb, map_rgbm > map_rgb ? "yes" : "NO", map_fused, map_object,
                   map_fused >= map_object ? "yes" : "NO");
    return r;
}

// ---------------------------------------------------------------- check 8

Result check_detector_noise(const BenchArtifacts& bench) {
    Result r;
    if (!bench.ok) {
        r.detail = "skipped: benchmark artifacts unavailable";
        return r;
    }
    RunConfig noisy_cfg = bench.cfg;
    noisy_cfg.synth.jitter = 0.1;
    const BuiltDataset noisy = build_dataset(noisy_cfg.synth);
    const double map_noisy = eval_on(noisy, bench.model, noisy_cfg, true).report.map;
    r.pass = bench.map >= map_noisy;
    r.detail =
        fmt("same checkpoint: mAP clean %.4f vs jittered boxes %.4f", bench.map, map_noisy);
    return r;
}

// ---------------------------------------------------------------- check 9

Result check_bit_reproducibility() {
    TempDir tmp;
    RunConfig cfg;
    cfg.synth.train_scenes = 20;
    cfg.synth.test_scenes = 8;
    cfg.train.epochs = 5;
    cfg.finalize();

    for (const char* run : {"a", "b"}) {
        const auto root = tmp.path / run;
        cmd_synth(cfg, (root / "data").string());
        cmd_train(cfg, (root / "data").string(), (root / "run").string());
        cmd_eval(cfg, (root / "data").string(), (root / "run" / "checkpoint.bin").string(),
                 (root / "eval").string());
    }
    auto same = [&](const char* rel) {
        return file_bytes((tmp.path / "a" / rel).string()) ==
               file_bytes((tmp.path / "b" / rel).string());
    };
    const bool ckpt = same("run/checkpoint.bin");
    const bool report = same("eval/report.json");
    const bool preds = same("eval/predictions.json");
    const bool data = same("data/dataset.json");
    Result r;
    r.pass = ckpt && report && preds && data;
    r.detail = fmt("checkpoint %s, report %s, predictions %s, dataset %s",
                   ckpt ? "identical" : "DIFFERS", report ? "identical" : "DIFFERS",
                   preds ? "identical" : "DIFFERS", data ? "identical" : "DIFFERS");
    return r;
}

// ---------------------------------------------------------------- check 10

Result check_score_scaling_invariance() {
    SynthConfig sc;
    sc.train_scenes = 20;
    sc.test_scenes = 0;
    sc.seed = 77;
    sc.jitter = 0.05;
    sc.false_positive_rate = 0.3;
    const BuiltDataset ds = build_dataset(sc);

    ModelConfig mc;
    mc.num_verbs = sc.num_verbs;
    const Model model = Model::init(mc, 5);

    int compared = 0;
    for (std::size_t s = 0; s < ds.meta.scenes.size(); ++s) {
        const auto& scene = ds.meta.scenes[s];
        const InferenceResult base = detect_hoi(model, ds.images[s], scene.detections,
                                                scene.id, MaskMode::Rgbm, ActorBranchMode::Full);
        std::vector<Detection> scaled_dets = scene.detections;
        for (auto& d : scaled_dets) d.score *= 3.7;
        const InferenceResult scaled = detect_hoi(model, ds.images[s], scaled_dets, scene.id,
                                                  MaskMode::Rgbm, ActorBranchMode::Full);

        auto rank_hoi = [](std::vector<HoiPrediction> v) {
            std::sort(v.begin(), v.end(), detail::hoi_pred_order);
            return v;
        };
        auto rank_agents = [](std::vector<AgentPrediction> v) {
            std::sort(v.begin(), v.end(), detail::agent_pred_order);
            return v;
        };
        const auto ha = rank_hoi(base.hoi), hb = rank_hoi(scaled.hoi);
        const auto aa = rank_agents(base.agents), ab = rank_agents(scaled.agents);
        if (ha.size() != hb.size() || aa.size() != ab.size())
            return {false, fmt("scene %d: candidate counts differ", scene.id)};
        for (std::size_t i = 0; i < ha.size(); ++i) {
            if (ha[i].human_index != hb[i].human_index ||
                ha[i].object_index != hb[i].object_index || ha[i].verb != hb[i].verb)
                return {false, fmt("scene %d: interaction rank %zu reordered", scene.id, i)};
            ++compared;
        }
        for (std::size_t i = 0; i < aa.size(); ++i)
            if (aa[i].human_index != ab[i].human_index || aa[i].verb != ab[i].verb)
                return {false, fmt("scene %d: agent rank %zu reordered", scene.id, i)};
    }
    return {true, fmt("ordering identical across 20 scenes (%d ranked candidates) at x3.7",
                      compared)};
}

}  // namespace

int main() {
    using Clock = std::chrono::steady_clock;
    BenchArtifacts bench;

    struct Entry {
        const char* name;
        std::function<Result()> run;
        double budget_s;  // 0 = no explicit budget
    };
    const std::vector<Entry> checks = {
        {"loss gradient matches central finite differences", check_loss_gradient, 1.0},
        {"model+loss gradient matches finite differences", check_model_gradient, 30.0},
        {"window weighting: center, edges, symmetry", check_window_weighting, 0.0},
        {"scale weighting: ratio values and cap", check_scale_weighting, 0.0},
        {"evaluator matches the brute-force reference", check_evaluator_against_reference, 60.0},
        {"default benchmark reaches target quality",
         [&bench] { return check_default_benchmark(bench); }, 600.0},
        {"ablations order as expected", check_ablation_ordering, 0.0},
        {"detector noise does not help", [&bench] { return check_detector_noise(bench); }, 0.0},
        {"end-to-end runs are bit-reproducible", check_bit_reproducibility, 0.0},
        {"ranking invariant to detection score scaling", check_score_scaling_invariance, 0.0},
    };

    int failures = 0;
    for (std::size_t i = 0; i < checks.size(); ++i) {
        const auto t0 = Clock::now();
        Result res;
        try {
            res = checks[i].run();
        } catch (const std::exception& e) {
            res.pass = false;
            res.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
        if (checks[i].budget_s > 0.0 && secs >= checks[i].budget_s) {
            res.pass = false;
            res.detail += fmt(" [over %.0fs budget]", checks[i].budget_s);
        }
        std::printf("%s  %2zu  %-48s  %s  (%.2fs)\n", res.pass ? "PASS" : "FAIL", i + 1,
                    checks[i].name, res.detail.c_str(), secs);
        std::fflush(stdout);
        if (!res.pass) ++failures;
    }
    std::printf("%d/%zu checks passed\n", static_cast<int>(checks.size()) - failures,
                checks.size());
    return failures;
}

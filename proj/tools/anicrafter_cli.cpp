#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "anicrafter.h"

// exit codes: 0 ok, 2 usage, 3 missing input, 4 contract violation
namespace {

constexpr int kExitUsage = 2;
constexpr int kExitMissing = 3;
constexpr int kExitContract = 4;

int status_to_exit(anic_status s) {
    switch (s) {
        case ANIC_OK: return 0;
        case ANIC_NOT_FOUND:
        case ANIC_IO: return kExitMissing;
        default: return kExitContract;
    }
}

int finish(anic_status s) {
    if (s != ANIC_OK) std::fprintf(stderr, "error: %s\n", anic_last_error());
    return status_to_exit(s);
}

bool parse_size(const std::string& text, long long& h, long long& w) {
    char extra;
    if (std::sscanf(text.c_str(), "%lldx%lld%c", &w, &h, &extra) != 2) return false;
    return h > 0 && w > 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"avatar-background conditioned video diffusion, desk scale"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(anic_version()));

    // gen-data
    auto* gen = app.add_subcommand("gen-data", "synthesize a scene dataset");
    std::string g_out, g_size = "64x64", g_degradation, g_mix = "hybrid";
    long long g_scenes = 8, g_frames = 17;
    unsigned long long g_seed = 0;
    gen->add_option("--out", g_out, "output directory")->required();
    gen->add_option("--scenes", g_scenes, "number of scenes");
    gen->add_option("--frames", g_frames, "frames per clip (1+4k)");
    gen->add_option("--size", g_size, "frame size WxH, e.g. 64x64");
    gen->add_option("--seed", g_seed, "generator seed");
    gen->add_option("--degradation", g_degradation, "degradation JSON text");
    gen->add_option("--background-mix", g_mix, "hybrid|dynamic|static");

    // train
    auto* tr = app.add_subcommand("train", "train adapters on a dataset");
    std::string t_data, t_config, t_out, t_loss_mask;
    std::optional<long long> t_steps, t_batch, t_max_scenes, t_holdout;
    std::optional<unsigned long long> t_seed;
    std::optional<double> t_lr;
    bool t_no_avatar = false, t_no_mask = false;
    tr->add_option("--data", t_data, "dataset directory")->required();
    tr->add_option("--config", t_config, "train config JSON file");
    tr->add_option("--out", t_out, "output directory")->required();
    tr->add_option("--steps", t_steps, "override: optimization steps");
    tr->add_option("--batch", t_batch, "override: batch size");
    tr->add_option("--seed", t_seed, "override: training seed");
    tr->add_option("--lr", t_lr, "override: learning rate");
    tr->add_option("--loss-mask", t_loss_mask, "override: uniform|body_weighted");
    tr->add_option("--max-scenes", t_max_scenes, "override: cap loaded scenes");
    tr->add_option("--holdout", t_holdout, "override: held-out scene count");
    tr->add_flag("--no-avatar-condition", t_no_avatar, "ablation: background-only condition");
    tr->add_flag("--no-mask-strategy", t_no_mask, "ablation: frame-level mask");

    // sample
    auto* sa = app.add_subcommand("sample", "denoise one sample with a checkpoint");
    std::string s_ckpt, s_sample, s_out, s_data;
    long long s_steps = 30;
    unsigned long long s_seed = 0;
    bool s_no_png = false;
    sa->add_option("--ckpt", s_ckpt, "checkpoint directory")->required();
    sa->add_option("--sample", s_sample, "sample id")->required();
    sa->add_option("--steps", s_steps, "denoising steps");
    sa->add_option("--seed", s_seed, "noise seed");
    sa->add_option("--out", s_out, "output directory")->required();
    sa->add_option("--data", s_data, "dataset directory (default: from checkpoint)");
    sa->add_flag("--no-png", s_no_png, "skip PNG frame dumps");

    // eval
    auto* ev = app.add_subcommand("eval", "score predictions against ground truth");
    std::string e_pred, e_data, e_out;
    ev->add_option("--pred", e_pred, "prediction directory")->required();
    ev->add_option("--data", e_data, "dataset directory")->required();
    ev->add_option("--out", e_out, "output CSV path")->required();

    // inspect-masks
    auto* im = app.add_subcommand("inspect-masks", "dump mask strategy visualizations");
    std::string i_data, i_sample, i_out;
    im->add_option("--data", i_data, "dataset directory")->required();
    im->add_option("--sample", i_sample, "sample id")->required();
    im->add_option("--out", i_out, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    if (gen->parsed()) {
        long long h = 0, w = 0;
        if (!parse_size(g_size, h, w)) {
            std::fprintf(stderr, "error: --size expects WxH, got '%s'\n", g_size.c_str());
            return kExitUsage;
        }
        return finish(anic_gen_data(g_out.c_str(), g_scenes, g_frames, h, w, g_seed,
                                    g_degradation.empty() ? nullptr : g_degradation.c_str(),
                                    g_mix.c_str()));
    }

    if (tr->parsed()) {
        nlohmann::json cfg = nlohmann::json::object();
        if (!t_config.empty()) {
            std::ifstream in(t_config);
            if (!in) {
                std::fprintf(stderr, "error: cannot read config file %s\n", t_config.c_str());
                return kExitMissing;
            }
            try {
                in >> cfg;
            } catch (const nlohmann::json::exception& e) {
                std::fprintf(stderr, "error: bad config JSON: %s\n", e.what());
                return kExitContract;
            }
        }
        if (t_steps) cfg["steps"] = *t_steps;
        if (t_batch) cfg["batch"] = *t_batch;
        if (t_seed) cfg["seed"] = *t_seed;
        if (t_lr) cfg["lr"] = *t_lr;
        if (!t_loss_mask.empty()) cfg["loss_mask"] = t_loss_mask;
        if (t_max_scenes) cfg["max_scenes"] = *t_max_scenes;
        if (t_holdout) cfg["holdout"] = *t_holdout;
        if (t_no_avatar) cfg["no_avatar_condition"] = true;
        if (t_no_mask) cfg["no_mask_strategy"] = true;
        return finish(anic_train(t_data.c_str(), cfg.dump().c_str(), t_out.c_str()));
    }

    if (sa->parsed())
        return finish(anic_sample(s_ckpt.c_str(), s_data.empty() ? nullptr : s_data.c_str(),
                                  s_sample.c_str(), s_steps, s_seed, s_out.c_str(),
                                  s_no_png ? 0 : 1));

    if (ev->parsed()) return finish(anic_eval(e_pred.c_str(), e_data.c_str(), e_out.c_str()));

    if (im->parsed())
        return finish(anic_inspect_masks(i_data.c_str(), i_sample.c_str(), i_out.c_str()));

    return kExitUsage;
}

#include "pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include "imageops.hpp"
#include "metrics.hpp"
#include "pngio.hpp"
#include "sampler.hpp"

namespace anic {

namespace fs = std::filesystem;

namespace {

std::string scene_id(int64_t i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "scene%04lld", (long long)i);
    return buf;
}

void write_json(const fs::path& path, const nlohmann::ordered_json& j) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write " + path.string());
    out << j.dump(2) << "\n";
    if (!out) throw io_error("failed writing " + path.string());
}

nlohmann::ordered_json degradation_json(const Degradation& d) {
    return {{"texture_blur_sigma", d.texture_blur_sigma},
            {"appendage_frozen", d.appendage_frozen},
            {"color_quantization_levels", d.color_quantization_levels}};
}

Degradation degradation_from_json(const nlohmann::json& j) {
    Degradation d;
    if (j.contains("texture_blur_sigma"))
        d.texture_blur_sigma = j.at("texture_blur_sigma").get<double>();
    if (j.contains("appendage_frozen"))
        d.appendage_frozen = j.at("appendage_frozen").get<bool>();
    if (j.contains("color_quantization_levels"))
        d.color_quantization_levels = j.at("color_quantization_levels").get<int>();
    return d;
}

std::string frame_name(const char* stem, int64_t f) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s_f%04lld.png", stem, (long long)f);
    return buf;
}

}  // namespace

void GenDataConfig::validate() const {
    if (out_dir.empty()) throw invalid_arg_error("gen-data: output directory required");
    if (scenes < 1) throw invalid_arg_error("gen-data: scenes must be >= 1");
    if (frames < 5 || (frames - 1) % 4 != 0)
        throw invalid_arg_error("gen-data: frames must be 1+4k with k >= 1");
    if (height < 16 || width < 16 || height % 8 != 0 || width % 8 != 0)
        throw invalid_arg_error("gen-data: height/width must be multiples of 8, >= 16");
    if (background_mix != "hybrid" && background_mix != "dynamic" && background_mix != "static")
        throw invalid_arg_error("gen-data: background_mix must be hybrid|dynamic|static");
    degradation.validate();
}

void gen_dataset(const GenDataConfig& cfg) {
    cfg.validate();
    fs::path root(cfg.out_dir);
    std::error_code ec;
    fs::create_directories(root, ec);
    if (ec) throw io_error("cannot create " + root.string() + ": " + ec.message());

    Manifest man;
    nlohmann::ordered_json extras;
    extras["schema_version"] = 1;
    extras["generator"] = {{"scenes", cfg.scenes},
                           {"frames", cfg.frames},
                           {"height", cfg.height},
                           {"width", cfg.width},
                           {"seed", cfg.seed},
                           {"background_mix", cfg.background_mix},
                           {"degradation", degradation_json(cfg.degradation)}};
    extras["samples"] = nlohmann::ordered_json::object();

    for (int64_t i = 0; i < cfg.scenes; i++) {
        std::string id = scene_id(i);
        GenSceneConfig gc;
        gc.frames = cfg.frames;
        gc.height = cfg.height;
        gc.width = cfg.width;
        gc.dynamic_background = cfg.background_mix == "dynamic" ||
                                (cfg.background_mix == "hybrid" && i % 2 == 0);
        uint64_t scene_seed = stream(cfg.seed, "scene:" + id).next_u64();
        SceneSpec sc = make_scene(scene_seed, gc);
        Rng srng = stream(cfg.seed, "sample:" + id);
        TrainingSample s = build_sample(sc, cfg.degradation, srng);

        // only the binary silhouette survives 8-bit quantization exactly;
        // everything else carries gradient / blended values and stays f32
        struct RoleOut {
            const char* role;
            const TensorF* t;
            bool u8;
        };
        const RoleOut outs[] = {
            {"target", &s.target_video, false},    {"background", &s.background_video, false},
            {"avatar", &s.avatar_video, false},    {"opacity", &s.opacity_video, false},
            {"mesh", &s.mesh_video, false},        {"bodymask", &s.body_mask, true},
            {"reference", &s.reference_image, false},
        };
        for (const RoleOut& ro : outs) {
            std::string fname = id + "_" + ro.role + ".anict";
            if (ro.u8)
                save_tensor_u8((root / fname).string(), *ro.t);
            else
                save_tensor((root / fname).string(), *ro.t);
            ManifestEntry e;
            e.sample_id = id;
            e.role = ro.role;
            e.path = fname;
            e.frames = ro.t->dim(1);
            e.height = ro.t->dim(2);
            e.width = ro.t->dim(3);
            man.entries.push_back(e);
        }
        extras["samples"][id] = {{"ref_index", s.ref_index},
                                 {"scene_seed", scene_seed},
                                 {"dynamic_background", gc.dynamic_background}};
    }
    man.save((root / "manifest.json").string());
    write_json(root / "extras.json", extras);

    nlohmann::ordered_json echo;
    echo["command"] = "gen-data";
    echo["out"] = cfg.out_dir;
    echo["scenes"] = cfg.scenes;
    echo["frames"] = cfg.frames;
    echo["height"] = cfg.height;
    echo["width"] = cfg.width;
    echo["seed"] = cfg.seed;
    echo["background_mix"] = cfg.background_mix;
    echo["degradation"] = degradation_json(cfg.degradation);
    write_json(root / "config.json", echo);
}

TrainingSample load_sample(const std::string& dir, const std::string& sample_id) {
    fs::path root(dir);
    fs::path mpath = root / "manifest.json";
    if (!fs::exists(mpath))
        throw not_found_error("dataset manifest not found: " + mpath.string());
    Manifest man = Manifest::load(mpath.string());

    nlohmann::json extras;
    {
        std::ifstream in(root / "extras.json");
        if (!in) throw not_found_error("dataset extras not found in " + dir);
        try {
            in >> extras;
        } catch (const nlohmann::json::exception& e) {
            throw io_error("bad extras.json: " + std::string(e.what()));
        }
    }
    TrainingSample s;
    auto role = [&](const std::string& r) {
        return load_tensor((root / man.find(sample_id, r).path).string());
    };
    s.target_video = role("target");
    s.background_video = role("background");
    s.avatar_video = role("avatar");
    s.opacity_video = role("opacity");
    s.mesh_video = role("mesh");
    s.body_mask = role("bodymask");
    s.reference_image = role("reference");
    try {
        s.ref_index = extras.at("samples").at(sample_id).at("ref_index").get<int64_t>();
    } catch (const nlohmann::json::exception&) {
        throw io_error("extras.json: missing ref_index for sample " + sample_id);
    }
    return s;
}

void run_train(const std::string& data_dir, const TrainConfig& cfg,
               const std::string& out_dir) {
    cfg.validate();
    std::vector<std::string> ids;
    std::vector<TrainingSample> samples = load_samples(data_dir, &ids, cfg.max_scenes);
    Dataset d = build_dataset(samples, ids, cfg);
    samples.clear();
    samples.shrink_to_fit();

    fs::path root(out_dir);
    std::error_code ec;
    fs::create_directories(root, ec);
    if (ec) throw io_error("cannot create " + root.string() + ": " + ec.message());

    std::printf("training: %lld scenes (%lld held out), %lld steps, batch %lld\n",
                (long long)d.train_count, (long long)(d.latents.size() - (size_t)d.train_count),
                (long long)cfg.steps, (long long)cfg.batch);
    std::fflush(stdout);
    TrainResult res = train(d, cfg, [&](const LossRow& r) {
        if (r.step % 25 == 0 || r.step + 1 == cfg.steps) {
            std::printf("step %lld  loss %.5f  ema %.5f\n", (long long)r.step, r.loss, r.ema);
            std::fflush(stdout);
        }
    });

    nlohmann::ordered_json meta;
    meta["train_config"] = to_json(cfg);
    meta["data_dir"] = data_dir;
    meta["step0_loss"] = res.step0_loss;
    meta["final_ema"] = res.final_ema;
    meta["frozen_checksum"] = res.frozen_before;
    meta["train_scenes"] = d.train_count;
    nlohmann::ordered_json hold = nlohmann::ordered_json::array();
    for (size_t i = (size_t)d.train_count; i < d.ids.size(); i++) hold.push_back(d.ids[i]);
    meta["holdout_ids"] = hold;
    save_checkpoint((root / "checkpoint").string(), res.params, cfg.model, meta);
    save_loss_csv((root / "loss.csv").string(), res.log);

    nlohmann::ordered_json echo;
    echo["command"] = "train";
    echo["data"] = data_dir;
    echo["out"] = out_dir;
    echo["config"] = to_json(cfg);
    write_json(root / "config.json", echo);
}

void run_sample(const SampleRunConfig& cfg) {
    if (cfg.steps < 1) throw invalid_arg_error("sample: steps must be >= 1");
    ModelConfig mc;
    nlohmann::json meta;
    ParamStore ps = load_checkpoint(cfg.ckpt_dir, mc, &meta);
    TrainConfig tc;
    if (meta.contains("train_config")) tc = train_config_from_json(meta.at("train_config"));
    tc.model = mc;

    std::string data_dir = cfg.data_dir;
    if (data_dir.empty() && meta.contains("data_dir"))
        data_dir = meta.at("data_dir").get<std::string>();
    if (data_dir.empty())
        throw invalid_arg_error("sample: no dataset directory (flag or checkpoint)");

    TrainingSample s = load_sample(data_dir, cfg.sample_id);
    SampleLatents sl = build_sample_latents(s, tc);
    TensorF video = sample_video(ps, mc, sl, cfg.steps, cfg.seed);

    fs::path root(cfg.out_dir);
    std::error_code ec;
    fs::create_directories(root, ec);
    if (ec) throw io_error("cannot create " + root.string() + ": " + ec.message());
    save_tensor((root / "video.anict").string(), video);
    save_tensor((root / "condition.anict").string(), sl.cond_pix);
    if (cfg.dump_png) {
        for (int64_t f = 0; f < video.dim(1); f++) {
            TensorF frame({3, video.dim(2), video.dim(3)});
            for (int64_t c = 0; c < 3; c++)
                std::copy_n(video.ptr() + video.index(c, f, 0, 0),
                            video.dim(2) * video.dim(3),
                            frame.ptr() + frame.index(c, 0, 0));
            save_png((root / frame_name("frame", f)).string(), frame);
        }
    }
    nlohmann::ordered_json echo;
    echo["command"] = "sample";
    echo["ckpt"] = cfg.ckpt_dir;
    echo["sample"] = cfg.sample_id;
    echo["steps"] = cfg.steps;
    echo["seed"] = cfg.seed;
    echo["data"] = data_dir;
    echo["out"] = cfg.out_dir;
    write_json(root / "config.json", echo);
}

void run_eval(const std::string& pred_dir, const std::string& data_dir,
              const std::string& out_csv) {
    fs::path root(pred_dir);
    if (!fs::is_directory(root)) throw not_found_error("prediction directory: " + pred_dir);
    std::vector<std::string> ids;
    for (const auto& e : fs::directory_iterator(root))
        if (e.is_directory() && fs::exists(e.path() / "video.anict"))
            ids.push_back(e.path().filename().string());
    std::sort(ids.begin(), ids.end());
    if (ids.empty()) throw not_found_error("no sample outputs under " + pred_dir);

    std::vector<MetricRow> rows;
    for (const std::string& id : ids) {
        TrainingSample s = load_sample(data_dir, id);
        int64_t T = s.target_video.dim(1);
        TensorF gt_joint = joint_with_reference(s.reference_image, s.target_video);
        TensorF gt_motion = slice_frames(gt_joint, 1, T - 1);
        TensorF mask_motion = slice_frames(s.body_mask, 1, T - 1);

        TensorF video = load_tensor((root / id / "video.anict").string());
        if (!video.same_shape(gt_joint))
            throw contract_error("eval: output/truth shape mismatch for " + id);
        RegionReport rep =
            region_report(slice_frames(video, 1, T - 1), gt_motion, mask_motion);
        for (MetricRow& r : report_rows(id, rep)) rows.push_back(r);

        fs::path cpath = root / id / "condition.anict";
        if (fs::exists(cpath)) {
            TensorF cond = load_tensor(cpath.string());
            if (!cond.same_shape(gt_joint))
                throw contract_error("eval: condition/truth shape mismatch for " + id);
            RegionReport cr =
                region_report(slice_frames(cond, 1, T - 1), gt_motion, mask_motion);
            for (MetricRow& r : report_rows(id, cr)) {
                r.metric = "cond_" + r.metric;
                rows.push_back(r);
            }
        }
    }
    fs::path out(out_csv);
    if (out.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(out.parent_path(), ec);
    }
    save_metrics_csv(out_csv, rows);

    nlohmann::ordered_json echo;
    echo["command"] = "eval";
    echo["pred"] = pred_dir;
    echo["data"] = data_dir;
    echo["out"] = out_csv;
    write_json(out_csv + ".config.json", echo);
}

void run_inspect_masks(const std::string& data_dir, const std::string& sample_id,
                       const std::string& out_dir) {
    TrainingSample s = load_sample(data_dir, sample_id);
    int64_t T = s.target_video.dim(1), H = s.target_video.dim(2), W = s.target_video.dim(3);
    TensorF soft = soften_mask(slice_frames(s.body_mask, 1, T - 1), kDefaultSoftMaskSigma);
    TensorF mv_avatar = avatar_mask(soft);
    TensorF mv_base = base_i2v_mask(T, H, W);
    TensorF ml_avatar = pack_mask(mv_avatar);
    TensorF ml_base = pack_mask(mv_base);

    fs::path root(out_dir);
    std::error_code ec;
    fs::create_directories(root, ec);
    if (ec) throw io_error("cannot create " + root.string() + ": " + ec.message());

    auto dump_gray = [&](const TensorF& clip, const char* stem) {
        for (int64_t f = 0; f < clip.dim(1); f++) {
            TensorF frame({1, clip.dim(2), clip.dim(3)});
            std::copy_n(clip.ptr() + clip.index(0, f, 0, 0), clip.dim(2) * clip.dim(3),
                        frame.ptr());
            save_png((root / frame_name(stem, f)).string(), frame);
        }
    };
    dump_gray(soft, "softmask");
    dump_gray(mv_avatar, "maskvideo_avatar");
    dump_gray(mv_base, "maskvideo_base");
    auto dump_latent = [&](const TensorF& ml, const char* stem) {
        for (int64_t f = 0; f < ml.dim(1); f++)
            for (int64_t c = 0; c < 4; c++) {
                TensorF frame({1, ml.dim(2), ml.dim(3)});
                std::copy_n(ml.ptr() + ml.index(c, f, 0, 0), ml.dim(2) * ml.dim(3),
                            frame.ptr());
                char buf[64];
                std::snprintf(buf, sizeof(buf), "%s_f%04lld_c%lld.png", stem, (long long)f,
                              (long long)c);
                save_png((root / buf).string(), frame);
            }
    };
    dump_latent(ml_avatar, "masklatent_avatar");
    dump_latent(ml_base, "masklatent_base");

    nlohmann::ordered_json echo;
    echo["command"] = "inspect-masks";
    echo["data"] = data_dir;
    echo["sample"] = sample_id;
    echo["out"] = out_dir;
    write_json(root / "config.json", echo);
}

// referenced by the C API for flag parsing
Degradation degradation_from_json_text(const std::string& text) {
    try {
        return degradation_from_json(nlohmann::json::parse(text));
    } catch (const nlohmann::json::exception& e) {
        throw invalid_arg_error("bad degradation JSON: " + std::string(e.what()));
    }
}

}  // namespace anic

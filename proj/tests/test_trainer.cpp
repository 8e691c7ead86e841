#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "core/trainer.hpp"

using namespace anic;
namespace fs = std::filesystem;

namespace {

// small scenes + a narrow transformer keep each step ~milliseconds while the
// latent width stays the real lossless 768
TrainConfig tiny_train_config() {
    TrainConfig cfg;
    cfg.model.dit.depth = 1;
    cfg.model.dit.width = 48;
    cfg.model.dit.heads = 2;
    cfg.model.dit.patch = 1;
    cfg.model.dit.mlp_ratio = 2;
    cfg.model.dit.time_width = 32;
    cfg.model.dit.lora_rank = 2;
    cfg.model.dit.lora_alpha = 2.0;
    cfg.model.tower.c1 = 4;
    cfg.model.tower.c2 = 6;
    cfg.model.tower.d_cond = 8;
    cfg.steps = 3;
    cfg.batch = 2;
    cfg.seed = 11;
    return cfg;
}

std::vector<TrainingSample> tiny_samples(int n, int64_t frames = 5, int64_t hw = 16) {
    GenSceneConfig gc;
    gc.frames = frames;
    gc.height = hw;
    gc.width = hw;
    std::vector<TrainingSample> out;
    for (int i = 0; i < n; i++) {
        SceneSpec sc = make_scene(300 + (uint64_t)i, gc);
        Rng rng(400 + (uint64_t)i);
        out.push_back(build_sample(sc, Degradation{}, rng));
    }
    return out;
}

std::vector<std::string> ids_for(size_t n) {
    std::vector<std::string> ids;
    for (size_t i = 0; i < n; i++) ids.push_back("s" + std::to_string(i));
    return ids;
}

}  // namespace

TEST_CASE("add_noise interpolates and its velocity points from data to noise") {
    TensorF x0({4, 3}), eps({4, 3});
    Rng r(1);
    x0.fill_gaussian(r);
    eps.fill_gaussian(r);

    NoisedPair lo = add_noise(x0, eps, 1e-6);
    CHECK(max_abs_diff(lo.x_t, x0) <= 1e-4);
    NoisedPair hi = add_noise(x0, eps, 1.0 - 1e-6);
    CHECK(max_abs_diff(hi.x_t, eps) <= 1e-4);

    NoisedPair mid = add_noise(x0, eps, 0.37);
    for (int64_t i = 0; i < x0.numel(); i++) {
        CHECK(std::abs(mid.v[i] + x0[i] - eps[i]) <= 1e-6);
        CHECK(std::abs(mid.x_t[i] - (0.63f * x0[i] + 0.37f * eps[i])) <= 1e-6);
    }
    CHECK_THROWS_AS((void)add_noise(x0, eps, 0.0), invalid_arg_error);
    CHECK_THROWS_AS((void)add_noise(x0, eps, 1.0), invalid_arg_error);
}

TEST_CASE("joint clip: frame 0 becomes the reference, motion frames untouched") {
    TensorF ref({3, 1, 4, 4}), clip({3, 5, 4, 4});
    Rng r(2);
    ref.fill_uniform(r, 0.0, 1.0);
    clip.fill_uniform(r, 0.0, 1.0);
    TensorF joint = joint_with_reference(ref, clip);
    for (int64_t c = 0; c < 3; c++)
        for (int64_t y = 0; y < 4; y++)
            for (int64_t x = 0; x < 4; x++) {
                CHECK(joint.at(c, 0, y, x) == ref.at(c, 0, y, x));
                for (int64_t f = 1; f < 5; f++)
                    CHECK(joint.at(c, f, y, x) == clip.at(c, f, y, x));
            }
}

TEST_CASE("latent build: lossless codec makes a no-op condition equal the target") {
    GenSceneConfig gc;
    gc.frames = 9;
    gc.height = 24;
    gc.width = 24;
    SceneSpec sc = make_scene(77, gc);
    Rng rng(78);
    TrainingSample s = build_sample(sc, Degradation{0.0, false, 256}, rng);
    TrainConfig cfg = tiny_train_config();
    SampleLatents sl = build_sample_latents(s, cfg);
    CHECK(sl.x0.shape == std::vector<int64_t>{768, 3, 3, 3});
    CHECK(bit_equal(sl.cond, sl.x0));
    CHECK(sl.mask.shape == std::vector<int64_t>{4, 3, 3, 3});
    CHECK(sl.cond_pix.shape == s.target_video.shape);
    CHECK(sl.mesh_pix.shape == s.mesh_video.shape);
    CHECK(sl.weight.numel() == 0);
}

TEST_CASE("latent build honors the mask and condition ablation flags") {
    auto samples = tiny_samples(1, 5, 16);
    const TrainingSample& s = samples[0];
    TrainConfig cfg = tiny_train_config();

    SampleLatents base = build_sample_latents(s, cfg);
    Condition c = build_condition(s, cfg.soft_mask_sigma);
    CHECK(bit_equal(base.mask, pack_mask(avatar_mask(c.soft_mask))));

    TrainConfig flat = cfg;
    flat.no_mask_strategy = true;
    SampleLatents fl = build_sample_latents(s, flat);
    CHECK(bit_equal(fl.mask, pack_mask(base_i2v_mask(5, 16, 16))));
    CHECK(bit_equal(fl.cond, base.cond));

    TrainConfig noav = cfg;
    noav.no_avatar_condition = true;
    SampleLatents na = build_sample_latents(s, noav);
    // motion slots carry the raw background, the reference slot stays
    TensorF expect = s.background_video;
    expect = joint_with_reference(s.reference_image, expect);
    CHECK(bit_equal(na.cond_pix, expect));
    CHECK(bit_equal(na.cond, encode_video(expect, CodecConfig::lossless())));
    CHECK(bit_equal(na.mask, base.mask));
}

TEST_CASE("body-weighted loss mask weights refined regions above preserved ones") {
    auto samples = tiny_samples(1, 5, 16);
    TrainConfig cfg = tiny_train_config();
    cfg.loss_mask = "body_weighted";
    SampleLatents sl = build_sample_latents(samples[0], cfg);
    REQUIRE(sl.weight.same_shape(sl.x0));
    float lo = 1e9f, hi = -1e9f;
    for (int64_t i = 0; i < sl.weight.numel(); i++) {
        lo = std::min(lo, sl.weight[i]);
        hi = std::max(hi, sl.weight[i]);
    }
    CHECK(lo >= 1.0f);
    CHECK(hi <= (float)(1.0 + cfg.body_weight_gain));
    CHECK(hi > lo);  // scenes contain both body and background
}

TEST_CASE("training is deterministic and never touches frozen tensors") {
    auto samples = tiny_samples(2);
    TrainConfig cfg = tiny_train_config();
    Dataset d = build_dataset(samples, ids_for(samples.size()), cfg);
    CHECK(d.train_count == 2);

    TrainResult a = train(d, cfg);
    TrainResult b = train(d, cfg);
    REQUIRE(a.log.size() == (size_t)cfg.steps);
    for (size_t i = 0; i < a.log.size(); i++) {
        CHECK(a.log[i].loss == b.log[i].loss);
        CHECK(a.log[i].ema == b.log[i].ema);
        CHECK(std::isfinite(a.log[i].loss));
    }
    for (const auto& [name, par] : a.params.params)
        CHECK(bit_equal(par.value, b.params.at(name).value));
    CHECK(a.frozen_before == a.frozen_after);

    // adapters actually moved
    double moved = 0;
    ParamStore init = build_params<float>(cfg.model);
    for (const auto& [name, par] : a.params.params)
        if (!par.frozen) moved += max_abs_diff(par.value, init.at(name).value);
    CHECK(moved > 0.0);
}

TEST_CASE("zero learning rate leaves every parameter bit-identical") {
    auto samples = tiny_samples(1);
    TrainConfig cfg = tiny_train_config();
    cfg.lr = 0.0;
    cfg.steps = 1;
    Dataset d = build_dataset(samples, ids_for(1), cfg);
    TrainResult r = train(d, cfg);
    ParamStore init = build_params<float>(cfg.model);
    for (const auto& [name, par] : r.params.params)
        CHECK(bit_equal(par.value, init.at(name).value));
    CHECK(std::isfinite(r.step0_loss));
}

TEST_CASE("step-0 loss ignores tower inputs but feels the mask strategy") {
    auto samples = tiny_samples(2);
    TrainConfig cfg = tiny_train_config();
    cfg.steps = 1;
    Dataset d = build_dataset(samples, ids_for(2), cfg);

    Dataset zeroed = d;
    for (SampleLatents& sl : zeroed.latents) {
        sl.mesh_pix = TensorF::zeros(sl.mesh_pix.shape);
        sl.cond_pix = TensorF::zeros(sl.cond_pix.shape);
    }
    TrainResult r1 = train(d, cfg);
    TrainResult r2 = train(zeroed, cfg);
    CHECK(r1.step0_loss == r2.step0_loss);

    TrainConfig flat = cfg;
    flat.no_mask_strategy = true;
    Dataset dflat = build_dataset(samples, ids_for(2), flat);
    TrainResult r3 = train(dflat, flat);
    CHECK(r3.step0_loss != r1.step0_loss);
}

TEST_CASE("holdout scenes are excluded from the training pool") {
    auto samples = tiny_samples(3);
    TrainConfig cfg = tiny_train_config();
    cfg.holdout = 2;
    Dataset d = build_dataset(samples, ids_for(3), cfg);
    CHECK(d.train_count == 1);
    CHECK(d.latents.size() == 3);
    cfg.holdout = 3;
    CHECK_THROWS_AS((void)build_dataset(samples, ids_for(3), cfg), invalid_arg_error);
}

TEST_CASE("loss log CSV: header plus one row per step") {
    std::vector<LossRow> log{{0, 0.5, 0.5}, {1, 0.25, 0.4975}};
    fs::path p = fs::temp_directory_path() / "anic_loss_test.csv";
    save_loss_csv(p.string(), log);
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    CHECK(line == "step,loss,ema_loss");
    int rows = 0;
    while (std::getline(in, line)) {
        long long step;
        double loss, ema;
        CHECK(std::sscanf(line.c_str(), "%lld,%lf,%lf", &step, &loss, &ema) == 3);
        rows++;
    }
    CHECK(rows == 2);
    fs::remove(p);
}

TEST_CASE("train config JSON round-trips including ablation flags") {
    TrainConfig cfg = tiny_train_config();
    cfg.no_avatar_condition = true;
    cfg.loss_mask = "body_weighted";
    cfg.holdout = 4;
    nlohmann::ordered_json j = to_json(cfg);
    TrainConfig back = train_config_from_json(j);
    CHECK(back.no_avatar_condition);
    CHECK_FALSE(back.no_mask_strategy);
    CHECK(back.loss_mask == "body_weighted");
    CHECK(back.holdout == 4);
    CHECK(back.model.dit.width == cfg.model.dit.width);
    CHECK(back.seed == cfg.seed);

    nlohmann::json bad = j;
    bad["loss_mask"] = "sometimes";
    CHECK_THROWS_AS((void)train_config_from_json(bad), invalid_arg_error);
}

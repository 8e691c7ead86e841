#include <doctest.h>

#include <cmath>

#include "core/scene.hpp"
#include "core/imageops.hpp"

using namespace anic;

namespace {

SceneSpec scene_without_character(int64_t T, int64_t H, int64_t W,
                                  int64_t vx = 0, int64_t vy = 0) {
    SceneSpec sc;
    sc.frames = T; sc.height = H; sc.width = W;
    sc.has_character = false;
    sc.background.pattern_id = 0;
    sc.background.color_a = {0.2f, 0.3f, 0.4f};
    sc.background.color_b = {0.8f, 0.7f, 0.6f};
    sc.background.freq_x = 3; sc.background.freq_y = 2;
    for (int64_t t = 0; t < T; t++) {
        sc.centers.push_back({(double)W / 2, (double)H / 2});
        sc.scales.push_back(1.0);
        sc.background.offsets.push_back({t * vx, t * vy});
    }
    return sc;
}

// same spec comparison helper
bool specs_equal(const SceneSpec& a, const SceneSpec& b) {
    if (a.centers != b.centers || a.scales != b.scales) return false;
    if (a.background.offsets != b.background.offsets) return false;
    if (a.character.base_color != b.character.base_color) return false;
    return a.character.torso_half == b.character.torso_half &&
           a.character.appendage.initial_angle == b.character.appendage.initial_angle;
}

bool frames_equal(const TensorF& v, int64_t t0, int64_t t1) {
    int64_t C = v.dim(0), T = v.dim(1), HW = v.dim(2) * v.dim(3);
    for (int64_t c = 0; c < C; c++)
        for (int64_t i = 0; i < HW; i++)
            if (v[(c * T + t0) * HW + i] != v[(c * T + t1) * HW + i]) return false;
    return true;
}

}  // namespace

TEST_CASE("make_scene is deterministic and seed-sensitive") {
    GenSceneConfig cfg;
    SceneSpec a = make_scene(7, cfg);
    SceneSpec b = make_scene(7, cfg);
    CHECK(specs_equal(a, b));

    SceneSpec c = make_scene(8, cfg);
    bool differs = false;
    for (size_t t = 0; t < a.centers.size(); t++)
        if (a.centers[t] != c.centers[t]) differs = true;
    CHECK(differs);

    GenSceneConfig bad = cfg;
    bad.frames = 16;
    CHECK_THROWS_AS(make_scene(1, bad), invalid_arg_error);
    bad.frames = 17; bad.width = 60;
    CHECK_THROWS_AS(make_scene(1, bad), invalid_arg_error);
}

TEST_CASE("static scene renders identical frames") {
    GenSceneConfig cfg;
    SceneSpec sc = make_scene(3, cfg);
    // freeze every motion source
    for (auto& c : sc.centers) c = sc.centers[0];
    for (auto& s : sc.scales) s = sc.scales[0];
    for (auto& o : sc.background.offsets) o = {0, 0};
    for (auto& l : sc.character.limbs) l.amplitude = 0.0;
    sc.character.appendage.initial_angle = 0.0;
    sc.character.appendage.drive_gain = 0.0;

    TensorF gt = render_ground_truth(sc);
    for (int64_t t = 1; t < sc.frames; t++) CHECK(frames_equal(gt, 0, t));
}

TEST_CASE("background translation is exactly toroidal") {
    SceneSpec sc = scene_without_character(9, 32, 48, 1, 0);
    TensorF bg = render_background(sc);
    int64_t H = 32, W = 48;
    for (int64_t t = 0; t < 9; t++)
        for (int64_t c = 0; c < 3; c++)
            for (int64_t y = 0; y < H; y++)
                for (int64_t x = 0; x < W; x++)
                    CHECK(bg.at(c, t, y, x) == bg.at(c, 0, y, (x - t + 10 * W) % W));

    TensorF gt = render_ground_truth(sc);
    CHECK(bit_equal(gt, bg));  // no character: ground truth is the background
}

TEST_CASE("renders stay in range over random scenes") {
    GenSceneConfig cfg;
    cfg.height = 48; cfg.width = 48;
    for (uint64_t seed = 0; seed < 20; seed++) {
        SceneSpec sc = make_scene(seed, cfg);
        TensorF gt = render_ground_truth(sc);
        float lo = 1e9f, hi = -1e9f;
        for (int64_t i = 0; i < gt.numel(); i++) {
            lo = std::min(lo, gt[i]); hi = std::max(hi, gt[i]);
        }
        CHECK(lo >= 0.0f);
        CHECK(hi <= 1.0f);
    }
}

TEST_CASE("body mask is binary, nonempty, and tracks the trajectory") {
    GenSceneConfig cfg;
    for (uint64_t seed = 20; seed < 26; seed++) {
        SceneSpec sc = make_scene(seed, cfg);
        TensorF m = body_mask(sc);
        int64_t H = sc.height, W = sc.width;
        for (int64_t t = 0; t < sc.frames; t++) {
            double sum = 0.0, sx = 0.0, sy = 0.0;
            for (int64_t y = 0; y < H; y++)
                for (int64_t x = 0; x < W; x++) {
                    float v = m.at(0, t, y, x);
                    CHECK((v == 0.0f || v == 1.0f));
                    if (v > 0.5f) { sum += 1.0; sx += (double)x + 0.5; sy += (double)y + 0.5; }
                }
            REQUIRE(sum > 0.0);
            CHECK(std::abs(sx / sum - sc.centers[(size_t)t][0]) < 1.0);
            CHECK(std::abs(sy / sum - sc.centers[(size_t)t][1]) < 1.0);
        }
    }
}

TEST_CASE("no-op degradation reproduces the character layer exactly") {
    SceneSpec sc = make_scene(31, GenSceneConfig{});
    auto [avatar, opacity] = render_avatar(sc, Degradation{0.0, false, 256});
    TensorF gt = render_ground_truth(sc);
    TensorF bg = render_background(sc);
    TensorF mask = body_mask(sc);
    for (int64_t t = 0; t < sc.frames; t++)
        for (int64_t y = 0; y < sc.height; y++)
            for (int64_t x = 0; x < sc.width; x++) {
                float m = mask.at(0, t, y, x);
                CHECK(opacity.at(0, t, y, x) == m);
                for (int64_t c = 0; c < 3; c++) {
                    if (m == 1.0f) {
                        CHECK(avatar.at(c, t, y, x) == gt.at(c, t, y, x));
                    } else {
                        CHECK(avatar.at(c, t, y, x) == 0.0f);
                        CHECK(gt.at(c, t, y, x) == bg.at(c, t, y, x));
                    }
                }
            }
}

TEST_CASE("frozen appendage differs only inside the appendage region") {
    SceneSpec sc = make_scene(32, GenSceneConfig{});
    auto [dyn, dyn_op] = render_avatar(sc, Degradation{0.0, false, 256});
    auto [fro, fro_op] = render_avatar(sc, Degradation{0.0, true, 256});
    TensorF region_d = appendage_mask(sc, false);
    TensorF region_f = appendage_mask(sc, true);
    bool any_diff = false;
    for (int64_t t = 0; t < sc.frames; t++)
        for (int64_t y = 0; y < sc.height; y++)
            for (int64_t x = 0; x < sc.width; x++) {
                bool in_region = region_d.at(0, t, y, x) > 0.5f || region_f.at(0, t, y, x) > 0.5f;
                bool diff = fro_op.at(0, t, y, x) != dyn_op.at(0, t, y, x);
                for (int64_t c = 0; c < 3; c++)
                    diff = diff || fro.at(c, t, y, x) != dyn.at(c, t, y, x);
                if (diff) any_diff = true;
                if (!in_region) CHECK(!diff);
            }
    CHECK(any_diff);  // the pendulum does move
}

TEST_CASE("opacity is confined to the blur-dilated body region") {
    SceneSpec sc = make_scene(33, GenSceneConfig{});
    Degradation deg{2.0, true, 5};
    auto [avatar, opacity] = render_avatar(sc, deg);
    TensorF mask = body_mask(sc);
    int64_t r = blur_radius_for(deg.texture_blur_sigma);
    int64_t H = sc.height, W = sc.width;
    for (int64_t t = 0; t < sc.frames; t++)
        for (int64_t y = 0; y < H; y++)
            for (int64_t x = 0; x < W; x++) {
                float o = opacity.at(0, t, y, x);
                CHECK(o >= 0.0f);
                CHECK(o <= 1.0f);
                if (o <= 0.0f) continue;
                bool near_body = false;
                for (int64_t dy = -r; dy <= r && !near_body; dy++)
                    for (int64_t dx = -r; dx <= r && !near_body; dx++) {
                        int64_t yy = y + dy, xx = x + dx;
                        if (yy < 0 || yy >= H || xx < 0 || xx >= W) continue;
                        if (mask.at(0, t, yy, xx) > 0.5f) near_body = true;
                    }
                CHECK(near_body);
            }
}

TEST_CASE("mesh condition ignores the palette and stays on the body") {
    SceneSpec sc = make_scene(34, GenSceneConfig{});
    TensorF mesh = render_mesh_condition(sc);

    SceneSpec recolored = sc;
    recolored.character.base_color = {0.9f, 0.1f, 0.1f};
    recolored.character.head_color = {0.1f, 0.9f, 0.1f};
    for (auto& l : recolored.character.limbs) l.color = {0.1f, 0.1f, 0.9f};
    recolored.character.appendage.color = {0.9f, 0.9f, 0.1f};
    CHECK(bit_equal(mesh, render_mesh_condition(recolored)));

    TensorF mask = body_mask(sc);
    for (int64_t t = 0; t < sc.frames; t++)
        for (int64_t y = 0; y < sc.height; y++)
            for (int64_t x = 0; x < sc.width; x++) {
                bool lit = false;
                for (int64_t c = 0; c < 3; c++) lit = lit || mesh.at(c, t, y, x) != 0.0f;
                if (lit) CHECK(mask.at(0, t, y, x) == 1.0f);
            }

    SceneSpec empty = scene_without_character(5, 32, 32);
    TensorF none = render_mesh_condition(empty);
    for (int64_t i = 0; i < none.numel(); i++) CHECK(none[i] == 0.0f);
}

TEST_CASE("build_sample honors its invariants") {
    GenSceneConfig cfg;
    cfg.height = 48; cfg.width = 48;
    Degradation deg;  // defaults: blur 2, frozen, 5 levels
    for (uint64_t seed = 40; seed < 48; seed++) {
        SceneSpec sc = make_scene(seed, cfg);
        Rng rng(seed);
        TrainingSample s = build_sample(sc, deg, rng);
        CHECK(s.ref_index >= 0);
        CHECK(s.ref_index < sc.frames);
        for (int64_t c = 0; c < 3; c++)
            for (int64_t y = 0; y < 48; y++)
                for (int64_t x = 0; x < 48; x++)
                    CHECK(s.reference_image.at(c, 0, y, x) == s.target_video.at(c, s.ref_index, y, x));
        // off-body, target is exactly the background
        for (int64_t t = 0; t < sc.frames; t++)
            for (int64_t y = 0; y < 48; y++)
                for (int64_t x = 0; x < 48; x++)
                    if (s.body_mask.at(0, t, y, x) == 0.0f)
                        for (int64_t c = 0; c < 3; c++)
                            CHECK(s.target_video.at(c, t, y, x) == s.background_video.at(c, t, y, x));
    }
    SceneSpec sc = make_scene(40, cfg);
    Rng rng(1);
    CHECK_THROWS_AS(build_sample(sc, Degradation{-1.0, false, 256}, rng), invalid_arg_error);
    CHECK_THROWS_AS(build_sample(sc, Degradation{1.0, false, 1}, rng), invalid_arg_error);
}

TEST_CASE("reference index draws are uniform") {
    SceneSpec sc = scene_without_character(17, 8, 8);
    Degradation deg{1.0, false, 16};
    const int n = 10000;
    std::vector<int> counts(17, 0);
    Rng rng(99);
    for (int i = 0; i < n; i++) {
        TrainingSample s = build_sample(sc, deg, rng);
        counts[(size_t)s.ref_index]++;
    }
    double p = 1.0 / 17.0;
    double sigma = std::sqrt((double)n * p * (1.0 - p));
    for (int k = 0; k < 17; k++)
        CHECK(std::abs((double)counts[(size_t)k] - (double)n * p) < 5.0 * sigma);
}

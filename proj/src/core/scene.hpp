#ifndef __SCENE_HPP__
#define __SCENE_HPP__

#include <array>
#include <optional>
#include <utility>
#include <vector>

#include "tensor.hpp"

namespace anic {

// procedural stand-in for a rigged human: a 2D articulated figure over a
// scrolling pattern background, with analytic ground truth for every render.

enum class FigureShape { capsule_figure, two_ellipse_figure };

struct LimbSpec {
    double anchor_x = 0.0, anchor_y = 0.0;  // offset from figure anchor, scale-1 px
    double length = 5.0, radius = 1.5;
    double base_angle = 0.0;                // 0 = straight down, +x clockwise
    double amplitude = 0.0, phase = 0.0, frequency = 0.0;  // swing in rad, rad, rad/frame
    std::array<float, 3> color = {0.5f, 0.5f, 0.5f};
};

// pendulum "hair" mounted on top of the head; angle measured from straight up.
// excursion is clamped to ±kAppendageMaxDev around the initial angle so a
// frozen render never strays more than a few px from the dynamic one.
inline constexpr double kAppendageMaxDev = 0.45;

struct AppendageSpec {
    double length = 5.0, radius = 1.2;
    double initial_angle = 0.0;
    double omega = 0.5;       // natural frequency, rad/frame
    double damping = 0.05;
    double drive_gain = 0.05; // coupling to anchor acceleration
    std::array<float, 3> color = {0.5f, 0.5f, 0.5f};
};

struct CharacterSpec {
    FigureShape shape = FigureShape::capsule_figure;
    std::array<float, 3> base_color = {0.5f, 0.5f, 0.5f};  // torso
    std::array<float, 3> head_color = {0.5f, 0.5f, 0.5f};
    double torso_half = 5.5, torso_r = 2.8, head_r = 2.4;
    std::vector<LimbSpec> limbs;  // arm_l, arm_r, leg_l, leg_r
    AppendageSpec appendage;
    // rest-pose centroid offset correction, scale-1 px, applied to the anchor
    double centroid_dx = 0.0, centroid_dy = 0.0;
};

struct BackgroundSpec {
    int pattern_id = 0;  // 0 plaid, 1 checker, 2 diagonal stripes
    std::array<float, 3> color_a = {0.2f, 0.2f, 0.2f};
    std::array<float, 3> color_b = {0.8f, 0.8f, 0.8f};
    int freq_x = 3, freq_y = 3;
    std::vector<std::array<int64_t, 2>> offsets;  // per-frame toroidal translation, px
};

struct SceneSpec {
    uint64_t seed = 0;
    int64_t frames = 17, height = 64, width = 64;
    bool has_character = true;
    CharacterSpec character;
    std::vector<std::array<double, 2>> centers;  // per-frame anchor, px
    std::vector<double> scales;                  // per-frame figure scale
    BackgroundSpec background;

    double figure_radius() const;  // conservative reach from anchor, scale-1 px
    void validate() const;
};

struct GenSceneConfig {
    int64_t frames = 17, height = 64, width = 64;
    bool dynamic_background = true;
};

struct Degradation {
    double texture_blur_sigma = 2.0;
    bool appendage_frozen = true;
    int color_quantization_levels = 5;
    void validate() const;
};

struct TrainingSample {
    TensorF reference_image;   // 3×1×H×W, ground-truth frame ref_index
    TensorF target_video;      // 3×T×H×W
    TensorF background_video;  // 3×T×H×W
    TensorF avatar_video;      // 3×T×H×W, degraded character on black
    TensorF opacity_video;     // 1×T×H×W in [0,1]
    TensorF mesh_video;        // 3×T×H×W, texture-free structure
    TensorF body_mask;         // 1×T×H×W in {0,1}
    int64_t ref_index = 0;
};

SceneSpec make_scene(uint64_t seed, const GenSceneConfig& config);

TensorF render_background(const SceneSpec& scene);
TensorF render_ground_truth(const SceneSpec& scene);
// -> (avatar_video, opacity_video)
std::pair<TensorF, TensorF> render_avatar(const SceneSpec& scene, const Degradation& deg);
TensorF render_mesh_condition(const SceneSpec& scene);
TensorF body_mask(const SceneSpec& scene);
// support of the appendage alone (diagnostic; frozen picks the rigid pose)
TensorF appendage_mask(const SceneSpec& scene, bool frozen);
std::vector<double> appendage_angles(const SceneSpec& scene);

TrainingSample build_sample(const SceneSpec& scene, const Degradation& deg, Rng& rng);

}  // namespace anic

#endif  // __SCENE_HPP__

#include "scene.hpp"

#include <cmath>
#include <cstring>

#include "common.hpp"
#include "imageops.hpp"

namespace anic {

namespace {

struct Part {
    int kind;  // 0 capsule, 1 ellipse
    double x0, y0, x1, y1, r;  // capsule: endpoints + radius; ellipse: (x0,y0) center, (x1,y1) radii
    std::array<float, 3> color;
};

Part capsule(double x0, double y0, double x1, double y1, double r, std::array<float, 3> c) {
    return Part{0, x0, y0, x1, y1, r, c};
}
Part ellipse(double cx, double cy, double rx, double ry, std::array<float, 3> c) {
    return Part{1, cx, cy, rx, ry, 0.0, c};
}

double seg_dist2(double px, double py, double x0, double y0, double x1, double y1) {
    double dx = x1 - x0, dy = y1 - y0;
    double len2 = dx * dx + dy * dy;
    double t = 0.0;
    if (len2 > 0.0) t = std::clamp(((px - x0) * dx + (py - y0) * dy) / len2, 0.0, 1.0);
    double ex = px - (x0 + t * dx), ey = py - (y0 + t * dy);
    return ex * ex + ey * ey;
}

bool inside(const Part& p, double px, double py) {
    if (p.kind == 0) return seg_dist2(px, py, p.x0, p.y0, p.x1, p.y1) <= p.r * p.r;
    double u = (px - p.x0) / p.x1, v = (py - p.y0) / p.y1;
    return u * u + v * v <= 1.0;
}

// paint parts in order into optional color planes (3·H·W) and mask plane (H·W)
void paint_parts(const std::vector<Part>& parts, int64_t H, int64_t W, float* color, float* mask) {
    for (const auto& p : parts) {
        double bx0, by0, bx1, by1;
        if (p.kind == 0) {
            bx0 = std::min(p.x0, p.x1) - p.r; bx1 = std::max(p.x0, p.x1) + p.r;
            by0 = std::min(p.y0, p.y1) - p.r; by1 = std::max(p.y0, p.y1) + p.r;
        } else {
            bx0 = p.x0 - p.x1; bx1 = p.x0 + p.x1;
            by0 = p.y0 - p.y1; by1 = p.y0 + p.y1;
        }
        int64_t x0 = std::max<int64_t>(0, (int64_t)std::floor(bx0 - 0.5));
        int64_t x1 = std::min<int64_t>(W - 1, (int64_t)std::ceil(bx1));
        int64_t y0 = std::max<int64_t>(0, (int64_t)std::floor(by0 - 0.5));
        int64_t y1 = std::min<int64_t>(H - 1, (int64_t)std::ceil(by1));
        for (int64_t y = y0; y <= y1; y++)
            for (int64_t x = x0; x <= x1; x++) {
                if (!inside(p, (double)x + 0.5, (double)y + 0.5)) continue;
                if (color)
                    for (int c = 0; c < 3; c++) color[c * H * W + y * W + x] = p.color[c];
                if (mask) mask[y * W + x] = 1.0f;
            }
    }
}

enum class PartFilter { all, body_only, appendage_only, mesh };

double head_offset(const CharacterSpec& c) { return c.torso_half + c.torso_r * 0.3 + c.head_r * 0.8; }
double appendage_anchor_offset(const CharacterSpec& c) { return head_offset(c) + c.head_r * 0.8; }

// figure parts at a given anchor/scale; limb swing evaluated at frame t
// (rest = true uses base angles), appendage at app_theta
std::vector<Part> build_parts(const CharacterSpec& c, double ax, double ay, double s,
                              double t, bool rest, double app_theta, PartFilter f) {
    std::vector<Part> parts;
    const std::array<float, 3> kSilhouette = {0.5f, 0.5f, 0.5f};
    const std::array<float, 3> kSpine = {0.85f, 0.2f, 0.2f};
    const std::array<float, 3> kBone = {0.2f, 0.85f, 0.3f};
    const std::array<float, 3> kHeadDot = {0.25f, 0.35f, 0.9f};
    bool mesh = f == PartFilter::mesh;

    if (f != PartFilter::appendage_only) {
        // torso
        if (c.shape == FigureShape::capsule_figure)
            parts.push_back(capsule(ax, ay - c.torso_half * s, ax, ay + c.torso_half * s,
                                    c.torso_r * s, mesh ? kSilhouette : c.base_color));
        else
            parts.push_back(ellipse(ax, ay, c.torso_r * 1.5 * s, (c.torso_half + c.torso_r) * s,
                                    mesh ? kSilhouette : c.base_color));
        // head
        double hy = ay - head_offset(c) * s;
        if (c.shape == FigureShape::capsule_figure)
            parts.push_back(ellipse(ax, hy, c.head_r * s, c.head_r * s,
                                    mesh ? kSilhouette : c.head_color));
        else
            parts.push_back(ellipse(ax, hy, c.head_r * 1.25 * s, c.head_r * 0.85 * s,
                                    mesh ? kSilhouette : c.head_color));
        // limbs
        for (const auto& l : c.limbs) {
            double lx = ax + l.anchor_x * s, ly = ay + l.anchor_y * s;
            double phi = l.base_angle +
                         (rest ? 0.0 : l.amplitude * std::sin(l.frequency * t + l.phase));
            double ex = lx + l.length * s * std::sin(phi), ey = ly + l.length * s * std::cos(phi);
            parts.push_back(capsule(lx, ly, ex, ey, l.radius * s, mesh ? kSilhouette : l.color));
        }
        if (mesh) {
            // skeleton strokes over the silhouette
            parts.push_back(capsule(ax, ay - c.torso_half * s, ax, ay + c.torso_half * s,
                                    0.9 * s, kSpine));
            for (const auto& l : c.limbs) {
                double lx = ax + l.anchor_x * s, ly = ay + l.anchor_y * s;
                double phi = l.base_angle +
                             (rest ? 0.0 : l.amplitude * std::sin(l.frequency * t + l.phase));
                double ex = lx + l.length * s * std::sin(phi);
                double ey = ly + l.length * s * std::cos(phi);
                parts.push_back(capsule(lx, ly, ex, ey, 0.8 * s, kBone));
            }
            parts.push_back(ellipse(ax, hy, 1.0 * s, 1.0 * s, kHeadDot));
        }
    }
    if (!mesh && f != PartFilter::body_only) {
        const auto& a = c.appendage;
        double px = ax, py = ay - appendage_anchor_offset(c) * s;
        double ex = px + a.length * s * std::sin(app_theta);
        double ey = py - a.length * s * std::cos(app_theta);
        parts.push_back(capsule(px, py, ex, ey, a.radius * s, a.color));
    }
    return parts;
}

struct Pose {
    double ax, ay, s;
};

Pose pose_at(const SceneSpec& scene, int64_t t) {
    double s = scene.scales[(size_t)t];
    return {scene.centers[(size_t)t][0] + scene.character.centroid_dx * s,
            scene.centers[(size_t)t][1] + scene.character.centroid_dy * s, s};
}

std::array<float, 3> pattern_color(const BackgroundSpec& bg, int64_t u, int64_t v,
                                   int64_t H, int64_t W) {
    double val;
    switch (bg.pattern_id) {
        case 0:
            val = 0.5 + 0.25 * std::sin(2.0 * M_PI * bg.freq_x * (double)u / (double)W) +
                  0.25 * std::sin(2.0 * M_PI * bg.freq_y * (double)v / (double)H);
            break;
        case 1:
            val = (double)(((u / 4) + (v / 4)) % 2);
            break;
        default:
            val = 0.5 + 0.5 * std::sin(2.0 * M_PI * bg.freq_x * (double)(u + v) / (double)W);
            break;
    }
    std::array<float, 3> out;
    for (int c = 0; c < 3; c++)
        out[(size_t)c] = (float)((double)bg.color_a[(size_t)c] +
                                 ((double)bg.color_b[(size_t)c] - (double)bg.color_a[(size_t)c]) * val);
    return out;
}

int64_t pos_mod(int64_t a, int64_t n) { return ((a % n) + n) % n; }

float grid_color(Rng& rng) { return (float)rng.uniform_int(30, 227) / 255.0f; }

std::array<float, 3> grid_color3(Rng& rng) { return {grid_color(rng), grid_color(rng), grid_color(rng)}; }

}  // namespace

double SceneSpec::figure_radius() const {
    const auto& c = character;
    double top = appendage_anchor_offset(c) + c.appendage.length + c.appendage.radius;
    double bottom = c.torso_half + c.torso_r;
    double reach = 0.0;
    for (const auto& l : c.limbs)
        reach = std::max(reach, std::abs(l.anchor_x) + std::abs(l.anchor_y) + l.length + l.radius);
    double head = head_offset(c) + c.head_r * 1.3;
    return std::max({top, bottom, reach, head, c.torso_r * 1.5}) + 1.0;
}

void SceneSpec::validate() const {
    if (frames < 1 || frames % 4 != 1)
        throw invalid_arg_error("scene: frames must satisfy T = 1 (mod 4)");
    if (height < 8 || width < 8 || height % 8 != 0 || width % 8 != 0)
        throw invalid_arg_error("scene: H and W must be positive multiples of 8");
    if ((int64_t)centers.size() != frames || (int64_t)scales.size() != frames)
        throw invalid_arg_error("scene: trajectory length must equal frames");
    if ((int64_t)background.offsets.size() != frames)
        throw invalid_arg_error("scene: background offsets length must equal frames");
    if (background.pattern_id < 0 || background.pattern_id > 2)
        throw invalid_arg_error("scene: unknown background pattern");
    if (!has_character) return;
    if (character.limbs.size() != 4) throw invalid_arg_error("scene: want 4 limbs");
    double F = figure_radius() + std::abs(character.centroid_dx) + std::abs(character.centroid_dy);
    for (int64_t t = 0; t < frames; t++) {
        double s = scales[(size_t)t];
        if (s <= 0.0) throw invalid_arg_error("scene: scale must be positive");
        double e = F * s + 1.0;
        double cx = centers[(size_t)t][0], cy = centers[(size_t)t][1];
        if (cx - e < 0.0 || cx + e > (double)width || cy - e < 0.0 || cy + e > (double)height)
            throw invalid_arg_error("scene: character leaves frame bounds");
    }
}

void Degradation::validate() const {
    if (texture_blur_sigma < 0.0) throw invalid_arg_error("degradation: blur sigma must be >= 0");
    if (color_quantization_levels < 2)
        throw invalid_arg_error("degradation: quantization levels must be >= 2");
}

std::vector<double> appendage_angles(const SceneSpec& scene) {
    int64_t T = scene.frames;
    const auto& a = scene.character.appendage;
    // anchor x position drives the pendulum; acceleration by central difference
    std::vector<double> x((size_t)T), acc((size_t)T, 0.0);
    for (int64_t t = 0; t < T; t++) x[(size_t)t] = pose_at(scene, t).ax;
    for (int64_t t = 1; t + 1 < T; t++)
        acc[(size_t)t] = x[(size_t)(t + 1)] - 2.0 * x[(size_t)t] + x[(size_t)(t - 1)];
    if (T >= 3) { acc[0] = acc[1]; acc[(size_t)(T - 1)] = acc[(size_t)(T - 2)]; }

    std::vector<double> th((size_t)T);
    double lo = a.initial_angle - kAppendageMaxDev, hi = a.initial_angle + kAppendageMaxDev;
    double theta = a.initial_angle, vel = 0.0;
    th[0] = theta;
    for (int64_t t = 1; t < T; t++) {
        vel += -a.omega * a.omega * std::sin(theta) - a.damping * vel -
               a.drive_gain * acc[(size_t)(t - 1)] * std::cos(theta);
        theta += vel;
        if (theta < lo) { theta = lo; vel = 0.0; }  // joint stop
        if (theta > hi) { theta = hi; vel = 0.0; }
        th[(size_t)t] = theta;
    }
    return th;
}

TensorF render_background(const SceneSpec& scene) {
    scene.validate();
    int64_t T = scene.frames, H = scene.height, W = scene.width;
    TensorF out({3, T, H, W});
    parallel_for(T, [&](int64_t tb, int64_t te) {
        for (int64_t t = tb; t < te; t++) {
            int64_t ox = scene.background.offsets[(size_t)t][0];
            int64_t oy = scene.background.offsets[(size_t)t][1];
            for (int64_t y = 0; y < H; y++)
                for (int64_t x = 0; x < W; x++) {
                    auto col = pattern_color(scene.background, pos_mod(x - ox, W),
                                             pos_mod(y - oy, H), H, W);
                    for (int c = 0; c < 3; c++) out.at(c, t, y, x) = col[(size_t)c];
                }
        }
    });
    return out;
}

namespace {

// character layer on black + binary mask, optionally with the appendage frozen
void paint_character(const SceneSpec& scene, bool frozen_appendage, PartFilter filter,
                     TensorF* color /*3,T,H,W*/, TensorF* mask /*1,T,H,W*/) {
    if (!scene.has_character) return;
    int64_t T = scene.frames, H = scene.height, W = scene.width;
    auto angles = appendage_angles(scene);
    parallel_for(T, [&](int64_t tb, int64_t te) {
        for (int64_t t = tb; t < te; t++) {
            Pose p = pose_at(scene, t);
            double theta = frozen_appendage ? scene.character.appendage.initial_angle
                                            : angles[(size_t)t];
            auto parts = build_parts(scene.character, p.ax, p.ay, p.s, (double)t, false,
                                     theta, filter);
            // channel planes for a frame are strided by T·H·W, so paint through a
            // contiguous staging buffer
            std::vector<float> cbuf;
            float* cplane = nullptr;
            if (color) {
                cbuf.assign((size_t)(3 * H * W), 0.0f);
                for (int c = 0; c < 3; c++)
                    std::memcpy(cbuf.data() + (size_t)(c * H * W),
                                color->ptr() + color->index(c, t, 0, 0),
                                sizeof(float) * (size_t)(H * W));
                cplane = cbuf.data();
            }
            float* mplane = mask ? mask->ptr() + mask->index(0, t, 0, 0) : nullptr;
            paint_parts(parts, H, W, cplane, mplane);
            if (color)
                for (int c = 0; c < 3; c++)
                    std::memcpy(color->ptr() + color->index(c, t, 0, 0),
                                cbuf.data() + (size_t)(c * H * W), sizeof(float) * (size_t)(H * W));
        }
    });
}

}  // namespace

TensorF render_ground_truth(const SceneSpec& scene) {
    TensorF out = render_background(scene);
    paint_character(scene, false, PartFilter::all, &out, nullptr);
    return out;
}

TensorF body_mask(const SceneSpec& scene) {
    scene.validate();
    TensorF mask({1, scene.frames, scene.height, scene.width});
    paint_character(scene, false, PartFilter::all, nullptr, &mask);
    return mask;
}

TensorF appendage_mask(const SceneSpec& scene, bool frozen) {
    scene.validate();
    TensorF mask({1, scene.frames, scene.height, scene.width});
    paint_character(scene, frozen, PartFilter::appendage_only, nullptr, &mask);
    return mask;
}

std::pair<TensorF, TensorF> render_avatar(const SceneSpec& scene, const Degradation& deg) {
    scene.validate();
    deg.validate();
    int64_t T = scene.frames, H = scene.height, W = scene.width;
    // opacity always follows the pose-aligned (dynamic) silhouette; the frozen
    // flag degrades the texture only. this keeps the opacity support inside the
    // blur-dilated body mask no matter the degradation.
    TensorF color({3, T, H, W});
    TensorF mask({1, T, H, W});
    if (deg.appendage_frozen) {
        paint_character(scene, true, PartFilter::all, &color, nullptr);
        paint_character(scene, false, PartFilter::all, nullptr, &mask);
    } else {
        paint_character(scene, false, PartFilter::all, &color, &mask);
    }

    TensorF opacity = mask;
    if (deg.texture_blur_sigma > 0.0) {
        int radius = blur_radius_for(deg.texture_blur_sigma);
        color = blur_video(color, deg.texture_blur_sigma, radius);
        opacity = blur_video(mask, deg.texture_blur_sigma, radius);
    }
    for (int64_t i = 0; i < color.numel(); i++)
        color[i] = quantize_level(std::clamp(color[i], 0.0f, 1.0f),
                                  deg.color_quantization_levels);
    return {color, opacity};
}

TensorF render_mesh_condition(const SceneSpec& scene) {
    scene.validate();
    TensorF out({3, scene.frames, scene.height, scene.width});
    paint_character(scene, false, PartFilter::mesh, &out, nullptr);
    return out;
}

SceneSpec make_scene(uint64_t seed, const GenSceneConfig& config) {
    if (config.frames < 1 || config.frames % 4 != 1)
        throw invalid_arg_error("make_scene: frames must satisfy T = 1 (mod 4)");
    if (config.height < 16 || config.width < 16 || config.height % 8 != 0 || config.width % 8 != 0)
        throw invalid_arg_error("make_scene: H and W must be multiples of 8, at least 16");

    Rng rng = stream(seed, "scene");
    SceneSpec sc;
    sc.seed = seed;
    sc.frames = config.frames;
    sc.height = config.height;
    sc.width = config.width;
    sc.has_character = true;

    auto& c = sc.character;
    c.shape = rng.uniform() < 0.5 ? FigureShape::capsule_figure : FigureShape::two_ellipse_figure;
    c.base_color = grid_color3(rng);
    c.head_color = grid_color3(rng);
    c.torso_half = rng.uniform(5.0, 6.5);
    c.torso_r = rng.uniform(2.4, 3.2);
    c.head_r = rng.uniform(2.0, 2.8);

    auto arm_color = grid_color3(rng);
    auto leg_color = grid_color3(rng);
    double arm_len = rng.uniform(4.5, 6.5), arm_r = rng.uniform(1.2, 1.7);
    double arm_base = rng.uniform(0.7, 1.1), arm_amp = rng.uniform(0.15, 0.4);
    double arm_freq = rng.uniform(0.25, 0.55), arm_phase = rng.uniform(0.0, 2.0 * M_PI);
    double leg_len = rng.uniform(5.0, 7.0), leg_r = rng.uniform(1.4, 1.9);
    double leg_base = rng.uniform(0.1, 0.28), leg_amp = rng.uniform(0.1, 0.3);
    double leg_freq = rng.uniform(0.2, 0.45), leg_phase = rng.uniform(0.0, 2.0 * M_PI);
    for (int side = 0; side < 2; side++) {
        double sgn = side == 0 ? -1.0 : 1.0;
        LimbSpec arm;
        arm.anchor_x = sgn * c.torso_r * 0.85;
        arm.anchor_y = -c.torso_half * 0.55;
        arm.length = arm_len; arm.radius = arm_r;
        arm.base_angle = sgn * arm_base;
        arm.amplitude = arm_amp; arm.frequency = arm_freq;
        arm.phase = arm_phase + (side == 0 ? 0.0 : M_PI);
        arm.color = arm_color;
        c.limbs.push_back(arm);
    }
    for (int side = 0; side < 2; side++) {
        double sgn = side == 0 ? -1.0 : 1.0;
        LimbSpec leg;
        leg.anchor_x = sgn * c.torso_r * 0.5;
        leg.anchor_y = c.torso_half * 0.92;
        leg.length = leg_len; leg.radius = leg_r;
        leg.base_angle = sgn * leg_base;
        leg.amplitude = leg_amp; leg.frequency = leg_freq;
        leg.phase = leg_phase + (side == 0 ? 0.0 : M_PI);
        leg.color = leg_color;
        c.limbs.push_back(leg);
    }
    auto& ap = c.appendage;
    ap.length = rng.uniform(4.0, 6.5);
    ap.radius = rng.uniform(1.0, 1.5);
    ap.initial_angle = rng.uniform(-0.28, 0.28);
    ap.omega = rng.uniform(0.35, 0.7);
    ap.damping = rng.uniform(0.04, 0.1);
    ap.drive_gain = rng.uniform(0.02, 0.08);
    ap.color = grid_color3(rng);

    double unit = (double)std::min(sc.height, sc.width) / 64.0;
    double F = sc.figure_radius();
    double s0 = std::min(rng.uniform(0.55, 0.75) * unit,
                         0.38 * (double)std::min(sc.height, sc.width) / F);
    double s_amp = rng.uniform(0.0, 0.05);
    double s_freq = rng.uniform(0.1, 0.35), s_phase = rng.uniform(0.0, 2.0 * M_PI);

    // measure the rest-pose centroid so trajectory centers track the mask centroid
    {
        int64_t L = 2 * (int64_t)std::ceil((F + 2.0) * s0) + 9;
        double mid = (double)L / 2.0;
        auto parts = build_parts(c, mid, mid, s0, 0.0, true, ap.initial_angle, PartFilter::all);
        std::vector<float> m((size_t)(L * L), 0.0f);
        paint_parts(parts, L, L, nullptr, m.data());
        double sx = 0.0, sy = 0.0, n = 0.0;
        for (int64_t y = 0; y < L; y++)
            for (int64_t x = 0; x < L; x++)
                if (m[(size_t)(y * L + x)] > 0.5f) {
                    sx += (double)x + 0.5; sy += (double)y + 0.5; n += 1.0;
                }
        if (n > 0.0) {
            c.centroid_dx = -(sx / n - mid) / s0;
            c.centroid_dy = -(sy / n - mid) / s0;
        }
    }

    double s_max = s0 * (1.0 + s_amp);
    double E = (F + std::abs(c.centroid_dx) + std::abs(c.centroid_dy)) * s_max + 1.0;
    double rx_max = (double)sc.width / 2.0 - E - 2.0;
    double ry_max = (double)sc.height / 2.0 - E - 2.0;
    if (rx_max < 0.0 || ry_max < 0.0)
        throw invalid_arg_error("make_scene: frame too small for the drawn character");
    double Rx = std::min(rng.uniform(1.0, std::max(1.5, 6.0 * unit)), rx_max);
    double Ry = std::min(rng.uniform(1.0, std::max(1.5, 5.0 * unit)), ry_max);
    double wx = rng.uniform(0.1, 0.4), px = rng.uniform(0.0, 2.0 * M_PI);
    double wy = rng.uniform(0.1, 0.4), py = rng.uniform(0.0, 2.0 * M_PI);
    double c0x = rng.uniform(E + 2.0 + Rx, (double)sc.width - E - 2.0 - Rx);
    double c0y = rng.uniform(E + 2.0 + Ry, (double)sc.height - E - 2.0 - Ry);
    for (int64_t t = 0; t < sc.frames; t++) {
        sc.centers.push_back({c0x + Rx * std::sin(wx * (double)t + px),
                              c0y + Ry * std::sin(wy * (double)t + py)});
        sc.scales.push_back(s0 * (1.0 + s_amp * std::sin(s_freq * (double)t + s_phase)));
    }

    auto& bg = sc.background;
    bg.pattern_id = (int)rng.uniform_int(0, 3);
    for (int i = 0; i < 3; i++) bg.color_a[(size_t)i] = (float)rng.uniform(0.08, 0.92);
    for (int i = 0; i < 3; i++) bg.color_b[(size_t)i] = (float)rng.uniform(0.08, 0.92);
    double dist = 0.0;
    for (int i = 0; i < 3; i++) dist += std::abs((double)bg.color_a[(size_t)i] - (double)bg.color_b[(size_t)i]);
    if (dist < 0.35)
        for (int i = 0; i < 3; i++) bg.color_b[(size_t)i] = 1.0f - bg.color_a[(size_t)i];
    bg.freq_x = (int)rng.uniform_int(2, 7);
    bg.freq_y = (int)rng.uniform_int(2, 7);
    int64_t vx = 0, vy = 0;
    if (config.dynamic_background) {
        vx = rng.uniform_int(-2, 3);
        vy = rng.uniform_int(-2, 3);
        if (vx == 0 && vy == 0) vx = 1;
    }
    for (int64_t t = 0; t < sc.frames; t++) bg.offsets.push_back({t * vx, t * vy});

    sc.validate();
    return sc;
}

TrainingSample build_sample(const SceneSpec& scene, const Degradation& deg, Rng& rng) {
    scene.validate();
    deg.validate();
    TrainingSample s;
    s.target_video = render_ground_truth(scene);
    s.background_video = render_background(scene);
    auto av = render_avatar(scene, deg);
    s.avatar_video = std::move(av.first);
    s.opacity_video = std::move(av.second);
    s.mesh_video = render_mesh_condition(scene);
    s.body_mask = body_mask(scene);
    s.ref_index = rng.uniform_int(0, scene.frames);

    int64_t H = scene.height, W = scene.width;
    s.reference_image = TensorF({3, 1, H, W});
    for (int c = 0; c < 3; c++)
        std::memcpy(s.reference_image.ptr() + s.reference_image.index(c, 0, 0, 0),
                    s.target_video.ptr() + s.target_video.index(c, s.ref_index, 0, 0),
                    sizeof(float) * (size_t)(H * W));
    return s;
}

}  // namespace anic

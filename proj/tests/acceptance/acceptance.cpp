// end-to-end acceptance checks, one per --criterion number. each run prints a
// single line "criterion N: PASS|FAIL - detail" and exits 0 (pass) or 1.
// heavyweight criteria (8, 9) train real models and take tens of minutes.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/codec.hpp"
#include "core/composite.hpp"
#include "core/maskpack.hpp"
#include "core/metrics.hpp"
#include "core/model.hpp"
#include "core/pipeline.hpp"
#include "core/sampler.hpp"
#include "core/trainer.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace anic;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

Outcome ok(const std::string& d) { return {true, d}; }
Outcome bad(const std::string& d) { return {false, d}; }

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    vsnprintf(buf, sizeof(buf), f, ap);
    va_end(ap);
    return buf;
}

double now_s() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

// fresh scratch directory next to the test binary's cwd
fs::path work_dir(const std::string& name) {
    fs::path p = fs::path("acceptance_work") / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

TensorF randn(const std::vector<int64_t>& shape, uint64_t seed) {
    TensorF t(shape);
    Rng r(seed);
    t.fill_gaussian(r);
    return t;
}

// ---- criterion 1: latent/mask shape contract ----

Outcome crit1() {
    const std::array<int64_t, 3> cases[] = {{17, 64, 64}, {81, 480, 832}, {33, 96, 96}};
    double t0 = now_s();
    for (const auto& [T, H, W] : cases) {
        auto ls = latent_shape(T, H, W);
        int64_t Tl = 1 + (T - 1) / 4, h = H / 8, w = W / 8;
        if (ls != std::array<int64_t, 3>{Tl, h, w})
            return bad(fmt("latent shape for T=%lld is (%lld,%lld,%lld)", (long long)T,
                           (long long)ls[0], (long long)ls[1], (long long)ls[2]));
        TensorF soft({1, T - 1, H, W});
        Rng r((uint64_t)T);
        soft.fill_uniform(r, 0.0, 1.0);
        TensorF packed = pack_mask(avatar_mask(soft));
        if (packed.shape != std::vector<int64_t>{4, Tl, h, w})
            return bad(fmt("mask shape for T=%lld wrong", (long long)T));
    }
    double elapsed = now_s() - t0;

    // materialized latents on the two desk-sized triples (the big one is
    // exercised shape-only above; encoding 97M floats is not a shape question)
    for (const auto& [T, H, W] : {cases[0], cases[2]}) {
        TensorF clip({3, T, H, W});
        Rng cr((uint64_t)(T + H));
        clip.fill_uniform(cr, 0.0, 1.0);
        TensorF lat = encode_video(clip, CodecConfig::lossless());
        auto ls = latent_shape(T, H, W);
        if (lat.shape != std::vector<int64_t>{768, ls[0], ls[1], ls[2]})
            return bad(fmt("encoded latent shape for T=%lld wrong", (long long)T));
    }
    if (elapsed >= 1.0) return bad(fmt("shape suite took %.2f s (budget 1 s)", elapsed));
    return ok(fmt("3 shape triples exact, %.2f s", elapsed));
}

// ---- criterion 2: mask packing vs brute-force oracle ----

Outcome crit2() {
    double t0 = now_s();
    double worst = 0.0;
    for (int i = 0; i < 100; i++) {
        Rng r(2000 + (uint64_t)i);
        int64_t Tj = 1 + 4 * r.uniform_int(1, 6);  // joint length 5..21
        int64_t H = 8 * r.uniform_int(1, 5), W = 8 * r.uniform_int(1, 5);
        TensorF mask({1, Tj, H, W});
        mask.fill_uniform(r, 0.0, 1.0);
        TensorF got = pack_mask(mask);
        TensorF want = anic_oracle::pack_mask_oracle(mask);
        if (got.shape != want.shape) return bad(fmt("shape mismatch on case %d", i));
        worst = std::max(worst, (double)max_abs_diff(got, want));
    }
    if (worst != 0.0) return bad(fmt("max abs diff %.3g (want exactly 0)", worst));
    return ok(fmt("100 random masks agree elementwise, %.2f s", now_s() - t0));
}

// ---- criterion 3: lossless codec round-trip + causality ----

Outcome crit3() {
    double t0 = now_s();
    double worst = 0.0;
    for (int i = 0; i < 50; i++) {
        Rng r(3000 + (uint64_t)i);
        int64_t T = 1 + 4 * r.uniform_int(1, 5);
        int64_t H = 8 * r.uniform_int(1, 4), W = 8 * r.uniform_int(1, 4);
        TensorF clip({3, T, H, W});
        clip.fill_uniform(r, 0.0, 1.0);
        TensorF rec = decode_video(encode_video(clip, CodecConfig::lossless()),
                                   CodecConfig::lossless());
        if (rec.shape != clip.shape) return bad(fmt("roundtrip shape mismatch on clip %d", i));
        worst = std::max(worst, (double)max_abs_diff(rec, clip));
    }
    if (worst > 1e-6) return bad(fmt("roundtrip max abs err %.3g > 1e-6", worst));

    // perturbing pixel frame p must leave latent groups before p untouched:
    // group 0 covers frame 0, group g>=1 covers frames 4(g-1)+1 .. 4g
    TensorF clip({3, 17, 16, 16});
    Rng cr(3900);
    clip.fill_uniform(cr, 0.0, 1.0);
    TensorF base = encode_video(clip, CodecConfig::lossless());
    for (int64_t p : {1, 5, 9, 16}) {
        TensorF mod = clip;
        for (int64_t c = 0; c < 3; c++)
            for (int64_t i = 0; i < 16 * 16; i++) {
                int64_t idx = (c * 17 + p) * 256 + i;
                mod[idx] = 1.0f - mod[idx];
            }
        TensorF lat = encode_video(mod, CodecConfig::lossless());
        int64_t first_group = (p + 3) / 4;  // first latent frame covering p
        int64_t per = base.dim(2) * base.dim(3);
        for (int64_t ch = 0; ch < base.dim(0); ch++)
            for (int64_t g = 0; g < first_group; g++)
                for (int64_t i = 0; i < per; i++) {
                    int64_t idx = (ch * base.dim(1) + g) * per + i;
                    if (base[idx] != lat[idx])
                        return bad(fmt("frame %lld leaked into latent group %lld",
                                       (long long)p, (long long)g));
                }
    }
    return ok(fmt("50 clips max err %.2g, causality holds, %.2f s", worst, now_s() - t0));
}

// ---- criterion 4: zero-init adapters leave the frozen base bit-exact ----

Outcome crit4() {
    double t0 = now_s();
    ModelConfig cfg;
    cfg.dit.depth = 2;
    cfg.dit.width = 32;
    cfg.dit.heads = 2;
    cfg.dit.patch = 2;
    cfg.dit.mlp_ratio = 2;
    cfg.dit.time_width = 32;
    cfg.dit.lora_rank = 4;
    cfg.dit.lora_alpha = 4.0;
    cfg.tower.c1 = 4;
    cfg.tower.c2 = 6;
    cfg.tower.d_cond = 5;
    cfg.c_lat = 6;
    cfg.init_seed = 40;
    ParamStore ps = build_params<float>(cfg);

    // make the check non-trivial: A factors random and nonzero, B still zero
    for (auto& [name, par] : ps.params)
        if (name.size() > 7 && name.rfind(".lora_a") == name.size() - 7) {
            Rng r = stream(41, name);
            for (int64_t i = 0; i < par.value.numel(); i++) par.value[i] = (float)r.gaussian();
        }

    for (int i = 0; i < 20; i++) {
        ModelInputs in;
        Rng r(4200 + (uint64_t)i);
        in.noisy = TensorF({cfg.c_lat, 2, 4, 4});
        in.noisy.fill_gaussian(r);
        in.cond = TensorF({cfg.c_lat, 2, 4, 4});
        in.cond.fill_gaussian(r);
        in.mask = TensorF({4, 2, 4, 4});
        in.mask.fill_uniform(r, 0.0, 1.0);
        in.mesh_video = TensorF({3, 5, 32, 32});
        in.mesh_video.fill_uniform(r, 0.0, 1.0);
        in.avatar_video = TensorF({3, 5, 32, 32});
        in.avatar_video.fill_uniform(r, 0.0, 1.0);
        in.t = 0.05 + 0.045 * i;
        TensorF with = model_forward(ps, cfg, in, true);
        TensorF base = model_forward(ps, cfg, in, false);
        if (!bit_equal(with, base)) return bad(fmt("forward differs from base on input %d", i));
    }
    return ok(fmt("20 inputs bit-exact with adapters enabled, %.2f s", now_s() - t0));
}

// ---- criterion 5: central-difference gradient checks at float64 ----

Outcome crit5() {
    double t0 = now_s();
    ModelConfig cfg;
    cfg.dit.depth = 2;
    cfg.dit.width = 32;
    cfg.dit.heads = 2;
    cfg.dit.patch = 2;
    cfg.dit.mlp_ratio = 2;
    cfg.dit.time_width = 32;
    cfg.dit.lora_rank = 2;
    cfg.dit.lora_alpha = 2.0;
    cfg.tower.c1 = 4;
    cfg.tower.c2 = 6;
    cfg.tower.d_cond = 5;
    cfg.c_lat = 6;
    cfg.init_seed = 50;
    ParamStoreT<double> ps = build_params<double>(cfg);
    for (auto& [name, par] : ps.params) {  // break the zero inits so grads flow everywhere
        if (par.frozen) continue;
        Rng r = stream(51, name);
        for (int64_t i = 0; i < par.value.numel(); i++) par.value[i] += r.gaussian() * 0.05;
    }

    ModelInputsT<double> in;
    Rng r(52);
    in.noisy = TensorD({cfg.c_lat, 2, 4, 4});
    in.noisy.fill_gaussian(r);
    in.cond = TensorD({cfg.c_lat, 2, 4, 4});
    in.cond.fill_gaussian(r);
    in.mask = TensorD({4, 2, 4, 4});
    in.mask.fill_uniform(r, 0.0, 1.0);
    in.mesh_video = TensorD({3, 5, 32, 32});
    in.mesh_video.fill_uniform(r, 0.0, 1.0);
    in.avatar_video = TensorD({3, 5, 32, 32});
    in.avatar_video.fill_uniform(r, 0.0, 1.0);
    in.t = 0.41;
    TensorD tgt = TensorD({cfg.c_lat, 2, 4, 4});
    Rng tr(53);
    tgt.fill_gaussian(tr);

    ag::Graph<double> g;
    ModelGraph<double> m(g, cfg, ps, true, true);
    g.backward_from(ag::weighted_mse(g, m.forward(in), tgt));
    auto eval = [&]() {
        ag::Graph<double> g2;
        ModelGraph<double> m2(g2, cfg, ps, true, false);
        return ag::weighted_mse(g2, m2.forward(in), tgt)->val()[0];
    };

    int64_t tower_checked = 0, dit_checked = 0;
    double worst = 0.0;
    std::string worst_name;
    Rng pick(54);
    for (auto& [name, par] : ps.params) {
        if (par.frozen) continue;
        const TensorD* an = m.grad_of(name);
        for (int s = 0; s < 3; s++) {
            int64_t idx = pick.uniform_int(0, par.value.numel());
            double keep = par.value[idx];
            double h = 1e-6 * std::max(1.0, std::abs(keep));
            par.value[idx] = keep + h;
            double lp = eval();
            par.value[idx] = keep - h;
            double lm = eval();
            par.value[idx] = keep;
            double fd = (lp - lm) / (2 * h);
            double a = an ? (*an)[idx] : 0.0;
            double rel = std::abs(fd - a) / std::max(1.0, std::abs(fd) + std::abs(a));
            if (rel > worst) {
                worst = rel;
                worst_name = name;
            }
        }
        (name.rfind("tower.", 0) == 0 ? tower_checked : dit_checked)++;
    }
    if (tower_checked < 12 || dit_checked < 10)
        return bad(fmt("coverage too thin: %lld tower / %lld other tensors",
                       (long long)tower_checked, (long long)dit_checked));
    if (worst > 1e-3)
        return bad(fmt("worst rel err %.3g at %s (tol 1e-3)", worst, worst_name.c_str()));
    return ok(fmt("%lld tower + %lld fusion/dit tensors, worst rel err %.2g, %.1f s",
                  (long long)tower_checked, (long long)dit_checked, worst, now_s() - t0));
}

// ---- criterion 6: compositor no-op oracle + blur kernel mass ----

Outcome crit6() {
    double t0 = now_s();
    Degradation noop{0.0, false, 256};
    for (int i = 0; i < 20; i++) {
        GenSceneConfig gc;
        gc.frames = (i % 2) ? 9 : 13;
        gc.height = 32;
        gc.width = (i % 3) ? 32 : 40;
        gc.dynamic_background = (i % 2) == 0;
        SceneSpec sc = make_scene(6000 + (uint64_t)i, gc);
        Rng r(6100 + (uint64_t)i);
        TrainingSample s = build_sample(sc, noop, r);
        Condition c = build_condition(s, kDefaultSoftMaskSigma);
        TensorF truth = slice_frames(s.target_video, 1, gc.frames - 1);
        if (!bit_equal(c.video, truth))
            return bad(fmt("scene %d: no-op condition differs from ground truth", i));
    }
    for (double sigma : {0.4, 1.0, 2.0, 3.7, 8.0}) {
        std::vector<double> k = gaussian_kernel_1d(sigma, blur_radius_for(sigma));
        double sum = 0.0;
        for (double v : k) sum += v;
        if (std::abs(sum - 1.0) > 1e-12)
            return bad(fmt("kernel sum for sigma %.1f off by %.3g", sigma, sum - 1.0));
    }
    return ok(fmt("20 scenes exact, kernel mass within 1e-12, %.2f s", now_s() - t0));
}

// ---- criterion 7: analytic-velocity sampler oracle ----

Outcome crit7() {
    double t0 = now_s();
    TensorF x0 = randn({16, 3, 6, 6}, 70), eps = randn({16, 3, 6, 6}, 71);
    auto analytic = [&](const TensorF&, double) {
        TensorF v(x0.shape);
        for (int64_t i = 0; i < v.numel(); i++) v[i] = eps[i] - x0[i];
        return v;
    };
    double worst = 0.0;
    for (int64_t steps : {1, 10, 50}) {
        TensorF rec = euler_integrate(eps, analytic, steps);
        worst = std::max(worst, (double)max_abs_diff(rec, x0));
    }
    if (worst > 1e-5) return bad(fmt("recovered x0 off by %.3g > 1e-5", worst));
    return ok(fmt("steps {1,10,50} recover data, max err %.2g, %.2f s", worst, now_s() - t0));
}

// ---- criteria 8/9 shared helpers ----

std::map<std::string, double> csv_means(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw io_error("missing metrics csv: " + path);
    std::string line;
    std::getline(f, line);  // header
    std::map<std::string, double> sum;
    std::map<std::string, int64_t> cnt;
    while (std::getline(f, line)) {
        std::stringstream ss(line);
        std::string id, metric, region, value;
        std::getline(ss, id, ',');
        std::getline(ss, metric, ',');
        std::getline(ss, region, ',');
        std::getline(ss, value, ',');
        std::string key = metric + "/" + region;
        sum[key] += std::strtod(value.c_str(), nullptr);
        cnt[key]++;
    }
    std::map<std::string, double> mean;
    for (auto& [k, v] : sum) mean[k] = v / (double)cnt[k];
    return mean;
}

std::vector<std::string> checkpoint_holdouts(const fs::path& ckpt) {
    std::ifstream f(ckpt / "index.json");
    nlohmann::json j = nlohmann::json::parse(f);
    return j.at("meta").at("holdout_ids").get<std::vector<std::string>>();
}

double checkpoint_final_ema(const fs::path& ckpt) {
    std::ifstream f(ckpt / "index.json");
    nlohmann::json j = nlohmann::json::parse(f);
    return j.at("meta").at("final_ema").get<double>();
}

// ---- criterion 8: desk restoration experiment ----

Outcome crit8() {
    double t0 = now_s();
    fs::path work = work_dir("crit8");

    GenDataConfig g;
    g.out_dir = (work / "data").string();
    g.scenes = 50;
    g.frames = 17;
    g.height = 64;
    g.width = 64;
    g.seed = 0;
    gen_dataset(g);

    TrainConfig tc;
    tc.steps = 1000;
    tc.batch = 4;
    tc.seed = 0;
    tc.holdout = 20;
    run_train(g.out_dir, tc, (work / "run").string());

    fs::path ckpt = work / "run" / "checkpoint";
    for (const std::string& id : checkpoint_holdouts(ckpt)) {
        SampleRunConfig sc;
        sc.ckpt_dir = ckpt.string();
        sc.sample_id = id;
        sc.out_dir = (work / "pred" / id).string();
        sc.steps = 30;
        sc.seed = 0;
        sc.dump_png = false;
        run_sample(sc);
    }
    run_eval((work / "pred").string(), g.out_dir, (work / "metrics.csv").string());

    auto m = csv_means((work / "metrics.csv").string());
    double all = m.at("psnr/all"), cond_all = m.at("cond_psnr/all");
    double body = m.at("psnr/body"), cond_body = m.at("cond_psnr/body");
    double bg = m.at("psnr/background"), cond_bg = m.at("cond_psnr/background");
    std::string nums =
        fmt("all %.2f vs %.2f dB, body %.2f vs %.2f, bg %.2f vs %.2f, %.0f s", all, cond_all,
            body, cond_body, bg, cond_bg, now_s() - t0);
    if (all < cond_all + 1.0) return bad("overall gain under 1 dB: " + nums);
    if (body <= cond_body) return bad("body region did not improve: " + nums);
    if (bg < cond_bg - 0.5) return bad("background degraded over 0.5 dB: " + nums);
    return ok(nums);
}

// ---- criterion 9: ablation loss ordering ----

Outcome crit9() {
    double t0 = now_s();
    fs::path work = work_dir("crit9");

    GenDataConfig g;
    g.out_dir = (work / "data").string();
    g.scenes = 24;
    g.frames = 13;
    g.height = 48;
    g.width = 48;
    g.seed = 0;
    gen_dataset(g);

    struct Variant {
        const char* name;
        bool no_avatar, no_mask;
    };
    const Variant variants[] = {
        {"full", false, false}, {"no_mask", false, true}, {"no_avatar", true, false}};
    std::map<std::string, double> ema;
    for (const Variant& v : variants) {
        TrainConfig tc;
        tc.steps = 700;
        tc.batch = 4;
        tc.seed = 0;
        tc.holdout = 4;
        tc.no_avatar_condition = v.no_avatar;
        tc.no_mask_strategy = v.no_mask;
        run_train(g.out_dir, tc, (work / v.name).string());
        ema[v.name] = checkpoint_final_ema(work / v.name / "checkpoint");
    }

    std::ofstream csv(work / "ablation_report.csv");
    csv << "variant,final_ema_loss\n";
    for (const Variant& v : variants)
        csv << v.name << "," << fmt("%.9g", ema.at(v.name)) << "\n";
    csv.close();

    std::string nums = fmt("full %.4f, no_mask %.4f, no_avatar %.4f, %.0f s", ema.at("full"),
                           ema.at("no_mask"), ema.at("no_avatar"), now_s() - t0);
    if (ema.at("full") > ema.at("no_mask")) return bad("full above mask ablation: " + nums);
    if (ema.at("full") > ema.at("no_avatar")) return bad("full above avatar ablation: " + nums);
    return ok(nums);
}

// ---- criterion 10: byte-identical regeneration through the CLI ----

std::map<std::string, std::vector<char>> read_tree(const fs::path& root) {
    std::map<std::string, std::vector<char>> out;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (!e.is_regular_file()) continue;
        std::ifstream f(e.path(), std::ios::binary);
        out[fs::relative(e.path(), root).string()] = std::vector<char>(
            std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
    }
    return out;
}

Outcome crit10() {
    double t0 = now_s();
    const char* cli = std::getenv("ANICRAFTER_CLI");
    if (!cli || !*cli) return bad("ANICRAFTER_CLI not set (path to the cli binary)");
    fs::path work = work_dir("crit10");
    auto run = [&](const std::string& args) {
        std::string cmd = std::string(cli) + " " + args + " > /dev/null 2>&1";
        return std::system(cmd.c_str());
    };

    std::string gen_args = "gen-data --out " + (work / "gen").string() +
                           " --scenes 2 --frames 9 --size 24x24 --seed 3";
    if (run(gen_args) != 0) return bad("gen-data failed");
    auto gen_a = read_tree(work / "gen");
    fs::remove_all(work / "gen");
    if (run(gen_args) != 0) return bad("gen-data rerun failed");
    if (read_tree(work / "gen") != gen_a) return bad("gen-data runs differ byte-wise");

    if (run("train --data " + (work / "gen").string() + " --out " + (work / "run").string() +
            " --steps 2 --batch 1 --seed 1") != 0)
        return bad("train failed");
    std::string sample_args = "sample --ckpt " + (work / "run" / "checkpoint").string() +
                              " --sample scene0000 --out " + (work / "pred").string() +
                              " --steps 4 --seed 2";
    if (run(sample_args) != 0) return bad("sample failed");
    auto pred_a = read_tree(work / "pred");
    fs::remove_all(work / "pred");
    if (run(sample_args) != 0) return bad("sample rerun failed");
    if (read_tree(work / "pred") != pred_a) return bad("sample runs differ byte-wise");

    return ok(fmt("gen-data (%zu files) and sample (%zu files) byte-identical, %.0f s",
                  gen_a.size(), pred_a.size(), now_s() - t0));
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 3 || std::strcmp(argv[1], "--criterion") != 0) {
        std::fprintf(stderr, "usage: %s --criterion N   (N in 1..10)\n", argv[0]);
        return 2;
    }
    int n = std::atoi(argv[2]);
    Outcome (*crits[])() = {crit1, crit2, crit3, crit4, crit5,
                            crit6, crit7, crit8, crit9, crit10};
    if (n < 1 || n > 10) {
        std::fprintf(stderr, "usage: %s --criterion N   (N in 1..10)\n", argv[0]);
        return 2;
    }
    Outcome o;
    try {
        o = crits[n - 1]();
    } catch (const std::exception& e) {
        o = bad(std::string("exception: ") + e.what());
    }
    std::printf("criterion %d: %s - %s\n", n, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    return o.pass ? 0 : 1;
}

#include "trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>

namespace anic {

namespace fs = std::filesystem;

TrainConfig::TrainConfig() {
    // desk shape: width equals the lossless latent width and patch is 1, so the
    // frozen random head is square (almost surely invertible) and the
    // fuse->modulation->head path can express per-token restoration exactly
    model.dit.depth = 2;
    model.dit.width = 768;
    model.dit.heads = 4;
    model.dit.patch = 1;
    model.dit.mlp_ratio = 2;
    model.dit.time_width = 256;
    model.tower.d_cond = 128;
    model.c_lat = 768;
}

void TrainConfig::validate() const {
    model.validate();
    if (!(lr >= 0)) throw invalid_arg_error("train config: lr must be >= 0");
    if (steps < 1) throw invalid_arg_error("train config: steps must be >= 1");
    if (batch < 1) throw invalid_arg_error("train config: batch must be >= 1");
    if (loss_mask != "uniform" && loss_mask != "body_weighted")
        throw invalid_arg_error("train config: loss_mask must be uniform|body_weighted");
    if (max_scenes < 0 || holdout < 0)
        throw invalid_arg_error("train config: max_scenes/holdout must be >= 0");
    if (!(soft_mask_sigma > 0)) throw invalid_arg_error("train config: soft_mask_sigma > 0");
    if (!(ema_alpha >= 0 && ema_alpha < 1))
        throw invalid_arg_error("train config: ema_alpha in [0,1)");
}

nlohmann::ordered_json to_json(const TrainConfig& cfg) {
    nlohmann::ordered_json j;
    j["model"] = to_json(cfg.model);
    j["lr"] = cfg.lr;
    j["beta1"] = cfg.beta1;
    j["beta2"] = cfg.beta2;
    j["weight_decay"] = cfg.weight_decay;
    j["adam_eps"] = cfg.adam_eps;
    j["steps"] = cfg.steps;
    j["batch"] = cfg.batch;
    j["seed"] = cfg.seed;
    j["loss_mask"] = cfg.loss_mask;
    j["no_avatar_condition"] = cfg.no_avatar_condition;
    j["no_mask_strategy"] = cfg.no_mask_strategy;
    j["max_scenes"] = cfg.max_scenes;
    j["holdout"] = cfg.holdout;
    j["soft_mask_sigma"] = cfg.soft_mask_sigma;
    j["ema_alpha"] = cfg.ema_alpha;
    j["body_weight_gain"] = cfg.body_weight_gain;
    return j;
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw invalid_arg_error("train config: expected a JSON object");
    TrainConfig cfg;
    if (j.contains("model")) cfg.model = model_config_from_json(j.at("model"), cfg.model);
    auto num = [&](const char* key, double& out) {
        if (j.contains(key)) out = j.at(key).get<double>();
    };
    auto i64 = [&](const char* key, int64_t& out) {
        if (j.contains(key)) out = j.at(key).get<int64_t>();
    };
    num("lr", cfg.lr);
    num("beta1", cfg.beta1);
    num("beta2", cfg.beta2);
    num("weight_decay", cfg.weight_decay);
    num("adam_eps", cfg.adam_eps);
    i64("steps", cfg.steps);
    i64("batch", cfg.batch);
    if (j.contains("seed")) cfg.seed = j.at("seed").get<uint64_t>();
    if (j.contains("loss_mask")) cfg.loss_mask = j.at("loss_mask").get<std::string>();
    if (j.contains("no_avatar_condition"))
        cfg.no_avatar_condition = j.at("no_avatar_condition").get<bool>();
    if (j.contains("no_mask_strategy"))
        cfg.no_mask_strategy = j.at("no_mask_strategy").get<bool>();
    i64("max_scenes", cfg.max_scenes);
    i64("holdout", cfg.holdout);
    num("soft_mask_sigma", cfg.soft_mask_sigma);
    num("ema_alpha", cfg.ema_alpha);
    num("body_weight_gain", cfg.body_weight_gain);
    cfg.validate();
    return cfg;
}

TensorF joint_with_reference(const TensorF& reference, const TensorF& clip) {
    if (clip.ndim() != 4 || reference.ndim() != 4 || reference.dim(0) != clip.dim(0) ||
        reference.dim(1) != 1 || reference.dim(2) != clip.dim(2) ||
        reference.dim(3) != clip.dim(3))
        throw invalid_arg_error("joint_with_reference: incompatible shapes");
    TensorF out = clip;
    int64_t hw = clip.dim(2) * clip.dim(3), T = clip.dim(1);
    for (int64_t c = 0; c < clip.dim(0); c++)
        std::memcpy(out.ptr() + (c * T) * hw, reference.ptr() + c * hw,
                    sizeof(float) * (size_t)hw);
    return out;
}

SampleLatents build_sample_latents(const TrainingSample& s, const TrainConfig& cfg) {
    if (s.target_video.ndim() != 4) throw invalid_arg_error("sample latents: bad target video");
    int64_t T = s.target_video.dim(1), H = s.target_video.dim(2), W = s.target_video.dim(3);

    Condition c = build_condition(s, cfg.soft_mask_sigma);
    SampleLatents out;

    TensorF joint_target = joint_with_reference(s.reference_image, s.target_video);
    // the condition occupies motion slots 1..T−1; slot 0 carries the reference
    TensorF cond_clip = cfg.no_avatar_condition ? s.background_video : s.target_video;
    TensorF joint_cond = joint_with_reference(s.reference_image, cond_clip);
    if (!cfg.no_avatar_condition) {
        int64_t hw = H * W;
        for (int64_t ch = 0; ch < 3; ch++)
            for (int64_t f = 1; f < T; f++)
                std::memcpy(joint_cond.ptr() + (ch * T + f) * hw,
                            c.video.ptr() + (ch * (T - 1) + (f - 1)) * hw,
                            sizeof(float) * (size_t)hw);
    }

    // structure clip: the reference slot gets the mesh at the reference pose
    TensorF joint_mesh = s.mesh_video;
    {
        int64_t hw = H * W;
        for (int64_t ch = 0; ch < 3; ch++)
            std::memcpy(joint_mesh.ptr() + (ch * T) * hw,
                        s.mesh_video.ptr() + (ch * T + s.ref_index) * hw,
                        sizeof(float) * (size_t)hw);
    }

    CodecConfig cc = CodecConfig::lossless();
    out.x0 = encode_video(joint_target, cc);
    out.cond = encode_video(joint_cond, cc);
    TensorF mask_video =
        cfg.no_mask_strategy ? base_i2v_mask(T, H, W) : avatar_mask(c.soft_mask);
    out.mask = pack_mask(mask_video);
    out.cond_pix = std::move(joint_cond);
    out.mesh_pix = std::move(joint_mesh);

    if (cfg.loss_mask == "body_weighted") {
        // weight 1 + gain·(1 − preservation), broadcast over latent channels
        int64_t Tl = out.mask.dim(1), h = out.mask.dim(2), w = out.mask.dim(3);
        out.weight = TensorF({out.x0.dim(0), Tl, h, w});
        int64_t plane = Tl * h * w;
        for (int64_t p = 0; p < plane; p++) {
            double pres = 0;
            for (int64_t ch = 0; ch < 4; ch++) pres += out.mask[ch * plane + p];
            float wv = (float)(1.0 + cfg.body_weight_gain * (1.0 - pres / 4.0));
            for (int64_t ch = 0; ch < out.x0.dim(0); ch++)
                out.weight[ch * plane + p] = wv;
        }
    }
    return out;
}

std::vector<TrainingSample> load_samples(const std::string& dir,
                                         std::vector<std::string>* ids_out,
                                         int64_t max_scenes) {
    fs::path root(dir);
    fs::path mpath = root / "manifest.json";
    if (!fs::exists(mpath))
        throw not_found_error("dataset manifest not found: " + mpath.string());
    Manifest man = Manifest::load(mpath.string());
    man.validate_complete();

    nlohmann::json extras;
    {
        fs::path epath = root / "extras.json";
        if (!fs::exists(epath))
            throw not_found_error("dataset extras not found: " + epath.string());
        std::ifstream in(epath);
        try {
            in >> extras;
        } catch (const nlohmann::json::exception& e) {
            throw io_error("bad extras.json: " + std::string(e.what()));
        }
    }

    std::vector<std::string> ids = man.sample_ids();
    if (max_scenes > 0 && (int64_t)ids.size() > max_scenes) ids.resize((size_t)max_scenes);

    std::vector<TrainingSample> samples((size_t)ids.size());
    for (size_t i = 0; i < ids.size(); i++) {
        const std::string& id = ids[i];
        auto load_role = [&](const std::string& role) {
            return load_tensor((root / man.find(id, role).path).string());
        };
        TrainingSample& s = samples[i];
        s.target_video = load_role("target");
        s.background_video = load_role("background");
        s.avatar_video = load_role("avatar");
        s.opacity_video = load_role("opacity");
        s.mesh_video = load_role("mesh");
        s.body_mask = load_role("bodymask");
        s.reference_image = load_role("reference");
        try {
            s.ref_index = extras.at("samples").at(id).at("ref_index").get<int64_t>();
        } catch (const nlohmann::json::exception&) {
            throw io_error("extras.json: missing ref_index for sample " + id);
        }
        if (s.ref_index < 0 || s.ref_index >= s.target_video.dim(1))
            throw contract_error("extras.json: ref_index out of range for sample " + id);
    }
    if (ids_out) *ids_out = std::move(ids);
    return samples;
}

Dataset build_dataset(const std::vector<TrainingSample>& samples,
                      const std::vector<std::string>& ids, const TrainConfig& cfg) {
    if (samples.size() != ids.size())
        throw invalid_arg_error("build_dataset: ids/samples size mismatch");
    Dataset d;
    d.ids = ids;
    d.latents.resize(samples.size());
    parallel_for((int64_t)samples.size(), [&](int64_t b, int64_t e) {
        for (int64_t i = b; i < e; i++)
            d.latents[(size_t)i] = build_sample_latents(samples[(size_t)i], cfg);
    });
    int64_t n = (int64_t)samples.size();
    if (cfg.holdout >= n)
        throw invalid_arg_error("build_dataset: holdout leaves no training scenes");
    d.train_count = n - cfg.holdout;
    return d;
}

NoisedPair add_noise(const TensorF& x0, const TensorF& eps, double t) {
    if (!x0.same_shape(eps)) throw invalid_arg_error("add_noise: shape mismatch");
    if (!(t > 0.0 && t < 1.0)) throw invalid_arg_error("add_noise: t must be in (0,1)");
    NoisedPair p;
    p.x_t = TensorF(x0.shape);
    p.v = TensorF(x0.shape);
    float tf = (float)t, of = (float)(1.0 - t);
    for (int64_t i = 0; i < x0.numel(); i++) {
        p.x_t[i] = of * x0[i] + tf * eps[i];
        p.v[i] = eps[i] - x0[i];
    }
    return p;
}

namespace {

struct AdamSlot {
    TensorF m, v;
};

void adamw_step(ParamStore& ps, const std::map<std::string, TensorF>& grads, double gscale,
                std::map<std::string, AdamSlot>& state, int64_t step1, const TrainConfig& cfg) {
    double bc1 = 1.0 - std::pow(cfg.beta1, (double)step1);
    double bc2 = 1.0 - std::pow(cfg.beta2, (double)step1);
    for (auto& [name, g] : grads) {
        ParamT<float>& par = ps.params.at(name);
        if (par.frozen) throw contract_error("adamw: gradient for frozen tensor " + name);
        AdamSlot& slot = state[name];
        if (slot.m.numel() == 0) {
            slot.m = TensorF::zeros(par.value.shape);
            slot.v = TensorF::zeros(par.value.shape);
        }
        for (int64_t i = 0; i < g.numel(); i++) {
            double gi = (double)g[i] * gscale;
            double m = cfg.beta1 * (double)slot.m[i] + (1.0 - cfg.beta1) * gi;
            double v = cfg.beta2 * (double)slot.v[i] + (1.0 - cfg.beta2) * gi * gi;
            slot.m[i] = (float)m;
            slot.v[i] = (float)v;
            double upd = (m / bc1) / (std::sqrt(v / bc2) + cfg.adam_eps);
            double p = (double)par.value[i];
            p -= cfg.lr * (upd + cfg.weight_decay * p);
            par.value[i] = (float)p;
        }
    }
}

}  // namespace

TrainResult train(const Dataset& data, const TrainConfig& cfg,
                  const std::function<void(const LossRow&)>& on_step) {
    cfg.validate();
    if (data.train_count < 1 || data.latents.empty())
        throw invalid_arg_error("train: empty training pool");
    for (const SampleLatents& sl : data.latents)
        if (sl.x0.dim(0) != cfg.model.c_lat)
            throw contract_error("train: dataset latent channels do not match the model");

    TrainResult res;
    res.params = build_params<float>(cfg.model);
    res.frozen_before = frozen_checksum(res.params);

    std::map<std::string, AdamSlot> opt_state;
    std::map<std::string, TensorF> gsum;
    double ema = 0;
    res.log.reserve((size_t)cfg.steps);

    for (int64_t step = 0; step < cfg.steps; step++) {
        Rng pick = stream(cfg.seed, "pick:" + std::to_string(step));
        gsum.clear();
        double loss_sum = 0;
        for (int64_t slot = 0; slot < cfg.batch; slot++) {
            const SampleLatents& sl =
                data.latents[(size_t)pick.uniform_int(0, data.train_count)];
            std::string tag = std::to_string(step) + ":" + std::to_string(slot);
            Rng rt = stream(cfg.seed, "t:" + tag);
            double t = 1.0 / (1.0 + std::exp(-rt.gaussian()));  // logit-normal
            TensorF eps(sl.x0.shape);
            Rng rn = stream(cfg.seed, "noise:" + tag);
            eps.fill_gaussian(rn);
            NoisedPair np = add_noise(sl.x0, eps, t);

            ag::Graph<float> g;
            ModelGraph<float> m(g, cfg.model, res.params, true, true);
            ModelInputs in;
            in.noisy = std::move(np.x_t);
            in.cond = sl.cond;
            in.mask = sl.mask;
            in.mesh_video = sl.mesh_pix;
            in.avatar_video = sl.cond_pix;
            in.t = t;
            ag::Node<float>* loss = ag::weighted_mse(
                g, m.forward(in), np.v, sl.weight.numel() ? &sl.weight : nullptr);
            g.backward_from(loss);
            loss_sum += (double)loss->val()[0];

            for (auto& [name, par] : res.params.params) {
                if (par.frozen) continue;
                const TensorF* gr = m.grad_of(name);
                if (!gr) continue;
                auto it = gsum.find(name);
                if (it == gsum.end())
                    gsum.emplace(name, *gr);
                else
                    for (int64_t i = 0; i < it->second.numel(); i++)
                        it->second[i] += (*gr)[i];
            }
        }
        double loss = loss_sum / (double)cfg.batch;
        if (!std::isfinite(loss))
            throw contract_error("train: non-finite loss at step " + std::to_string(step));
        adamw_step(res.params, gsum, 1.0 / (double)cfg.batch, opt_state, step + 1, cfg);

        ema = (step == 0) ? loss : cfg.ema_alpha * ema + (1.0 - cfg.ema_alpha) * loss;
        if (step == 0) res.step0_loss = loss;
        LossRow row{step, loss, ema};
        res.log.push_back(row);
        if (on_step) on_step(row);
    }
    res.final_ema = ema;
    res.frozen_after = frozen_checksum(res.params);
    if (res.frozen_after != res.frozen_before)
        throw contract_error("train: frozen parameters changed during training");
    return res;
}

void save_loss_csv(const std::string& path, const std::vector<LossRow>& log) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write loss log: " + path);
    out << "step,loss,ema_loss\n";
    char buf[96];
    for (const LossRow& r : log) {
        std::snprintf(buf, sizeof(buf), "%lld,%.9g,%.9g\n", (long long)r.step, r.loss, r.ema);
        out << buf;
    }
    if (!out) throw io_error("failed writing loss log: " + path);
}

}  // namespace anic

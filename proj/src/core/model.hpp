#ifndef __MODEL_HPP__
#define __MODEL_HPP__

#include <map>
#include <string>

#include <json.hpp>

#include "autograd.hpp"

namespace anic {

// diffusion transformer over the joint latent, conditioned on two 3D-conv
// feature towers (mesh structure / avatar-background appearance), a packed
// mask, and the timestep. the transformer base is randomly initialized and
// frozen; capacity for learning lives in low-rank adapters, the fusion
// projections, the towers and a null-context vector. all timestep modulation
// output weights are frozen at zero so every block is an identity map at
// initialization, and the modulation response itself is learned through
// adapters.

struct TowerConfig {
    int64_t c1 = 32, c2 = 64;  // channel schedule 3 -> c1 -> c2 -> d_cond
    int64_t d_cond = 64;
};

struct DiTConfig {
    int64_t depth = 6;
    int64_t width = 256;
    int64_t heads = 4;
    int64_t patch = 2;  // spatial patch over the latent grid; temporal patch is 1
    int64_t mlp_ratio = 4;
    int64_t time_width = 256;
    int64_t lora_rank = 8;
    double lora_alpha = 8.0;
};

struct ModelConfig {
    DiTConfig dit;
    TowerConfig tower;
    int64_t c_lat = 768;  // latent channels entering/leaving the model
    uint64_t init_seed = 0;

    void validate() const {
        if (dit.width % dit.heads != 0)
            throw invalid_arg_error("model config: heads must divide width");
        if (dit.depth < 1 || dit.patch < 1 || dit.lora_rank < 1 || dit.time_width < 2 ||
            dit.mlp_ratio < 1 || c_lat < 1 || tower.d_cond < 1)
            throw invalid_arg_error("model config: bad field");
    }
};

nlohmann::ordered_json to_json(const ModelConfig& cfg);
// fields absent from j keep their value in base
ModelConfig model_config_from_json(const nlohmann::json& j, const ModelConfig& base = {});

// ---- named parameter registry ----

template <class S>
struct ParamT {
    TensorT<S> value;
    bool frozen = false;
};

template <class S>
struct ParamStoreT {
    std::map<std::string, ParamT<S>> params;  // sorted by name

    ParamT<S>& at(const std::string& name) {
        auto it = params.find(name);
        if (it == params.end()) throw not_found_error("no parameter named " + name);
        return it->second;
    }
    const ParamT<S>& at(const std::string& name) const {
        auto it = params.find(name);
        if (it == params.end()) throw not_found_error("no parameter named " + name);
        return it->second;
    }
    bool has(const std::string& name) const { return params.count(name) != 0; }

    template <class S2>
    ParamStoreT<S2> cast() const {
        ParamStoreT<S2> out;
        for (const auto& [name, par] : params)
            out.params[name] = {par.value.template cast<S2>(), par.frozen};
        return out;
    }
};

using ParamStore = ParamStoreT<float>;

struct ParamReport {
    int64_t tensors = 0;
    int64_t total = 0;
    int64_t trainable = 0;
    int64_t frozen = 0;
};

template <class S>
ParamReport param_report(const ParamStoreT<S>& ps) {
    ParamReport r;
    for (const auto& [name, par] : ps.params) {
        r.tensors++;
        r.total += par.value.numel();
        (par.frozen ? r.frozen : r.trainable) += par.value.numel();
    }
    return r;
}

// base linears carrying low-rank adapters (delta = x·A·B, B zero-initialized).
// modulation layers are not in this set: they train directly from zero init,
// full-width, so the timestep scaling can grow fast enough to matter.
inline std::vector<std::string> adapted_layers(const ModelConfig& cfg) {
    std::vector<std::string> v;
    for (int64_t i = 0; i < cfg.dit.depth; i++) {
        std::string b = "dit.block" + std::to_string(i) + ".";
        for (const char* s : {"attn.q", "attn.k", "attn.v", "attn.o", "cross.v", "cross.o",
                              "mlp.fc1", "mlp.fc2"})
            v.push_back(b + s);
    }
    return v;
}

// per-block modulation layout: 7 chunks of model width
//   [sa_shift, sa_scale, sa_gate, ca_gate, mlp_shift, mlp_scale, mlp_gate]
inline constexpr int64_t kModChunks = 7;

// fixed multiplier on the restoration-skip gain readout. the gain must climb
// to ~1/t_min within the desk step budget; under Adam this acts as a per-layer
// step-size multiplier (same idea as the adapters' α/r) without changing the
// zero init or the function class.
inline constexpr double kSkipGainMult = 8.0;

// the skip gain is expressed in units of 1/t: the exact condition-restoring
// velocity is (x_t − cond)/t, so the readout only has to learn a bounded
// multiplier (≈ t²/(t² + noise_floor)) that varies slowly in t. without this
// basis the readout would have to reproduce the 1/t blow-up itself, and the
// timestep distribution rarely visits small t, so that region never trains.
// the floor bounds amplification below one 64-step sampler interval.
inline constexpr double kSkipTFloor = 1.0 / 64.0;

template <class S>
ParamStoreT<S> build_params(const ModelConfig& cfg) {
    cfg.validate();
    ParamStoreT<S> ps;
    auto put = [&](const std::string& name, std::vector<int64_t> shape, bool frozen, double std) {
        TensorT<S> t(shape);
        if (std > 0.0) {
            Rng r = stream(cfg.init_seed, name);
            for (int64_t i = 0; i < t.numel(); i++) t[i] = (S)(r.gaussian() * std);
        }
        ps.params[name] = {std::move(t), frozen};
    };
    const auto& d = cfg.dit;
    int64_t w = d.width, tw = d.time_width, r = d.lora_rank, p = d.patch;
    int64_t mlp_w = d.mlp_ratio * w;
    double a_std = 0.02;

    // fusion: input projection + zero-initialized additive feature projections
    put("fuse.w_in.weight", {(2 * cfg.c_lat + 4) * p * p, w}, false, 0.02);
    put("fuse.w_in.bias", {w}, false, 0.0);
    put("fuse.mesh_proj.weight", {cfg.tower.d_cond * p * p, w}, false, 0.0);
    put("fuse.mesh_proj.bias", {w}, false, 0.0);
    put("fuse.avatar_proj.weight", {cfg.tower.d_cond * p * p, w}, false, 0.0);
    put("fuse.avatar_proj.bias", {w}, false, 0.0);

    // condition towers, 3 -> c1 -> c2 -> d_cond
    for (const char* tower : {"tower.mesh", "tower.avatar"}) {
        std::string t = tower;
        int64_t cs[4] = {3, cfg.tower.c1, cfg.tower.c2, cfg.tower.d_cond};
        for (int i = 0; i < 3; i++) {
            double std = 1.0 / std::sqrt((double)(cs[i] * 27));
            put(t + ".conv" + std::to_string(i + 1) + ".weight", {cs[i + 1], cs[i], 3, 3, 3},
                false, std);
            put(t + ".conv" + std::to_string(i + 1) + ".bias", {cs[i + 1]}, false, 0.0);
        }
    }

    put("dit.time_mlp.fc1.weight", {tw, tw}, true, 1.0 / std::sqrt((double)tw));
    put("dit.time_mlp.fc2.weight", {tw, tw}, true, 1.0 / std::sqrt((double)tw));
    put("dit.nullctx", {1, w}, false, 0.02);

    double w_std = 1.0 / std::sqrt((double)w);
    for (int64_t i = 0; i < d.depth; i++) {
        std::string b = "dit.block" + std::to_string(i) + ".";
        for (const char* s : {"attn.q", "attn.k", "attn.v", "attn.o", "cross.v", "cross.o"})
            put(b + s + ".weight", {w, w}, true, w_std);
        put(b + "mlp.fc1.weight", {w, mlp_w}, true, w_std);
        put(b + "mlp.fc2.weight", {mlp_w, w}, true, 1.0 / std::sqrt((double)mlp_w));
        put(b + "mod.weight", {tw, kModChunks * w}, false, 0.0);
    }
    put("dit.final.mod.weight", {tw, 2 * w}, false, 0.0);

    // the frozen output projection is random *orthogonal* (thin QR of a
    // gaussian draw, R-diagonal signs fixed): a plain gaussian square matrix
    // is badly conditioned and its inverse — which the input projection must
    // learn for the model to emit latent content — would be near-unreachable
    put("dit.head.weight", {w, cfg.c_lat * p * p}, true, 0.0);
    {
        ParamT<S>& head = ps.params.at("dit.head.weight");
        int64_t rows = w, cols = cfg.c_lat * p * p;
        using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
        Mat gauss(rows, cols);
        Rng r = stream(cfg.init_seed, "dit.head.weight");
        for (int64_t i = 0; i < rows; i++)
            for (int64_t j = 0; j < cols; j++)
                gauss((Eigen::Index)i, (Eigen::Index)j) = (S)r.gaussian();
        bool tall = rows >= cols;
        Mat a = tall ? gauss : Mat(gauss.transpose());
        Eigen::HouseholderQR<Mat> qr(a);
        Mat q = Mat(Mat(qr.householderQ()).leftCols(std::min(rows, cols)));
        Mat rd = qr.matrixQR().template triangularView<Eigen::Upper>();
        for (Eigen::Index k = 0; k < q.cols(); k++)
            if (rd(k, k) < (S)0) q.col(k) = -q.col(k);
        Mat ortho = tall ? q : Mat(q.transpose());
        for (int64_t i = 0; i < rows; i++)
            for (int64_t j = 0; j < cols; j++)
                head.value[i * cols + j] = ortho((Eigen::Index)i, (Eigen::Index)j);
    }

    // restoration skip: the output may add a per-channel, timestep-gated copy
    // of (noisy − condition); zero-init, so it only acts once training asks
    put("dit.skip_gain.weight", {tw, cfg.c_lat * p * p}, false, 0.0);

    // adapters: A random, B zero
    for (const std::string& name : adapted_layers(cfg)) {
        const auto& base = ps.at(name + ".weight").value;
        put(name + ".lora_a", {base.dim(0), r}, false, a_std);
        put(name + ".lora_b", {r, base.dim(1)}, false, 0.0);
    }
    return ps;
}

// ---- deterministic tables ----

// sinusoidal features of 1000·t, [1, dim]
template <class S>
TensorT<S> timestep_features(double t, int64_t dim) {
    if (dim < 2 || dim % 2 != 0) throw invalid_arg_error("timestep_features: dim must be even");
    TensorT<S> out({1, dim});
    int64_t half = dim / 2;
    for (int64_t i = 0; i < half; i++) {
        double freq = std::exp(-std::log(10000.0) * (double)i / (double)half);
        double arg = 1000.0 * t * freq;
        out[i] = (S)std::sin(arg);
        out[half + i] = (S)std::cos(arg);
    }
    return out;
}

// factorized 3-axis sin/cos table over the (T, hp, wp) token grid, [N, width].
// used for attention addressing (added to q/k inputs), not the residual stream.
template <class S>
TensorT<S> pe_table(int64_t T, int64_t hp, int64_t wp, int64_t width) {
    if (width % 2 != 0) throw invalid_arg_error("pe_table: width must be even");
    int64_t cy = (width / 3) & ~int64_t(1), cx = cy, ct = width - cy - cx;
    TensorT<S> out({T * hp * wp, width});
    auto fill_axis = [&](int64_t off, int64_t chunk, auto pos_of) {
        int64_t half = chunk / 2;
        for (int64_t tok = 0; tok < T * hp * wp; tok++) {
            double pos = (double)pos_of(tok);
            for (int64_t i = 0; i < half; i++) {
                double freq = std::exp(-std::log(10000.0) * (double)i / (double)half);
                out[tok * width + off + i] = (S)std::sin(pos * freq);
                out[tok * width + off + half + i] = (S)std::cos(pos * freq);
            }
        }
    };
    fill_axis(0, ct, [&](int64_t tok) { return tok / (hp * wp); });
    fill_axis(ct, cy, [&](int64_t tok) { return (tok / wp) % hp; });
    fill_axis(ct + cy, cx, [&](int64_t tok) { return tok % wp; });
    return out;
}

// ---- forward graph ----

template <class S>
struct ModelInputsT {
    TensorT<S> noisy;         // [c_lat, T_lat, h, w]
    TensorT<S> cond;          // [c_lat, T_lat, h, w]
    TensorT<S> mask;          // [4, T_lat, h, w]
    TensorT<S> mesh_video;    // [3, T_joint, 8h, 8w]
    TensorT<S> avatar_video;  // [3, T_joint, 8h, 8w]
    double t = 0.5;
};

using ModelInputs = ModelInputsT<float>;

template <class S>
void check_finite(const TensorT<S>& t, const char* what) {
    for (int64_t i = 0; i < t.numel(); i++)
        if (!std::isfinite((double)t[i]))
            throw contract_error(std::string(what) + ": non-finite values");
}

// builds the forward pass on a Graph. one instance per graph; parameter leaf
// nodes are shared across repeated forward() calls so batched losses
// accumulate grads into a single node per tensor. inputs are borrowed and
// must outlive graph use.
template <class S>
class ModelGraph {
public:
    ModelGraph(ag::Graph<S>& g, const ModelConfig& cfg, const ParamStoreT<S>& params,
               bool use_adapters, bool train_mode)
        : g_(g), cfg_(cfg), ps_(params), adapters_(use_adapters), train_(train_mode) {
        cfg.validate();
    }

    // test hook: overrides the attention position table (row-permuted checks)
    void set_pe_override(const TensorT<S>* pe) { pe_override_ = pe; }

    ag::Node<S>* param_node(const std::string& name) {
        auto it = nodes_.find(name);
        if (it != nodes_.end()) return it->second;
        const ParamT<S>& par = ps_.at(name);
        ag::Node<S>* n = g_.leaf_ref(&par.value, train_ && !par.frozen);
        nodes_.emplace(name, n);
        return n;
    }

    // grad of a trainable tensor after backward; null if untouched
    const TensorT<S>* grad_of(const std::string& name) {
        auto it = nodes_.find(name);
        if (it == nodes_.end() || !it->second->grad_live) return nullptr;
        return &it->second->grad;
    }

    ag::Node<S>* forward(const ModelInputsT<S>& in) {
        const auto& d = cfg_.dit;
        int64_t c = cfg_.c_lat, p = d.patch;
        if (in.noisy.ndim() != 4 || in.noisy.dim(0) != c)
            throw invalid_arg_error("forward: noisy latent must be [c_lat,T,h,w]");
        if (!in.cond.same_shape(in.noisy))
            throw invalid_arg_error("forward: condition latent shape mismatch");
        int64_t Tl = in.noisy.dim(1), h = in.noisy.dim(2), w = in.noisy.dim(3);
        if (in.mask.ndim() != 4 || in.mask.dim(0) != 4 || in.mask.dim(1) != Tl ||
            in.mask.dim(2) != h || in.mask.dim(3) != w)
            throw invalid_arg_error("forward: mask latent shape mismatch");
        int64_t Tj = 4 * (Tl - 1) + 1;
        if (in.mesh_video.ndim() != 4 || in.mesh_video.dim(0) != 3 ||
            in.mesh_video.dim(1) != Tj || in.mesh_video.dim(2) != 8 * h ||
            in.mesh_video.dim(3) != 8 * w)
            throw invalid_arg_error("forward: mesh video must be [3,4(T−1)+1,8h,8w]");
        if (!in.avatar_video.same_shape(in.mesh_video))
            throw invalid_arg_error("forward: avatar video shape mismatch");
        if (h % p != 0 || w % p != 0)
            throw invalid_arg_error("forward: latent grid not divisible by patch");
        if (!(in.t >= 0.0 && in.t <= 1.0)) throw invalid_arg_error("forward: t outside [0,1]");

        // condition towers onto the latent grid
        ag::Node<S>* mesh_feat = tower("tower.mesh", g_.leaf_ref(&in.mesh_video, false));
        ag::Node<S>* av_feat = tower("tower.avatar", g_.leaf_ref(&in.avatar_video, false));
        for (ag::Node<S>* f : {mesh_feat, av_feat})
            if (f->dim(0) != cfg_.tower.d_cond || f->dim(1) != Tl || f->dim(2) != h ||
                f->dim(3) != w)
                throw contract_error("tower output grid misaligned with latent grid");

        // fuse: channel-concat [noisy, cond, mask] -> tokens -> width, then
        // add the (zero-initialized) tower feature projections token-wise
        TensorT<S> in_grid({2 * c + 4, Tl, h, w});
        size_t plane = (size_t)(Tl * h * w);
        std::copy_n(in.noisy.ptr(), c * plane, in_grid.ptr());
        std::copy_n(in.cond.ptr(), c * plane, in_grid.ptr() + c * plane);
        std::copy_n(in.mask.ptr(), 4 * plane, in_grid.ptr() + 2 * c * plane);
        ag::Node<S>* tok0 = g_.leaf(ag::patchify_tensor(in_grid, p));
        ag::Node<S>* x = ag::linear(g_, tok0, param_node("fuse.w_in.weight"),
                                    param_node("fuse.w_in.bias"));
        x = ag::add(g_, x,
                    ag::linear(g_, ag::patchify(g_, mesh_feat, p),
                               param_node("fuse.mesh_proj.weight"),
                               param_node("fuse.mesh_proj.bias")));
        x = ag::add(g_, x,
                    ag::linear(g_, ag::patchify(g_, av_feat, p),
                               param_node("fuse.avatar_proj.weight"),
                               param_node("fuse.avatar_proj.bias")));

        TensorT<S> pe_local;
        const TensorT<S>* pe = pe_override_;
        if (!pe) {
            pe_local = pe_table<S>(Tl, h / p, w / p, d.width);
            pe = &pe_local;
        }
        if (pe->numel() != x->numel()) throw invalid_arg_error("forward: bad position table");

        // timestep pathway (frozen MLP over sinusoidal features)
        ag::Node<S>* tf = g_.leaf(timestep_features<S>(in.t, d.time_width));
        ag::Node<S>* e = ag::linear(g_, tf, param_node("dit.time_mlp.fc1.weight"));
        e = ag::silu(g_, e);
        e = ag::linear(g_, e, param_node("dit.time_mlp.fc2.weight"));
        ag::Node<S>* esil = ag::silu(g_, e);

        for (int64_t i = 0; i < d.depth; i++) x = block(i, x, esil, *pe);

        // final modulation (no normalization: keeps the head affine in the
        // residual stream so condition-restoring velocities stay representable)
        ag::Node<S>* m2 = ag::linear(g_, esil, param_node("dit.final.mod.weight"));
        ag::Node<S>* sh_f = ag::slice_cols(g_, m2, 0, d.width);
        ag::Node<S>* sc_f = ag::slice_cols(g_, m2, d.width, d.width);
        ag::Node<S>* y = ag::modulate_rows(g_, x, sc_f, sh_f);
        ag::Node<S>* out_tok = ag::linear(g_, y, param_node("dit.head.weight"));

        // timestep-gated restoration skip: lets the velocity lean on the
        // condition directly (out += gain(t) ⊙ (noisy − cond) per channel)
        TensorT<S> skip_grid({c, Tl, h, w});
        for (int64_t i = 0; i < skip_grid.numel(); i++)
            skip_grid[i] = in.noisy[i] - in.cond[i];
        ag::Node<S>* skip_tok = g_.leaf(ag::patchify_tensor(skip_grid, p));
        const double skip_basis = kSkipGainMult / std::max(in.t, kSkipTFloor);
        ag::Node<S>* sg = ag::scale(
            g_, ag::linear(g_, esil, param_node("dit.skip_gain.weight")), (S)skip_basis);
        out_tok = ag::gate_add(g_, out_tok, skip_tok, sg);

        ag::Node<S>* v = ag::unpatchify(g_, out_tok, c, Tl, h, w, p);
        check_finite(v->val(), "model forward");
        return v;
    }

private:
    ag::Node<S>* lora_linear(ag::Node<S>* x, const std::string& base) {
        ag::Node<S>* out = ag::linear(g_, x, param_node(base + ".weight"));
        if (adapters_) {
            ag::Node<S>* low = ag::linear(g_, x, param_node(base + ".lora_a"));
            ag::Node<S>* delta = ag::linear(g_, low, param_node(base + ".lora_b"));
            S s = (S)(cfg_.dit.lora_alpha / (double)cfg_.dit.lora_rank);
            out = ag::add(g_, out, ag::scale(g_, delta, s));
        }
        return out;
    }

    ag::Node<S>* tower(const std::string& prefix, ag::Node<S>* video) {
        ag::Node<S>* h = ag::conv3d(g_, video, param_node(prefix + ".conv1.weight"),
                                    param_node(prefix + ".conv1.bias"), 1, 2, 2);
        h = ag::silu(g_, h);
        h = ag::conv3d(g_, h, param_node(prefix + ".conv2.weight"),
                       param_node(prefix + ".conv2.bias"), 2, 2, 2);
        h = ag::silu(g_, h);
        return ag::conv3d(g_, h, param_node(prefix + ".conv3.weight"),
                          param_node(prefix + ".conv3.bias"), 2, 2, 2);
    }

    ag::Node<S>* block(int64_t i, ag::Node<S>* x, ag::Node<S>* esil, const TensorT<S>& pe) {
        const auto& d = cfg_.dit;
        std::string b = "dit.block" + std::to_string(i) + ".";
        ag::Node<S>* m = ag::linear(g_, esil, param_node(b + "mod.weight"));
        auto chunk = [&](int64_t idx) { return ag::slice_cols(g_, m, idx * d.width, d.width); };
        ag::Node<S>* sa_shift = chunk(0);
        ag::Node<S>* sa_scale = chunk(1);
        ag::Node<S>* sa_gate = chunk(2);
        ag::Node<S>* ca_gate = chunk(3);
        ag::Node<S>* mlp_shift = chunk(4);
        ag::Node<S>* mlp_scale = chunk(5);
        ag::Node<S>* mlp_gate = chunk(6);

        // self-attention; the position table feeds only q/k (addressing), so
        // the value path carries pure content
        ag::Node<S>* xm = ag::modulate_rows(g_, ag::layernorm(g_, x), sa_scale, sa_shift);
        ag::Node<S>* qin = ag::add_const(g_, xm, pe);
        ag::Node<S>* q = lora_linear(qin, b + "attn.q");
        ag::Node<S>* k = lora_linear(qin, b + "attn.k");
        ag::Node<S>* v = lora_linear(xm, b + "attn.v");
        ag::Node<S>* att = ag::attention(g_, q, k, v, d.heads);
        x = ag::gate_add(g_, x, lora_linear(att, b + "attn.o"), sa_gate);

        // cross-attention to the single null-context token: softmax over one
        // key is identically 1, so the read reduces to o(v(ctx)) broadcast
        ag::Node<S>* cv = lora_linear(param_node("dit.nullctx"), b + "cross.v");
        ag::Node<S>* co = lora_linear(cv, b + "cross.o");
        x = ag::gate_add_vec(g_, x, co, ca_gate);

        ag::Node<S>* hm = ag::modulate_rows(g_, ag::layernorm(g_, x), mlp_scale, mlp_shift);
        ag::Node<S>* hh = lora_linear(hm, b + "mlp.fc1");
        hh = ag::silu(g_, hh);
        hh = lora_linear(hh, b + "mlp.fc2");
        return ag::gate_add(g_, x, hh, mlp_gate);
    }

    ag::Graph<S>& g_;
    const ModelConfig& cfg_;
    const ParamStoreT<S>& ps_;
    bool adapters_;
    bool train_;
    const TensorT<S>* pe_override_ = nullptr;
    std::map<std::string, ag::Node<S>*> nodes_;
};

// single inference forward (fresh graph per call)
template <class S>
TensorT<S> model_forward(const ParamStoreT<S>& params, const ModelConfig& cfg,
                         const ModelInputsT<S>& in, bool use_adapters) {
    ag::Graph<S> g;
    ModelGraph<S> m(g, cfg, params, use_adapters, false);
    return m.forward(in)->val();
}

// one tower on its own: [3,T,H,W] pixel video -> [d_cond, 1+(T−1)/4, H/8, W/8]
template <class S>
TensorT<S> tower_features(const ParamStoreT<S>& ps, const std::string& prefix,
                          const TensorT<S>& video) {
    if (video.ndim() != 4 || video.dim(0) != 3)
        throw invalid_arg_error("tower_features: expects [3,T,H,W]");
    ag::Graph<S> g;
    auto conv = [&](ag::Node<S>* x, int layer, int64_t st) {
        std::string b = prefix + ".conv" + std::to_string(layer);
        return ag::conv3d(g, x, g.leaf_ref(&ps.at(b + ".weight").value, false),
                          g.leaf_ref(&ps.at(b + ".bias").value, false), st, 2, 2);
    };
    ag::Node<S>* h = ag::silu(g, conv(g.leaf_ref(&video, false), 1, 1));
    h = ag::silu(g, conv(h, 2, 2));
    return conv(h, 3, 2)->val();
}

// ---- persistence / diagnostics (float store) ----

// checkpoint layout: dir/index.json + dir/params/<name>.anict
void save_checkpoint(const std::string& dir, const ParamStore& ps, const ModelConfig& cfg,
                     const nlohmann::ordered_json& meta);
ParamStore load_checkpoint(const std::string& dir, ModelConfig& cfg_out,
                           nlohmann::json* meta_out = nullptr);

// folds adapters into the base weights (lora_b left untouched in the copy);
// forward(merged, use_adapters=false) ≈ forward(original, use_adapters=true)
ParamStore lora_merge(const ParamStore& ps, const ModelConfig& cfg);

// order-stable digest of every frozen tensor's bytes
uint64_t frozen_checksum(const ParamStore& ps);

}  // namespace anic

#endif  // __MODEL_HPP__

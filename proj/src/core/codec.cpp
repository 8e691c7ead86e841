#include "codec.hpp"

#include <cmath>

#include "common.hpp"

namespace anic {

namespace {

constexpr int64_t kTS = CodecConfig::temporal_stride;   // 4
constexpr int64_t kSS = CodecConfig::spatial_stride;    // 8

// latent channel for (rgb c, temporal slot j, dy, dx)
int64_t shuffle_channel(int64_t c, int64_t j, int64_t dy, int64_t dx) {
    return ((c * kTS + j) * kSS + dy) * kSS + dx;
}

// padded frame tp reads pixel frame max(0, tp−3)
int64_t padded_src(int64_t tp) { return std::max<int64_t>(0, tp - (kTS - 1)); }

struct Conv3dSpec {
    TensorF w;  // [Cout, Cin, kt, kh, kw]
    TensorF b;  // [Cout]
    int64_t st, sh, sw;
    int64_t pad_front;  // temporal replicate padding
};

// direct convolution is fine here: the trainable codec exists for contract parity, not speed
TensorF conv3d_plain(const TensorF& x, const Conv3dSpec& cv) {
    int64_t C = x.dim(0), T = x.dim(1), H = x.dim(2), W = x.dim(3);
    int64_t Co = cv.w.dim(0), kt = cv.w.dim(2), kh = cv.w.dim(3), kw = cv.w.dim(4);
    int64_t To = (T + cv.pad_front - kt) / cv.st + 1;
    int64_t Ho = (H - kh) / cv.sh + 1;
    int64_t Wo = (W - kw) / cv.sw + 1;
    TensorF out({Co, To, Ho, Wo});
    for (int64_t o = 0; o < Co; o++)
        for (int64_t t = 0; t < To; t++)
            for (int64_t y = 0; y < Ho; y++)
                for (int64_t x2 = 0; x2 < Wo; x2++) {
                    double acc = (double)cv.b[o];
                    for (int64_t c = 0; c < C; c++)
                        for (int64_t it = 0; it < kt; it++) {
                            int64_t ts = std::max<int64_t>(0, t * cv.st + it - cv.pad_front);
                            for (int64_t iy = 0; iy < kh; iy++)
                                for (int64_t ix = 0; ix < kw; ix++)
                                    acc += (double)cv.w.at(o, c, it, iy, ix) *
                                           (double)x.at(c, ts, y * cv.sh + iy, x2 * cv.sw + ix);
                        }
                    out.at(o, t, y, x2) = (float)acc;
                }
    return out;
}

Conv3dSpec make_conv(uint64_t seed, const char* tag, int64_t co, int64_t ci,
                     int64_t kt, int64_t kh, int64_t kw,
                     int64_t st, int64_t sh, int64_t sw, int64_t pad_front) {
    Conv3dSpec cv;
    cv.w = TensorF({co, ci, kt, kh, kw});
    cv.b = TensorF({co});
    Rng rng = stream(seed, tag);
    double std_dev = 1.0 / std::sqrt((double)(ci * kt * kh * kw));
    cv.w.fill_gaussian(rng, std_dev);
    cv.b.fill_gaussian(rng, 0.01);
    cv.st = st; cv.sh = sh; cv.sw = sw; cv.pad_front = pad_front;
    return cv;
}

float silu(float v) { return v / (1.0f + std::exp(-v)); }

void check_video_shape(const TensorF& v) {
    if (v.ndim() != 4 || v.dim(0) != 3) throw invalid_arg_error("codec: want [3,T,H,W] video");
    latent_shape(v.dim(1), v.dim(2), v.dim(3));
}

}  // namespace

std::array<int64_t, 3> latent_shape(int64_t T, int64_t H, int64_t W) {
    if (T < 1 || (T - 1) % kTS != 0)
        throw invalid_arg_error("latent_shape: T must satisfy T = 1 (mod 4)");
    if (H < kSS || W < kSS || H % kSS != 0 || W % kSS != 0)
        throw invalid_arg_error("latent_shape: H and W must be multiples of 8");
    return {1 + (T - 1) / kTS, H / kSS, W / kSS};
}

TensorF encode_video(const TensorF& video, const CodecConfig& cfg) {
    check_video_shape(video);
    for (int64_t i = 0; i < video.numel(); i++)
        if (video[i] < 0.0f || video[i] > 1.0f)
            throw invalid_arg_error("encode_video: values must lie in [0,1]");
    auto [Tl, h, w] = latent_shape(video.dim(1), video.dim(2), video.dim(3));

    if (cfg.mode == CodecMode::lossless_shuffle) {
        if (cfg.latent_channels != 768)
            throw invalid_arg_error("encode_video: lossless mode is 768 channels");
        TensorF lat({768, Tl, h, w});
        parallel_for(Tl, [&](int64_t gb, int64_t ge) {
            for (int64_t g = gb; g < ge; g++)
                for (int64_t j = 0; j < kTS; j++) {
                    int64_t src = padded_src(g * kTS + j);
                    for (int64_t c = 0; c < 3; c++)
                        for (int64_t y = 0; y < h; y++)
                            for (int64_t dy = 0; dy < kSS; dy++)
                                for (int64_t x = 0; x < w; x++)
                                    for (int64_t dx = 0; dx < kSS; dx++)
                                        lat.at(shuffle_channel(c, j, dy, dx), g, y, x) =
                                            video.at(c, src, y * kSS + dy, x * kSS + dx);
                }
        });
        return lat;
    }

    auto c1 = make_conv(cfg.seed, "codec.enc1", 64, 3, kTS, kSS, kSS, kTS, kSS, kSS, kTS - 1);
    auto c2 = make_conv(cfg.seed, "codec.enc2", cfg.latent_channels, 64, 1, 1, 1, 1, 1, 1, 0);
    TensorF hfeat = conv3d_plain(video, c1);
    for (int64_t i = 0; i < hfeat.numel(); i++) hfeat[i] = silu(hfeat[i]);
    return conv3d_plain(hfeat, c2);
}

TensorF decode_video(const TensorF& latent, const CodecConfig& cfg) {
    if (latent.ndim() != 4) throw invalid_arg_error("decode_video: want [c,T_lat,h,w]");
    int64_t Tl = latent.dim(1), h = latent.dim(2), w = latent.dim(3);
    if (Tl < 1 || h < 1 || w < 1) throw invalid_arg_error("decode_video: bad dims");
    int64_t T = 1 + (Tl - 1) * kTS, H = h * kSS, W = w * kSS;

    auto emit = [&](const TensorF& shuffled) {  // [768, Tl, h, w] -> [3,T,H,W]
        TensorF out({3, T, H, W});
        parallel_for(Tl, [&](int64_t gb, int64_t ge) {
            for (int64_t g = gb; g < ge; g++)
                for (int64_t j = 0; j < kTS; j++) {
                    int64_t tp = g * kTS + j;
                    if (tp < kTS - 1) continue;  // replicated pad frames are dropped
                    int64_t dst = tp - (kTS - 1);
                    for (int64_t c = 0; c < 3; c++)
                        for (int64_t y = 0; y < h; y++)
                            for (int64_t dy = 0; dy < kSS; dy++)
                                for (int64_t x = 0; x < w; x++)
                                    for (int64_t dx = 0; dx < kSS; dx++)
                                        out.at(c, dst, y * kSS + dy, x * kSS + dx) =
                                            shuffled.at(shuffle_channel(c, j, dy, dx), g, y, x);
                }
        });
        return out;
    };

    if (cfg.mode == CodecMode::lossless_shuffle) {
        if (latent.dim(0) != 768) throw invalid_arg_error("decode_video: lossless wants 768 channels");
        return emit(latent);
    }

    if (latent.dim(0) != cfg.latent_channels)
        throw invalid_arg_error("decode_video: channel count mismatch");
    auto d1 = make_conv(cfg.seed, "codec.dec1", 64, cfg.latent_channels, 1, 1, 1, 1, 1, 1, 0);
    auto d2 = make_conv(cfg.seed, "codec.dec2", 768, 64, 1, 1, 1, 1, 1, 1, 0);
    TensorF hfeat = conv3d_plain(latent, d1);
    for (int64_t i = 0; i < hfeat.numel(); i++) hfeat[i] = silu(hfeat[i]);
    TensorF shuffled = conv3d_plain(hfeat, d2);
    TensorF out = emit(shuffled);
    for (int64_t i = 0; i < out.numel(); i++) out[i] = std::clamp(out[i], 0.0f, 1.0f);
    return out;
}

}  // namespace anic

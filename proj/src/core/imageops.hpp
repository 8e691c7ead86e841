#ifndef __IMAGEOPS_HPP__
#define __IMAGEOPS_HPP__

#include <vector>
#include <cmath>
#include <cstring>

#include "tensor.hpp"

namespace anic {

// truncated gaussian density, normalized to sum 1. index i in [-radius, radius]
// maps to kernel[i + radius].
inline std::vector<double> gaussian_kernel_1d(double sigma, int radius) {
    if (sigma <= 0.0) throw invalid_arg_error("gaussian_kernel_1d: sigma must be > 0");
    if (radius < 1) throw invalid_arg_error("gaussian_kernel_1d: radius must be >= 1");
    std::vector<double> k(2 * (size_t)radius + 1);
    double z = 0.0;
    for (int i = -radius; i <= radius; i++) {
        double v = std::exp(-0.5 * (double)i * (double)i / (sigma * sigma)) /
                   (std::sqrt(2.0 * M_PI) * sigma);
        k[(size_t)(i + radius)] = v;
        z += v;
    }
    for (auto& v : k) v /= z;
    return k;
}

inline int blur_radius_for(double sigma) { return (int)std::ceil(3.0 * sigma); }

// reflect-101: ... 2 1 | 0 1 2 ... n-1 | n-2 n-3 ...
inline int64_t reflect_index(int64_t i, int64_t n) {
    if (n == 1) return 0;
    while (i < 0 || i >= n) {
        if (i < 0) i = -i;
        if (i >= n) i = 2 * n - 2 - i;
    }
    return i;
}

// separable 2D blur of one H×W plane, double accumulation
inline void blur_plane(const float* in, float* out, int64_t H, int64_t W,
                       const std::vector<double>& kernel) {
    int radius = (int)(kernel.size() / 2);
    std::vector<double> tmp((size_t)(H * W));
    for (int64_t y = 0; y < H; y++)
        for (int64_t x = 0; x < W; x++) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; i++)
                acc += kernel[(size_t)(i + radius)] * (double)in[y * W + reflect_index(x + i, W)];
            tmp[(size_t)(y * W + x)] = acc;
        }
    for (int64_t y = 0; y < H; y++)
        for (int64_t x = 0; x < W; x++) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; i++)
                acc += kernel[(size_t)(i + radius)] * tmp[(size_t)(reflect_index(y + i, H) * W + x)];
            out[y * W + x] = (float)acc;
        }
}

// per-frame, per-channel blur of a [C,T,H,W] video
inline TensorF blur_video(const TensorF& v, double sigma, int radius) {
    if (v.ndim() != 4) throw invalid_arg_error("blur_video: want [C,T,H,W]");
    auto kernel = gaussian_kernel_1d(sigma, radius);
    TensorF out(v.shape);
    int64_t C = v.dim(0), T = v.dim(1), H = v.dim(2), W = v.dim(3);
    for (int64_t c = 0; c < C; c++)
        for (int64_t t = 0; t < T; t++) {
            int64_t off = (c * T + t) * H * W;
            blur_plane(v.ptr() + off, out.ptr() + off, H, W, kernel);
        }
    return out;
}

// mean over non-overlapping s×s blocks
inline void area_downsample_plane(const float* in, float* out, int64_t H, int64_t W, int s) {
    int64_t h = H / s, w = W / s;
    for (int64_t y = 0; y < h; y++)
        for (int64_t x = 0; x < w; x++) {
            double acc = 0.0;
            for (int dy = 0; dy < s; dy++)
                for (int dx = 0; dx < s; dx++)
                    acc += (double)in[(y * s + dy) * W + (x * s + dx)];
            out[y * w + x] = (float)(acc / (double)(s * s));
        }
}

inline float quantize_level(float v, int levels) {
    float g = (float)(levels - 1);
    return std::round(v * g) / g;
}

// frames [t0, t0+count) of a [C,T,H,W] video
inline TensorF slice_frames(const TensorF& v, int64_t t0, int64_t count) {
    if (v.ndim() != 4) throw invalid_arg_error("slice_frames: want [C,T,H,W]");
    if (t0 < 0 || count < 0 || t0 + count > v.dim(1))
        throw invalid_arg_error("slice_frames: range out of bounds");
    int64_t C = v.dim(0), T = v.dim(1), H = v.dim(2), W = v.dim(3);
    TensorF out({C, count, H, W});
    for (int64_t c = 0; c < C; c++)
        for (int64_t t = 0; t < count; t++)
            std::memcpy(out.ptr() + out.index(c, t, 0, 0),
                        v.ptr() + v.index(c, t0 + t, 0, 0), sizeof(float) * (size_t)(H * W));
    (void)T;
    return out;
}

inline TensorF concat_frames(const TensorF& a, const TensorF& b) {
    if (a.ndim() != 4 || b.ndim() != 4 || a.dim(0) != b.dim(0) || a.dim(2) != b.dim(2) ||
        a.dim(3) != b.dim(3))
        throw invalid_arg_error("concat_frames: incompatible shapes");
    int64_t C = a.dim(0), Ta = a.dim(1), Tb = b.dim(1), H = a.dim(2), W = a.dim(3);
    TensorF out({C, Ta + Tb, H, W});
    for (int64_t c = 0; c < C; c++) {
        for (int64_t t = 0; t < Ta; t++)
            std::memcpy(out.ptr() + out.index(c, t, 0, 0), a.ptr() + a.index(c, t, 0, 0),
                        sizeof(float) * (size_t)(H * W));
        for (int64_t t = 0; t < Tb; t++)
            std::memcpy(out.ptr() + out.index(c, Ta + t, 0, 0), b.ptr() + b.index(c, t, 0, 0),
                        sizeof(float) * (size_t)(H * W));
    }
    return out;
}

}  // namespace anic

#endif  // __IMAGEOPS_HPP__

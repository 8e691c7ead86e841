#include "maskpack.hpp"

#include "common.hpp"
#include "imageops.hpp"
#include "codec.hpp"

namespace anic {

TensorF base_i2v_mask(int64_t t_joint, int64_t H, int64_t W) {
    if (t_joint < 1 || H < 1 || W < 1) throw invalid_arg_error("base_i2v_mask: bad dims");
    TensorF m({1, t_joint, H, W});
    std::fill(m.ptr(), m.ptr() + H * W, 1.0f);
    return m;
}

TensorF avatar_mask(const TensorF& soft_body_mask) {
    if (soft_body_mask.ndim() != 4 || soft_body_mask.dim(0) != 1)
        throw invalid_arg_error("avatar_mask: want [1,T,H,W]");
    for (int64_t i = 0; i < soft_body_mask.numel(); i++)
        if (soft_body_mask[i] < 0.0f || soft_body_mask[i] > 1.0f)
            throw invalid_arg_error("avatar_mask: values must lie in [0,1]");
    int64_t Tm = soft_body_mask.dim(1), H = soft_body_mask.dim(2), W = soft_body_mask.dim(3);
    TensorF m({1, Tm + 1, H, W});
    std::fill(m.ptr(), m.ptr() + H * W, 1.0f);
    for (int64_t t = 0; t < Tm; t++)
        for (int64_t i = 0; i < H * W; i++)
            m[(t + 1) * H * W + i] = 1.0f - soft_body_mask[t * H * W + i];
    return m;
}

TensorF pack_mask(const TensorF& mask_video) {
    if (mask_video.ndim() != 4 || mask_video.dim(0) != 1)
        throw invalid_arg_error("pack_mask: want [1,T_joint,H,W]");
    int64_t Tj = mask_video.dim(1), H = mask_video.dim(2), W = mask_video.dim(3);
    auto [Tl, h, w] = latent_shape(Tj, H, W);

    // downsampled frames, then padded index tp reads frame max(0, tp-3)
    TensorF down({Tj, h, w});
    for (int64_t t = 0; t < Tj; t++)
        area_downsample_plane(mask_video.ptr() + t * H * W, down.ptr() + t * h * w, H, W, 8);

    TensorF out({4, Tl, h, w});
    for (int64_t ch = 0; ch < 4; ch++)
        for (int64_t g = 0; g < Tl; g++) {
            int64_t src = std::max<int64_t>(0, g * 4 + ch - 3);
            std::memcpy(out.ptr() + out.index(ch, g, 0, 0), down.ptr() + src * h * w,
                        sizeof(float) * (size_t)(h * w));
        }
    return out;
}

TensorF unpack_mask(const TensorF& mask_latent) {
    if (mask_latent.ndim() != 4 || mask_latent.dim(0) != 4)
        throw invalid_arg_error("unpack_mask: want [4,T_lat,h,w]");
    int64_t Tl = mask_latent.dim(1), h = mask_latent.dim(2), w = mask_latent.dim(3);
    int64_t Tj = 1 + (Tl - 1) * 4;
    TensorF out({1, Tj, h * 8, w * 8});
    for (int64_t t = 0; t < Tj; t++) {
        int64_t tp = t + 3;  // skip the prepended copies
        int64_t ch = tp % 4, g = tp / 4;
        for (int64_t y = 0; y < h * 8; y++)
            for (int64_t x = 0; x < w * 8; x++)
                out.at(0, t, y, x) = mask_latent.at(ch, g, y / 8, x / 8);
    }
    return out;
}

}  // namespace anic

#include "composite.hpp"

namespace anic {

TensorF alpha_blend(const TensorF& avatar, const TensorF& opacity, const TensorF& background) {
    if (avatar.ndim() != 4 || opacity.ndim() != 4 || background.ndim() != 4)
        throw invalid_arg_error("alpha_blend: want [C,T,H,W] inputs");
    if (!avatar.same_shape(background)) throw invalid_arg_error("alpha_blend: avatar/background shape mismatch");
    if (opacity.dim(0) != 1 || opacity.dim(1) != avatar.dim(1) ||
        opacity.dim(2) != avatar.dim(2) || opacity.dim(3) != avatar.dim(3))
        throw invalid_arg_error("alpha_blend: opacity shape mismatch");
    for (const TensorF* t : {&avatar, &opacity, &background})
        for (int64_t i = 0; i < t->numel(); i++)
            if ((*t)[i] < 0.0f || (*t)[i] > 1.0f)
                throw invalid_arg_error("alpha_blend: values must lie in [0,1]");

    int64_t C = avatar.dim(0), T = avatar.dim(1), HW = avatar.dim(2) * avatar.dim(3);
    TensorF out(avatar.shape);
    for (int64_t c = 0; c < C; c++)
        for (int64_t t = 0; t < T; t++) {
            const float* a = avatar.ptr() + (c * T + t) * HW;
            const float* o = opacity.ptr() + t * HW;
            const float* b = background.ptr() + (c * T + t) * HW;
            float* y = out.ptr() + (c * T + t) * HW;
            for (int64_t i = 0; i < HW; i++) y[i] = o[i] * a[i] + (1.0f - o[i]) * b[i];
        }
    return out;
}

TensorF soften_mask(const TensorF& mask, double sigma) {
    if (mask.ndim() != 4 || mask.dim(0) != 1)
        throw invalid_arg_error("soften_mask: want [1,T,H,W]");
    if (sigma <= 0.0) throw invalid_arg_error("soften_mask: sigma must be > 0");
    for (int64_t i = 0; i < mask.numel(); i++)
        if (mask[i] != 0.0f && mask[i] != 1.0f)
            throw invalid_arg_error("soften_mask: input must be binary");
    return blur_video(mask, sigma, blur_radius_for(sigma));
}

Condition build_condition(const TrainingSample& sample, double sigma) {
    int64_t T = sample.target_video.dim(1);
    if (T < 2) throw invalid_arg_error("build_condition: need at least one motion frame");
    Condition out;
    out.video = alpha_blend(slice_frames(sample.avatar_video, 1, T - 1),
                            slice_frames(sample.opacity_video, 1, T - 1),
                            slice_frames(sample.background_video, 1, T - 1));
    out.soft_mask = soften_mask(slice_frames(sample.body_mask, 1, T - 1), sigma);
    return out;
}

}  // namespace anic

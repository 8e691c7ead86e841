#include "sampler.hpp"

#include <algorithm>
#include <cmath>

namespace anic {

TensorF euler_step(const TensorF& x, const TensorF& v, double dt) {
    if (!x.same_shape(v)) throw invalid_arg_error("euler_step: shape mismatch");
    TensorF out(x.shape);
    float d = (float)dt;
    for (int64_t i = 0; i < x.numel(); i++) out[i] = x[i] - d * v[i];
    return out;
}

TensorF euler_integrate(const TensorF& x1,
                        const std::function<TensorF(const TensorF&, double)>& velocity,
                        int64_t steps) {
    if (steps < 1) throw invalid_arg_error("euler_integrate: steps must be >= 1");
    TensorF x = x1;
    double dt = 1.0 / (double)steps;
    for (int64_t k = 0; k < steps; k++) {
        double t = 1.0 - (double)k * dt;
        TensorF v = velocity(x, t);
        check_finite(v, "sampler velocity");
        x = euler_step(x, v, dt);
    }
    check_finite(x, "sampler state");
    return x;
}

TensorF sample_video(const ParamStore& ps, const ModelConfig& cfg, const SampleLatents& sl,
                     int64_t steps, uint64_t seed) {
    TensorF x1(sl.x0.shape.empty() ? sl.cond.shape : sl.x0.shape);
    Rng rn = stream(seed, "sample:init");
    x1.fill_gaussian(rn);

    auto velocity = [&](const TensorF& x, double t) {
        ModelInputs in;
        in.noisy = x;
        in.cond = sl.cond;
        in.mask = sl.mask;
        in.mesh_video = sl.mesh_pix;
        in.avatar_video = sl.cond_pix;
        // the model is only queried strictly inside (0,1)
        in.t = std::min(std::max(t, 1e-4), 1.0 - 1e-4);
        return model_forward(ps, cfg, in, true);
    };
    TensorF x0 = euler_integrate(x1, velocity, steps);
    TensorF video = decode_video(x0, CodecConfig::lossless());
    for (int64_t i = 0; i < video.numel(); i++)
        video[i] = std::min(1.0f, std::max(0.0f, video[i]));
    return video;
}

}  // namespace anic

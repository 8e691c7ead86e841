#ifndef __SAMPLER_HPP__
#define __SAMPLER_HPP__

#include <functional>

#include "trainer.hpp"

namespace anic {

// flow ODE integration from t=1 (noise) to t=0 (data), uniform steps

// x − dt·v
TensorF euler_step(const TensorF& x, const TensorF& v, double dt);

// velocity(x, t) is evaluated at the left endpoint of every interval
TensorF euler_integrate(const TensorF& x1,
                        const std::function<TensorF(const TensorF&, double)>& velocity,
                        int64_t steps);

// denoise the joint latent for one scene and decode it; returns the joint
// pixel clip [3,T,H,W] clamped to [0,1]
TensorF sample_video(const ParamStore& ps, const ModelConfig& cfg, const SampleLatents& sl,
                     int64_t steps, uint64_t seed);

}  // namespace anic

#endif  // __SAMPLER_HPP__

#ifndef __COMPOSITE_HPP__
#define __COMPOSITE_HPP__

#include <utility>

#include "scene.hpp"
#include "imageops.hpp"

namespace anic {

inline constexpr double kDefaultSoftMaskSigma = 2.0;

// out = opacity·avatar + (1−opacity)·background, per channel
TensorF alpha_blend(const TensorF& avatar, const TensorF& opacity, const TensorF& background);

// separable gaussian blur per frame, radius = ceil(3·sigma); input must be binary
TensorF soften_mask(const TensorF& mask, double sigma);

struct Condition {
    TensorF video;      // 3×(T−1)×H×W, motion frames 1..T−1
    TensorF soft_mask;  // 1×(T−1)×H×W
};

// condition video over the motion frames of a sample + the matching soft body mask.
// frame 0 of the clip is the reference slot and is not part of the condition video.
Condition build_condition(const TrainingSample& sample, double sigma);

}  // namespace anic

#endif  // __COMPOSITE_HPP__

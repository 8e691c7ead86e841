#ifndef __MASKPACK_HPP__
#define __MASKPACK_HPP__

#include "tensor.hpp"

namespace anic {

// mask strategies over the joint sequence [reference] + motion frames.
// frame 0 is always all-ones (the reference is given, not generated).

// frame 0 ones, frames 1..T_joint−1 zeros
TensorF base_i2v_mask(int64_t t_joint, int64_t H, int64_t W);

// spatially-variant variant: frame 0 ones; motion frame t = 1 − soft_body_mask[t−1]
// (0 = body, to be refined; 1 = background, to be preserved)
TensorF avatar_mask(const TensorF& soft_body_mask);

// [1,T_joint,H,W] -> [4,T_lat,H/8,W/8]:
//   1) area-average 8× spatial downsample
//   2) prepend 3 copies of frame 0 (frame 0 repeated 4× total)
//   3) view (T_lat, 4, h, w), transpose to (4, T_lat, h, w)
TensorF pack_mask(const TensorF& mask_video);

// inverse of the pack steps at latent resolution, nearest-neighbor upsample
TensorF unpack_mask(const TensorF& mask_latent);

}  // namespace anic

#endif  // __MASKPACK_HPP__

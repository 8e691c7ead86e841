#ifndef __CODEC_HPP__
#define __CODEC_HPP__

#include <array>

#include "tensor.hpp"

namespace anic {

// causal video<->latent codec: temporal 1+4k grouping (frame 0 replicated 3
// extra times, groups of 4) and 8× spatial space-to-depth. lossless_shuffle is
// a pure permutation (c_lat = 3·4·8·8 = 768); trainable applies small frozen
// random 3D convs to c_lat channels and is not invertible.
enum class CodecMode { lossless_shuffle, trainable };

struct CodecConfig {
    CodecMode mode = CodecMode::lossless_shuffle;
    int64_t latent_channels = 768;  // trainable default: 16
    uint64_t seed = 1234;           // trainable-mode frozen weights
    static constexpr int64_t temporal_stride = 4;
    static constexpr int64_t spatial_stride = 8;

    static CodecConfig lossless() { return {}; }
    static CodecConfig trainable_16(uint64_t seed = 1234) {
        return {CodecMode::trainable, 16, seed};
    }
};

// (T,H,W) -> (1+(T−1)/4, H/8, W/8); throws on divisibility violations
std::array<int64_t, 3> latent_shape(int64_t T, int64_t H, int64_t W);

TensorF encode_video(const TensorF& video, const CodecConfig& cfg);
TensorF decode_video(const TensorF& latent, const CodecConfig& cfg);

}  // namespace anic

#endif  // __CODEC_HPP__

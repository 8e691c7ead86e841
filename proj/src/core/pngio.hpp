#ifndef __PNGIO_HPP__
#define __PNGIO_HPP__

#include <string>

#include "tensor.hpp"

namespace anic {

// writes one frame as 8-bit PNG. input [3,H,W] -> RGB, [1,H,W] -> grayscale;
// values clamped to [0,1] and mapped v -> round-half-up(v·255)
void save_png(const std::string& path, const TensorF& frame);

uint8_t quantize_255(float v);

}  // namespace anic

#endif  // __PNGIO_HPP__

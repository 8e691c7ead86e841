#include "pngio.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <vector>

namespace anic {

uint8_t quantize_255(float v) {
    if (!(v > 0.0f)) return 0;
    if (v >= 1.0f) return 255;
    return (uint8_t)std::floor(v * 255.0f + 0.5f);
}

void save_png(const std::string& path, const TensorF& frame) {
    if (frame.ndim() != 3 || (frame.dim(0) != 1 && frame.dim(0) != 3))
        throw invalid_arg_error("save_png: expected [1,H,W] or [3,H,W]");
    int64_t C = frame.dim(0), H = frame.dim(1), W = frame.dim(2);

    FILE* fp = std::fopen(path.c_str(), "wb");
    if (!fp) throw io_error("cannot open for writing: " + path);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
        std::fclose(fp);
        throw io_error("libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        throw io_error("libpng write failed: " + path);
    }
    png_init_io(png, fp);
    png_set_compression_level(png, 6);
    png_set_IHDR(png, info, (png_uint_32)W, (png_uint_32)H, 8,
                 C == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    std::vector<png_byte> row((size_t)(W * C));
    for (int64_t y = 0; y < H; y++) {
        for (int64_t x = 0; x < W; x++)
            for (int64_t c = 0; c < C; c++)
                row[(size_t)(x * C + c)] = quantize_255(frame.at(c, y, x));
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
}

}  // namespace anic

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "relievo/mat.hpp"

namespace relievo {

// Float image, values nominally in [0,1], row-major, top-left origin.
struct Image {
    int width = 0, height = 0, channels = 0;
    std::vector<real> pix;

    Image() = default;
    Image(int w, int h, int c)
        : width(w), height(h), channels(c),
          pix(static_cast<size_t>(w) * h * c, real(0)) {}

    real* at(int x, int y) { return pix.data() + (static_cast<size_t>(y) * width + x) * channels; }
    const real* at(int x, int y) const {
        return pix.data() + (static_cast<size_t>(y) * width + x) * channels;
    }
};

// 8-bit PNG I/O (gray or RGB). Writing quantizes with clamp + round; loading
// returns values dequantized to [0,1]. The writer emits fixed zlib settings
// so identical pixels give identical bytes.
void save_png(const Image& img, const std::string& path);
Image load_png(const std::string& path);

uint8_t quantize8(real v);

}  // namespace relievo

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ptyblind {

struct Rgb8Image {
    int height = 0, width = 0;
    std::vector<std::uint8_t> pixels;  // row-major, 3 bytes per pixel

    std::uint8_t* at(int h, int w) { return pixels.data() + 3 * (static_cast<std::size_t>(h) * width + w); }
    const std::uint8_t* at(int h, int w) const {
        return pixels.data() + 3 * (static_cast<std::size_t>(h) * width + w);
    }
};

void write_png(const std::string& path, const Rgb8Image& image);
Rgb8Image read_png(const std::string& path);

}  // namespace ptyblind

#include "ptyblind/render.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ptyblind {

double phase_hue(cdouble z) {
    constexpr double two_pi = 6.283185307179586476925286766559;
    double h = std::arg(z) / two_pi;
    if (h < 0.0) h += 1.0;
    if (h >= 1.0) h -= 1.0;
    return h;
}

void hue_value_to_rgb(double hue, double value, std::uint8_t rgb[3]) {
    hue = hue - std::floor(hue);
    value = std::clamp(value, 0.0, 1.0);
    double h6 = hue * 6.0;
    int sector = static_cast<int>(h6) % 6;
    double f = h6 - std::floor(h6);
    double q = value * (1.0 - f);
    double t = value * f;
    double r, g, b;
    switch (sector) {
        case 0: r = value; g = t; b = 0; break;
        case 1: r = q; g = value; b = 0; break;
        case 2: r = 0; g = value; b = t; break;
        case 3: r = 0; g = q; b = value; break;
        case 4: r = t; g = 0; b = value; break;
        default: r = value; g = 0; b = q; break;
    }
    rgb[0] = static_cast<std::uint8_t>(std::lround(r * 255.0));
    rgb[1] = static_cast<std::uint8_t>(std::lround(g * 255.0));
    rgb[2] = static_cast<std::uint8_t>(std::lround(b * 255.0));
}

Rgb8Image render_field(const ComplexField& f, RenderMode mode) {
    Rgb8Image image;
    image.height = f.height();
    image.width = f.width();
    image.pixels.resize(3 * f.size());
    for (int h = 0; h < f.height(); ++h) {
        for (int w = 0; w < f.width(); ++w) {
            cdouble z = f(h, w);
            double mag = std::min(std::abs(z), 1.0);
            std::uint8_t* px = image.at(h, w);
            switch (mode) {
                case RenderMode::Complex:
                    hue_value_to_rgb(phase_hue(z), mag, px);
                    break;
                case RenderMode::Magnitude: {
                    auto g = static_cast<std::uint8_t>(std::lround(mag * 255.0));
                    px[0] = px[1] = px[2] = g;
                    break;
                }
                case RenderMode::Phase:
                    hue_value_to_rgb(phase_hue(z), 1.0, px);
                    break;
            }
        }
    }
    return image;
}

void render_png(const ComplexField& f, const std::string& path, RenderMode mode) {
    write_png(path, render_field(f, mode));
}

Rgb8Image render_real_normalized(const RealField& f) {
    double lo = f[0], hi = f[0];
    for (double v : f) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    double span = hi > lo ? hi - lo : 1.0;
    Rgb8Image image;
    image.height = f.height();
    image.width = f.width();
    image.pixels.resize(3 * f.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        auto g = static_cast<std::uint8_t>(std::lround((f[i] - lo) / span * 255.0));
        image.pixels[3 * i] = image.pixels[3 * i + 1] = image.pixels[3 * i + 2] = g;
    }
    return image;
}

RenderMode render_mode_from_string(const std::string& name) {
    if (name == "complex") return RenderMode::Complex;
    if (name == "magnitude") return RenderMode::Magnitude;
    if (name == "phase") return RenderMode::Phase;
    throw std::invalid_argument("unknown render mode: " + name);
}

}  // namespace ptyblind

#pragma once

#include "ptyblind/grid.hpp"
#include "ptyblind/png_io.hpp"

#include <string>

namespace ptyblind {

enum class RenderMode { Complex, Magnitude, Phase };

/// Hue fraction in [0, 1) for a complex value: arg(z) / 2pi, wrapped.
double phase_hue(cdouble z);

/// HSV -> RGB with s = 1, h in [0, 1), v in [0, 1].
void hue_value_to_rgb(double hue, double value, std::uint8_t rgb[3]);

/// Complex mode: hue = phase, brightness = min(|z|, 1). Magnitude mode:
/// grayscale min(|z|, 1). Phase mode: hue at full brightness.
Rgb8Image render_field(const ComplexField& f, RenderMode mode);

void render_png(const ComplexField& f, const std::string& path, RenderMode mode);

/// Grayscale render of a real array normalized to [min, max].
Rgb8Image render_real_normalized(const RealField& f);

RenderMode render_mode_from_string(const std::string& name);

}  // namespace ptyblind

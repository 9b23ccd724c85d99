#include "ptyblind/field.hpp"

#include <cmath>
#include <stdexcept>

namespace ptyblind {

ComplexField pad_embed(const ComplexField& x, int padded_size) {
    if (padded_size < x.height() || padded_size < x.width())
        throw std::invalid_argument("pad_embed: padded_size smaller than object");
    ComplexField out(padded_size, padded_size, cdouble(1.0, 0.0));
    int oy = (padded_size - x.height()) / 2;
    int ox = (padded_size - x.width()) / 2;
    for (int h = 0; h < x.height(); ++h)
        for (int w = 0; w < x.width(); ++w) out(oy + h, ox + w) = x(h, w);
    return out;
}

ComplexField crop_center(const ComplexField& f, int out_size) {
    if (out_size > f.height() || out_size > f.width())
        throw std::invalid_argument("crop_center: out_size larger than input");
    if (out_size < 1) throw std::invalid_argument("crop_center: out_size must be >= 1");
    int oy = (f.height() - out_size) / 2;
    int ox = (f.width() - out_size) / 2;
    ComplexField out(out_size, out_size);
    for (int h = 0; h < out_size; ++h)
        for (int w = 0; w < out_size; ++w) out(h, w) = f(oy + h, ox + w);
    return out;
}

double energy(const ComplexField& f) {
    double e = 0.0;
    for (const auto& v : f) e += std::norm(v);
    return e;
}

bool all_finite(const ComplexField& f) {
    for (const auto& v : f)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
}

bool all_finite(const RealField& f) {
    for (double v : f)
        if (!std::isfinite(v)) return false;
    return true;
}

RealField magnitude(const ComplexField& f) {
    RealField out(f.height(), f.width());
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = std::abs(f[i]);
    return out;
}

RealField intensity(const ComplexField& f) {
    RealField out(f.height(), f.width());
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = std::norm(f[i]);
    return out;
}

}  // namespace ptyblind

#include "ptyblind/phantom.hpp"

#include "ptyblind/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace ptyblind {
namespace {

// Bilinearly interpolated random lattice, one octave.
RealField value_noise(int size, int lattice, Rng& rng) {
    std::vector<double> nodes(static_cast<std::size_t>(lattice + 1) * (lattice + 1));
    for (auto& v : nodes) v = rng.uniform();
    RealField out(size, size);
    for (int h = 0; h < size; ++h) {
        double fy = static_cast<double>(h) / size * lattice;
        int iy = static_cast<int>(fy);
        double ty = fy - iy;
        for (int w = 0; w < size; ++w) {
            double fx = static_cast<double>(w) / size * lattice;
            int ix = static_cast<int>(fx);
            double tx = fx - ix;
            double a = nodes[iy * (lattice + 1) + ix];
            double b = nodes[iy * (lattice + 1) + ix + 1];
            double c = nodes[(iy + 1) * (lattice + 1) + ix];
            double d = nodes[(iy + 1) * (lattice + 1) + ix + 1];
            out(h, w) = (a * (1 - tx) + b * tx) * (1 - ty) + (c * (1 - tx) + d * tx) * ty;
        }
    }
    return out;
}

void add_blobs(RealField& f, int count, Rng& rng) {
    int size = f.height();
    for (int i = 0; i < count; ++i) {
        double cy = rng.uniform(0.15, 0.85) * size;
        double cx = rng.uniform(0.15, 0.85) * size;
        double ry = rng.uniform(0.06, 0.22) * size;
        double rx = rng.uniform(0.06, 0.22) * size;
        double amp = rng.uniform(0.4, 1.0);
        double p = rng.uniform(1.5, 4.0);  // superellipse exponent
        for (int h = 0; h < size; ++h) {
            for (int w = 0; w < size; ++w) {
                double d = std::pow(std::abs((h - cy) / ry), p) +
                           std::pow(std::abs((w - cx) / rx), p);
                if (d < 1.0) f(h, w) += amp * (1.0 - d);
            }
        }
    }
}

// Convex polygon plateau: sharp edges on top of the smooth parts.
void add_polygons(RealField& f, int count, Rng& rng) {
    int size = f.height();
    for (int i = 0; i < count; ++i) {
        int nv = 3 + static_cast<int>(rng.uniform() * 4);
        double cy = rng.uniform(0.2, 0.8) * size;
        double cx = rng.uniform(0.2, 0.8) * size;
        double rad = rng.uniform(0.08, 0.25) * size;
        double amp = rng.uniform(0.3, 0.8);
        std::vector<double> angles(nv);
        for (auto& a : angles) a = rng.uniform(0.0, 2.0 * M_PI);
        std::sort(angles.begin(), angles.end());
        std::vector<double> vy(nv), vx(nv);
        for (int v = 0; v < nv; ++v) {
            double r = rad * rng.uniform(0.6, 1.0);
            vy[v] = cy + r * std::sin(angles[v]);
            vx[v] = cx + r * std::cos(angles[v]);
        }
        for (int h = 0; h < size; ++h) {
            for (int w = 0; w < size; ++w) {
                bool inside = true;
                for (int v = 0; v < nv; ++v) {
                    int u = (v + 1) % nv;
                    double cross = (vx[u] - vx[v]) * (h - vy[v]) - (vy[u] - vy[v]) * (w - vx[v]);
                    if (cross < 0) {
                        inside = false;
                        break;
                    }
                }
                if (inside) f(h, w) += amp;
            }
        }
    }
}

RealField structured_map(int size, Rng& rng, bool smooth) {
    RealField f(size, size, 0.0);
    RealField base = value_noise(size, 4, rng);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] += 0.8 * base[i];
    add_blobs(f, smooth ? 4 : 6, rng);
    if (!smooth) add_polygons(f, 3, rng);
    // fine texture octave
    RealField tex = value_noise(size, std::max(8, size / 4), rng);
    double tex_amp = smooth ? 0.05 : 0.18;
    for (std::size_t i = 0; i < f.size(); ++i) f[i] += tex_amp * tex[i];
    // normalize to [0, 1]
    double lo = f[0], hi = f[0];
    for (double v : f) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    double span = hi > lo ? hi - lo : 1.0;
    for (auto& v : f) v = (v - lo) / span;
    return f;
}

}  // namespace

ComplexField transmission_from_profile(const OpticalProfile& prof) {
    if (!prof.delta.same_shape(prof.beta))
        throw std::invalid_argument("transmission_from_profile: delta/beta shape mismatch");
    ComplexField x(prof.height(), prof.width());
    for (std::size_t i = 0; i < x.size(); ++i)
        x[i] = std::exp(-prof.beta[i]) * std::exp(cdouble(0.0, -prof.delta[i]));
    return x;
}

OpticalProfile generate_phantom(int size, PhantomMode mode, std::uint64_t seed) {
    if (size < 8) throw std::invalid_argument("generate_phantom: size must be >= 8");
    Rng rng = Rng(seed).fork(0x70686E74);

    OpticalProfile prof;
    prof.delta = structured_map(size, rng, /*smooth=*/false);
    double phase_scale = rng.uniform(0.25, 1.0);
    for (auto& v : prof.delta) v *= 4.0 * M_PI * phase_scale;

    if (mode == PhantomMode::Full) {
        prof.beta = structured_map(size, rng, /*smooth=*/true);
        double beta_scale = rng.uniform(0.5, 1.5);
        for (auto& v : prof.beta) v *= beta_scale;
    } else {
        prof.beta = RealField(size, size, 0.0);
    }

    if (mode == PhantomMode::WeakPhase) return rescale_weak_phase(prof, 1e-3);
    return prof;
}

OpticalProfile rescale_weak_phase(const OpticalProfile& prof, double max_delta) {
    double lo = prof.delta[0], hi = prof.delta[0];
    for (double v : prof.delta) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (hi <= lo) throw std::invalid_argument("rescale_weak_phase: constant delta");
    OpticalProfile out;
    out.delta = prof.delta;
    out.beta = prof.beta;
    for (auto& v : out.delta) v = (v - lo) / (hi - lo) * max_delta;
    return out;
}

PhantomMode phantom_mode_from_string(const std::string& name) {
    if (name == "full") return PhantomMode::Full;
    if (name == "phase_only") return PhantomMode::PhaseOnly;
    if (name == "weak_phase") return PhantomMode::WeakPhase;
    throw std::invalid_argument("unknown phantom mode: " + name);
}

}  // namespace ptyblind

#include "ptyblind/forward.hpp"

#include "ptyblind/fft.hpp"
#include "ptyblind/field.hpp"
#include "ptyblind/parallel.hpp"
#include "ptyblind/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace ptyblind {

double dft_frequency(int i, int n) {
    return (i <= n / 2 ? i : i - n) / static_cast<double>(n);
}

namespace {

// Reduce a translation into [0, N) so that t and t + N build bit-identical
// ramps (the shift must be exactly N-periodic).
double wrap_translation(double t, int n) {
    double r = t - n * std::floor(t / n);
    if (r >= n) r -= n;
    return r;
}

void check_forward_shapes(const ComplexField& x, const Probe& probe) {
    if (x.height() != x.width()) throw std::invalid_argument("forward: object must be square");
    if (probe.field.height() != probe.field.width())
        throw std::invalid_argument("forward: probe array must be square");
    if (probe.field.height() != 2 * x.height())
        throw std::invalid_argument("forward: probe array must be twice the object array");
}

}  // namespace

int padded_size_for(int object_size, int probe_size) { return object_size + probe_size; }

std::vector<cdouble> phase_ramp_1d(int n, double t) {
    double tr = wrap_translation(t, n);
    std::vector<cdouble> ramp(n);
    constexpr double two_pi = 6.283185307179586476925286766559;
    for (int i = 0; i < n; ++i)
        ramp[i] = std::polar(1.0, -two_pi * dft_frequency(i, n) * tr);
    return ramp;
}

Vec2 shift_translation(Vec2 r, int object_size, int padded_size) {
    double c = padded_size / 2 - (padded_size - object_size) / 2;
    return {c - r[0], c - r[1]};
}

ComplexField translate_periodic(const ComplexField& f, Vec2 t) {
    if (f.height() != f.width())
        throw std::invalid_argument("translate_periodic: field must be square");
    int n = f.height();
    std::vector<cdouble> wy = phase_ramp_1d(n, t[0]);
    std::vector<cdouble> wx = phase_ramp_1d(n, t[1]);

    ComplexField spec = fft2(f);
    for (int h = 0; h < n; ++h)
        for (int w = 0; w < n; ++w) spec(h, w) *= wy[h] * wx[w];
    return ifft2(spec);
}

ComplexField shift(const ComplexField& padded, Vec2 r, int object_size) {
    Vec2 rounded{round_position(r[0]), round_position(r[1])};
    return shift_fractional(padded, rounded, object_size);
}

ComplexField shift_fractional(const ComplexField& padded, Vec2 r, int object_size) {
    return translate_periodic(padded, shift_translation(r, object_size, padded.height()));
}

void gather_window(const ComplexField& padded, int oy, int ox, ComplexField& window) {
    int n = padded.height();
    int m = window.height();
    oy = ((oy % n) + n) % n;
    ox = ((ox % n) + n) % n;
    for (int u = 0; u < m; ++u) {
        int h = oy + u;
        if (h >= n) h -= n;
        const cdouble* src = &padded(h, 0);
        cdouble* dst = &window(u, 0);
        int w0 = ox;
        for (int v = 0; v < m; ++v) {
            dst[v] = src[w0];
            if (++w0 == n) w0 = 0;
        }
    }
}

void scatter_window_add(ComplexField& padded, int oy, int ox, const ComplexField& window) {
    int n = padded.height();
    int m = window.height();
    oy = ((oy % n) + n) % n;
    ox = ((ox % n) + n) % n;
    for (int u = 0; u < m; ++u) {
        int h = oy + u;
        if (h >= n) h -= n;
        cdouble* dst = &padded(h, 0);
        const cdouble* src = &window(u, 0);
        int w0 = ox;
        for (int v = 0; v < m; ++v) {
            dst[w0] += src[v];
            if (++w0 == n) w0 = 0;
        }
    }
}

std::array<int, 2> gather_offset(Vec2 r, int object_size, int probe_size, int padded_size) {
    // Same composition as crop(shift(...)): window[u] = padded[c0 + u - t]
    // with crop origin c0 and translation t, so the gather path can never
    // disagree with the ramp path at integer positions.
    int c0 = (padded_size - probe_size) / 2;
    int c = padded_size / 2 - (padded_size - object_size) / 2;
    int base = c0 - c;
    return {base + static_cast<int>(round_position(r[0])),
            base + static_cast<int>(round_position(r[1]))};
}

ComplexField forward_amplitude(Vec2 r, const ComplexField& x, const Probe& probe) {
    check_forward_shapes(x, probe);
    int hp = probe.field.height();
    int n = padded_size_for(x.height(), hp);
    ComplexField padded = pad_embed(x, n);
    auto off = gather_offset(r, x.height(), hp, n);
    ComplexField window(hp, hp);
    gather_window(padded, off[0], off[1], window);
    for (std::size_t i = 0; i < window.size(); ++i) window[i] *= probe.field[i];
    return fftshift2(fft2(window));
}

RealField noiseless_intensity(Vec2 r, const ComplexField& x, const Probe& probe) {
    return intensity(forward_amplitude(r, x, probe));
}

ScanPositions sample_positions(int K, int object_size, std::uint64_t seed) {
    if (K < 1) throw std::invalid_argument("sample_positions: K must be >= 1");
    Rng rng = Rng(seed).fork(0x504F5331);
    ScanPositions pos;
    pos.r.resize(K);
    for (auto& rk : pos.r) {
        rk[0] = rng.uniform(0.0, static_cast<double>(object_size));
        rk[1] = rng.uniform(0.0, static_cast<double>(object_size));
    }
    return pos;
}

MeasurementSet simulate_measurements(const ComplexField& x, const Probe& probe,
                                     const ScanPositions& positions, const NoiseSpec& noise,
                                     const MaskField& detector_mask, std::uint64_t seed) {
    check_forward_shapes(x, probe);
    if (positions.count() < 1)
        throw std::invalid_argument("simulate_measurements: need at least one position");
    if (noise.kind == NoiseKind::Gaussian && noise.sigma_eps < 0.0)
        throw std::invalid_argument("simulate_measurements: negative sigma_eps");
    if (noise.kind == NoiseKind::Poisson && probe.photon_scale <= 0.0)
        throw std::invalid_argument(
            "simulate_measurements: poisson noise requires a photon-scaled probe");
    int hp = probe.field.height();
    if (!detector_mask.empty() && (detector_mask.height() != hp || detector_mask.width() != hp))
        throw std::invalid_argument("simulate_measurements: detector mask shape mismatch");

    MeasurementSet set;
    set.patterns.assign(positions.count(), RealField());
    set.noise = noise;
    set.detector_mask = detector_mask.empty() ? MaskField(hp, hp, 1) : detector_mask;
    set.truth = positions;
    set.seed = seed;

    Rng base(seed);
    parallel_for(positions.count(), [&](std::size_t k) {
        Rng rng = base.fork(k);
        RealField y = noiseless_intensity(positions.r[k], x, probe);
        if (noise.kind == NoiseKind::Gaussian) {
            if (noise.sigma_eps > 0.0)
                for (auto& v : y) v += noise.sigma_eps * rng.normal();
        } else {
            for (auto& v : y) v = static_cast<double>(rng.poisson(v));
        }
        set.patterns[k] = std::move(y);
    });
    return set;
}

double measurement_snr_db(const std::vector<RealField>& clean_intensities, double sigma) {
    if (sigma <= 0.0) throw std::invalid_argument("measurement_snr_db: sigma must be > 0");
    double sum_sq = 0.0;
    std::size_t count = 0;
    for (const auto& p : clean_intensities) {
        for (double v : p) sum_sq += v * v;
        count += p.size();
    }
    return 10.0 * std::log10(sum_sq / (static_cast<double>(count) * sigma * sigma));
}

double sigma_for_snr_db(const std::vector<RealField>& clean_intensities, double snr_db) {
    double sum_sq = 0.0;
    std::size_t count = 0;
    for (const auto& p : clean_intensities) {
        for (double v : p) sum_sq += v * v;
        count += p.size();
    }
    return std::sqrt(sum_sq / static_cast<double>(count) / std::pow(10.0, snr_db / 10.0));
}

}  // namespace ptyblind

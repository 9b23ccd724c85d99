#pragma once

#include "ptyblind/grid.hpp"
#include "ptyblind/optics.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

namespace ptyblind {

using Vec2 = std::array<double, 2>;  // (dy, dx) in object pixels

struct ScanPositions {
    std::vector<Vec2> r;

    int count() const { return static_cast<int>(r.size()); }
};

enum class NoiseKind { Gaussian, Poisson };

struct NoiseSpec {
    NoiseKind kind = NoiseKind::Gaussian;
    double sigma_eps = 0.005;  // gaussian std in intensity units
    double n_phot = 0.0;       // poisson: expected photons for an ideal object
};

/// K intensity patterns plus everything needed to set up a likelihood.
struct MeasurementSet {
    std::vector<RealField> patterns;  // K x (H_p x W_p)
    NoiseSpec noise;
    MaskField detector_mask;          // 1 = used in likelihoods
    std::optional<ScanPositions> truth;
    std::uint64_t seed = 0;

    int count() const { return static_cast<int>(patterns.size()); }
};

/// Global rounding convention: nearest integer, ties toward +infinity.
inline double round_position(double v) { return std::floor(v + 0.5); }

/// Circular translation by t (pixels, fractional allowed) via the DFT
/// phase ramp exp(-2pi i (f_y t_y + f_x t_x)); periodic with the array size.
ComplexField translate_periodic(const ComplexField& f, Vec2 t);

/// Shift operator: places object pixel (dy, dx) of the centered embedding
/// at the crop center. r is rounded to the nearest integers first.
ComplexField shift(const ComplexField& padded, Vec2 r, int object_size);

/// Same operator without rounding; this is the path gradients flow through.
ComplexField shift_fractional(const ComplexField& padded, Vec2 r, int object_size);

/// A(r, x) = centered_fft2(probe * crop(shift(pad(x), r))). Uses the rounded
/// shift; the zero-frequency bin sits at the detector center.
ComplexField forward_amplitude(Vec2 r, const ComplexField& x, const Probe& probe);

/// Noiseless detector intensity |A(r, x)|^2.
RealField noiseless_intensity(Vec2 r, const ComplexField& x, const Probe& probe);

/// K i.i.d. positions, uniform on [0, H) x [0, H).
ScanPositions sample_positions(int K, int object_size, std::uint64_t seed);

/// Simulates y_k = |A(r_k, x)|^2 + noise. Per-measurement seed streams are
/// derived as base seed + k, so results do not depend on scheduling.
MeasurementSet simulate_measurements(const ComplexField& x, const Probe& probe,
                                     const ScanPositions& positions, const NoiseSpec& noise,
                                     const MaskField& detector_mask, std::uint64_t seed);

/// Measurement SNR convention: 10 log10(mean clean intensity^2 / sigma^2).
double measurement_snr_db(const std::vector<RealField>& clean_intensities, double sigma);
double sigma_for_snr_db(const std::vector<RealField>& clean_intensities, double snr_db);

// --- internals shared with the likelihood module ---

/// Padded size used by the forward chain: object + probe array size.
int padded_size_for(int object_size, int probe_size);

/// window[u, v] = padded[(oy + u) mod N, (ox + v) mod N]
void gather_window(const ComplexField& padded, int oy, int ox, ComplexField& window);

/// Adjoint of gather_window: adds window values back onto the padded grid.
void scatter_window_add(ComplexField& padded, int oy, int ox, const ComplexField& window);

/// Gather offset for a rounded position: (N - H_p - H)/2 + round(r).
std::array<int, 2> gather_offset(Vec2 r, int object_size, int probe_size, int padded_size);

/// Signed DFT frequency in cycles/pixel of bin i on an n-point grid.
double dft_frequency(int i, int n);

/// Per-axis ramp factors exp(-2pi i f_i t), t reduced mod n first.
std::vector<cdouble> phase_ramp_1d(int n, double t);

/// Translation that places object pixel r at the crop center (before
/// rounding): t(r) = N/2 - (N - H)/2 - r per axis.
Vec2 shift_translation(Vec2 r, int object_size, int padded_size);

}  // namespace ptyblind

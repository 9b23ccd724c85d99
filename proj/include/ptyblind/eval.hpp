#pragma once

#include "ptyblind/forward.hpp"
#include "ptyblind/grid.hpp"

#include <array>
#include <vector>

namespace ptyblind {

struct MetricReport {
    double apsnr = 0.0;  // dB; +inf for an exact magnitude match
    double assim = 0.0;
    double crms = 0.0;
    int pos_correct = 0;
    int position_count = 0;
    std::array<int, 2> applied_shift{0, 0};
};

struct RegisterResult {
    ComplexField x;
    ScanPositions r;
    std::array<int, 2> shift{0, 0};
};

/// Resolves the global shift ambiguity: tries every integer shift within
/// +-max_shift, picks the one minimizing the MSE of clipped magnitudes,
/// circularly shifts the estimate and translates the positions by it.
RegisterResult register_estimate(const ComplexField& x_hat, const ComplexField& x_true,
                                 const ScanPositions& r_hat, int max_shift = 20);

/// PSNR of min(|x_hat|, 1) against |x_true| with data range 1.
double apsnr(const ComplexField& x_hat, const ComplexField& x_true);

/// SSIM of the clipped magnitudes: 11x11 Gaussian window (std 1.5),
/// k1 = 0.01, k2 = 0.03, data range 1, averaged over fully valid windows.
double assim(const ComplexField& x_hat, const ComplexField& x_true);

/// Scale- and global-phase-corrected normalized squared error
/// sum|x - gamma x_hat|^2 / sum|x|^2 with gamma = sum(x conj(x_hat)) / sum|x_hat|^2.
double crms(const ComplexField& x_hat, const ComplexField& x_true);

/// Number of positions within the 3x3 box: |round(dy)| <= 1 and |round(dx)| <= 1.
int pos_correct(const ScanPositions& r_hat, const ScanPositions& r_true);

/// register_estimate followed by all metrics.
MetricReport evaluate_reconstruction(const ComplexField& x_hat, const ComplexField& x_true,
                                     const ScanPositions& r_hat, const ScanPositions& r_true,
                                     int max_shift = 20);

/// Position-loss landscape: entry (i, j) holds
/// sum((|A(r_true, x)|^2 - |A(r_true + offset, x)|^2)^2) for integer
/// offsets in [-half_extent, half_extent]^2.
RealField landscape_scan(const ComplexField& x, const Probe& probe, Vec2 r_true,
                         int half_extent);

/// Strict 8-neighbor local minima of a landscape with value below
/// threshold; interior grid points only.
int count_local_minima_below(const RealField& landscape, double threshold);

/// Per-pixel std over a population of registered estimates: sqrt of the
/// mean of the re/im sample variances (Bessel-corrected).
RealField population_std(const std::vector<ComplexField>& runs);

}  // namespace ptyblind

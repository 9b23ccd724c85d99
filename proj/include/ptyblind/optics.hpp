#pragma once

#include "ptyblind/grid.hpp"

#include <cstdint>
#include <vector>

namespace ptyblind {

/// Aperture-plane description of a probe. Zernike coefficients are
/// Noll-indexed 4..15 (piston and tilt excluded), in radians RMS.
struct ApertureSpec {
    int array_size = 512;
    double d_ap = 0.5;      // fractional aperture diameter in (0, 1/2]
    std::vector<double> zernike_coeffs;  // Noll 4..15
    int mask_block = 4;     // random-phase block size in pixels; 0 = no mask
    std::uint64_t seed = 0;
};

/// Complex wavefield of the illumination at the object plane.
struct Probe {
    ComplexField field;
    ApertureSpec spec;
    double photon_scale = 0.0;  // photons for an ideal object; 0 = unscaled

    int array_size() const { return field.height(); }
};

/// Zernike polynomial Z_j (Noll index, orthonormal over the unit disk).
double zernike_noll(int j, double rho, double theta);

/// Sum of coefficient-weighted Zernikes over the disk inscribed in the
/// aperture circle (diameter d_ap * array_size); zero outside.
RealField zernike_phase(const ApertureSpec& spec);

/// Coefficients for Noll 4..15, i.i.d. N(0, 0.5^2) drawn from the seed.
std::vector<double> random_zernike_coeffs(std::uint64_t seed);

/// Unit magnitude inside the centered aperture circle, zero outside.
/// Phase = Zernike map plus, when mask_block > 0, a block-wise random
/// phase in [0, 2pi) with block size mask_block.
ComplexField make_aperture(const ApertureSpec& spec);

/// Probe field = centered DFT of the aperture (zero frequency at the
/// array center). Energy is conserved.
Probe probe_from_aperture(const ComplexField& aperture);

/// make_aperture + probe_from_aperture, keeping the spec for provenance.
Probe make_probe(const ApertureSpec& spec);

/// Rescales so the total noiseless diffraction intensity of an ideal
/// non-absorbing object equals n_phot: field *= sqrt(n_phot / sum|p|^2).
Probe scale_probe_photons(const Probe& probe, double n_phot);

/// Beamstop: pixels within radius 1 + (d_ap/2)*detector_size of the
/// detector center are excluded (0); all other pixels are 1.
MaskField beamstop_mask(double d_ap, int detector_size);

}  // namespace ptyblind

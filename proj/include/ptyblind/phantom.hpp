#pragma once

#include "ptyblind/grid.hpp"

#include <cstdint>
#include <string>

namespace ptyblind {

/// Phase-shift (delta) and absorption (beta) maps of a thin object.
struct OpticalProfile {
    RealField delta;
    RealField beta;

    int height() const { return delta.height(); }
    int width() const { return delta.width(); }
};

enum class PhantomMode { Full, PhaseOnly, WeakPhase };

/// Transmission x = exp(-beta) * exp(-i delta), from n = 1 - delta + i beta
/// with unit wavenumber and thickness.
ComplexField transmission_from_profile(const OpticalProfile& prof);

/// Random piecewise-smooth test object: smooth blobs, polygon plateaus and
/// fine texture. Deterministic in seed. Full mode carries absorption; the
/// phase-only modes have beta == 0; weak-phase rescales delta to [0, 1e-3].
OpticalProfile generate_phantom(int size, PhantomMode mode, std::uint64_t seed);

/// Affinely maps delta so min -> 0 and max -> max_delta; beta unchanged.
OpticalProfile rescale_weak_phase(const OpticalProfile& prof, double max_delta);

PhantomMode phantom_mode_from_string(const std::string& name);

}  // namespace ptyblind

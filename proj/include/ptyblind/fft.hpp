#pragma once

#include "ptyblind/grid.hpp"

namespace ptyblind {

// Unitary 2-D DFTs (1/sqrt(N) per direction), so Parseval holds with no
// size factors. Plans use FFTW_ESTIMATE: plan selection must not depend on
// runtime timing, or re-runs would not be bit-reproducible.
ComplexField fft2(const ComplexField& f);
ComplexField ifft2(const ComplexField& f);

// In-place-style variants writing into a preallocated output (in != out).
void fft2_into(const ComplexField& in, ComplexField& out);
void ifft2_into(const ComplexField& in, ComplexField& out);

// Move the zero-frequency bin between corner and array center.
ComplexField fftshift2(const ComplexField& f);
ComplexField ifftshift2(const ComplexField& f);

}  // namespace ptyblind

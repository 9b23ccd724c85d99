#pragma once

#include "ptyblind/fft.hpp"
#include "ptyblind/grid.hpp"

namespace ptyblind {

/// Embeds x centered in a padded_size x padded_size field of free space
/// (1+0i). Object top-left lands at ((padded_size-H)/2, (padded_size-W)/2).
ComplexField pad_embed(const ComplexField& x, int padded_size);

/// Centered out_size x out_size window; for odd differences the extra
/// row/column is dropped at the bottom/right.
ComplexField crop_center(const ComplexField& f, int out_size);

double energy(const ComplexField& f);  // sum of |f|^2
bool all_finite(const ComplexField& f);
bool all_finite(const RealField& f);

RealField magnitude(const ComplexField& f);
RealField intensity(const ComplexField& f);

}  // namespace ptyblind

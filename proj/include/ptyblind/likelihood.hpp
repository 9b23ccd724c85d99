#pragma once

#include "ptyblind/forward.hpp"
#include "ptyblind/grid.hpp"

#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace ptyblind {

enum class LikelihoodKind { Gaussian, PoissonApprox };

struct LikelihoodSpec {
    LikelihoodKind kind = LikelihoodKind::Gaussian;
    double sigma_eps = 0.005;  // gaussian noise std
    double clamp_floor = 1.0;  // poisson: minimum per-pixel variance weight
    // Overrides the mask stored in the MeasurementSet when present.
    std::optional<MaskField> detector_mask;
};

/// Forward evaluation mode. Rounded is what measurements and engine loss
/// values use; Continuous is the fractional-shift operator that position
/// gradients differentiate (and that finite-difference checks probe).
enum class ShiftMode { Rounded, Continuous };

/// (1/(2 sigma^2)) sum_k sum_unmasked (y - |A|^2)^2, constants dropped.
double nll_gaussian(const MeasurementSet& y, const ComplexField& x, const ScanPositions& r,
                    const Probe& probe, const LikelihoodSpec& spec,
                    ShiftMode mode = ShiftMode::Rounded);

/// Gaussian approximation to the Poisson likelihood: per-pixel variance
/// taken from the measured counts, clamped below at clamp_floor.
double nll_poisson(const MeasurementSet& y, const ComplexField& x, const ScanPositions& r,
                   const Probe& probe, const LikelihoodSpec& spec,
                   ShiftMode mode = ShiftMode::Rounded);

double nll(const MeasurementSet& y, const ComplexField& x, const ScanPositions& r,
           const Probe& probe, const LikelihoodSpec& spec, ShiftMode mode = ShiftMode::Rounded);

struct NllGradX {
    double value;
    ComplexField grad;
};

/// Value and gradient w.r.t. the object. Convention: a complex field g with
/// Re g = dNLL/d(Re x), Im g = dNLL/d(Im x), i.e. 2 * d/d(conj x), so
/// descent on the real/imaginary stacking uses g directly.
NllGradX nll_grad_x(const MeasurementSet& y, const ComplexField& x, const ScanPositions& r,
                    const Probe& probe, const LikelihoodSpec& spec,
                    ShiftMode mode = ShiftMode::Rounded);

ComplexField grad_nll_x(const MeasurementSet& y, const ComplexField& x, const ScanPositions& r,
                        const Probe& probe, const LikelihoodSpec& spec,
                        ShiftMode mode = ShiftMode::Rounded);

struct NllGradR {
    double value;  // continuous-shift NLL at the unrounded positions
    std::vector<Vec2> grad;
};

/// Value and gradient w.r.t. positions, through the continuous shift at the
/// unrounded r (straight-through past the forward rounding). grad[k]
/// touches only measurement k.
NllGradR nll_grad_r(const MeasurementSet& y, const ComplexField& x, const ScanPositions& r,
                    const Probe& probe, const LikelihoodSpec& spec);

std::vector<Vec2> grad_nll_r(const MeasurementSet& y, const ComplexField& x,
                             const ScanPositions& r, const Probe& probe,
                             const LikelihoodSpec& spec);

/// Central-difference directional derivatives against an analytic gradient;
/// returns the worst relative error over the given directions.
double fd_check(const std::function<double(std::span<const double>)>& loss,
                std::span<const double> point, const std::vector<std::vector<double>>& directions,
                double step, std::span<const double> analytic_grad);

}  // namespace ptyblind

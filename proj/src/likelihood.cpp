#include "ptyblind/likelihood.hpp"

#include "ptyblind/fft.hpp"
#include "ptyblind/field.hpp"
#include "ptyblind/parallel.hpp"

#include <cmath>
#include <stdexcept>

namespace ptyblind {
namespace {

struct ProblemShapes {
    int object, probe, padded;
};

ProblemShapes check_shapes(const MeasurementSet& y, const ComplexField& x, const ScanPositions& r,
                           const Probe& probe) {
    if (x.height() != x.width()) throw std::invalid_argument("likelihood: object must be square");
    if (y.count() < 1 || y.count() != r.count())
        throw std::invalid_argument("likelihood: measurement/position count mismatch");
    int hp = probe.field.height();
    if (probe.field.width() != hp || hp != 2 * x.height())
        throw std::invalid_argument("likelihood: probe array must be twice the object array");
    for (const auto& p : y.patterns)
        if (p.height() != hp || p.width() != hp)
            throw std::invalid_argument("likelihood: pattern/probe shape mismatch");
    return {x.height(), hp, padded_size_for(x.height(), hp)};
}

const MaskField& effective_mask(const MeasurementSet& y, const LikelihoodSpec& spec, int hp) {
    const MaskField& m = spec.detector_mask ? *spec.detector_mask : y.detector_mask;
    if (m.height() != hp || m.width() != hp)
        throw std::invalid_argument("likelihood: detector mask shape mismatch");
    return m;
}

void validate_spec(const MeasurementSet& y, const LikelihoodSpec& spec) {
    if (spec.kind == LikelihoodKind::Gaussian && spec.sigma_eps <= 0.0)
        throw std::invalid_argument("likelihood: sigma_eps must be > 0");
    if (spec.kind == LikelihoodKind::PoissonApprox) {
        if (spec.clamp_floor < 1.0)
            throw std::invalid_argument("likelihood: clamp_floor must be >= 1");
        for (const auto& p : y.patterns)
            for (double v : p)
                if (v < 0.0) throw std::invalid_argument("likelihood: negative counts");
    }
}

// Accumulates the NLL over unmasked pixels; when grad_amp is given, writes
// 2*w*A with w = dNLL/d|A|^2 (zero on masked pixels).
double residual_pass(const RealField& yk, const MaskField& mask, const ComplexField& amp,
                     const LikelihoodSpec& spec, ComplexField* grad_amp) {
    double value = 0.0;
    const bool gaussian = spec.kind == LikelihoodKind::Gaussian;
    const double inv_sigma2 = gaussian ? 1.0 / (spec.sigma_eps * spec.sigma_eps) : 0.0;
    for (std::size_t i = 0; i < yk.size(); ++i) {
        if (!mask[i]) {
            if (grad_amp) (*grad_amp)[i] = cdouble(0.0, 0.0);
            continue;
        }
        double resid = yk[i] - std::norm(amp[i]);
        double inv_var = gaussian ? inv_sigma2 : 1.0 / std::max(yk[i], spec.clamp_floor);
        value += 0.5 * resid * resid * inv_var;
        if (grad_amp) (*grad_amp)[i] = (-2.0 * resid * inv_var) * amp[i];
    }
    return value;
}

void forward_rounded(const ComplexField& padded, const Probe& probe, Vec2 r, int object_size,
                     ComplexField& exit, ComplexField& amp) {
    auto off = gather_offset(r, object_size, probe.field.height(), padded.height());
    gather_window(padded, off[0], off[1], exit);
    for (std::size_t i = 0; i < exit.size(); ++i) exit[i] *= probe.field[i];
    fft2_into(exit, amp);
    amp = fftshift2(amp);
}

// Continuous forward: Q = spectrum * ramp(t(r)), S = ifft2(Q), exit =
// probe * crop(S), amp = centered fft2(exit). Q is kept for the
// position-derivative reductions.
void forward_continuous(const ComplexField& padded_spectrum, const Probe& probe, Vec2 r,
                        int object_size, ComplexField& Q, ComplexField& S, ComplexField& exit,
                        ComplexField& amp) {
    int n = padded_spectrum.height();
    Vec2 t = shift_translation(r, object_size, n);
    std::vector<cdouble> wy = phase_ramp_1d(n, t[0]);
    std::vector<cdouble> wx = phase_ramp_1d(n, t[1]);
    for (int h = 0; h < n; ++h) {
        const cdouble* src = &padded_spectrum(h, 0);
        cdouble* dst = &Q(h, 0);
        cdouble fy = wy[h];
        for (int w = 0; w < n; ++w) dst[w] = src[w] * fy * wx[w];
    }
    ifft2_into(Q, S);
    int hp = probe.field.height();
    int c0 = (n - hp) / 2;
    for (int u = 0; u < hp; ++u)
        for (int v = 0; v < hp; ++v) exit(u, v) = S(c0 + u, c0 + v) * probe.field(u, v);
    fft2_into(exit, amp);
    amp = fftshift2(amp);
}

struct PerMeasurement {
    double value = 0.0;
    ComplexField grad_exit;  // for grad_x (rounded path)
    Vec2 grad_r{0.0, 0.0};
};

}  // namespace

double nll(const MeasurementSet& y, const ComplexField& x, const ScanPositions& r,
           const Probe& probe, const LikelihoodSpec& spec, ShiftMode mode) {
    validate_spec(y, spec);
    auto shapes = check_shapes(y, x, r, probe);
    const MaskField& mask = effective_mask(y, spec, shapes.probe);
    ComplexField padded = pad_embed(x, shapes.padded);
    ComplexField spectrum;
    if (mode == ShiftMode::Continuous) spectrum = fft2(padded);

    std::vector<double> values(y.count(), 0.0);
    parallel_for(y.count(), [&](std::size_t k) {
        ComplexField exit(shapes.probe, shapes.probe), amp(shapes.probe, shapes.probe);
        if (mode == ShiftMode::Rounded) {
            forward_rounded(padded, probe, r.r[k], shapes.object, exit, amp);
        } else {
            ComplexField Q(shapes.padded, shapes.padded), S(shapes.padded, shapes.padded);
            forward_continuous(spectrum, probe, r.r[k], shapes.object, Q, S, exit, amp);
        }
        values[k] = residual_pass(y.patterns[k], mask, amp, spec, nullptr);
    });

    double total = 0.0;
    for (double v : values) total += v;  // fixed order, reproducible
    return total;
}

double nll_gaussian(const MeasurementSet& y, const ComplexField& x, const ScanPositions& r,
                    const Probe& probe, const LikelihoodSpec& spec, ShiftMode mode) {
    LikelihoodSpec s = spec;
    s.kind = LikelihoodKind::Gaussian;
    return nll(y, x, r, probe, s, mode);
}

double nll_poisson(const MeasurementSet& y, const ComplexField& x, const ScanPositions& r,
                   const Probe& probe, const LikelihoodSpec& spec, ShiftMode mode) {
    LikelihoodSpec s = spec;
    s.kind = LikelihoodKind::PoissonApprox;
    return nll(y, x, r, probe, s, mode);
}

NllGradX nll_grad_x(const MeasurementSet& y, const ComplexField& x, const ScanPositions& r,
                    const Probe& probe, const LikelihoodSpec& spec, ShiftMode mode) {
    validate_spec(y, spec);
    auto shapes = check_shapes(y, x, r, probe);
    const MaskField& mask = effective_mask(y, spec, shapes.probe);
    ComplexField padded = pad_embed(x, shapes.padded);
    ComplexField spectrum;
    if (mode == ShiftMode::Continuous) spectrum = fft2(padded);

    std::vector<PerMeasurement> per(y.count());
    parallel_for(y.count(), [&](std::size_t k) {
        ComplexField exit(shapes.probe, shapes.probe), amp(shapes.probe, shapes.probe);
        ComplexField Q, S;
        if (mode == ShiftMode::Rounded) {
            forward_rounded(padded, probe, r.r[k], shapes.object, exit, amp);
        } else {
            Q = ComplexField(shapes.padded, shapes.padded);
            S = ComplexField(shapes.padded, shapes.padded);
            forward_continuous(spectrum, probe, r.r[k], shapes.object, Q, S, exit, amp);
        }
        ComplexField grad_amp(shapes.probe, shapes.probe);
        per[k].value = residual_pass(y.patterns[k], mask, amp, spec, &grad_amp);
        // adjoint chain back to the exit-wave window
        ComplexField g = ifftshift2(grad_amp);
        ComplexField g_exit(shapes.probe, shapes.probe);
        ifft2_into(g, g_exit);
        for (std::size_t i = 0; i < g_exit.size(); ++i)
            g_exit[i] *= std::conj(probe.field[i]);
        per[k].grad_exit = std::move(g_exit);
    });

    // Scatter in fixed k order; contributions to shared padded pixels must
    // reduce deterministically.
    double total = 0.0;
    ComplexField grad_padded(shapes.padded, shapes.padded, cdouble(0.0, 0.0));
    if (mode == ShiftMode::Rounded) {
        for (int k = 0; k < y.count(); ++k) {
            total += per[k].value;
            auto off = gather_offset(r.r[k], shapes.object, shapes.probe, shapes.padded);
            scatter_window_add(grad_padded, off[0], off[1], per[k].grad_exit);
        }
    } else {
        // Undo the continuous shift: adjoint ramp in the spectral domain,
        // accumulated per measurement.
        ComplexField g_spec_sum(shapes.padded, shapes.padded, cdouble(0.0, 0.0));
        int c0 = (shapes.padded - shapes.probe) / 2;
        for (int k = 0; k < y.count(); ++k) {
            total += per[k].value;
            ComplexField g_S(shapes.padded, shapes.padded, cdouble(0.0, 0.0));
            for (int u = 0; u < shapes.probe; ++u)
                for (int v = 0; v < shapes.probe; ++v)
                    g_S(c0 + u, c0 + v) = per[k].grad_exit(u, v);
            ComplexField g_Q(shapes.padded, shapes.padded);
            fft2_into(g_S, g_Q);
            Vec2 t = shift_translation(r.r[k], shapes.object, shapes.padded);
            std::vector<cdouble> wy = phase_ramp_1d(shapes.padded, t[0]);
            std::vector<cdouble> wx = phase_ramp_1d(shapes.padded, t[1]);
            for (int h = 0; h < shapes.padded; ++h)
                for (int w = 0; w < shapes.padded; ++w)
                    g_spec_sum(h, w) += g_Q(h, w) * std::conj(wy[h] * wx[w]);
        }
        ifft2_into(g_spec_sum, grad_padded);
    }

    NllGradX out;
    out.value = total;
    out.grad = ComplexField(shapes.object, shapes.object);
    int oy = (shapes.padded - shapes.object) / 2;
    for (int h = 0; h < shapes.object; ++h)
        for (int w = 0; w < shapes.object; ++w) out.grad(h, w) = grad_padded(oy + h, oy + w);
    return out;
}

ComplexField grad_nll_x(const MeasurementSet& y, const ComplexField& x, const ScanPositions& r,
                        const Probe& probe, const LikelihoodSpec& spec, ShiftMode mode) {
    return nll_grad_x(y, x, r, probe, spec, mode).grad;
}

NllGradR nll_grad_r(const MeasurementSet& y, const ComplexField& x, const ScanPositions& r,
                    const Probe& probe, const LikelihoodSpec& spec) {
    validate_spec(y, spec);
    auto shapes = check_shapes(y, x, r, probe);
    const MaskField& mask = effective_mask(y, spec, shapes.probe);
    ComplexField padded = pad_embed(x, shapes.padded);
    ComplexField spectrum = fft2(padded);

    constexpr double two_pi = 6.283185307179586476925286766559;
    std::vector<PerMeasurement> per(y.count());
    parallel_for(y.count(), [&](std::size_t k) {
        int n = shapes.padded, hp = shapes.probe;
        ComplexField Q(n, n), S(n, n), exit(hp, hp), amp(hp, hp);
        forward_continuous(spectrum, probe, r.r[k], shapes.object, Q, S, exit, amp);
        ComplexField grad_amp(hp, hp);
        per[k].value = residual_pass(y.patterns[k], mask, amp, spec, &grad_amp);

        ComplexField g = ifftshift2(grad_amp);
        ComplexField g_exit(hp, hp);
        ifft2_into(g, g_exit);
        ComplexField g_S(n, n, cdouble(0.0, 0.0));
        int c0 = (n - hp) / 2;
        for (int u = 0; u < hp; ++u)
            for (int v = 0; v < hp; ++v)
                g_S(c0 + u, c0 + v) = g_exit(u, v) * std::conj(probe.field(u, v));
        ComplexField g_Q(n, n);
        fft2_into(g_S, g_Q);

        // dNLL/dr = -2pi sum_q f(q) Im(conj(g_Q) Q); dQ/dr = 2pi i f Q.
        double gy = 0.0, gx = 0.0;
        for (int h = 0; h < n; ++h) {
            double fy = dft_frequency(h, n);
            double row_sum = 0.0;
            for (int w = 0; w < n; ++w) {
                double im = std::imag(std::conj(g_Q(h, w)) * Q(h, w));
                row_sum += im;
                gx += dft_frequency(w, n) * im;
            }
            gy += fy * row_sum;
        }
        per[k].grad_r = {-two_pi * gy, -two_pi * gx};
    });

    NllGradR out;
    out.grad.resize(y.count());
    out.value = 0.0;
    for (int k = 0; k < y.count(); ++k) {
        out.value += per[k].value;
        out.grad[k] = per[k].grad_r;
    }
    return out;
}

std::vector<Vec2> grad_nll_r(const MeasurementSet& y, const ComplexField& x,
                             const ScanPositions& r, const Probe& probe,
                             const LikelihoodSpec& spec) {
    return nll_grad_r(y, x, r, probe, spec).grad;
}

double fd_check(const std::function<double(std::span<const double>)>& loss,
                std::span<const double> point, const std::vector<std::vector<double>>& directions,
                double step, std::span<const double> analytic_grad) {
    if (point.size() != analytic_grad.size())
        throw std::invalid_argument("fd_check: gradient/point size mismatch");
    std::vector<double> perturbed(point.begin(), point.end());
    double worst = 0.0;
    for (const auto& dir : directions) {
        if (dir.size() != point.size())
            throw std::invalid_argument("fd_check: direction size mismatch");
        for (std::size_t i = 0; i < perturbed.size(); ++i)
            perturbed[i] = point[i] + step * dir[i];
        double f_plus = loss(perturbed);
        for (std::size_t i = 0; i < perturbed.size(); ++i)
            perturbed[i] = point[i] - step * dir[i];
        double f_minus = loss(perturbed);
        double fd = (f_plus - f_minus) / (2.0 * step);
        double dot = 0.0;
        for (std::size_t i = 0; i < dir.size(); ++i) dot += analytic_grad[i] * dir[i];
        double denom = std::max({std::abs(fd), std::abs(dot), 1e-12});
        worst = std::max(worst, std::abs(fd - dot) / denom);
    }
    return worst;
}

}  // namespace ptyblind

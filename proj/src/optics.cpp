#include "ptyblind/optics.hpp"

#include "ptyblind/fft.hpp"
#include "ptyblind/field.hpp"
#include "ptyblind/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace ptyblind {
namespace {

// Noll index -> (n, m). Within a radial order, small |m| comes first and
// even j carries the cosine (+m) term, odd j the sine.
void noll_to_nm(int j, int& n, int& m) {
    if (j < 1) throw std::invalid_argument("zernike: Noll index must be >= 1");
    n = 0;
    while ((n + 1) * (n + 2) / 2 < j) ++n;
    int p = j - n * (n + 1) / 2;  // 1..n+1 within the order
    int k = n % 2;
    m = ((p + k) / 2) * 2 - k;
    if (m != 0 && j % 2 != 0) m = -m;
}

double radial_poly(int n, int am, double rho) {
    double sum = 0.0;
    for (int s = 0; s <= (n - am) / 2; ++s) {
        double num = 1.0;
        for (int i = 2; i <= n - s; ++i) num *= i;  // (n-s)!
        double den = 1.0;
        for (int i = 2; i <= s; ++i) den *= i;
        for (int i = 2; i <= (n + am) / 2 - s; ++i) den *= i;
        for (int i = 2; i <= (n - am) / 2 - s; ++i) den *= i;
        double term = num / den * std::pow(rho, n - 2 * s);
        sum += (s % 2 == 0) ? term : -term;
    }
    return sum;
}

}  // namespace

double zernike_noll(int j, double rho, double theta) {
    int n, m;
    noll_to_nm(j, n, m);
    int am = std::abs(m);
    double r = radial_poly(n, am, rho);
    if (m == 0) return std::sqrt(n + 1.0) * r;
    double norm = std::sqrt(2.0 * (n + 1.0));
    return m > 0 ? norm * r * std::cos(am * theta) : norm * r * std::sin(am * theta);
}

std::vector<double> random_zernike_coeffs(std::uint64_t seed) {
    Rng rng = Rng(seed).fork(0x5A45524E);
    std::vector<double> coeffs(12);
    for (auto& c : coeffs) c = 0.5 * rng.normal();
    return coeffs;
}

RealField zernike_phase(const ApertureSpec& spec) {
    if (spec.zernike_coeffs.size() != 12)
        throw std::invalid_argument("zernike_phase: expected 12 coefficients (Noll 4..15)");
    int n = spec.array_size;
    double radius = spec.d_ap * n / 2.0;
    double cy = n / 2.0, cx = n / 2.0;
    RealField phase(n, n, 0.0);
    for (int h = 0; h < n; ++h) {
        for (int w = 0; w < n; ++w) {
            double dy = h - cy, dx = w - cx;
            double r = std::hypot(dy, dx);
            if (r > radius) continue;
            double rho = radius > 0.0 ? r / radius : 0.0;
            double theta = std::atan2(dy, dx);
            double v = 0.0;
            for (int j = 4; j <= 15; ++j)
                v += spec.zernike_coeffs[j - 4] * zernike_noll(j, rho, theta);
            phase(h, w) = v;
        }
    }
    return phase;
}

ComplexField make_aperture(const ApertureSpec& spec) {
    if (spec.d_ap <= 0.0 || spec.d_ap > 0.5)
        throw std::invalid_argument("make_aperture: d_ap must be in (0, 1/2]");
    if (spec.mask_block < 0)
        throw std::invalid_argument("make_aperture: mask_block must be >= 0");
    int n = spec.array_size;
    RealField zern = zernike_phase(spec);

    RealField mask_phase(n, n, 0.0);
    if (spec.mask_block > 0) {
        int b = spec.mask_block;
        int blocks = (n + b - 1) / b;
        std::vector<double> m(static_cast<std::size_t>(blocks) * blocks);
        Rng rng = Rng(spec.seed).fork(0x4D41534B);
        for (auto& v : m) v = rng.uniform(0.0, 2.0 * M_PI);
        for (int h = 0; h < n; ++h)
            for (int w = 0; w < n; ++w)
                mask_phase(h, w) = m[(h / b) * blocks + (w / b)];
    }

    double radius = spec.d_ap * n / 2.0;
    double cy = n / 2.0, cx = n / 2.0;
    ComplexField a(n, n, cdouble(0.0, 0.0));
    for (int h = 0; h < n; ++h) {
        for (int w = 0; w < n; ++w) {
            if (std::hypot(h - cy, w - cx) > radius) continue;
            a(h, w) = std::polar(1.0, zern(h, w) + mask_phase(h, w));
        }
    }
    return a;
}

Probe probe_from_aperture(const ComplexField& aperture) {
    if (energy(aperture) == 0.0)
        throw std::invalid_argument("probe_from_aperture: aperture has no support");
    Probe probe;
    probe.field = fftshift2(fft2(ifftshift2(aperture)));
    probe.spec.array_size = aperture.height();
    return probe;
}

Probe make_probe(const ApertureSpec& spec) {
    Probe probe = probe_from_aperture(make_aperture(spec));
    probe.spec = spec;
    return probe;
}

Probe scale_probe_photons(const Probe& probe, double n_phot) {
    if (n_phot <= 0.0) throw std::invalid_argument("scale_probe_photons: n_phot must be > 0");
    double e = energy(probe.field);
    if (e <= 0.0) throw std::invalid_argument("scale_probe_photons: zero-energy probe");
    double factor = std::sqrt(n_phot / e);
    Probe out = probe;
    for (auto& v : out.field) v *= factor;
    out.photon_scale = n_phot;
    return out;
}

MaskField beamstop_mask(double d_ap, int detector_size) {
    double radius = 1.0 + d_ap / 2.0 * detector_size;
    double cy = detector_size / 2.0, cx = detector_size / 2.0;
    MaskField mask(detector_size, detector_size, 1);
    for (int h = 0; h < detector_size; ++h)
        for (int w = 0; w < detector_size; ++w)
            if (std::hypot(h - cy, w - cx) <= radius) mask(h, w) = 0;
    return mask;
}

}  // namespace ptyblind

#include "doctest.h"

#include "ptyblind/fft.hpp"
#include "ptyblind/field.hpp"
#include "ptyblind/optics.hpp"
#include "ptyblind/phantom.hpp"
#include "ptyblind/rng.hpp"

#include <cmath>
#include <cstring>

using namespace ptyblind;

TEST_CASE("transmission formula: free space, pure phase, pure absorption") {
    // free space
    OpticalProfile prof;
    prof.delta = RealField(4, 4, 0.0);
    prof.beta = RealField(4, 4, 0.0);
    ComplexField x = transmission_from_profile(prof);
    for (const auto& v : x) CHECK(std::abs(v - cdouble(1.0, 0.0)) < 1e-15);

    // delta = pi/2 -> -i
    prof.delta = RealField(1, 1, M_PI / 2.0);
    prof.beta = RealField(1, 1, 0.0);
    cdouble v = transmission_from_profile(prof)[0];
    CHECK(std::abs(v - cdouble(0.0, -1.0)) < 1e-15);

    // beta = ln 2 -> |x| = 0.5
    prof.delta = RealField(1, 1, 0.0);
    prof.beta = RealField(1, 1, std::log(2.0));
    CHECK(std::abs(std::abs(transmission_from_profile(prof)[0]) - 0.5) < 1e-15);
}

TEST_CASE("transmission magnitude equals exp(-beta) pixelwise") {
    OpticalProfile prof = generate_phantom(32, PhantomMode::Full, 3);
    ComplexField x = transmission_from_profile(prof);
    for (std::size_t i = 0; i < x.size(); ++i) {
        double expected = std::exp(-prof.beta[i]);
        CHECK(std::abs(std::abs(x[i]) - expected) <= 1e-12 * expected);
        CHECK(std::abs(x[i]) <= 1.0 + 1e-15);
    }
}

TEST_CASE("phantom: determinism, modes, sizes") {
    for (int size : {32, 64, 256}) {
        OpticalProfile a = generate_phantom(size, PhantomMode::Full, 17);
        OpticalProfile b = generate_phantom(size, PhantomMode::Full, 17);
        CHECK(std::memcmp(a.delta.data(), b.delta.data(), a.delta.size() * sizeof(double)) == 0);
        CHECK(std::memcmp(a.beta.data(), b.beta.data(), a.beta.size() * sizeof(double)) == 0);
    }

    OpticalProfile pos = generate_phantom(32, PhantomMode::PhaseOnly, 4);
    ComplexField x = transmission_from_profile(pos);
    for (const auto& v : x) CHECK(std::abs(v) == doctest::Approx(1.0).epsilon(1e-14));

    OpticalProfile weak = generate_phantom(32, PhantomMode::WeakPhase, 4);
    double max_delta = 0.0, min_delta = 1e9;
    for (double d : weak.delta) {
        max_delta = std::max(max_delta, d);
        min_delta = std::min(min_delta, d);
    }
    CHECK(max_delta == doctest::Approx(1e-3).epsilon(1e-12));
    CHECK(min_delta == 0.0);
}

TEST_CASE("rescale_weak_phase affine map") {
    OpticalProfile prof;
    prof.delta = RealField(2, 2);
    prof.delta(0, 0) = 2.0;
    prof.delta(0, 1) = 4.0;
    prof.delta(1, 0) = 3.0;
    prof.delta(1, 1) = 2.5;
    prof.beta = RealField(2, 2, 0.25);
    OpticalProfile r = rescale_weak_phase(prof, 1e-3);
    CHECK(r.delta(0, 0) == doctest::Approx(0.0));
    CHECK(r.delta(0, 1) == doctest::Approx(1e-3));
    CHECK(r.delta(1, 0) == doctest::Approx(5e-4));
    CHECK(r.beta(1, 1) == 0.25);

    SUBCASE("idempotent when already in range") {
        OpticalProfile twice = rescale_weak_phase(r, 1e-3);
        for (std::size_t i = 0; i < r.delta.size(); ++i)
            CHECK(twice.delta[i] == doctest::Approx(r.delta[i]).epsilon(1e-12));
    }
    SUBCASE("constant delta errors") {
        prof.delta = RealField(2, 2, 1.0);
        CHECK_THROWS_AS(rescale_weak_phase(prof, 1e-3), std::invalid_argument);
    }
}

namespace {
// Textbook Zernike values (Noll-normalized).
double defocus(double rho) { return std::sqrt(3.0) * (2.0 * rho * rho - 1.0); }
double spherical(double rho) {
    return std::sqrt(5.0) * (6.0 * std::pow(rho, 4) - 6.0 * rho * rho + 1.0);
}
}  // namespace

TEST_CASE("zernike: table oracle and zero map") {
    for (double rho : {0.0, 0.3, 0.77, 1.0}) {
        CHECK(zernike_noll(4, rho, 1.234) == doctest::Approx(defocus(rho)).epsilon(1e-12));
        CHECK(zernike_noll(11, rho, -0.4) == doctest::Approx(spherical(rho)).epsilon(1e-12));
    }
    // astigmatism Noll 6: sqrt(6) rho^2 cos(2 theta)
    CHECK(zernike_noll(6, 0.5, 0.3) ==
          doctest::Approx(std::sqrt(6.0) * 0.25 * std::cos(0.6)).epsilon(1e-12));
    // coma Noll 7: sqrt(8)(3 rho^3 - 2 rho) sin(theta)
    CHECK(zernike_noll(7, 0.5, 0.3) ==
          doctest::Approx(std::sqrt(8.0) * (3 * 0.125 - 1.0) * std::sin(0.3)).epsilon(1e-12));

    ApertureSpec spec;
    spec.array_size = 64;
    spec.d_ap = 0.5;
    spec.zernike_coeffs.assign(12, 0.0);
    RealField phase = zernike_phase(spec);
    for (double v : phase) CHECK(v == 0.0);

    SUBCASE("pure defocus map") {
        spec.zernike_coeffs[0] = 1.0;  // Noll 4
        RealField map = zernike_phase(spec);
        double radius = 0.5 * 64 / 2.0;
        for (int h = 0; h < 64; ++h)
            for (int w = 0; w < 64; ++w) {
                double r = std::hypot(h - 32.0, w - 32.0);
                if (r <= radius)
                    CHECK(map(h, w) == doctest::Approx(defocus(r / radius)).epsilon(1e-12));
                else
                    CHECK(map(h, w) == 0.0);
            }
    }

    SUBCASE("seeded draw is deterministic") {
        auto a = random_zernike_coeffs(5);
        auto b = random_zernike_coeffs(5);
        CHECK(a == b);
        CHECK(a.size() == 12);
    }
}

TEST_CASE("aperture: support circle, mask blocks, magnitudes") {
    ApertureSpec spec;
    spec.array_size = 512;
    spec.d_ap = 0.5;
    spec.zernike_coeffs = random_zernike_coeffs(2);
    spec.mask_block = 0;
    spec.seed = 2;
    ComplexField a = make_aperture(spec);
    double radius = 0.5 * 512 / 2.0;
    for (int h = 0; h < 512; h += 7)
        for (int w = 0; w < 512; w += 7) {
            double r = std::hypot(h - 256.0, w - 256.0);
            double mag = std::abs(a(h, w));
            if (r <= radius)
                CHECK(mag == doctest::Approx(1.0).epsilon(1e-12));
            else
                CHECK(mag == 0.0);
        }

    SUBCASE("no mask means pure Zernike phase") {
        RealField zern = zernike_phase(spec);
        for (int h = 200; h < 320; h += 11)
            for (int w = 200; w < 320; w += 11) {
                if (std::abs(a(h, w)) == 0.0) continue;
                double phase = std::arg(a(h, w));
                double expect = std::remainder(zern(h, w), 2.0 * M_PI);
                CHECK(std::abs(std::remainder(phase - expect, 2.0 * M_PI)) < 1e-12);
            }
    }

    SUBCASE("block mask is constant on 4x4 blocks") {
        spec.mask_block = 4;
        ComplexField m = make_aperture(spec);
        RealField zern = zernike_phase(spec);
        // mask phase = arg(m) - zernike, constant within a block
        for (int bh = 60; bh < 68; ++bh)
            for (int bw = 60; bw < 68; ++bw) {
                int h0 = bh * 4, w0 = bw * 4;
                if (std::abs(m(h0, w0)) == 0.0) continue;
                double ref = std::remainder(std::arg(m(h0, w0)) - zern(h0, w0), 2.0 * M_PI);
                for (int dh = 0; dh < 4; ++dh)
                    for (int dw = 0; dw < 4; ++dw) {
                        if (std::abs(m(h0 + dh, w0 + dw)) == 0.0) continue;
                        double got = std::remainder(std::arg(m(h0 + dh, w0 + dw)) -
                                                        zern(h0 + dh, w0 + dw),
                                                    2.0 * M_PI);
                        CHECK(std::abs(std::remainder(got - ref, 2.0 * M_PI)) < 1e-9);
                    }
            }
    }
}

TEST_CASE("probe synthesis: delta from a full aperture, energy conservation") {
    // constant nonzero everywhere -> probe concentrates in one center pixel
    ComplexField flat(64, 64, cdouble(1.0, 0.0));
    Probe p = probe_from_aperture(flat);
    CHECK(std::abs(std::abs(p.field(32, 32)) - 64.0) < 1e-9);
    double rest = 0.0;
    for (int h = 0; h < 64; ++h)
        for (int w = 0; w < 64; ++w)
            if (!(h == 32 && w == 32)) rest = std::max(rest, std::abs(p.field(h, w)));
    CHECK(rest < 1e-9);

    ApertureSpec spec;
    spec.array_size = 128;
    spec.d_ap = 0.25;
    spec.zernike_coeffs = random_zernike_coeffs(9);
    spec.mask_block = 4;
    spec.seed = 9;
    ComplexField a = make_aperture(spec);
    Probe probe = probe_from_aperture(a);
    CHECK(std::abs(energy(probe.field) - energy(a)) / energy(a) < 1e-10);

    SUBCASE("zero aperture errors") {
        ComplexField zero(16, 16, cdouble(0.0, 0.0));
        CHECK_THROWS_AS(probe_from_aperture(zero), std::invalid_argument);
    }
}

TEST_CASE("probe: smaller aperture gives a wider central lobe") {
    auto lobe_fwhm = [](double d_ap) {
        ApertureSpec spec;
        spec.array_size = 128;
        spec.d_ap = d_ap;
        spec.zernike_coeffs.assign(12, 0.0);
        spec.mask_block = 0;
        Probe p = make_probe(spec);
        int ch = 64, cw = 64;
        double peak = std::abs(p.field(ch, cw));
        int left = cw, right = cw;
        while (left > 0 && std::abs(p.field(ch, left)) > peak / 2.0) --left;
        while (right < 127 && std::abs(p.field(ch, right)) > peak / 2.0) ++right;
        return right - left;
    };
    CHECK(lobe_fwhm(0.125) > lobe_fwhm(0.5));
}

TEST_CASE("scale_probe_photons fixes total detector intensity") {
    ApertureSpec spec;
    spec.array_size = 64;
    spec.d_ap = 0.5;
    spec.zernike_coeffs = random_zernike_coeffs(3);
    spec.mask_block = 4;
    spec.seed = 3;
    Probe p = make_probe(spec);
    Probe scaled = scale_probe_photons(p, 1e6);
    // for an ideal object the diffraction intensity is |F(p)|^2
    CHECK(std::abs(energy(fft2(scaled.field)) - 1e6) / 1e6 < 1e-10);
    CHECK(scaled.photon_scale == 1e6);

    SUBCASE("idempotent at the same photon count") {
        Probe twice = scale_probe_photons(scaled, 1e6);
        double diff = 0.0;
        for (std::size_t i = 0; i < twice.field.size(); ++i)
            diff = std::max(diff, std::abs(twice.field[i] - scaled.field[i]));
        CHECK(diff < 1e-12);
    }
    SUBCASE("doubling photons doubles every expected intensity") {
        Probe doubled = scale_probe_photons(scaled, 2e6);
        ComplexField f1 = fft2(scaled.field), f2 = fft2(doubled.field);
        for (std::size_t i = 0; i < f1.size(); i += 97)
            CHECK(std::norm(f2[i]) == doctest::Approx(2.0 * std::norm(f1[i])).epsilon(1e-10));
    }
    SUBCASE("phase preserved exactly") {
        for (std::size_t i = 0; i < p.field.size(); i += 131) {
            if (std::abs(p.field[i]) < 1e-12) continue;
            CHECK(std::arg(scaled.field[i]) == doctest::Approx(std::arg(p.field[i])));
        }
    }
}

TEST_CASE("beamstop mask radius and oracle count") {
    MaskField m = beamstop_mask(0.25, 512);
    // excluded radius = 1 + 64 = 65
    int excluded = 0;
    for (int h = 0; h < 512; ++h)
        for (int w = 0; w < 512; ++w)
            if (!m(h, w)) ++excluded;
    // brute-force rasterization oracle
    int oracle = 0;
    for (int h = 0; h < 512; ++h)
        for (int w = 0; w < 512; ++w)
            if (std::hypot(h - 256.0, w - 256.0) <= 65.0) ++oracle;
    CHECK(excluded == oracle);
    CHECK(m(256, 256) == 0);
    CHECK(m(256, 256 + 64) == 0);
    CHECK(m(256, 256 + 66) == 1);

    SUBCASE("tiny aperture excludes only the center disk") {
        MaskField tiny = beamstop_mask(1e-9, 64);
        int count = 0;
        for (int h = 0; h < 64; ++h)
            for (int w = 0; w < 64; ++w)
                if (!tiny(h, w)) {
                    ++count;
                    CHECK(std::hypot(h - 32.0, w - 32.0) <= 1.0);
                }
        CHECK(count == 5);
    }
}

#include "doctest.h"

#include "ptyblind/fft.hpp"
#include "ptyblind/field.hpp"
#include "ptyblind/forward.hpp"
#include "ptyblind/rng.hpp"
#include "support/oracles.hpp"

#include <cmath>
#include <cstring>

using namespace ptyblind;

namespace {

ComplexField random_field(int n, Rng& rng, double scale = 1.0) {
    ComplexField f(n, n);
    for (auto& v : f) v = scale * cdouble(rng.normal(), rng.normal());
    return f;
}

double max_abs_diff(const ComplexField& a, const ComplexField& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

Probe test_probe(int object_size, int mask_block, std::uint64_t seed, double d_ap = 0.5) {
    ApertureSpec spec;
    spec.array_size = 2 * object_size;
    spec.d_ap = d_ap;
    spec.zernike_coeffs = random_zernike_coeffs(seed);
    spec.mask_block = mask_block;
    spec.seed = seed;
    return make_probe(spec);
}

}  // namespace

TEST_CASE("fft2: DC bin of a constant field is c*N under unitary scaling") {
    const int n = 16;
    const cdouble c(0.7, -0.3);
    ComplexField f(n, n, c);
    ComplexField F = fft2(f);
    CHECK(std::abs(F(0, 0) - c * static_cast<double>(n)) < 1e-12);
    double off_dc = 0.0;
    for (int h = 0; h < n; ++h)
        for (int w = 0; w < n; ++w)
            if (h || w) off_dc = std::max(off_dc, std::abs(F(h, w)));
    CHECK(off_dc < 1e-12);
}

TEST_CASE("fft2/ifft2 round-trip identity across sizes") {
    Rng rng(11);
    for (int n : {32, 64, 128, 512}) {
        ComplexField f = random_field(n, rng);
        CHECK(max_abs_diff(ifft2(fft2(f)), f) < 1e-10);
    }
}

TEST_CASE("fft2 Parseval equality against direct summation") {
    Rng rng(12);
    ComplexField f = random_field(128, rng);
    double a = oracles::sum_sq(fft2(f));
    double b = oracles::sum_sq(f);
    CHECK(std::abs(a - b) / b < 1e-12);
}

TEST_CASE("pad_embed places the object and fills free space with 1") {
    ComplexField x(2, 2);
    x(0, 0) = {1.0, 2.0};
    x(0, 1) = {3.0, 0.0};
    x(1, 0) = {0.0, -1.0};
    x(1, 1) = {5.0, 5.0};
    ComplexField p = pad_embed(x, 6);
    int ones = 0;
    for (int h = 0; h < 6; ++h)
        for (int w = 0; w < 6; ++w) {
            if (h >= 2 && h <= 3 && w >= 2 && w <= 3) {
                CHECK(p(h, w) == x(h - 2, w - 2));
            } else {
                CHECK(p(h, w) == cdouble(1.0, 0.0));
                ++ones;
            }
        }
    CHECK(ones == 32);

    SUBCASE("paper-scale placement") {
        ComplexField obj(256, 256, cdouble(0.5, 0.0));
        ComplexField padded = pad_embed(obj, 768);
        CHECK(padded(255, 255) == cdouble(1.0, 0.0));
        CHECK(padded(256, 512 - 1) == cdouble(0.5, 0.0));
        CHECK(padded(256 + 255, 256) == cdouble(0.5, 0.0));
        CHECK(padded(512, 512) == cdouble(1.0, 0.0));
    }

    SUBCASE("pad then crop recovers the object bit-for-bit") {
        ComplexField back = crop_center(pad_embed(x, 6), 2);
        CHECK(std::memcmp(back.data(), x.data(), x.size() * sizeof(cdouble)) == 0);
    }

    SUBCASE("too-small pad size errors") {
        CHECK_THROWS_AS(pad_embed(x, 1), std::invalid_argument);
    }
}

TEST_CASE("crop_center index arithmetic") {
    ComplexField f(4, 4);
    for (int i = 0; i < 16; ++i) f[i] = cdouble(i, 0);
    SUBCASE("identity crop") { CHECK(max_abs_diff(crop_center(f, 4), f) == 0.0); }
    SUBCASE("2 from 4 picks the centered block") {
        ComplexField c = crop_center(f, 2);
        CHECK(c(0, 0) == cdouble(5, 0));
        CHECK(c(0, 1) == cdouble(6, 0));
        CHECK(c(1, 0) == cdouble(9, 0));
        CHECK(c(1, 1) == cdouble(10, 0));
    }
    SUBCASE("window offset formula: 512 from 768 starts at 128") {
        CHECK((768 - 512) / 2 == 128);
    }
    SUBCASE("too-large crop errors") { CHECK_THROWS_AS(crop_center(f, 5), std::invalid_argument); }
}

TEST_CASE("shift: integer translations are exact circular shifts") {
    const int H = 4;
    const int n = 3 * H;  // padded size for probe 2H
    ComplexField f(n, n, cdouble(0.0, 0.0));
    f(0, 0) = {1.0, 0.0};
    // choose r so the translation is exactly (2, 3)
    double c = n / 2 - (n - H) / 2;
    Vec2 r{c - 2.0, c - 3.0};
    ComplexField s = shift(f, r, H);
    CHECK(std::abs(s(2, 3) - cdouble(1.0, 0.0)) < 1e-10);
    double rest = 0.0;
    for (int h = 0; h < n; ++h)
        for (int w = 0; w < n; ++w)
            if (!(h == 2 && w == 3)) rest = std::max(rest, std::abs(s(h, w)));
    CHECK(rest < 1e-10);
}

TEST_CASE("shift: periodic in the padded size, bit-exact") {
    Rng rng(21);
    const int H = 8, n = 24;
    ComplexField f = random_field(n, rng);
    Vec2 r{3.25, -1.5};
    ComplexField a = shift(f, r, H);
    ComplexField b = shift(f, {r[0] + n, r[1]}, H);
    CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(cdouble)) == 0);
}

TEST_CASE("shift: two half-pixel ramps equal one integer step") {
    Rng rng(22);
    const int n = 24;
    ComplexField f = random_field(n, rng);
    ComplexField twice = translate_periodic(translate_periodic(f, {0.5, 0.0}), {0.5, 0.0});
    ComplexField once = translate_periodic(f, {1.0, 0.0});
    CHECK(max_abs_diff(twice, once) < 1e-9);
}

TEST_CASE("shift: unitary for fractional translations") {
    Rng rng(23);
    const int n = 24;
    ComplexField f = random_field(n, rng);
    for (Vec2 t : {Vec2{0.3, -4.7}, Vec2{11.5, 2.25}, Vec2{-0.01, 100.9}}) {
        ComplexField s = translate_periodic(f, t);
        CHECK(std::abs(oracles::sum_sq(s) - oracles::sum_sq(f)) / oracles::sum_sq(f) < 1e-10);
    }
}

TEST_CASE("forward_amplitude: free space is r-independent and equals the probe spectrum") {
    const int H = 16;
    Probe probe = test_probe(H, 2, 99);
    ComplexField ones(H, H, cdouble(1.0, 0.0));
    ComplexField a0 = forward_amplitude({0.0, 0.0}, ones, probe);
    ComplexField a1 = forward_amplitude({7.3, -12.9}, ones, probe);
    CHECK(std::memcmp(a0.data(), a1.data(), a0.size() * sizeof(cdouble)) == 0);
    ComplexField expected = fftshift2(fft2(probe.field));
    CHECK(max_abs_diff(a0, expected) < 1e-12);
}

TEST_CASE("forward_amplitude matches the shift/pad/crop composition") {
    Rng rng(31);
    const int H = 8;
    Probe probe = test_probe(H, 2, 7);
    ComplexField x = random_field(H, rng, 0.5);
    Vec2 r{3.6, 1.2};
    ComplexField via_ops = pad_embed(x, padded_size_for(H, 2 * H));
    via_ops = shift(via_ops, r, H);
    via_ops = crop_center(via_ops, 2 * H);
    for (std::size_t i = 0; i < via_ops.size(); ++i) via_ops[i] *= probe.field[i];
    via_ops = fftshift2(fft2(via_ops));
    ComplexField direct = forward_amplitude(r, x, probe);
    CHECK(max_abs_diff(direct, via_ops) < 1e-10);
}

TEST_CASE("forward_amplitude: linear in the free-space deviation") {
    // Pad fills free space with 1, so A is affine in x:
    // A(x1 + x2 - 1) = A(x1) + A(x2) - A(1), exactly.
    Rng rng(32);
    const int H = 8;
    Probe probe = test_probe(H, 2, 8);
    ComplexField x1 = random_field(H, rng, 0.4);
    ComplexField x2 = random_field(H, rng, 0.4);
    ComplexField combo(H, H);
    for (std::size_t i = 0; i < combo.size(); ++i) combo[i] = x1[i] + x2[i] - 1.0;
    ComplexField ones(H, H, cdouble(1.0, 0.0));
    Vec2 r{2.0, 5.0};
    ComplexField lhs = forward_amplitude(r, combo, probe);
    ComplexField a1 = forward_amplitude(r, x1, probe);
    ComplexField a2 = forward_amplitude(r, x2, probe);
    ComplexField a_ones = forward_amplitude(r, ones, probe);
    double worst = 0.0;
    for (std::size_t i = 0; i < lhs.size(); ++i)
        worst = std::max(worst, std::abs(lhs[i] - (a1[i] + a2[i] - a_ones[i])));
    CHECK(worst < 1e-10);
}

TEST_CASE("forward_amplitude: periodicity and detector energy") {
    Rng rng(33);
    const int H = 8;
    const int n_pad = padded_size_for(H, 2 * H);
    Probe probe = test_probe(H, 4, 9);
    ComplexField x = random_field(H, rng, 0.5);
    Vec2 r{4.7, 2.2};
    ComplexField a = forward_amplitude(r, x, probe);
    ComplexField b = forward_amplitude({r[0] + n_pad, r[1]}, x, probe);
    CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(cdouble)) == 0);

    // Parseval: sum |A|^2 equals the exit-wave energy
    ComplexField padded = pad_embed(x, n_pad);
    auto off = gather_offset(r, H, 2 * H, n_pad);
    ComplexField window(2 * H, 2 * H);
    gather_window(padded, off[0], off[1], window);
    for (std::size_t i = 0; i < window.size(); ++i) window[i] *= probe.field[i];
    CHECK(std::abs(oracles::sum_sq(a) - oracles::sum_sq(window)) /
              std::max(oracles::sum_sq(window), 1e-300) <
          1e-10);
}

TEST_CASE("sample_positions: range, determinism, CLT mean") {
    const int H = 64, K = 10000;
    ScanPositions p = sample_positions(K, H, 5);
    ScanPositions q = sample_positions(K, H, 5);
    CHECK(std::memcmp(p.r.data(), q.r.data(), K * sizeof(Vec2)) == 0);
    double mean_y = 0.0, mean_x = 0.0;
    for (const auto& r : p.r) {
        CHECK(r[0] >= 0.0);
        CHECK(r[0] < H);
        CHECK(r[1] >= 0.0);
        CHECK(r[1] < H);
        mean_y += r[0];
        mean_x += r[1];
    }
    mean_y /= K;
    mean_x /= K;
    double sigma_mean = H / std::sqrt(12.0 * K);
    CHECK(std::abs(mean_y - H / 2.0) < 3.0 * sigma_mean);
    CHECK(std::abs(mean_x - H / 2.0) < 3.0 * sigma_mean);
}

TEST_CASE("rng: poisson sample mean matches the rate") {
    Rng rng(77);
    for (double lam : {0.3, 4.0, 60.0, 900.0}) {
        const int n = 10000;
        double sum = 0.0;
        for (int i = 0; i < n; ++i) sum += static_cast<double>(rng.poisson(lam));
        double mean = sum / n;
        CHECK(std::abs(mean - lam) < 3.0 * std::sqrt(lam / n));
    }
}

TEST_CASE("simulate_measurements: noiseless, reproducible, poisson guard") {
    Rng rng(41);
    const int H = 8;
    Probe probe = test_probe(H, 2, 10);
    ComplexField x = random_field(H, rng, 0.3);
    ScanPositions pos = sample_positions(5, H, 3);
    MaskField mask;  // default all-on

    NoiseSpec clean{NoiseKind::Gaussian, 0.0, 0.0};
    MeasurementSet m = simulate_measurements(x, probe, pos, clean, mask, 123);
    for (int k = 0; k < m.count(); ++k) {
        RealField expect = noiseless_intensity(pos.r[k], x, probe);
        for (std::size_t i = 0; i < expect.size(); ++i) CHECK(m.patterns[k][i] == expect[i]);
    }

    NoiseSpec noisy{NoiseKind::Gaussian, 0.01, 0.0};
    MeasurementSet a = simulate_measurements(x, probe, pos, noisy, mask, 7);
    MeasurementSet b = simulate_measurements(x, probe, pos, noisy, mask, 7);
    for (int k = 0; k < a.count(); ++k)
        CHECK(std::memcmp(a.patterns[k].data(), b.patterns[k].data(),
                          a.patterns[k].size() * sizeof(double)) == 0);

    NoiseSpec poisson{NoiseKind::Poisson, 0.0, 1e5};
    CHECK_THROWS_AS(simulate_measurements(x, probe, pos, poisson, mask, 7),
                    std::invalid_argument);  // probe not photon-scaled
    Probe scaled = scale_probe_photons(probe, 1e5);
    MeasurementSet mp = simulate_measurements(x, scaled, pos, poisson, mask, 7);
    for (double v : mp.patterns[0]) CHECK(v >= 0.0);
}

TEST_CASE("measurement snr helpers invert each other") {
    Rng rng(55);
    std::vector<RealField> clean(3, RealField(16, 16));
    for (auto& p : clean)
        for (auto& v : p) v = std::abs(rng.normal());
    double sigma = sigma_for_snr_db(clean, 4.5);
    CHECK(measurement_snr_db(clean, sigma) == doctest::Approx(4.5).epsilon(1e-10));
}

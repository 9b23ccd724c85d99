#include "doctest.h"

#include "ptyblind/eval.hpp"
#include "ptyblind/inference.hpp"
#include "ptyblind/phantom.hpp"
#include "support/oracles.hpp"

#include <cmath>
#include <cstring>

using namespace ptyblind;

namespace {

Probe small_probe(int H, std::uint64_t seed, int mask_block = 1) {
    ApertureSpec spec;
    spec.array_size = 2 * H;
    spec.d_ap = 0.5;
    spec.zernike_coeffs = random_zernike_coeffs(seed);
    spec.mask_block = mask_block;
    spec.seed = seed;
    return make_probe(spec);
}

struct Problem {
    ComplexField x;
    Probe probe;
    ScanPositions pos;
    MeasurementSet meas;
};

Problem small_problem(int H, int K, std::uint64_t seed, double sigma = 0.01) {
    Problem p;
    p.probe = small_probe(H, seed + 1);
    OpticalProfile prof = generate_phantom(H, PhantomMode::Full, seed + 2);
    p.x = transmission_from_profile(prof);
    p.pos = sample_positions(K, H, seed + 3);
    NoiseSpec noise{NoiseKind::Gaussian, sigma, 0.0};
    p.meas = simulate_measurements(p.x, p.probe, p.pos, noise, MaskField(), seed + 4);
    return p;
}

}  // namespace

TEST_CASE("adam_step: reference-formula first step, zero-gradient fixed point, descent") {
    AdamState st(2);
    std::vector<double> params{1.0, -2.0};
    std::vector<double> grad{0.3, -4.0};
    adam_step(st, params, grad, 0.05);
    for (int i = 0; i < 2; ++i) {
        // first-step closed form: lr * g / (|g| + eps)
        double expect = (i == 0 ? 1.0 : -2.0) -
                        0.05 * grad[i] / (std::sqrt(grad[i] * grad[i]) + 1e-8);
        CHECK(params[i] == doctest::Approx(expect).epsilon(1e-12));
    }

    SUBCASE("zero gradient leaves parameters unchanged") {
        AdamState s2(1);
        std::vector<double> p{3.14};
        std::vector<double> g{0.0};
        for (int i = 0; i < 100; ++i) adam_step(s2, p, g, 0.1);
        CHECK(p[0] == 3.14);
    }

    SUBCASE("constant gradient descends monotonically") {
        AdamState s3(1);
        std::vector<double> p{5.0};
        std::vector<double> g{1.0};
        double prev = p[0];
        for (int i = 0; i < 1000; ++i) {
            adam_step(s3, p, g, 0.1);
            CHECK(p[0] < prev);
            prev = p[0];
        }
    }
}

TEST_CASE("cosine_lr: plateau, midpoint, floor") {
    CHECK(cosine_lr(0) == 0.1);
    CHECK(cosine_lr(4000) == 0.1);
    CHECK(cosine_lr(5000) == doctest::Approx(0.0505).epsilon(1e-12));
    CHECK(cosine_lr(6000) == 0.001);
    CHECK(cosine_lr(10000) == 0.001);
    CHECK_THROWS_AS(cosine_lr(0, 10, 10), std::invalid_argument);
}

TEST_CASE("entropy_gaussian: closed form and monotonicity") {
    RealField ls(1, 1, 0.0);  // sigma = 1
    CHECK(entropy_gaussian_image(ls) == doctest::Approx(std::log(2.0 * M_PI * M_E)));
    RealField ls2(1, 1, std::log(2.0));
    CHECK(entropy_gaussian_image(ls2) - entropy_gaussian_image(ls) ==
          doctest::Approx(2.0 * std::log(2.0)));
    std::vector<double> lr{0.0, std::log(3.0)};
    CHECK(entropy_gaussian_positions(lr) ==
          doctest::Approx(2.0 * std::log(2.0 * M_PI * M_E) / 1.0 + 2.0 * std::log(3.0))
              .epsilon(1e-12));
}

namespace {

VariationalState test_state(const Problem& p, std::uint64_t seed) {
    Rng rng(seed);
    int H = p.x.height();
    VariationalState st;
    st.mu_x = ComplexField(H, H);
    for (auto& v : st.mu_x) v = cdouble(1.0 + 0.05 * rng.normal(), 0.05 * rng.normal());
    st.log_sigma_x = RealField(H, H, std::log(0.08));
    st.mu_r.resize(p.pos.count());
    for (auto& r : st.mu_r)
        r = {rng.uniform(0.0, static_cast<double>(H)), rng.uniform(0.0, static_cast<double>(H))};
    st.log_sigma_r.assign(p.pos.count(), std::log(2.5));
    return st;
}

ViProblem make_vi_problem(const Problem& p, const PriorConfig& prior, int batch) {
    ViProblem prob;
    prob.measurements = &p.meas;
    prob.probe = &p.probe;
    prob.likelihood.kind = LikelihoodKind::Gaussian;
    prob.likelihood.sigma_eps = 0.02;
    prob.prior = prior;
    prob.batch = batch;
    return prob;
}

}  // namespace

TEST_CASE("vi_loss_and_grads: position-mean gradient matches frozen-noise finite differences") {
    Problem p = small_problem(8, 3, 600);
    PriorConfig prior;
    prior.position_barrier = true;
    prior.barrier_lambda = 1.5;
    prior.barrier_leniency = 20.0;
    ViProblem prob = make_vi_problem(p, prior, 2);

    VariationalState st = test_state(p, 601);
    Rng g(77);
    ViLossGrads lg = vi_loss_and_grads(st, prob, g, ShiftMode::Continuous, true, true);

    std::vector<double> point, grad;
    for (int k = 0; k < p.pos.count(); ++k) {
        point.push_back(st.mu_r[k][0]);
        point.push_back(st.mu_r[k][1]);
        grad.push_back(lg.g_mu_r[k][0]);
        grad.push_back(lg.g_mu_r[k][1]);
    }
    auto loss = [&](std::span<const double> v) {
        VariationalState s2 = st;
        for (std::size_t k = 0; k < v.size() / 2; ++k) s2.mu_r[k] = {v[2 * k], v[2 * k + 1]};
        Rng g2(77);
        return vi_loss_and_grads(s2, prob, g2, ShiftMode::Continuous, true, true).loss;
    };
    CHECK(fd_check(loss, point, {{1, 0, 0, 0, 0, 0}, {0, 1, 0, 0, 0, 0}, {0, 0, 1, -1, 0, 0},
                                 {0, 0, 0, 0, 0.6, 0.8}},
                   1e-3, grad) < 1e-4);

    SUBCASE("log-sigma gradients for positions") {
        std::vector<double> pt = st.log_sigma_r;
        auto loss_ls = [&](std::span<const double> v) {
            VariationalState s2 = st;
            s2.log_sigma_r.assign(v.begin(), v.end());
            Rng g2(77);
            return vi_loss_and_grads(s2, prob, g2, ShiftMode::Continuous, true, true).loss;
        };
        CHECK(fd_check(loss_ls, pt, {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}, 1e-4,
                       lg.g_log_sigma_r) < 1e-4);
    }

    SUBCASE("image-mean and image-log-sigma gradients") {
        std::size_t nx = st.mu_x.size();
        std::vector<double> pt(reinterpret_cast<const double*>(st.mu_x.data()),
                               reinterpret_cast<const double*>(st.mu_x.data()) + 2 * nx);
        std::vector<double> gr(reinterpret_cast<const double*>(lg.g_mu_x.data()),
                               reinterpret_cast<const double*>(lg.g_mu_x.data()) + 2 * nx);
        auto loss_mu = [&](std::span<const double> v) {
            VariationalState s2 = st;
            std::memcpy(s2.mu_x.data(), v.data(), v.size() * sizeof(double));
            Rng g2(77);
            return vi_loss_and_grads(s2, prob, g2, ShiftMode::Continuous, true, true).loss;
        };
        Rng drng(9);
        std::vector<std::vector<double>> dirs;
        for (int i = 0; i < 4; ++i) {
            std::vector<double> d(2 * nx);
            double n2 = 0;
            for (auto& v : d) {
                v = drng.normal();
                n2 += v * v;
            }
            for (auto& v : d) v /= std::sqrt(n2);
            dirs.push_back(d);
        }
        CHECK(fd_check(loss_mu, pt, dirs, 1e-5, gr) < 1e-4);

        std::vector<double> pt_ls(st.log_sigma_x.data(), st.log_sigma_x.data() + nx);
        std::vector<double> gr_ls(lg.g_log_sigma_x.data(), lg.g_log_sigma_x.data() + nx);
        auto loss_ls = [&](std::span<const double> v) {
            VariationalState s2 = st;
            std::copy(v.begin(), v.end(), s2.log_sigma_x.data());
            Rng g2(77);
            return vi_loss_and_grads(s2, prob, g2, ShiftMode::Continuous, true, true).loss;
        };
        std::vector<std::vector<double>> dirs_ls;
        for (int i = 0; i < 3; ++i) {
            std::vector<double> d(nx);
            double n2 = 0;
            for (auto& v : d) {
                v = drng.normal();
                n2 += v * v;
            }
            for (auto& v : d) v /= std::sqrt(n2);
            dirs_ls.push_back(d);
        }
        CHECK(fd_check(loss_ls, pt_ls, dirs_ls, 1e-5, gr_ls) < 1e-4);
    }
}

TEST_CASE("vi_loss_and_grads: huber prior adds lambda * TV per sample") {
    Problem p = small_problem(8, 2, 620);
    PriorConfig none;
    PriorConfig htv;
    htv.image = ImagePriorKind::HuberTv;
    htv.htv_lambda = 5.0;
    ViProblem prob_none = make_vi_problem(p, none, 3);
    ViProblem prob_htv = make_vi_problem(p, htv, 3);
    VariationalState st = test_state(p, 621);

    Rng a(42), b(42);
    double l0 = vi_loss_and_grads(st, prob_none, a, ShiftMode::Rounded, true, true).loss;
    double l1 = vi_loss_and_grads(st, prob_htv, b, ShiftMode::Rounded, true, true).loss;

    // recompute the sample-average TV with the same frozen draws
    Rng c(42);
    RealField sig(8, 8);
    for (std::size_t i = 0; i < sig.size(); ++i) sig[i] = std::exp(st.log_sigma_x[i]);
    double tv_mean = 0.0;
    for (int s = 0; s < 3; ++s) {
        ComplexField xb(8, 8);
        for (std::size_t i = 0; i < xb.size(); ++i) {
            double er = c.normal(), ei = c.normal();
            xb[i] = st.mu_x[i] + sig[i] * cdouble(er, ei);
        }
        for (int k = 0; k < p.pos.count(); ++k) {
            c.normal();
            c.normal();
        }
        tv_mean += huber_tv(xb, htv.htv_alpha).value;
    }
    tv_mean /= 3.0;
    CHECK(l1 - l0 == doctest::Approx(5.0 * tv_mean).epsilon(1e-9));
}

TEST_CASE("vi_loss_and_grads: point-mass limit leaves only entropy terms on clean data") {
    Problem p = small_problem(8, 3, 640, /*sigma=*/0.0);
    PriorConfig none;
    ViProblem prob = make_vi_problem(p, none, 2);
    prob.optimize_positions = false;  // non-blind at the truth

    VariationalState st;
    st.mu_x = p.x;
    st.log_sigma_x = RealField(8, 8, std::log(1e-9));
    st.mu_r = p.meas.truth->r;
    st.log_sigma_r.assign(p.pos.count(), std::log(1e-9));

    Rng g(3);
    ViLossGrads lg = vi_loss_and_grads(st, prob, g, ShiftMode::Rounded, true, false);
    double entropy_only = -entropy_gaussian_image(st.log_sigma_x);
    CHECK(std::abs(lg.loss - entropy_only) < 1e-6 * std::abs(entropy_only));
}

TEST_CASE("vi gradient estimator is unbiased on a 1-pixel problem (quadrature oracle)") {
    // 1x1 object, 2x2 probe; Simpson-quadrature expectation over the two
    // image noise dimensions vs the Monte Carlo gradient average.
    Problem p;
    p.probe = small_probe(1, 700);
    p.x = ComplexField(1, 1, cdouble(0.7, -0.2));
    p.pos.r = {{0.0, 0.0}};
    NoiseSpec noise{NoiseKind::Gaussian, 0.05, 0.0};
    p.meas = simulate_measurements(p.x, p.probe, p.pos, noise, MaskField(), 701);

    PriorConfig none;
    ViProblem prob = make_vi_problem(p, none, 1);
    prob.optimize_positions = false;

    VariationalState st;
    st.mu_x = ComplexField(1, 1, cdouble(0.9, 0.1));
    st.log_sigma_x = RealField(1, 1, std::log(0.2));
    st.mu_r = p.pos.r;
    st.log_sigma_r = {std::log(1e-6)};

    LikelihoodSpec lik = prob.likelihood;
    auto nll_at = [&](cdouble xval) {
        ComplexField x1(1, 1, xval);
        return nll(p.meas, x1, p.pos, p.probe, lik);
    };

    // quadrature loss as a function of (mu_re, mu_im, log_sigma)
    auto exact_loss = [&](double mu_re, double mu_im, double ls) {
        double sigma = std::exp(ls);
        double e = oracles::gauss_expect_2d([&](double e1, double e2) {
            return nll_at(cdouble(mu_re + sigma * e1, mu_im + sigma * e2));
        });
        RealField lsf(1, 1, ls);
        return e - entropy_gaussian_image(lsf);
    };

    double h = 1e-4;
    double base_re = st.mu_x[0].real(), base_im = st.mu_x[0].imag(), base_ls = st.log_sigma_x[0];
    double g_re = (exact_loss(base_re + h, base_im, base_ls) -
                   exact_loss(base_re - h, base_im, base_ls)) /
                  (2 * h);
    double g_im = (exact_loss(base_re, base_im + h, base_ls) -
                   exact_loss(base_re, base_im - h, base_ls)) /
                  (2 * h);
    double g_ls = (exact_loss(base_re, base_im, base_ls + h) -
                   exact_loss(base_re, base_im, base_ls - h)) /
                  (2 * h);

    const int n = 1000;
    double m_re = 0, m_im = 0, m_ls = 0;
    std::vector<std::array<double, 3>> samples(n);
    for (int s = 0; s < n; ++s) {
        Rng g(9000 + s);
        ViLossGrads lg = vi_loss_and_grads(st, prob, g, ShiftMode::Rounded, true, false);
        samples[s] = {lg.g_mu_x[0].real(), lg.g_mu_x[0].imag(), lg.g_log_sigma_x[0]};
        m_re += samples[s][0];
        m_im += samples[s][1];
        m_ls += samples[s][2];
    }
    m_re /= n;
    m_im /= n;
    m_ls /= n;
    double v_re = 0, v_im = 0, v_ls = 0;
    for (const auto& s : samples) {
        v_re += (s[0] - m_re) * (s[0] - m_re);
        v_im += (s[1] - m_im) * (s[1] - m_im);
        v_ls += (s[2] - m_ls) * (s[2] - m_ls);
    }
    double sem_re = std::sqrt(v_re / (n - 1.0) / n);
    double sem_im = std::sqrt(v_im / (n - 1.0) / n);
    double sem_ls = std::sqrt(v_ls / (n - 1.0) / n);
    CHECK(std::abs(m_re - g_re) < 3.0 * sem_re);
    CHECK(std::abs(m_im - g_im) < 3.0 * sem_im);
    CHECK(std::abs(m_ls - g_ls) < 3.0 * sem_ls);
}

TEST_CASE("engines: seeds reproduce trajectories bit-exactly") {
    Problem p = small_problem(8, 3, 800);
    ReconstructionConfig cfg;
    cfg.method = Method::Vi;
    cfg.blind = true;
    cfg.n_outer = 5;
    cfg.n_par = 2;
    cfg.batch = 2;
    cfg.likelihood.sigma_eps = 0.02;
    cfg.seed = 4;
    cfg.lr_mu_r = 1.0;
    RunResult a = run_vi(cfg, p.meas, p.probe);
    RunResult b = run_vi(cfg, p.meas, p.probe);
    CHECK(a.loss_history == b.loss_history);
    CHECK(std::memcmp(a.state.mu_x.data(), b.state.mu_x.data(),
                      a.state.mu_x.size() * sizeof(cdouble)) == 0);
    CHECK(std::memcmp(a.state.mu_r.data(), b.state.mu_r.data(),
                      a.state.mu_r.size() * sizeof(Vec2)) == 0);
}

TEST_CASE("run_reddiff with lambda_rd = 0 is bit-identical to run_map") {
    Problem p = small_problem(8, 3, 810);
    ReconstructionConfig cfg;
    cfg.method = Method::Map;
    cfg.prior.image = ImagePriorKind::None;
    cfg.prior.lambda_rd = 0.0;
    cfg.blind = true;
    cfg.n_outer = 6;
    cfg.n_par = 3;
    cfg.likelihood.sigma_eps = 0.02;
    cfg.seed = 11;
    cfg.lr_mu_r = 1.0;
    RunResult m = run_map(cfg, p.meas, p.probe);
    RunResult r = run_reddiff(cfg, p.meas, p.probe, nullptr);
    CHECK(m.loss_history == r.loss_history);
    CHECK(std::memcmp(m.state.mu_x.data(), r.state.mu_x.data(),
                      m.state.mu_x.size() * sizeof(cdouble)) == 0);
    CHECK(std::memcmp(m.state.mu_r.data(), r.state.mu_r.data(),
                      m.state.mu_r.size() * sizeof(Vec2)) == 0);
}

TEST_CASE("run_em equals run_vi when position sampling is pinned off") {
    // With sigma_r -> 0 both draw identical effective positions, but EM
    // also drops the position entropy; compare the position updates at
    // frozen image samples via one position step each.
    Problem p = small_problem(8, 2, 820);
    ReconstructionConfig cfg;
    cfg.blind = true;
    cfg.n_outer = 4;
    cfg.n_par = 2;
    cfg.batch = 2;
    cfg.likelihood.sigma_eps = 0.02;
    cfg.seed = 21;
    cfg.lr_mu_r = 1.0;
    RunResult em = run_em(cfg, p.meas, p.probe);
    CHECK(em.loss_history.size() == 4);
    for (double v : em.state.log_sigma_r) CHECK(v == std::log(1e-12));

    SUBCASE("non-blind em reduces to the image half of vi") {
        cfg.blind = false;
        RunResult a = run_em(cfg, p.meas, p.probe);
        RunResult b = run_vi(cfg, p.meas, p.probe);
        CHECK(a.loss_history == b.loss_history);
        CHECK(std::memcmp(a.state.mu_x.data(), b.state.mu_x.data(),
                          a.state.mu_x.size() * sizeof(cdouble)) == 0);
    }
}

TEST_CASE("non-blind engines drive the data misfit down on a small problem") {
    Problem p = small_problem(16, 6, 830, /*sigma=*/0.0);
    ReconstructionConfig cfg;
    cfg.blind = false;
    cfg.n_outer = 300;
    cfg.likelihood.sigma_eps = 0.02;
    cfg.lr_start_step = 150;
    cfg.lr_end_step = 250;
    cfg.seed = 5;

    SUBCASE("map") {
        cfg.method = Method::Map;
        RunResult r = run_map(cfg, p.meas, p.probe);
        CHECK(r.loss_history.back() < 1e-4 * r.loss_history.front());
        CHECK(crms(r.state.mu_x, p.x) < 0.05);
    }
    SUBCASE("vi") {
        cfg.method = Method::Vi;
        cfg.batch = 2;
        RunResult r = run_vi(cfg, p.meas, p.probe);
        CHECK(crms(r.state.mu_x, p.x) < 0.05);
    }
}

TEST_CASE("divergence detection aborts with a diagnostic") {
    Problem p = small_problem(8, 2, 840);
    ReconstructionConfig cfg;
    cfg.method = Method::Map;
    cfg.blind = true;
    cfg.n_outer = 50;
    cfg.likelihood.sigma_eps = 1e-9;  // absurd scaling to force a blow-up
    cfg.lr_img_hi = 1e6;
    cfg.lr_img_lo = 1e6;
    cfg.seed = 3;
    CHECK_THROWS_AS(run_map(cfg, p.meas, p.probe), DivergenceError);
}

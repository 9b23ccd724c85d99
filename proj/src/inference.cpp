#include "ptyblind/inference.hpp"

#include "ptyblind/field.hpp"
#include "ptyblind/ptyf_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>

namespace ptyblind {

namespace {
constexpr double kLog2PiE = 2.8378770664093454835606594728112;  // log(2 pi e)

void write_state_checkpoint(const std::string& dir, int iteration, const VariationalState& st) {
    char tag[32];
    std::snprintf(tag, sizeof(tag), "checkpoint_%06d", iteration);
    std::string base = dir + "/" + tag;
    write_ptyf(base + "_mu_x.ptyf", st.mu_x);
    write_ptyf(base + "_log_sigma_x.ptyf", st.log_sigma_x);
    ScanPositions pos;
    pos.r = st.mu_r;
    write_ptyf(base + "_mu_r.ptyf", pos);
    PtyfArray ls;
    ls.dtype = PtyfDtype::F64;
    ls.dims = {st.log_sigma_r.size()};
    ls.payload.resize(st.log_sigma_r.size() * sizeof(double));
    std::memcpy(ls.payload.data(), st.log_sigma_r.data(), ls.payload.size());
    ptyf_write(base + "_log_sigma_r.ptyf", ls);
}

std::span<double> as_doubles(ComplexField& f) {
    return {reinterpret_cast<double*>(f.data()), 2 * f.size()};
}
std::span<double> as_doubles(std::vector<Vec2>& v) {
    return {reinterpret_cast<double*>(v.data()), 2 * v.size()};
}

std::vector<double> stack_complex(const ComplexField& f) {
    std::vector<double> out(2 * f.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        out[i] = f[i].real();
        out[f.size() + i] = f[i].imag();
    }
    return out;
}

void add_unstacked(std::span<const double> stacked, double scale, ComplexField& into) {
    std::size_t n = into.size();
    for (std::size_t i = 0; i < n; ++i)
        into[i] += scale * cdouble(stacked[i], stacked[n + i]);
}

int object_size_of(const Probe& probe) { return probe.field.height() / 2; }

}  // namespace

double entropy_gaussian_image(const RealField& log_sigma_x) {
    double h = 0.0;
    for (double v : log_sigma_x) h += kLog2PiE + 2.0 * v;
    return h;
}

double entropy_gaussian_positions(std::span<const double> log_sigma_r) {
    double h = 0.0;
    for (double v : log_sigma_r) h += kLog2PiE + 2.0 * v;
    return h;
}

ViLossGrads vi_loss_and_grads(const VariationalState& state, const ViProblem& problem, Rng& rng,
                              ShiftMode mode, bool want_image, bool want_positions) {
    if (!problem.measurements || !problem.probe)
        throw std::invalid_argument("vi_loss_and_grads: missing measurements or probe");
    if (problem.batch < 1) throw std::invalid_argument("vi_loss_and_grads: batch must be >= 1");
    if (problem.prior.image == ImagePriorKind::Ssp && !problem.score)
        throw std::invalid_argument("vi_loss_and_grads: ssp prior requires a score model");

    const MeasurementSet& y = *problem.measurements;
    const Probe& probe = *problem.probe;
    const int K = y.count();
    const int H = state.mu_x.height(), W = state.mu_x.width();
    const std::size_t nx = state.mu_x.size();
    const bool blind = problem.optimize_positions;
    const bool sample_r = blind && problem.sample_positions;
    if (blind && static_cast<int>(state.mu_r.size()) != K)
        throw std::invalid_argument("vi_loss_and_grads: position count mismatch");
    if (!blind && !y.truth)
        throw std::invalid_argument("vi_loss_and_grads: non-blind mode needs truth positions");

    RealField sigma_x(H, W);
    for (std::size_t i = 0; i < nx; ++i) sigma_x[i] = std::exp(state.log_sigma_x[i]);
    std::vector<double> sigma_r(state.log_sigma_r.size());
    for (std::size_t k = 0; k < sigma_r.size(); ++k) sigma_r[k] = std::exp(state.log_sigma_r[k]);

    ViLossGrads out;
    out.g_mu_x = ComplexField(H, W, cdouble(0.0, 0.0));
    out.g_log_sigma_x = RealField(H, W, 0.0);
    out.g_mu_r.assign(std::max(K, 0), Vec2{0.0, 0.0});
    out.g_log_sigma_r.assign(state.log_sigma_r.size(), 0.0);

    RealField eps_re(H, W), eps_im(H, W);
    double loss_sum = 0.0;
    for (int b = 0; b < problem.batch; ++b) {
        ComplexField xb(H, W);
        for (std::size_t i = 0; i < nx; ++i) {
            eps_re[i] = rng.normal();
            eps_im[i] = rng.normal();
            xb[i] = state.mu_x[i] + sigma_x[i] * cdouble(eps_re[i], eps_im[i]);
        }

        ScanPositions rb;
        std::vector<Vec2> eps_r;
        if (!blind) {
            rb = *y.truth;
        } else if (sample_r) {
            rb.r.resize(K);
            eps_r.resize(K);
            for (int k = 0; k < K; ++k) {
                eps_r[k] = {rng.normal(), rng.normal()};
                rb.r[k] = {state.mu_r[k][0] + sigma_r[k] * eps_r[k][0],
                           state.mu_r[k][1] + sigma_r[k] * eps_r[k][1]};
            }
        } else {
            rb.r = state.mu_r;
        }

        double sample_loss = 0.0;
        ComplexField g_x;
        if (want_image) {
            NllGradX gx = nll_grad_x(y, xb, rb, probe, problem.likelihood, mode);
            sample_loss += gx.value;
            g_x = std::move(gx.grad);

            if (problem.prior.image == ImagePriorKind::HuberTv) {
                ValueGradField ht = huber_tv(xb, problem.prior.htv_alpha);
                sample_loss += problem.prior.htv_lambda * ht.value;
                for (std::size_t i = 0; i < nx; ++i)
                    g_x[i] += problem.prior.htv_lambda * ht.grad[i];
            } else if (problem.prior.image == ImagePriorKind::Ssp) {
                std::vector<double> xs = stack_complex(xb);
                std::vector<double> gb(xs.size());
                double bval = elbo_sde_with_grad(xs, *problem.score, problem.schedule,
                                                 problem.elbo_samples, rng, gb);
                sample_loss -= bval;
                add_unstacked(gb, -1.0, g_x);
            }
        }

        std::vector<Vec2> g_r;
        if (want_positions && blind) {
            NllGradR gr = nll_grad_r(y, xb, rb, probe, problem.likelihood);
            if (!want_image) sample_loss += gr.value;
            g_r = std::move(gr.grad);
        }

        if (blind && problem.prior.position_barrier) {
            ValueGradPositions lb = log_barrier(rb, problem.prior.barrier_lambda,
                                                problem.prior.barrier_leniency, H);
            sample_loss += lb.value;
            if (!g_r.empty())
                for (int k = 0; k < K; ++k) {
                    g_r[k][0] += lb.grad[k][0];
                    g_r[k][1] += lb.grad[k][1];
                }
        }

        if (want_image) {
            for (std::size_t i = 0; i < nx; ++i) {
                out.g_mu_x[i] += g_x[i];
                out.g_log_sigma_x[i] +=
                    sigma_x[i] * (g_x[i].real() * eps_re[i] + g_x[i].imag() * eps_im[i]);
            }
        }
        if (!g_r.empty()) {
            for (int k = 0; k < K; ++k) {
                out.g_mu_r[k][0] += g_r[k][0];
                out.g_mu_r[k][1] += g_r[k][1];
                if (sample_r)
                    out.g_log_sigma_r[k] +=
                        sigma_r[k] * (g_r[k][0] * eps_r[k][0] + g_r[k][1] * eps_r[k][1]);
            }
        }
        loss_sum += sample_loss;
    }

    const double inv_b = 1.0 / problem.batch;
    out.loss = loss_sum * inv_b;
    for (std::size_t i = 0; i < nx; ++i) {
        out.g_mu_x[i] *= inv_b;
        out.g_log_sigma_x[i] *= inv_b;
    }
    for (auto& g : out.g_mu_r) {
        g[0] *= inv_b;
        g[1] *= inv_b;
    }
    for (auto& g : out.g_log_sigma_r) g *= inv_b;

    // entropy terms (exact, not sampled)
    out.loss -= entropy_gaussian_image(state.log_sigma_x);
    if (want_image)
        for (auto& g : out.g_log_sigma_x) g -= 2.0;
    if (sample_r) {
        out.loss -= entropy_gaussian_positions(state.log_sigma_r);
        if (want_positions)
            for (auto& g : out.g_log_sigma_r) g -= 2.0;
    }
    return out;
}

namespace {

VariationalState init_state(const ReconstructionConfig& cfg, const MeasurementSet& y,
                            const Probe& probe, Rng& rng) {
    int H = object_size_of(probe);
    int K = y.count();
    VariationalState st;
    st.mu_x = ComplexField(H, H, cdouble(1.0, 0.0));  // free space
    st.log_sigma_x = RealField(H, H, std::log(cfg.init_sigma_x));
    st.log_sigma_r.assign(K, std::log(cfg.init_sigma_r_frac * H));
    if (cfg.blind) {
        st.mu_r.resize(K);
        for (auto& r : st.mu_r) {
            r[0] = rng.uniform(0.0, static_cast<double>(H));
            r[1] = rng.uniform(0.0, static_cast<double>(H));
        }
    } else {
        if (!y.truth)
            throw std::invalid_argument("reconstruction: non-blind mode needs truth positions");
        st.mu_r = y.truth->r;
    }
    return st;
}

class EngineOutput {
public:
    EngineOutput(const ReconstructionConfig& cfg) : cfg_(cfg) {
        if (!cfg.out_dir.empty()) {
            std::filesystem::create_directories(cfg.out_dir);
            csv_.open(cfg.out_dir + "/diagnostics.csv");
            csv_ << "iteration,loss,image_lr,mean_sigma_r\n" << std::setprecision(17);
        }
    }

    void record(RunResult& res, int iteration, double loss, double lr,
                const VariationalState& st) {
        double mean_sigma_r = 0.0;
        if (!st.log_sigma_r.empty()) {
            for (double v : st.log_sigma_r) mean_sigma_r += std::exp(v);
            mean_sigma_r /= static_cast<double>(st.log_sigma_r.size());
        }
        res.diagnostics.push_back({iteration, loss, lr, mean_sigma_r});
        res.loss_history.push_back(loss);
        if (csv_.is_open())
            csv_ << iteration << ',' << loss << ',' << lr << ',' << mean_sigma_r << '\n';
        if (cfg_.checkpoint_interval > 0 && !cfg_.out_dir.empty() &&
            (iteration + 1) % cfg_.checkpoint_interval == 0)
            write_state_checkpoint(cfg_.out_dir, iteration + 1, st);
    }

private:
    const ReconstructionConfig& cfg_;
    std::ofstream csv_;
};

void check_divergence(double loss, double& initial_loss, int iteration) {
    if (!std::isfinite(loss))
        throw DivergenceError("engine diverged: non-finite loss at iteration " +
                              std::to_string(iteration));
    if (std::isnan(initial_loss)) initial_loss = loss;
    double bound = 1e6 * std::max(1.0, std::abs(initial_loss));
    if (loss > bound)
        throw DivergenceError("engine diverged: loss " + std::to_string(loss) +
                              " exceeded 1e6 x initial at iteration " + std::to_string(iteration));
}

RunResult run_variational(const ReconstructionConfig& cfg, const MeasurementSet& y,
                          const Probe& probe, const ScoreModel* score, bool sample_positions) {
    Rng rng(cfg.seed);
    VariationalState st = init_state(cfg, y, probe, rng);
    const std::size_t nx = st.mu_x.size();
    const int K = y.count();

    ViProblem prob;
    prob.measurements = &y;
    prob.probe = &probe;
    prob.likelihood = cfg.likelihood;
    prob.prior = cfg.prior;
    prob.score = score;
    prob.schedule = cfg.schedule;
    prob.batch = cfg.batch;
    prob.elbo_samples = cfg.elbo_samples;
    prob.sample_positions = sample_positions;
    prob.optimize_positions = cfg.blind;

    AdamState adam_mu_x(2 * nx), adam_ls_x(nx);
    AdamState adam_mu_r(2 * K), adam_ls_r(K);

    RunResult res;
    EngineOutput output(cfg);
    double initial_loss = std::numeric_limits<double>::quiet_NaN();

    for (int l = 0; l < cfg.n_outer; ++l) {
        double lr = cosine_lr(l, cfg.lr_start_step, cfg.lr_end_step, cfg.lr_img_hi,
                              cfg.lr_img_lo);
        double loss = 0.0;
        for (int i = 0; i < cfg.n_img; ++i) {
            ViLossGrads lg = vi_loss_and_grads(st, prob, rng, ShiftMode::Rounded, true, false);
            loss = lg.loss;
            adam_step(adam_mu_x, as_doubles(st.mu_x), as_doubles(lg.g_mu_x), lr);
            adam_step(adam_ls_x, {st.log_sigma_x.data(), nx},
                      {lg.g_log_sigma_x.data(), nx}, lr);
        }
        if (cfg.blind) {
            for (int i = 0; i < cfg.n_par; ++i) {
                ViLossGrads lg = vi_loss_and_grads(st, prob, rng, ShiftMode::Rounded, false, true);
                adam_step(adam_mu_r, as_doubles(st.mu_r), as_doubles(lg.g_mu_r), cfg.lr_mu_r);
                if (sample_positions)
                    adam_step(adam_ls_r, st.log_sigma_r, lg.g_log_sigma_r, cfg.lr_log_sigma_r);
            }
        }
        check_divergence(loss, initial_loss, l);
        output.record(res, l, loss, lr, st);
    }
    if (!sample_positions)
        for (auto& v : st.log_sigma_r) v = std::log(1e-12);  // point-mass positions
    res.state = std::move(st);
    return res;
}

RunResult run_point(const ReconstructionConfig& cfg, const MeasurementSet& y, const Probe& probe,
                    const ScoreModel* score, bool with_reddiff) {
    if (with_reddiff && cfg.prior.lambda_rd > 0.0 && !score)
        throw std::invalid_argument("run_reddiff: score model required when lambda_rd > 0");
    Rng rng(cfg.seed);
    VariationalState st = init_state(cfg, y, probe, rng);
    const std::size_t nx = st.mu_x.size();
    const int K = y.count();
    const int H = st.mu_x.height();

    AdamState adam_x(2 * nx), adam_r(2 * K);
    RunResult res;
    EngineOutput output(cfg);
    double initial_loss = std::numeric_limits<double>::quiet_NaN();

    ScanPositions positions;
    auto current_positions = [&]() -> const ScanPositions& {
        positions.r = st.mu_r;
        return positions;
    };

    for (int l = 0; l < cfg.n_outer; ++l) {
        double lr = cosine_lr(l, cfg.lr_start_step, cfg.lr_end_step, cfg.lr_img_hi,
                              cfg.lr_img_lo);
        double loss = 0.0;
        for (int i = 0; i < cfg.n_img; ++i) {
            NllGradX gx = nll_grad_x(y, st.mu_x, current_positions(), probe, cfg.likelihood);
            loss = gx.value;
            ComplexField g = std::move(gx.grad);
            if (cfg.prior.image == ImagePriorKind::HuberTv) {
                ValueGradField ht = huber_tv(st.mu_x, cfg.prior.htv_alpha);
                loss += cfg.prior.htv_lambda * ht.value;
                for (std::size_t j = 0; j < nx; ++j)
                    g[j] += cfg.prior.htv_lambda * ht.grad[j];
            }
            if (with_reddiff && cfg.prior.lambda_rd > 0.0) {
                std::vector<double> xs = stack_complex(st.mu_x);
                std::vector<double> rg =
                    reddiff_reg_grad(xs, *score, cfg.schedule, cfg.prior.lambda_rd, rng);
                add_unstacked(rg, 1.0, g);
            }
            if (cfg.blind && cfg.prior.position_barrier) {
                ValueGradPositions lb = log_barrier(current_positions(),
                                                    cfg.prior.barrier_lambda,
                                                    cfg.prior.barrier_leniency, H);
                loss += lb.value;
            }
            adam_step(adam_x, as_doubles(st.mu_x), as_doubles(g), lr);
        }
        if (cfg.blind) {
            for (int i = 0; i < cfg.n_par; ++i) {
                NllGradR gr = nll_grad_r(y, st.mu_x, current_positions(), probe, cfg.likelihood);
                std::vector<Vec2> g = std::move(gr.grad);
                if (cfg.prior.position_barrier) {
                    ValueGradPositions lb = log_barrier(current_positions(),
                                                        cfg.prior.barrier_lambda,
                                                        cfg.prior.barrier_leniency, H);
                    for (int k = 0; k < K; ++k) {
                        g[k][0] += lb.grad[k][0];
                        g[k][1] += lb.grad[k][1];
                    }
                }
                adam_step(adam_r, as_doubles(st.mu_r), as_doubles(g), cfg.lr_mu_r);
            }
        }
        check_divergence(loss, initial_loss, l);
        output.record(res, l, loss, lr, st);
    }
    for (auto& v : st.log_sigma_x) v = std::log(1e-12);  // point estimate
    for (auto& v : st.log_sigma_r) v = std::log(1e-12);
    res.state = std::move(st);
    return res;
}

}  // namespace

RunResult run_vi(const ReconstructionConfig& config, const MeasurementSet& measurements,
                 const Probe& probe, const ScoreModel* score) {
    return run_variational(config, measurements, probe, score, /*sample_positions=*/true);
}

RunResult run_em(const ReconstructionConfig& config, const MeasurementSet& measurements,
                 const Probe& probe, const ScoreModel* score) {
    return run_variational(config, measurements, probe, score, /*sample_positions=*/false);
}

RunResult run_map(const ReconstructionConfig& config, const MeasurementSet& measurements,
                  const Probe& probe) {
    return run_point(config, measurements, probe, nullptr, /*with_reddiff=*/false);
}

RunResult run_reddiff(const ReconstructionConfig& config, const MeasurementSet& measurements,
                      const Probe& probe, const ScoreModel* score) {
    return run_point(config, measurements, probe, score, /*with_reddiff=*/true);
}

RunResult run_reconstruction(const ReconstructionConfig& config,
                             const MeasurementSet& measurements, const Probe& probe,
                             const ScoreModel* score) {
    switch (config.method) {
        case Method::Vi: return run_vi(config, measurements, probe, score);
        case Method::Em: return run_em(config, measurements, probe, score);
        case Method::Map: return run_map(config, measurements, probe);
        case Method::RedDiff: return run_reddiff(config, measurements, probe, score);
    }
    throw std::invalid_argument("run_reconstruction: unknown method");
}

}  // namespace ptyblind

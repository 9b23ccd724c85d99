#include "ptyblind/priors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ptyblind {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kLog2Pi = 1.8378770664093454835606594728112;
}  // namespace

double DiffusionSchedule::beta(double t) const {
    return beta_min + (beta_max - beta_min) * t;
}

double DiffusionSchedule::alpha(double t) const {
    if (t < 0.0 || t > T) throw std::invalid_argument("schedule: t outside [0, T]");
    if (kind == Kind::Ve) return 1.0;
    double integral = beta_min * t + 0.5 * (beta_max - beta_min) * t * t;
    return std::exp(-0.5 * integral);
}

double DiffusionSchedule::sigma(double t) const {
    if (t < 0.0 || t > T) throw std::invalid_argument("schedule: t outside [0, T]");
    if (kind == Kind::Ve) return g_min * std::pow(g_max / g_min, t);
    double a = alpha(t);
    return std::sqrt(std::max(0.0, 1.0 - a * a));
}

double DiffusionSchedule::g_squared(double t) const {
    if (kind == Kind::Ve) {
        double s = sigma(t);
        return 2.0 * s * s * std::log(g_max / g_min);
    }
    return beta(t);
}

double DiffusionSchedule::drift_divergence(double t, int dimension) const {
    if (kind == Kind::Ve) return 0.0;
    return -0.5 * beta(t) * dimension;
}

double DiffusionSchedule::log_terminal_density(double squared_norm, int dimension) const {
    double var = kind == Kind::Ve ? g_max * g_max : 1.0;
    return -0.5 * dimension * (kLog2Pi + std::log(var)) - 0.5 * squared_norm / var;
}

SchedulePoint vp_schedule(double t, double beta_min, double beta_max) {
    DiffusionSchedule s;
    s.beta_min = beta_min;
    s.beta_max = beta_max;
    return {s.alpha(t), s.sigma(t), s.beta(t)};
}

void ScoreModel::jacobian_vec(std::span<const double> x, double t, std::span<const double> v,
                              std::span<double> out) const {
    double norm = 0.0;
    for (double vi : v) norm += vi * vi;
    norm = std::sqrt(norm);
    if (norm == 0.0) {
        std::fill(out.begin(), out.end(), 0.0);
        return;
    }
    double h = 1e-4 / norm * std::sqrt(static_cast<double>(x.size()));
    std::vector<double> xp(x.begin(), x.end()), xm(x.begin(), x.end());
    for (std::size_t i = 0; i < x.size(); ++i) {
        xp[i] += h * v[i];
        xm[i] -= h * v[i];
    }
    std::vector<double> sp(x.size()), sm(x.size());
    evaluate(xp, t, sp);
    evaluate(xm, t, sm);
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = (sp[i] - sm[i]) / (2.0 * h);
}

AnalyticGaussianScore::AnalyticGaussianScore(std::vector<double> mean,
                                             std::vector<double> variance,
                                             DiffusionSchedule schedule)
    : mean_(std::move(mean)), variance_(std::move(variance)), schedule_(schedule) {
    if (mean_.size() != variance_.size())
        throw std::invalid_argument("AnalyticGaussianScore: mean/variance size mismatch");
}

AnalyticGaussianScore::AnalyticGaussianScore(std::vector<double> mean, double variance,
                                             DiffusionSchedule schedule)
    : mean_(std::move(mean)), variance_(mean_.size(), variance), schedule_(schedule) {}

void AnalyticGaussianScore::evaluate(std::span<const double> x, double t,
                                     std::span<double> out) const {
    double a = schedule_.alpha(t), s = schedule_.sigma(t);
    for (std::size_t i = 0; i < x.size(); ++i)
        out[i] = -(x[i] - a * mean_[i]) / (a * a * variance_[i] + s * s);
}

void AnalyticGaussianScore::jacobian_vec(std::span<const double>, double t,
                                         std::span<const double> v, std::span<double> out) const {
    double a = schedule_.alpha(t), s = schedule_.sigma(t);
    for (std::size_t i = 0; i < v.size(); ++i)
        out[i] = -v[i] / (a * a * variance_[i] + s * s);
}

double AnalyticGaussianScore::log_density(std::span<const double> x, double t) const {
    double a = schedule_.alpha(t), s = schedule_.sigma(t);
    double ll = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double var = a * a * variance_[i] + s * s;
        double d = x[i] - a * mean_[i];
        ll += -0.5 * (kLog2Pi + std::log(var)) - 0.5 * d * d / var;
    }
    return ll;
}

ValueGradField huber_tv(const ComplexField& x, double alpha) {
    if (alpha <= 0.0) throw std::invalid_argument("huber_tv: alpha must be > 0");
    int H = x.height(), W = x.width();
    ValueGradField out;
    out.grad = ComplexField(H, W, cdouble(0.0, 0.0));
    for (int h = 0; h < H; ++h) {
        for (int w = 0; w < W; ++w) {
            // replicate boundary: differences vanish at the last row/column
            cdouble u1 = w + 1 < W ? x(h, w) - x(h, w + 1) : cdouble(0.0, 0.0);
            cdouble u2 = h + 1 < H ? x(h, w) - x(h + 1, w) : cdouble(0.0, 0.0);
            double t = std::sqrt(std::norm(u1) + std::norm(u2));
            double scale;  // h'(t)/t, finite through t = 0
            if (t <= alpha) {
                out.value += 0.5 * t * t / alpha;
                scale = 1.0 / alpha;
            } else {
                out.value += t - 0.5 * alpha;
                scale = 1.0 / t;
            }
            if (w + 1 < W) {
                out.grad(h, w) += scale * u1;
                out.grad(h, w + 1) -= scale * u1;
            }
            if (h + 1 < H) {
                out.grad(h, w) += scale * u2;
                out.grad(h + 1, w) -= scale * u2;
            }
        }
    }
    return out;
}

ValueGradPositions log_barrier(const ScanPositions& r, double lambda_pos, double leniency,
                               int object_size) {
    if (lambda_pos < 0.0) throw std::invalid_argument("log_barrier: lambda_pos must be >= 0");
    if (leniency <= 0.0) throw std::invalid_argument("log_barrier: leniency must be > 0");
    // [-l, H + l] maps onto [-1, 1]
    double half_width = (object_size + 2.0 * leniency) / 2.0;
    double mid = object_size / 2.0;
    constexpr double clip = 1.0 - 1e-9;

    ValueGradPositions out;
    out.grad.assign(r.r.size(), Vec2{0.0, 0.0});
    for (std::size_t k = 0; k < r.r.size(); ++k) {
        for (int c = 0; c < 2; ++c) {
            double s = (r.r[k][c] - mid) / half_width;
            s = std::clamp(s, -clip, clip);  // straight-through clip
            out.value += lambda_pos * (-std::log(1.0 - s) - std::log(1.0 + s));
            out.grad[k][c] = lambda_pos * (2.0 * s / (1.0 - s * s)) / half_width;
        }
    }
    return out;
}

namespace {

// One draw of the integrand: t ~ U[t_eps, T], x_t = alpha x + sigma eps.
// h = |s(x_t) - z|^2 - |z|^2 + corr with z = -eps/sigma and corr the drift
// divergence contribution -(2/g^2) div f. grad_out, when given, receives
// the pathwise derivative -(T - t_eps) g^2 alpha J^T (s - z) accumulated.
double elbo_sample(std::span<const double> x, const ScoreModel& score,
                   const DiffusionSchedule& sched, Rng& rng, std::span<double> grad_out,
                   std::vector<double>& scratch) {
    const int d = static_cast<int>(x.size());
    double t = rng.uniform(sched.t_eps, sched.T);
    double a = sched.alpha(t), s = sched.sigma(t), g2 = sched.g_squared(t);

    std::vector<double>& xt = scratch;
    xt.resize(2 * d);
    double* eps = xt.data() + d;
    for (int i = 0; i < d; ++i) {
        eps[i] = rng.normal();
        xt[i] = a * x[i] + s * eps[i];
    }
    std::vector<double> sv(d);
    score.evaluate(std::span<const double>(xt.data(), d), t, sv);

    double h = 0.0;
    for (int i = 0; i < d; ++i) {
        double z = -eps[i] / s;
        double diff = sv[i] - z;
        h += diff * diff - z * z;
        sv[i] = diff;  // reuse: sv now holds s - z
    }
    h += -(2.0 / g2) * sched.drift_divergence(t, d);

    double width = sched.T - sched.t_eps;
    if (!grad_out.empty()) {
        std::vector<double> jv(d);
        score.jacobian_vec(std::span<const double>(xt.data(), d), t, sv, jv);
        double c = -width * g2 * a;
        for (int i = 0; i < d; ++i) grad_out[i] += c * jv[i];
    }
    return -0.5 * width * g2 * h;
}

// E[log pi(x_T)] in closed form: x_T ~ N(alpha_T x, sigma_T^2 I).
double terminal_term(std::span<const double> x, const DiffusionSchedule& sched,
                     std::span<double> grad_out) {
    const int d = static_cast<int>(x.size());
    double aT = sched.alpha(sched.T), sT = sched.sigma(sched.T);
    double var = sched.kind == DiffusionSchedule::Kind::Ve ? sched.g_max * sched.g_max : 1.0;
    double sq = 0.0;
    for (double v : x) sq += v * v;
    double expected_sq = aT * aT * sq + d * sT * sT;
    if (!grad_out.empty()) {
        double c = -aT * aT / var;
        for (int i = 0; i < d; ++i) grad_out[i] += c * x[i];
    }
    return -0.5 * d * (kLog2Pi + std::log(var)) - 0.5 * expected_sq / var;
}

}  // namespace

double elbo_sde(std::span<const double> x, const ScoreModel& score,
                const DiffusionSchedule& schedule, int n_samples, Rng& rng) {
    return elbo_sde_with_grad(x, score, schedule, n_samples, rng, {});
}

double elbo_sde_with_grad(std::span<const double> x, const ScoreModel& score,
                          const DiffusionSchedule& schedule, int n_samples, Rng& rng,
                          std::span<double> grad_out) {
    if (n_samples < 1) throw std::invalid_argument("elbo_sde: n_samples must be >= 1");
    if (static_cast<int>(x.size()) != score.dimension())
        throw std::invalid_argument("elbo_sde: dimension mismatch");
    if (!grad_out.empty()) std::fill(grad_out.begin(), grad_out.end(), 0.0);

    std::vector<double> scratch;
    double integral = 0.0;
    for (int i = 0; i < n_samples; ++i)
        integral += elbo_sample(x, score, schedule, rng, grad_out, scratch);
    integral /= n_samples;
    if (!grad_out.empty())
        for (auto& g : grad_out) g /= n_samples;

    return terminal_term(x, schedule, grad_out) + integral;
}

std::vector<double> reddiff_reg_grad(std::span<const double> x, const ScoreModel& score,
                                     const DiffusionSchedule& schedule, double lambda_rd,
                                     Rng& rng) {
    if (lambda_rd < 0.0) throw std::invalid_argument("reddiff_reg_grad: lambda_rd must be >= 0");
    const int d = static_cast<int>(x.size());
    std::vector<double> grad(d, 0.0);
    if (lambda_rd == 0.0) return grad;

    double t = rng.uniform(schedule.t_eps, schedule.T);
    double a = schedule.alpha(t), s = schedule.sigma(t);
    std::vector<double> xt(d), eps(d);
    for (int i = 0; i < d; ++i) {
        eps[i] = rng.normal();
        xt[i] = a * x[i] + s * eps[i];
    }
    std::vector<double> sv(d);
    score.evaluate(xt, t, sv);

    double weight = lambda_rd * s / a;               // inverse SNR weighting
    double c = -(schedule.T - schedule.t_eps) * weight;  // importance correction
    for (int i = 0; i < d; ++i) grad[i] = c * (sv[i] + eps[i] / s);  // s - z, z = -eps/sigma
    return grad;
}

}  // namespace ptyblind

#pragma once

#include "ptyblind/forward.hpp"
#include "ptyblind/grid.hpp"
#include "ptyblind/rng.hpp"

#include <memory>
#include <span>
#include <vector>

namespace ptyblind {

/// Diffusion-time schedule. VP: beta(t) linear in [beta_min, beta_max],
/// alpha = exp(-integral beta / 2), alpha^2 + sigma^2 = 1. VE: sigma grows
/// geometrically from g_min to g_max, alpha = 1.
struct DiffusionSchedule {
    enum class Kind { Vp, Ve };
    Kind kind = Kind::Vp;
    double beta_min = 0.01, beta_max = 20.0;  // vp
    double g_min = 0.01, g_max = 50.0;        // ve
    double t_eps = 1e-3;
    double T = 1.0;

    double alpha(double t) const;
    double sigma(double t) const;
    double beta(double t) const;       // vp drift coefficient
    double g_squared(double t) const;  // squared diffusion coefficient
    /// Divergence of the drift for a d-dimensional state at x (vp drift is
    /// -beta x / 2; ve drift is zero).
    double drift_divergence(double t, int dimension) const;
    /// log pi(v) of the terminal reference density, for a squared norm and
    /// dimension (vp: standard normal; ve: N(0, sigma(T)^2)).
    double log_terminal_density(double squared_norm, int dimension) const;
};

struct SchedulePoint {
    double alpha, sigma, beta;
};
/// Convenience accessor matching the (alpha, sigma, beta) triple.
SchedulePoint vp_schedule(double t, double beta_min = 0.01, double beta_max = 20.0);

/// Score evaluator s(x, t) on stacked real coordinates.
class ScoreModel {
public:
    virtual ~ScoreModel() = default;
    virtual int dimension() const = 0;
    virtual void evaluate(std::span<const double> x, double t, std::span<double> out) const = 0;

    /// J v for the score Jacobian J at (x, t). Exact scores have symmetric
    /// Jacobians (they are Hessians of log-densities), so the default uses a
    /// central difference along v; analytic models override with the exact
    /// product.
    virtual void jacobian_vec(std::span<const double> x, double t, std::span<const double> v,
                              std::span<double> out) const;
};

/// Exact diffused score of a Gaussian prior N(m, diag(c)):
/// s(x, t) = -(x - alpha m) / (alpha^2 c + sigma^2) per coordinate.
class AnalyticGaussianScore : public ScoreModel {
public:
    AnalyticGaussianScore(std::vector<double> mean, std::vector<double> variance,
                          DiffusionSchedule schedule);
    AnalyticGaussianScore(std::vector<double> mean, double variance, DiffusionSchedule schedule);

    int dimension() const override { return static_cast<int>(mean_.size()); }
    void evaluate(std::span<const double> x, double t, std::span<double> out) const override;
    void jacobian_vec(std::span<const double> x, double t, std::span<const double> v,
                      std::span<double> out) const override;

    /// Closed-form diffused log density log N(x; alpha m, (alpha^2 c + sigma^2) I).
    double log_density(std::span<const double> x, double t) const;

private:
    std::vector<double> mean_, variance_;
    DiffusionSchedule schedule_;
};

struct ValueGradField {
    double value = 0.0;
    ComplexField grad;
};

/// Smoothed isotropic complex TV with replicate boundary; the Huber knee
/// sits at alpha. Gradient uses the stacked re/im convention.
ValueGradField huber_tv(const ComplexField& x, double alpha = 1e-5);

struct ValueGradPositions {
    double value = 0.0;
    std::vector<Vec2> grad;
};

/// Log-barrier on positions: the object extent plus a leniency margin l
/// maps affinely onto (-1, 1)^2 and each component pays
/// -log(1-s)-log(1+s). Positions are clipped into the open box first and
/// the gradient passes straight through the clip.
ValueGradPositions log_barrier(const ScanPositions& r, double lambda_pos, double leniency,
                               int object_size);

/// Monte Carlo estimate of the SDE evidence lower bound b(x) (averaged over
/// n_samples draws of t ~ U[t_eps, T] and the diffused state). With an
/// exact score this is an unbiased estimate of the prior log-density.
double elbo_sde(std::span<const double> x, const ScoreModel& score,
                const DiffusionSchedule& schedule, int n_samples, Rng& rng);

/// Same estimate plus its gradient w.r.t. x (pathwise; uses score
/// Jacobian-vector products).
double elbo_sde_with_grad(std::span<const double> x, const ScoreModel& score,
                          const DiffusionSchedule& schedule, int n_samples, Rng& rng,
                          std::span<double> grad_out);

/// Single-sample denoising-residual regularization gradient with inverse
/// SNR weighting w(t) = lambda_rd sigma/alpha: estimates
/// -int w(t) E[s(x_t, t) - z] dt. Added to the likelihood gradient by the
/// caller; zero when lambda_rd == 0.
std::vector<double> reddiff_reg_grad(std::span<const double> x, const ScoreModel& score,
                                     const DiffusionSchedule& schedule, double lambda_rd,
                                     Rng& rng);

}  // namespace ptyblind

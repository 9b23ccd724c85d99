#pragma once

#include "ptyblind/likelihood.hpp"
#include "ptyblind/optim.hpp"
#include "ptyblind/priors.hpp"

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace ptyblind {

/// Mean-field Gaussian posterior: per-pixel complex mean with one shared
/// re/im std, per-position mean with one shared y/x std. Stds live in log
/// space so positivity is structural.
struct VariationalState {
    ComplexField mu_x;
    RealField log_sigma_x;
    std::vector<Vec2> mu_r;
    std::vector<double> log_sigma_r;
};

enum class Method { Map, Vi, Em, RedDiff };

enum class ImagePriorKind { None, HuberTv, Ssp };

struct PriorConfig {
    ImagePriorKind image = ImagePriorKind::None;
    double htv_lambda = 5.0;
    double htv_alpha = 1e-5;
    double lambda_rd = 20.0;  // RED-Diff regularization weight
    bool position_barrier = false;
    double barrier_lambda = 100.0;
    double barrier_leniency = 20.0;
};

struct ReconstructionConfig {
    Method method = Method::Vi;
    PriorConfig prior;
    LikelihoodSpec likelihood;
    DiffusionSchedule schedule;  // for SSP and RED-Diff

    bool blind = true;  // false: positions frozen at the stored truth
    int n_outer = 10000;
    int n_img = 1;
    int n_par = 10;
    int batch = 4;

    double lr_mu_r = 10.0;
    double lr_log_sigma_r = 0.01;
    double lr_img_hi = 0.1;
    double lr_img_lo = 0.001;
    std::int64_t lr_start_step = 4000;
    std::int64_t lr_end_step = 6000;

    double init_sigma_x = 0.1;
    double init_sigma_r_frac = 0.25;  // sigma_r = frac * object size
    int elbo_samples = 1;
    std::uint64_t seed = 0;
    double divergence_factor = 1e6;

    int checkpoint_interval = 0;  // outer steps between snapshots; 0 = none
    std::string out_dir;          // diagnostics/checkpoint directory; empty = none
};

struct DivergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Entropy of the image block: sum over pixels of log(2 pi e sigma^2)
/// (two real dimensions sharing one sigma).
double entropy_gaussian_image(const RealField& log_sigma_x);

/// Entropy of the position block: sum over k of log(2 pi e sigma_k^2).
double entropy_gaussian_positions(std::span<const double> log_sigma_r);

struct ViProblem {
    const MeasurementSet* measurements = nullptr;
    const Probe* probe = nullptr;
    LikelihoodSpec likelihood;
    PriorConfig prior;
    const ScoreModel* score = nullptr;
    DiffusionSchedule schedule;
    int batch = 4;
    int elbo_samples = 1;
    bool sample_positions = true;     // false: point-mass positions (EM)
    bool optimize_positions = true;   // false: non-blind
};

struct ViLossGrads {
    double loss = 0.0;
    ComplexField g_mu_x;
    RealField g_log_sigma_x;
    std::vector<Vec2> g_mu_r;
    std::vector<double> g_log_sigma_r;
};

/// One reparametrized Monte Carlo estimate of the blind VI objective and
/// its pathwise gradients. Image gradients ride the rounded forward;
/// position gradients ride the continuous shift at the sampled (unrounded)
/// positions. mode switches the loss itself to the continuous operator,
/// which is what finite-difference checks need.
ViLossGrads vi_loss_and_grads(const VariationalState& state, const ViProblem& problem, Rng& rng,
                              ShiftMode mode = ShiftMode::Rounded, bool want_image = true,
                              bool want_positions = true);

struct DiagnosticsRow {
    int iteration = 0;
    double loss = 0.0;
    double image_lr = 0.0;
    double mean_sigma_r = 0.0;
};

struct RunResult {
    VariationalState state;
    std::vector<DiagnosticsRow> diagnostics;
    /// Per-iteration losses (same values as diagnostics; kept for equality
    /// checks between engines).
    std::vector<double> loss_history;
};

/// Blind variational Bayes with optional surrogate score prior
/// (alternating image / position blocks, Adam on both).
RunResult run_vi(const ReconstructionConfig& config, const MeasurementSet& measurements,
                 const Probe& probe, const ScoreModel* score = nullptr);

/// VI image block with point-mass positions (no position sampling or
/// entropy); the position block only moves the means.
RunResult run_em(const ReconstructionConfig& config, const MeasurementSet& measurements,
                 const Probe& probe, const ScoreModel* score = nullptr);

/// Joint MAP descent on image and positions.
RunResult run_map(const ReconstructionConfig& config, const MeasurementSet& measurements,
                  const Probe& probe);

/// Point-estimate alternation with the denoising-residual regularizer on
/// the image step. lambda_rd = 0 reduces exactly to run_map.
RunResult run_reddiff(const ReconstructionConfig& config, const MeasurementSet& measurements,
                      const Probe& probe, const ScoreModel* score);

/// Dispatch by config.method.
RunResult run_reconstruction(const ReconstructionConfig& config,
                             const MeasurementSet& measurements, const Probe& probe,
                             const ScoreModel* score = nullptr);

}  // namespace ptyblind

// ptyblind: simulation, reconstruction and evaluation for position-blind
// far-field ptychography.
//
// Subcommands: simulate, reconstruct, evaluate, landscape, render.
// Every option can come from a config file (--config, INI sections match
// the dotted option names); command-line flags override file values.

#include "CLI11.hpp"
#include "json.hpp"

#include "ptyblind/eval.hpp"
#include "ptyblind/field.hpp"
#include "ptyblind/inference.hpp"
#include "ptyblind/phantom.hpp"
#include "ptyblind/ptyf_io.hpp"
#include "ptyblind/render.hpp"
#include "ptyblind/score_remote.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

using namespace ptyblind;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string env_or(const char* name, const std::string& fallback) {
    const char* v = std::getenv(name);
    return v ? std::string(v) : fallback;
}

void write_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << "\n";
}

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    json j;
    in >> j;
    return j;
}

json metrics_to_json(const MetricReport& m) {
    json j;
    j["apsnr_db"] = m.apsnr;  // serialized as null when infinite
    j["assim"] = m.assim;
    j["crms"] = m.crms;
    j["pos_correct"] = m.pos_correct;
    j["position_count"] = m.position_count;
    j["applied_shift"] = {m.applied_shift[0], m.applied_shift[1]};
    return j;
}

// ---------------------------------------------------------------- simulate

struct SimulateOptions {
    std::string out_dir;
    int object_size = 64;
    std::string object_mode = "full";
    std::string object_file;
    std::uint64_t object_seed = 1;
    double d_ap = 0.5;
    int mask_block = 4;
    std::uint64_t probe_seed = 1;
    double n_phot = 0.0;  // > 0 scales the probe
    int k = 100;
    std::uint64_t position_seed = 1;
    std::string noise_kind = "gaussian";
    double sigma_eps = 0.005;
    double snr_db = std::numeric_limits<double>::quiet_NaN();
    std::uint64_t noise_seed = 1;
    bool beamstop = false;
};

int cmd_simulate(const SimulateOptions& opt) {
    fs::create_directories(opt.out_dir);

    ComplexField object;
    OpticalProfile profile;
    bool have_profile = false;
    if (!opt.object_file.empty()) {
        object = read_ptyf_complex(opt.object_file);
        if (object.height() != object.width())
            throw std::runtime_error("object file must hold a square array");
    } else {
        profile = generate_phantom(opt.object_size, phantom_mode_from_string(opt.object_mode),
                                   opt.object_seed);
        object = transmission_from_profile(profile);
        have_profile = true;
    }
    const int H = object.height();

    ApertureSpec spec;
    spec.array_size = 2 * H;
    spec.d_ap = opt.d_ap;
    spec.zernike_coeffs = random_zernike_coeffs(opt.probe_seed);
    spec.mask_block = opt.mask_block;
    spec.seed = opt.probe_seed;
    Probe probe = make_probe(spec);
    if (opt.n_phot > 0.0) probe = scale_probe_photons(probe, opt.n_phot);

    ScanPositions positions = sample_positions(opt.k, H, opt.position_seed);

    MaskField mask(2 * H, 2 * H, 1);
    if (opt.beamstop) mask = beamstop_mask(opt.d_ap, 2 * H);

    NoiseSpec noise;
    if (opt.noise_kind == "gaussian") {
        noise.kind = NoiseKind::Gaussian;
        noise.sigma_eps = opt.sigma_eps;
        if (std::isfinite(opt.snr_db)) {
            std::vector<RealField> clean(positions.count());
            for (int i = 0; i < positions.count(); ++i)
                clean[i] = noiseless_intensity(positions.r[i], object, probe);
            noise.sigma_eps = sigma_for_snr_db(clean, opt.snr_db);
        }
    } else if (opt.noise_kind == "poisson") {
        noise.kind = NoiseKind::Poisson;
        noise.n_phot = opt.n_phot;
        if (opt.n_phot <= 0.0)
            throw std::runtime_error("poisson noise requires --probe.n-phot > 0");
    } else {
        throw std::runtime_error("unknown noise kind: " + opt.noise_kind);
    }

    MeasurementSet meas =
        simulate_measurements(object, probe, positions, noise, mask, opt.noise_seed);

    auto path = [&](const char* name) { return opt.out_dir + "/" + name; };
    write_ptyf(path("object.ptyf"), object);
    if (have_profile) {
        write_ptyf(path("object_delta.ptyf"), profile.delta);
        write_ptyf(path("object_beta.ptyf"), profile.beta);
    }
    write_ptyf(path("probe.ptyf"), probe.field);
    write_ptyf(path("positions.ptyf"), positions);
    write_ptyf(path("patterns.ptyf"), meas.patterns);
    write_ptyf(path("mask.ptyf"), mask);
    render_png(object, path("object.png"), RenderMode::Complex);
    render_png(probe.field, path("probe.png"), RenderMode::Complex);

    json side;
    side["format_version"] = 1;
    side["k"] = opt.k;
    side["object_size"] = H;
    side["probe_size"] = 2 * H;
    side["d_ap"] = opt.d_ap;
    side["mask_block"] = opt.mask_block;
    side["beamstop"] = opt.beamstop;
    side["photon_scale"] = probe.photon_scale;
    side["noise"] = {{"kind", opt.noise_kind},
                     {"sigma_eps", noise.sigma_eps},
                     {"n_phot", noise.n_phot}};
    side["seeds"] = {{"object", opt.object_seed},
                     {"probe", opt.probe_seed},
                     {"positions", opt.position_seed},
                     {"noise", opt.noise_seed}};
    side["files"] = {{"object", "object.ptyf"},   {"probe", "probe.ptyf"},
                     {"positions", "positions.ptyf"}, {"patterns", "patterns.ptyf"},
                     {"mask", "mask.ptyf"}};
    write_json(path("measurements.json"), side);

    std::cout << "simulate: wrote " << opt.k << " patterns (" << 2 * H << "x" << 2 * H
              << ") to " << opt.out_dir << "\n";
    return 0;
}

// ------------------------------------------------------------- reconstruct

struct ReconstructOptions {
    std::string data_dir;
    std::string out_dir;
    std::string method = "vi";
    std::string prior = "none";  // none | htv | ssp
    double prior_lambda = 5.0;
    double prior_alpha = 1e-5;
    bool barrier = false;
    double barrier_lambda = 100.0;
    double barrier_leniency = 20.0;
    double lambda_rd = 20.0;
    std::string score;  // analytic[:variance] | remote:<endpoint>
    std::string lik_kind = "auto";
    double lik_sigma = 0.0;  // 0 = take from sidecar
    double lik_clamp = 1.0;
    bool non_blind = false;
    int n_outer = 10000;
    int n_img = 1;
    int n_par = 10;
    int batch = 4;
    double lr_mu_r = 10.0;
    double lr_sigma_r = 0.01;
    double lr_hi = 0.1;
    double lr_lo = 0.001;
    std::int64_t lr_start = 4000;
    std::int64_t lr_end = 6000;
    double sigma_x0 = 0.1;
    double sigma_r0_frac = 0.25;
    int elbo_samples = 1;
    std::uint64_t seed = 0;
    int repeats = 1;
    int checkpoint_interval = 0;
};

struct LoadedData {
    ComplexField object;  // ground truth (if present)
    bool have_truth_object = false;
    Probe probe;
    MeasurementSet meas;
    json sidecar;
};

LoadedData load_data(const std::string& dir) {
    LoadedData d;
    d.sidecar = read_json(dir + "/measurements.json");
    d.probe.field = read_ptyf_complex(dir + "/" + d.sidecar["files"]["probe"].get<std::string>());
    d.probe.photon_scale = d.sidecar.value("photon_scale", 0.0);
    d.meas.patterns =
        read_ptyf_real_stack(dir + "/" + d.sidecar["files"]["patterns"].get<std::string>());
    d.meas.detector_mask =
        read_ptyf_mask(dir + "/" + d.sidecar["files"]["mask"].get<std::string>());
    std::string pos_file = dir + "/" + d.sidecar["files"]["positions"].get<std::string>();
    if (fs::exists(pos_file)) d.meas.truth = read_ptyf_positions(pos_file);
    d.meas.noise.sigma_eps = d.sidecar["noise"]["sigma_eps"].get<double>();
    d.meas.noise.n_phot = d.sidecar["noise"]["n_phot"].get<double>();
    d.meas.noise.kind = d.sidecar["noise"]["kind"].get<std::string>() == "poisson"
                            ? NoiseKind::Poisson
                            : NoiseKind::Gaussian;
    std::string obj_file = dir + "/" + d.sidecar["files"]["object"].get<std::string>();
    if (fs::exists(obj_file)) {
        d.object = read_ptyf_complex(obj_file);
        d.have_truth_object = true;
    }
    return d;
}

std::unique_ptr<ScoreModel> make_score(const std::string& spec, int H, int W,
                                       const DiffusionSchedule& schedule) {
    if (spec.empty()) return nullptr;
    if (spec.rfind("analytic", 0) == 0) {
        double variance = 1.0;
        auto colon = spec.find(':');
        if (colon != std::string::npos) variance = std::stod(spec.substr(colon + 1));
        // free-space mean: real plane 1, imaginary plane 0
        std::vector<double> mean(2 * H * W, 0.0);
        std::fill(mean.begin(), mean.begin() + static_cast<std::ptrdiff_t>(H) * W, 1.0);
        return std::make_unique<AnalyticGaussianScore>(std::move(mean), variance, schedule);
    }
    if (spec.rfind("remote:", 0) == 0)
        return std::make_unique<RemoteScoreModel>(spec.substr(7), H, W);
    throw std::runtime_error("unknown score spec: " + spec);
}

int cmd_reconstruct(const ReconstructOptions& opt) {
    LoadedData data = load_data(opt.data_dir);
    const int H = data.probe.field.height() / 2;
    fs::create_directories(opt.out_dir);

    ReconstructionConfig cfg;
    if (opt.method == "map")
        cfg.method = Method::Map;
    else if (opt.method == "vi")
        cfg.method = Method::Vi;
    else if (opt.method == "em")
        cfg.method = Method::Em;
    else if (opt.method == "reddiff")
        cfg.method = Method::RedDiff;
    else
        throw std::runtime_error("unknown method: " + opt.method);

    if (opt.prior == "none")
        cfg.prior.image = ImagePriorKind::None;
    else if (opt.prior == "htv")
        cfg.prior.image = ImagePriorKind::HuberTv;
    else if (opt.prior == "ssp")
        cfg.prior.image = ImagePriorKind::Ssp;
    else
        throw std::runtime_error("unknown prior: " + opt.prior);
    cfg.prior.htv_lambda = opt.prior_lambda;
    cfg.prior.htv_alpha = opt.prior_alpha;
    cfg.prior.lambda_rd = opt.lambda_rd;
    cfg.prior.position_barrier = opt.barrier;
    cfg.prior.barrier_lambda = opt.barrier_lambda;
    cfg.prior.barrier_leniency = opt.barrier_leniency;

    if (opt.lik_kind == "gaussian")
        cfg.likelihood.kind = LikelihoodKind::Gaussian;
    else if (opt.lik_kind == "poisson")
        cfg.likelihood.kind = LikelihoodKind::PoissonApprox;
    else if (opt.lik_kind == "auto")
        cfg.likelihood.kind = data.meas.noise.kind == NoiseKind::Poisson
                                  ? LikelihoodKind::PoissonApprox
                                  : LikelihoodKind::Gaussian;
    else
        throw std::runtime_error("unknown likelihood kind: " + opt.lik_kind);
    cfg.likelihood.sigma_eps = opt.lik_sigma > 0.0 ? opt.lik_sigma
                               : data.meas.noise.sigma_eps > 0.0 ? data.meas.noise.sigma_eps
                                                                 : 0.005;
    cfg.likelihood.clamp_floor = opt.lik_clamp;

    cfg.blind = !opt.non_blind;
    cfg.n_outer = opt.n_outer;
    cfg.n_img = opt.n_img;
    cfg.n_par = opt.n_par;
    cfg.batch = opt.batch;
    cfg.lr_mu_r = opt.lr_mu_r;
    cfg.lr_log_sigma_r = opt.lr_sigma_r;
    cfg.lr_img_hi = opt.lr_hi;
    cfg.lr_img_lo = opt.lr_lo;
    cfg.lr_start_step = opt.lr_start;
    cfg.lr_end_step = opt.lr_end;
    cfg.init_sigma_x = opt.sigma_x0;
    cfg.init_sigma_r_frac = opt.sigma_r0_frac;
    cfg.elbo_samples = opt.elbo_samples;
    cfg.checkpoint_interval = opt.checkpoint_interval;

    std::string score_spec = opt.score.empty()
                                 ? env_or("PTYBLIND_SCORE_ENDPOINT", "").empty()
                                       ? ""
                                       : "remote:" + env_or("PTYBLIND_SCORE_ENDPOINT", "")
                                 : opt.score;
    std::unique_ptr<ScoreModel> score = make_score(score_spec, H, H, cfg.schedule);
    bool needs_score = cfg.prior.image == ImagePriorKind::Ssp ||
                       (cfg.method == Method::RedDiff && cfg.prior.lambda_rd > 0.0);
    if (needs_score && !score)
        throw std::runtime_error(
            "configuration error: method/prior requires a score model; pass --score "
            "analytic[:variance] or --score remote:<endpoint> (or set "
            "PTYBLIND_SCORE_ENDPOINT)");

    std::vector<ComplexField> registered_runs;
    json summary = json::array();
    for (int rep = 0; rep < opt.repeats; ++rep) {
        ReconstructionConfig run_cfg = cfg;
        run_cfg.seed = opt.seed + static_cast<std::uint64_t>(rep);
        std::string run_dir =
            opt.repeats == 1 ? opt.out_dir
                             : opt.out_dir + "/run_" + std::to_string(rep);
        fs::create_directories(run_dir);
        run_cfg.out_dir = run_dir;

        RunResult result = run_reconstruction(run_cfg, data.meas, data.probe, score.get());

        write_ptyf(run_dir + "/recon_mu_x.ptyf", result.state.mu_x);
        write_ptyf(run_dir + "/recon_log_sigma_x.ptyf", result.state.log_sigma_x);
        ScanPositions est;
        est.r = result.state.mu_r;
        write_ptyf(run_dir + "/positions_est.ptyf", est);
        render_png(result.state.mu_x, run_dir + "/recon.png", RenderMode::Complex);
        RealField sigma_map(result.state.log_sigma_x.height(),
                            result.state.log_sigma_x.width());
        ComplexField sigma_complex(sigma_map.height(), sigma_map.width());
        for (std::size_t i = 0; i < sigma_map.size(); ++i)
            sigma_complex[i] = std::exp(result.state.log_sigma_x[i]);
        render_png(sigma_complex, run_dir + "/recon_sigma.png", RenderMode::Magnitude);

        if (data.have_truth_object && data.meas.truth) {
            MetricReport report = evaluate_reconstruction(result.state.mu_x, data.object, est,
                                                          *data.meas.truth);
            write_json(run_dir + "/metrics.json", metrics_to_json(report));
            summary.push_back(metrics_to_json(report));
            RegisterResult reg = register_estimate(result.state.mu_x, data.object, est);
            registered_runs.push_back(reg.x);
            std::cout << "run " << rep << ": aPSNR="
                      << (std::isfinite(report.apsnr) ? std::to_string(report.apsnr) : "inf")
                      << " dB, aSSIM=" << report.assim << ", cRMS=" << report.crms
                      << ", posCorrect=" << report.pos_correct << "/"
                      << report.position_count << "\n";
        } else {
            std::cout << "run " << rep << ": finished (" << result.loss_history.size()
                      << " iterations, no ground truth for metrics)\n";
        }
    }

    if (!summary.empty()) write_json(opt.out_dir + "/metrics_all_runs.json", summary);
    if (registered_runs.size() >= 2) {
        RealField pop = population_std(registered_runs);
        write_ptyf(opt.out_dir + "/population_std.ptyf", pop);
        write_png(opt.out_dir + "/population_std.png", render_real_normalized(pop));
    }
    return 0;
}

// -------------------------------------------------------- evaluate, render

int cmd_evaluate(const std::string& estimate, const std::string& truth,
                 const std::string& pos_est, const std::string& pos_true,
                 const std::string& out_path) {
    ComplexField x_hat = read_ptyf_complex(estimate);
    ComplexField x = read_ptyf_complex(truth);
    ScanPositions r_hat = read_ptyf_positions(pos_est);
    ScanPositions r_true = read_ptyf_positions(pos_true);
    MetricReport report = evaluate_reconstruction(x_hat, x, r_hat, r_true);
    json j = metrics_to_json(report);
    write_json(out_path, j);
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_landscape(const std::string& data_dir, const std::string& object_file,
                  const std::string& probe_file, int extent, double ry, double rx,
                  const std::string& out_dir) {
    ComplexField object;
    Probe probe;
    if (!data_dir.empty()) {
        LoadedData d = load_data(data_dir);
        if (!d.have_truth_object)
            throw std::runtime_error("landscape: data dir has no object array");
        object = std::move(d.object);
        probe = std::move(d.probe);
    } else {
        object = read_ptyf_complex(object_file);
        probe.field = read_ptyf_complex(probe_file);
    }
    if (std::isnan(ry)) ry = object.height() / 2.0;
    if (std::isnan(rx)) rx = object.width() / 2.0;

    fs::create_directories(out_dir);
    RealField ls = landscape_scan(object, probe, {ry, rx}, extent);
    write_ptyf(out_dir + "/landscape.ptyf", ls);
    write_png(out_dir + "/landscape.png", render_real_normalized(ls));
    std::cout << "landscape: " << ls.height() << "x" << ls.width() << " grid around ("
              << ry << ", " << rx << ") written to " << out_dir << "\n";
    return 0;
}

int cmd_render(const std::string& input, const std::string& mode, const std::string& output) {
    ComplexField f = read_ptyf_complex(input);
    render_png(f, output, render_mode_from_string(mode));
    std::cout << "render: wrote " << output << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"position-blind far-field ptychography toolkit"};
    app.require_subcommand(1);
    app.set_config("--config", "", "INI config file; sections match dotted option names");

    SimulateOptions sim;
    CLI::App* simulate = app.add_subcommand("simulate", "generate a synthetic measurement set");
    simulate->add_option("--out", sim.out_dir, "output directory")
        ->default_val(env_or("PTYBLIND_OUT_DIR", "out"));
    simulate->add_option("--object.size", sim.object_size);
    simulate->add_option("--object.mode", sim.object_mode)
        ->check(CLI::IsMember({"full", "phase_only", "weak_phase"}));
    simulate->add_option("--object.seed", sim.object_seed);
    simulate->add_option("--object.file", sim.object_file, "use this object instead of a phantom");
    simulate->add_option("--probe.d-ap", sim.d_ap);
    simulate->add_option("--probe.block", sim.mask_block, "phase-mask block size; 0 disables");
    simulate->add_option("--probe.seed", sim.probe_seed);
    simulate->add_option("--probe.n-phot", sim.n_phot, "photon scaling (needed for poisson)");
    simulate->add_option("--sim.k", sim.k, "number of measurements");
    simulate->add_option("--sim.position-seed", sim.position_seed);
    simulate->add_option("--noise.kind", sim.noise_kind)
        ->check(CLI::IsMember({"gaussian", "poisson"}));
    simulate->add_option("--noise.sigma", sim.sigma_eps);
    simulate->add_option("--noise.snr-db", sim.snr_db,
                         "choose gaussian sigma to hit this measurement SNR");
    simulate->add_option("--noise.seed", sim.noise_seed);
    simulate->add_flag("--beamstop", sim.beamstop, "apply the central beamstop mask");

    ReconstructOptions rec;
    CLI::App* reconstruct = app.add_subcommand("reconstruct", "run a reconstruction engine");
    reconstruct->add_option("--data", rec.data_dir, "directory written by simulate")->required();
    reconstruct->add_option("--out", rec.out_dir)
        ->default_val(env_or("PTYBLIND_OUT_DIR", "recon"));
    reconstruct->add_option("--method", rec.method)
        ->check(CLI::IsMember({"map", "vi", "em", "reddiff"}));
    reconstruct->add_option("--prior", rec.prior)->check(CLI::IsMember({"none", "htv", "ssp"}));
    reconstruct->add_option("--prior.lambda", rec.prior_lambda);
    reconstruct->add_option("--prior.alpha", rec.prior_alpha);
    reconstruct->add_flag("--barrier", rec.barrier, "position log-barrier prior");
    reconstruct->add_option("--barrier.lambda", rec.barrier_lambda);
    reconstruct->add_option("--barrier.leniency", rec.barrier_leniency);
    reconstruct->add_option("--lambda-rd", rec.lambda_rd);
    reconstruct->add_option("--score", rec.score,
                            "analytic[:variance] or remote:<endpoint>");
    reconstruct->add_option("--lik.kind", rec.lik_kind)
        ->check(CLI::IsMember({"auto", "gaussian", "poisson"}));
    reconstruct->add_option("--lik.sigma", rec.lik_sigma);
    reconstruct->add_option("--lik.clamp", rec.lik_clamp);
    reconstruct->add_flag("--non-blind", rec.non_blind, "freeze positions at the stored truth");
    reconstruct->add_option("--opt.outer", rec.n_outer);
    reconstruct->add_option("--opt.n-img", rec.n_img);
    reconstruct->add_option("--opt.n-par", rec.n_par);
    reconstruct->add_option("--opt.batch", rec.batch);
    reconstruct->add_option("--opt.lr-mu-r", rec.lr_mu_r);
    reconstruct->add_option("--opt.lr-sigma-r", rec.lr_sigma_r);
    reconstruct->add_option("--opt.lr-hi", rec.lr_hi);
    reconstruct->add_option("--opt.lr-lo", rec.lr_lo);
    reconstruct->add_option("--opt.lr-start", rec.lr_start);
    reconstruct->add_option("--opt.lr-end", rec.lr_end);
    reconstruct->add_option("--opt.sigma-x0", rec.sigma_x0);
    reconstruct->add_option("--opt.sigma-r0-frac", rec.sigma_r0_frac);
    reconstruct->add_option("--opt.elbo-samples", rec.elbo_samples);
    reconstruct->add_option("--seed", rec.seed);
    reconstruct->add_option("--repeats", rec.repeats, "independent runs with derived seeds");
    reconstruct->add_option("--checkpoint-interval", rec.checkpoint_interval);

    std::string ev_estimate, ev_truth, ev_pos_est, ev_pos_true, ev_out = "metrics.json";
    CLI::App* evaluate = app.add_subcommand("evaluate", "metrics for a stored estimate");
    evaluate->add_option("--estimate", ev_estimate)->required();
    evaluate->add_option("--truth", ev_truth)->required();
    evaluate->add_option("--positions-est", ev_pos_est)->required();
    evaluate->add_option("--positions-true", ev_pos_true)->required();
    evaluate->add_option("--out", ev_out);

    std::string ls_data, ls_object, ls_probe, ls_out = "landscape";
    int ls_extent = 24;
    double ls_ry = std::numeric_limits<double>::quiet_NaN();
    double ls_rx = std::numeric_limits<double>::quiet_NaN();
    CLI::App* landscape = app.add_subcommand("landscape", "position-loss landscape scan");
    landscape->add_option("--data", ls_data, "simulate output directory");
    landscape->add_option("--object", ls_object, "object ptyf (alternative to --data)");
    landscape->add_option("--probe", ls_probe, "probe ptyf (alternative to --data)");
    landscape->add_option("--extent", ls_extent, "half extent of the offset grid");
    landscape->add_option("--position-y", ls_ry, "true position (default: object center)");
    landscape->add_option("--position-x", ls_rx);
    landscape->add_option("--out", ls_out);

    std::string rd_input, rd_mode = "complex", rd_output;
    CLI::App* render = app.add_subcommand("render", "render a complex ptyf array to png");
    render->add_option("--input", rd_input)->required();
    render->add_option("--mode", rd_mode)
        ->check(CLI::IsMember({"complex", "magnitude", "phase"}));
    render->add_option("--out", rd_output)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) return cmd_simulate(sim);
        if (reconstruct->parsed()) return cmd_reconstruct(rec);
        if (evaluate->parsed())
            return cmd_evaluate(ev_estimate, ev_truth, ev_pos_est, ev_pos_true, ev_out);
        if (landscape->parsed())
            return cmd_landscape(ls_data, ls_object, ls_probe, ls_extent, ls_ry, ls_rx, ls_out);
        if (render->parsed()) return cmd_render(rd_input, rd_mode, rd_output);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

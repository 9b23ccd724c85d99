#include "ptyblind/eval.hpp"

#include "ptyblind/field.hpp"
#include "ptyblind/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ptyblind {
namespace {

RealField clipped_magnitude(const ComplexField& f) {
    RealField out(f.height(), f.width());
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = std::min(std::abs(f[i]), 1.0);
    return out;
}

ComplexField circshift(const ComplexField& f, int dy, int dx) {
    int H = f.height(), W = f.width();
    dy = ((dy % H) + H) % H;
    dx = ((dx % W) + W) % W;
    ComplexField out(H, W);
    for (int h = 0; h < H; ++h)
        for (int w = 0; w < W; ++w) out((h + dy) % H, (w + dx) % W) = f(h, w);
    return out;
}

}  // namespace

RegisterResult register_estimate(const ComplexField& x_hat, const ComplexField& x_true,
                                 const ScanPositions& r_hat, int max_shift) {
    if (!x_hat.same_shape(x_true))
        throw std::invalid_argument("register_estimate: shape mismatch");
    int H = x_hat.height(), W = x_hat.width();
    RealField mag_hat = clipped_magnitude(x_hat);
    RealField mag_true = clipped_magnitude(x_true);

    // scan small displacements first so exact ties favor the smallest shift
    std::vector<std::array<int, 2>> offsets;
    offsets.reserve((2 * max_shift + 1) * (2 * max_shift + 1));
    for (int dy = -max_shift; dy <= max_shift; ++dy)
        for (int dx = -max_shift; dx <= max_shift; ++dx) offsets.push_back({dy, dx});
    std::stable_sort(offsets.begin(), offsets.end(), [](const auto& a, const auto& b) {
        return a[0] * a[0] + a[1] * a[1] < b[0] * b[0] + b[1] * b[1];
    });

    double best = std::numeric_limits<double>::infinity();
    int best_dy = 0, best_dx = 0;
    for (const auto& [dy, dx] : offsets) {
        double err = 0.0;
        for (int h = 0; h < H; ++h) {
            int hs = ((h - dy) % H + H) % H;  // shifted estimate at (h, w)
            for (int w = 0; w < W; ++w) {
                int ws = ((w - dx) % W + W) % W;
                double d = mag_hat(hs, ws) - mag_true(h, w);
                err += d * d;
            }
        }
        if (err < best) {
            best = err;
            best_dy = dy;
            best_dx = dx;
        }
    }

    RegisterResult out;
    out.shift = {best_dy, best_dx};
    out.x = circshift(x_hat, best_dy, best_dx);
    out.r.r = r_hat.r;
    for (auto& r : out.r.r) {
        r[0] += best_dy;
        r[1] += best_dx;
    }
    return out;
}

double apsnr(const ComplexField& x_hat, const ComplexField& x_true) {
    if (!x_hat.same_shape(x_true)) throw std::invalid_argument("apsnr: shape mismatch");
    double mse = 0.0;
    for (std::size_t i = 0; i < x_hat.size(); ++i) {
        double d = std::min(std::abs(x_hat[i]), 1.0) - std::abs(x_true[i]);
        mse += d * d;
    }
    mse /= static_cast<double>(x_hat.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / mse);
}

double assim(const ComplexField& x_hat, const ComplexField& x_true) {
    if (!x_hat.same_shape(x_true)) throw std::invalid_argument("assim: shape mismatch");
    constexpr int win = 11;
    constexpr int rad = win / 2;
    constexpr double std_dev = 1.5;
    constexpr double c1 = 0.01 * 0.01;  // (k1 L)^2, L = 1
    constexpr double c2 = 0.03 * 0.03;
    int H = x_hat.height(), W = x_hat.width();
    if (H < win || W < win) throw std::invalid_argument("assim: image smaller than the window");

    double kernel[win];
    double ksum = 0.0;
    for (int i = 0; i < win; ++i) {
        double d = i - rad;
        kernel[i] = std::exp(-0.5 * d * d / (std_dev * std_dev));
        ksum += kernel[i];
    }
    for (double& k : kernel) k /= ksum;

    RealField a = clipped_magnitude(x_hat);
    RealField b(x_true.height(), x_true.width());
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = std::abs(x_true[i]);

    // separable Gaussian filtering of a, b, a^2, b^2, ab over valid rows
    auto filter_valid = [&](const RealField& src) {
        RealField rows(H, W - 2 * rad, 0.0);
        for (int h = 0; h < H; ++h)
            for (int w = rad; w < W - rad; ++w) {
                double s = 0.0;
                for (int i = 0; i < win; ++i) s += kernel[i] * src(h, w - rad + i);
                rows(h, w - rad) = s;
            }
        RealField out(H - 2 * rad, W - 2 * rad, 0.0);
        for (int h = rad; h < H - rad; ++h)
            for (int w = 0; w < W - 2 * rad; ++w) {
                double s = 0.0;
                for (int i = 0; i < win; ++i) s += kernel[i] * rows(h - rad + i, w);
                out(h - rad, w) = s;
            }
        return out;
    };

    RealField a2(H, W), b2(H, W), ab(H, W);
    for (std::size_t i = 0; i < a.size(); ++i) {
        a2[i] = a[i] * a[i];
        b2[i] = b[i] * b[i];
        ab[i] = a[i] * b[i];
    }
    RealField mu_a = filter_valid(a), mu_b = filter_valid(b);
    RealField m_a2 = filter_valid(a2), m_b2 = filter_valid(b2), m_ab = filter_valid(ab);

    double total = 0.0;
    for (std::size_t i = 0; i < mu_a.size(); ++i) {
        double va = m_a2[i] - mu_a[i] * mu_a[i];
        double vb = m_b2[i] - mu_b[i] * mu_b[i];
        double cov = m_ab[i] - mu_a[i] * mu_b[i];
        double num = (2.0 * mu_a[i] * mu_b[i] + c1) * (2.0 * cov + c2);
        double den = (mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + c1) * (va + vb + c2);
        total += num / den;
    }
    return total / static_cast<double>(mu_a.size());
}

double crms(const ComplexField& x_hat, const ComplexField& x_true) {
    if (!x_hat.same_shape(x_true)) throw std::invalid_argument("crms: shape mismatch");
    cdouble corr_num(0.0, 0.0);
    double hat_energy = 0.0, true_energy = 0.0;
    for (std::size_t i = 0; i < x_hat.size(); ++i) {
        corr_num += x_true[i] * std::conj(x_hat[i]);
        hat_energy += std::norm(x_hat[i]);
        true_energy += std::norm(x_true[i]);
    }
    if (true_energy == 0.0) throw std::invalid_argument("crms: zero ground truth");
    cdouble gamma = hat_energy > 0.0 ? corr_num / hat_energy : cdouble(0.0, 0.0);
    double resid = 0.0;
    for (std::size_t i = 0; i < x_hat.size(); ++i) resid += std::norm(x_true[i] - gamma * x_hat[i]);
    return resid / true_energy;
}

int pos_correct(const ScanPositions& r_hat, const ScanPositions& r_true) {
    if (r_hat.count() != r_true.count())
        throw std::invalid_argument("pos_correct: position count mismatch");
    int count = 0;
    for (int k = 0; k < r_hat.count(); ++k) {
        double dy = std::round(r_hat.r[k][0] - r_true.r[k][0]);
        double dx = std::round(r_hat.r[k][1] - r_true.r[k][1]);
        if (std::abs(dy) <= 1.0 && std::abs(dx) <= 1.0) ++count;
    }
    return count;
}

MetricReport evaluate_reconstruction(const ComplexField& x_hat, const ComplexField& x_true,
                                     const ScanPositions& r_hat, const ScanPositions& r_true,
                                     int max_shift) {
    RegisterResult reg = register_estimate(x_hat, x_true, r_hat, max_shift);
    MetricReport report;
    report.apsnr = apsnr(reg.x, x_true);
    report.assim = assim(reg.x, x_true);
    report.crms = crms(reg.x, x_true);
    report.pos_correct = pos_correct(reg.r, r_true);
    report.position_count = r_true.count();
    report.applied_shift = reg.shift;
    return report;
}

RealField landscape_scan(const ComplexField& x, const Probe& probe, Vec2 r_true,
                         int half_extent) {
    int side = 2 * half_extent + 1;
    RealField reference = noiseless_intensity(r_true, x, probe);
    RealField landscape(side, side, 0.0);
    parallel_for(static_cast<std::size_t>(side) * side, [&](std::size_t idx) {
        int i = static_cast<int>(idx) / side, j = static_cast<int>(idx) % side;
        Vec2 r{r_true[0] + (i - half_extent), r_true[1] + (j - half_extent)};
        RealField intensity_r = noiseless_intensity(r, x, probe);
        double loss = 0.0;
        for (std::size_t p = 0; p < reference.size(); ++p) {
            double d = reference[p] - intensity_r[p];
            loss += d * d;
        }
        landscape[idx] = loss;
    });
    return landscape;
}

int count_local_minima_below(const RealField& landscape, double threshold) {
    int H = landscape.height(), W = landscape.width();
    int count = 0;
    for (int h = 1; h + 1 < H; ++h) {
        for (int w = 1; w + 1 < W; ++w) {
            double v = landscape(h, w);
            if (v >= threshold) continue;
            bool is_min = true;
            for (int dy = -1; dy <= 1 && is_min; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    if (dy == 0 && dx == 0) continue;
                    if (landscape(h + dy, w + dx) <= v) {
                        is_min = false;
                        break;
                    }
                }
            if (is_min) ++count;
        }
    }
    return count;
}

RealField population_std(const std::vector<ComplexField>& runs) {
    if (runs.size() < 2) throw std::invalid_argument("population_std: need at least 2 runs");
    for (const auto& r : runs)
        if (!r.same_shape(runs[0])) throw std::invalid_argument("population_std: shape mismatch");
    int H = runs[0].height(), W = runs[0].width();
    double n = static_cast<double>(runs.size());
    RealField out(H, W, 0.0);
    for (std::size_t i = 0; i < out.size(); ++i) {
        double mean_re = 0.0, mean_im = 0.0;
        for (const auto& r : runs) {
            mean_re += r[i].real();
            mean_im += r[i].imag();
        }
        mean_re /= n;
        mean_im /= n;
        double var_re = 0.0, var_im = 0.0;
        for (const auto& r : runs) {
            var_re += (r[i].real() - mean_re) * (r[i].real() - mean_re);
            var_im += (r[i].imag() - mean_im) * (r[i].imag() - mean_im);
        }
        var_re /= n - 1.0;
        var_im /= n - 1.0;
        out[i] = std::sqrt(0.5 * (var_re + var_im));
    }
    return out;
}

}  // namespace ptyblind

#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace ptyblind {

/// Per-parameter Adam moment accumulators.
struct AdamState {
    std::vector<double> m, v;
    std::int64_t step = 0;
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

    AdamState() = default;
    explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

/// Standard bias-corrected Adam update, in place.
void adam_step(AdamState& state, std::span<double> params, std::span<const double> grad,
               double lr);

/// lr_hi before start_step, half-cosine down to lr_lo by end_step.
double cosine_lr(std::int64_t step, std::int64_t start_step = 4000,
                 std::int64_t end_step = 6000, double lr_hi = 0.1, double lr_lo = 0.001);

}  // namespace ptyblind

#include "ptyblind/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace ptyblind {

void adam_step(AdamState& state, std::span<double> params, std::span<const double> grad,
               double lr) {
    if (params.size() != grad.size() || params.size() != state.m.size())
        throw std::invalid_argument("adam_step: size mismatch");
    state.step += 1;
    double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grad[i];
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grad[i] * grad[i];
        double mhat = state.m[i] / bc1;
        double vhat = state.v[i] / bc2;
        params[i] -= lr * mhat / (std::sqrt(vhat) + state.eps);
    }
}

double cosine_lr(std::int64_t step, std::int64_t start_step, std::int64_t end_step, double lr_hi,
                 double lr_lo) {
    if (start_step >= end_step) throw std::invalid_argument("cosine_lr: start must precede end");
    if (step <= start_step) return lr_hi;
    if (step >= end_step) return lr_lo;
    double frac = static_cast<double>(step - start_step) / (end_step - start_step);
    return lr_lo + 0.5 * (lr_hi - lr_lo) * (1.0 + std::cos(M_PI * frac));
}

}  // namespace ptyblind

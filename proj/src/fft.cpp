#include "ptyblind/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>

namespace ptyblind {
namespace {

struct PlanKey {
    int h, w, sign;
    bool operator<(const PlanKey& o) const {
        if (h != o.h) return h < o.h;
        if (w != o.w) return w < o.w;
        return sign < o.sign;
    }
};

// Plan creation is not thread-safe; execution via the new-array interface is.
class PlanCache {
public:
    fftw_plan get(int h, int w, int sign) {
        std::lock_guard<std::mutex> lock(mutex_);
        PlanKey key{h, w, sign};
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;

        std::size_t n = static_cast<std::size_t>(h) * w;
        fftw_complex* in = fftw_alloc_complex(n);
        fftw_complex* out = fftw_alloc_complex(n);
        if (!in || !out) throw std::bad_alloc();
        fftw_plan plan = fftw_plan_dft_2d(h, w, in, out, sign, FFTW_ESTIMATE);
        fftw_free(in);
        fftw_free(out);
        if (!plan) throw std::runtime_error("fftw_plan_dft_2d failed");
        plans_.emplace(key, plan);
        return plan;
    }

    ~PlanCache() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

private:
    std::mutex mutex_;
    std::map<PlanKey, fftw_plan> plans_;
};

PlanCache& cache() {
    static PlanCache c;
    return c;
}

void execute(const ComplexField& in, ComplexField& out, int sign) {
    if (!in.same_shape(out)) throw std::invalid_argument("fft: shape mismatch");
    if (in.data() == out.data()) throw std::invalid_argument("fft: in-place not supported");
    fftw_plan plan = cache().get(in.height(), in.width(), sign);
    // const_cast: FFTW's API is not const-qualified; out-of-place c2c
    // transforms do not modify the input.
    fftw_execute_dft(plan,
                     reinterpret_cast<fftw_complex*>(const_cast<cdouble*>(in.data())),
                     reinterpret_cast<fftw_complex*>(out.data()));
    double scale = 1.0 / std::sqrt(static_cast<double>(in.size()));
    for (auto& v : out) v *= scale;
}

}  // namespace

ComplexField fft2(const ComplexField& f) {
    ComplexField out(f.height(), f.width());
    execute(f, out, FFTW_FORWARD);
    return out;
}

ComplexField ifft2(const ComplexField& f) {
    ComplexField out(f.height(), f.width());
    execute(f, out, FFTW_BACKWARD);
    return out;
}

void fft2_into(const ComplexField& in, ComplexField& out) { execute(in, out, FFTW_FORWARD); }
void ifft2_into(const ComplexField& in, ComplexField& out) { execute(in, out, FFTW_BACKWARD); }

namespace {
ComplexField roll(const ComplexField& f, int dy, int dx) {
    ComplexField out(f.height(), f.width());
    int H = f.height(), W = f.width();
    for (int h = 0; h < H; ++h) {
        int hs = (h + dy) % H;
        for (int w = 0; w < W; ++w) {
            int ws = (w + dx) % W;
            out(hs, ws) = f(h, w);
        }
    }
    return out;
}
}  // namespace

ComplexField fftshift2(const ComplexField& f) { return roll(f, f.height() / 2, f.width() / 2); }

ComplexField ifftshift2(const ComplexField& f) {
    return roll(f, (f.height() + 1) / 2, (f.width() + 1) / 2);
}

}  // namespace ptyblind

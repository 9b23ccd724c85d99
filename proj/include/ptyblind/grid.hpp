#pragma once

#include <complex>
#include <cstdint>
#include <cstdlib>
#include <new>
#include <stdexcept>
#include <vector>

namespace ptyblind {

using cdouble = std::complex<double>;

// 64-byte alignment so FFTW new-array execution sees the same alignment
// class as the buffers its plans were created with.
template <typename T>
struct AlignedAllocator {
    using value_type = T;
    static constexpr std::size_t alignment = 64;

    AlignedAllocator() = default;
    template <typename U>
    AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

    T* allocate(std::size_t n) {
        if (n == 0) return nullptr;
        void* p = ::operator new(n * sizeof(T), std::align_val_t(alignment));
        return static_cast<T*>(p);
    }
    void deallocate(T* p, std::size_t) noexcept {
        ::operator delete(p, std::align_val_t(alignment));
    }
    bool operator==(const AlignedAllocator&) const { return true; }
};

/// Dense row-major 2-D array.
template <typename T>
class Grid {
public:
    Grid() = default;
    Grid(int height, int width, T fill = T{})
        : height_(height), width_(width) {
        if (height < 1 || width < 1)
            throw std::invalid_argument("Grid: dimensions must be >= 1");
        data_.assign(static_cast<std::size_t>(height) * width, fill);
    }

    int height() const { return height_; }
    int width() const { return width_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    T& operator()(int h, int w) { return data_[static_cast<std::size_t>(h) * width_ + w]; }
    const T& operator()(int h, int w) const { return data_[static_cast<std::size_t>(h) * width_ + w]; }
    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }

    auto begin() { return data_.begin(); }
    auto end() { return data_.end(); }
    auto begin() const { return data_.begin(); }
    auto end() const { return data_.end(); }

    bool same_shape(const Grid& other) const {
        return height_ == other.height_ && width_ == other.width_;
    }

private:
    int height_ = 0, width_ = 0;
    std::vector<T, AlignedAllocator<T>> data_;
};

using ComplexField = Grid<cdouble>;
using RealField = Grid<double>;
using MaskField = Grid<std::uint8_t>;  // 1 = pixel used, 0 = excluded

}  // namespace ptyblind

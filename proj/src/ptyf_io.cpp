#include "ptyblind/ptyf_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

static_assert(std::endian::native == std::endian::little,
              "PTYF I/O writes native memory and requires a little-endian host");

namespace ptyblind {

std::size_t ptyf_element_size(PtyfDtype dtype) {
    switch (dtype) {
        case PtyfDtype::F32: return 4;
        case PtyfDtype::F64: return 8;
        case PtyfDtype::C64: return 8;
        case PtyfDtype::C128: return 16;
    }
    throw std::invalid_argument("ptyf: unknown dtype");
}

void ptyf_write(const std::string& path, const PtyfArray& array) {
    if (array.dims.empty() || array.dims.size() > 255)
        throw std::invalid_argument("ptyf_write: bad rank");
    if (array.payload.size() != array.element_count() * ptyf_element_size(array.dtype))
        throw std::invalid_argument("ptyf_write: payload size does not match dims");

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("ptyf_write: cannot open " + path);
    const char magic[4] = {'P', 'T', 'Y', 'F'};
    out.write(magic, 4);
    std::uint8_t header[8] = {1, static_cast<std::uint8_t>(array.dtype),
                              static_cast<std::uint8_t>(array.dims.size()), 0, 0, 0, 0, 0};
    out.write(reinterpret_cast<const char*>(header), 8);
    out.write(reinterpret_cast<const char*>(array.dims.data()),
              static_cast<std::streamsize>(array.dims.size() * sizeof(std::uint64_t)));
    out.write(reinterpret_cast<const char*>(array.payload.data()),
              static_cast<std::streamsize>(array.payload.size()));
    if (!out) throw std::runtime_error("ptyf_write: write failed for " + path);
}

PtyfArray ptyf_read(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("ptyf_read: cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "PTYF", 4) != 0)
        throw std::runtime_error("ptyf_read: bad magic in " + path);
    std::uint8_t header[8];
    in.read(reinterpret_cast<char*>(header), 8);
    if (!in) throw std::runtime_error("ptyf_read: truncated header in " + path);
    if (header[0] != 1) throw std::runtime_error("ptyf_read: unsupported version");
    if (header[1] > 3) throw std::runtime_error("ptyf_read: unknown dtype");

    PtyfArray array;
    array.dtype = static_cast<PtyfDtype>(header[1]);
    array.dims.resize(header[2]);
    in.read(reinterpret_cast<char*>(array.dims.data()),
            static_cast<std::streamsize>(array.dims.size() * sizeof(std::uint64_t)));
    array.payload.resize(array.element_count() * ptyf_element_size(array.dtype));
    in.read(reinterpret_cast<char*>(array.payload.data()),
            static_cast<std::streamsize>(array.payload.size()));
    if (!in) throw std::runtime_error("ptyf_read: truncated payload in " + path);
    return array;
}

namespace {

template <typename T>
void copy_payload(PtyfArray& array, const T* data, std::size_t count) {
    array.payload.resize(count * sizeof(T));
    std::memcpy(array.payload.data(), data, array.payload.size());
}

void expect(bool ok, const std::string& what) {
    if (!ok) throw std::runtime_error("ptyf: " + what);
}

}  // namespace

void write_ptyf(const std::string& path, const RealField& f) {
    PtyfArray a;
    a.dtype = PtyfDtype::F64;
    a.dims = {static_cast<std::uint64_t>(f.height()), static_cast<std::uint64_t>(f.width())};
    copy_payload(a, f.data(), f.size());
    ptyf_write(path, a);
}

void write_ptyf(const std::string& path, const ComplexField& f) {
    PtyfArray a;
    a.dtype = PtyfDtype::C128;
    a.dims = {static_cast<std::uint64_t>(f.height()), static_cast<std::uint64_t>(f.width())};
    copy_payload(a, f.data(), f.size());
    ptyf_write(path, a);
}

void write_ptyf(const std::string& path, const std::vector<RealField>& stack) {
    expect(!stack.empty(), "cannot write empty stack");
    PtyfArray a;
    a.dtype = PtyfDtype::F64;
    a.dims = {stack.size(), static_cast<std::uint64_t>(stack[0].height()),
              static_cast<std::uint64_t>(stack[0].width())};
    a.payload.resize(stack.size() * stack[0].size() * sizeof(double));
    std::size_t offset = 0;
    for (const auto& f : stack) {
        expect(f.height() == stack[0].height() && f.width() == stack[0].width(),
               "inconsistent stack shapes");
        std::memcpy(a.payload.data() + offset, f.data(), f.size() * sizeof(double));
        offset += f.size() * sizeof(double);
    }
    ptyf_write(path, a);
}

void write_ptyf(const std::string& path, const ScanPositions& positions) {
    PtyfArray a;
    a.dtype = PtyfDtype::F64;
    a.dims = {positions.r.size(), 2};
    copy_payload(a, reinterpret_cast<const double*>(positions.r.data()), 2 * positions.r.size());
    ptyf_write(path, a);
}

void write_ptyf(const std::string& path, const MaskField& mask) {
    RealField f(mask.height(), mask.width());
    for (std::size_t i = 0; i < mask.size(); ++i) f[i] = mask[i] ? 1.0 : 0.0;
    write_ptyf(path, f);
}

RealField read_ptyf_real(const std::string& path) {
    PtyfArray a = ptyf_read(path);
    expect(a.dtype == PtyfDtype::F64 && a.dims.size() == 2, "expected 2-d f64 array in " + path);
    RealField f(static_cast<int>(a.dims[0]), static_cast<int>(a.dims[1]));
    std::memcpy(f.data(), a.payload.data(), a.payload.size());
    return f;
}

ComplexField read_ptyf_complex(const std::string& path) {
    PtyfArray a = ptyf_read(path);
    expect(a.dtype == PtyfDtype::C128 && a.dims.size() == 2,
           "expected 2-d c128 array in " + path);
    ComplexField f(static_cast<int>(a.dims[0]), static_cast<int>(a.dims[1]));
    std::memcpy(f.data(), a.payload.data(), a.payload.size());
    return f;
}

std::vector<RealField> read_ptyf_real_stack(const std::string& path) {
    PtyfArray a = ptyf_read(path);
    expect(a.dtype == PtyfDtype::F64 && a.dims.size() == 3, "expected 3-d f64 array in " + path);
    std::vector<RealField> stack(a.dims[0],
                                 RealField(static_cast<int>(a.dims[1]),
                                           static_cast<int>(a.dims[2])));
    std::size_t bytes = a.dims[1] * a.dims[2] * sizeof(double);
    for (std::size_t k = 0; k < stack.size(); ++k)
        std::memcpy(stack[k].data(), a.payload.data() + k * bytes, bytes);
    return stack;
}

ScanPositions read_ptyf_positions(const std::string& path) {
    PtyfArray a = ptyf_read(path);
    expect(a.dtype == PtyfDtype::F64 && a.dims.size() == 2 && a.dims[1] == 2,
           "expected Kx2 f64 array in " + path);
    ScanPositions pos;
    pos.r.resize(a.dims[0]);
    std::memcpy(pos.r.data(), a.payload.data(), a.payload.size());
    return pos;
}

MaskField read_ptyf_mask(const std::string& path) {
    RealField f = read_ptyf_real(path);
    MaskField m(f.height(), f.width());
    for (std::size_t i = 0; i < f.size(); ++i) m[i] = f[i] != 0.0 ? 1 : 0;
    return m;
}

}  // namespace ptyblind

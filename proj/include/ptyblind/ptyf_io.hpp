#pragma once

#include "ptyblind/forward.hpp"
#include "ptyblind/grid.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ptyblind {

// PTYF array container: magic "PTYF", u8 version = 1, u8 dtype, u8 ndim,
// 5 zero pad bytes, ndim u64 little-endian dims, row-major little-endian
// payload.
enum class PtyfDtype : std::uint8_t { F32 = 0, F64 = 1, C64 = 2, C128 = 3 };

std::size_t ptyf_element_size(PtyfDtype dtype);

struct PtyfArray {
    PtyfDtype dtype = PtyfDtype::F64;
    std::vector<std::uint64_t> dims;
    std::vector<std::uint8_t> payload;

    std::uint64_t element_count() const {
        std::uint64_t n = 1;
        for (auto d : dims) n *= d;
        return n;
    }
};

void ptyf_write(const std::string& path, const PtyfArray& array);
PtyfArray ptyf_read(const std::string& path);

void write_ptyf(const std::string& path, const RealField& f);
void write_ptyf(const std::string& path, const ComplexField& f);
void write_ptyf(const std::string& path, const std::vector<RealField>& stack);
void write_ptyf(const std::string& path, const ScanPositions& positions);
void write_ptyf(const std::string& path, const MaskField& mask);  // stored as f64 0/1

RealField read_ptyf_real(const std::string& path);
ComplexField read_ptyf_complex(const std::string& path);
std::vector<RealField> read_ptyf_real_stack(const std::string& path);
ScanPositions read_ptyf_positions(const std::string& path);
MaskField read_ptyf_mask(const std::string& path);

}  // namespace ptyblind

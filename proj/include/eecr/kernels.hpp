#pragma once

// Data-parallel inner loops of the solver. Each kernel has a portable scalar
// reference and, where the CPU allows, an AVX2 variant selected at runtime.
// The variants agree bit-for-bit on water_fill and to rounding on the sums.

#include <cstddef>
#include <span>
#include <string_view>

namespace eecr::kernels {

enum class Backend { kScalar, kAvx2 };

/// Coefficients of one decision branch's water-filling rule:
///   p = clamp(scale / (base_price + interference_price * g2) - noise / h2, 0, cap)
/// with p = 0 wherever h2 <= 0. A zero denominator yields +inf before the
/// clamp, so a finite cap absorbs it.
struct WaterFillCoeffs {
  double scale = 0.0;
  double base_price = 0.0;
  double interference_price = 0.0;
  double noise = 1.0;
  double cap = 0.0;  // +inf for no peak limit
};

/// Unnormalized sums over one branch's samples.
struct BranchSums {
  double power = 0.0;         // sum p
  double interference = 0.0;  // sum p * g2
  double log_rate = 0.0;      // sum log2(1 + p * h2 / noise), only when requested
};

struct KernelTable {
  Backend backend;
  void (*water_fill)(std::span<const double> h2, std::span<const double> g2,
                     const WaterFillCoeffs& c, std::span<double> out);
  BranchSums (*branch_sums)(std::span<const double> h2, std::span<const double> g2,
                            std::span<const double> p, double inv_noise, bool with_rate);
};

const KernelTable& scalar_table();
/// nullptr when the binary was built without AVX2 support.
const KernelTable* avx2_table();

/// True when the running CPU can execute the AVX2 kernels.
bool avx2_supported();

/// Kernel table in use. Chosen once from the CPU features, unless the
/// EECR_KERNELS environment variable is "scalar" or select() was called.
const KernelTable& active();

/// Forces a backend; returns false if it is unavailable on this machine.
bool select(Backend backend);

std::string_view backend_name(Backend backend);

inline void water_fill(std::span<const double> h2, std::span<const double> g2,
                       const WaterFillCoeffs& c, std::span<double> out) {
  active().water_fill(h2, g2, c, out);
}

inline BranchSums branch_sums(std::span<const double> h2, std::span<const double> g2,
                              std::span<const double> p, double inv_noise, bool with_rate) {
  return active().branch_sums(h2, g2, p, inv_noise, with_rate);
}

}  // namespace eecr::kernels

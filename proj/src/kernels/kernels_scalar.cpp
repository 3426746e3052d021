#include <algorithm>
#include <cmath>
#include <numbers>

#include "eecr/kernels.hpp"

namespace eecr::kernels {

namespace {

void water_fill_scalar(std::span<const double> h2, std::span<const double> g2,
                       const WaterFillCoeffs& c, std::span<double> out) {
  const std::size_t n = h2.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (!(h2[i] > 0.0)) {
      out[i] = 0.0;
      continue;
    }
    const double price = c.base_price + c.interference_price * g2[i];
    const double root = c.scale / price - c.noise / h2[i];
    out[i] = std::min(std::max(root, 0.0), c.cap);
  }
}

// Four interleaved accumulators, combined as (a0 + a1) + (a2 + a3), so the
// summation order matches the 4-lane vector kernel.
BranchSums branch_sums_scalar(std::span<const double> h2, std::span<const double> g2,
                              std::span<const double> p, double inv_noise, bool with_rate) {
  double acc_p[4] = {0, 0, 0, 0};
  double acc_i[4] = {0, 0, 0, 0};
  double acc_r[4] = {0, 0, 0, 0};
  const std::size_t n = p.size();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    for (std::size_t l = 0; l < 4; ++l) {
      acc_p[l] += p[i + l];
      acc_i[l] += p[i + l] * g2[i + l];
      if (with_rate) acc_r[l] += std::log1p(p[i + l] * h2[i + l] * inv_noise);
    }
  }
  BranchSums s;
  s.power = (acc_p[0] + acc_p[1]) + (acc_p[2] + acc_p[3]);
  s.interference = (acc_i[0] + acc_i[1]) + (acc_i[2] + acc_i[3]);
  double r = (acc_r[0] + acc_r[1]) + (acc_r[2] + acc_r[3]);
  for (; i < n; ++i) {
    s.power += p[i];
    s.interference += p[i] * g2[i];
    if (with_rate) r += std::log1p(p[i] * h2[i] * inv_noise);
  }
  s.log_rate = r * std::numbers::log2e;
  return s;
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{Backend::kScalar, &water_fill_scalar, &branch_sums_scalar};
  return table;
}

}  // namespace eecr::kernels

// AVX2 variants of the solver kernels. Compiled with -mavx2 -mfma
// -ffp-contract=off; only entered after a runtime CPU check.

#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "eecr/kernels.hpp"

namespace eecr::kernels {

namespace {

inline __m256d polevl5(__m256d x, const double* c) {
  __m256d y = _mm256_set1_pd(c[0]);
  for (int k = 1; k <= 5; ++k) y = _mm256_fmadd_pd(y, x, _mm256_set1_pd(c[k]));
  return y;
}

inline __m256d p1evl5(__m256d x, const double* c) {
  __m256d y = _mm256_add_pd(x, _mm256_set1_pd(c[0]));
  for (int k = 1; k < 5; ++k) y = _mm256_fmadd_pd(y, x, _mm256_set1_pd(c[k]));
  return y;
}

// Natural log for finite x >= 1 (Cephes rational form for log(1+x) on the
// reduced mantissa).
inline __m256d log_ge1(__m256d x) {
  static constexpr double kP[6] = {1.01875663804580931796E-4, 4.97494994976747001425E-1,
                                   4.70579119878881725854E0,  1.44989225341610930846E1,
                                   1.79368678507819816313E1,  7.70838733755885391666E0};
  static constexpr double kQ[5] = {1.12873587189167450590E1, 4.52279145837532221105E1,
                                   8.29875266912776603211E1, 7.11544750618563894466E1,
                                   2.31251620126765340583E1};

  const __m256i bits = _mm256_castpd_si256(x);
  // Mantissa in [0.5, 1).
  const __m256i mant_bits = _mm256_or_si256(_mm256_and_si256(bits, _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL)),
                                            _mm256_set1_epi64x(0x3FE0000000000000LL));
  __m256d m = _mm256_castsi256_pd(mant_bits);
  // Biased exponent -> double via the 2^52 magic constant.
  const __m256i exp_bits = _mm256_srli_epi64(bits, 52);
  const __m256d magic = _mm256_set1_pd(4503599627370496.0);  // 2^52
  __m256d e = _mm256_sub_pd(_mm256_castsi256_pd(_mm256_or_si256(exp_bits, _mm256_castpd_si256(magic))),
                            _mm256_set1_pd(4503599627370496.0 + 1022.0));

  const __m256d below = _mm256_cmp_pd(m, _mm256_set1_pd(std::numbers::sqrt2 / 2.0), _CMP_LT_OQ);
  e = _mm256_sub_pd(e, _mm256_and_pd(below, _mm256_set1_pd(1.0)));
  // m < sqrt(1/2): m := 2m - 1, otherwise m := m - 1.
  m = _mm256_sub_pd(_mm256_add_pd(m, _mm256_and_pd(below, m)), _mm256_set1_pd(1.0));

  const __m256d z = _mm256_mul_pd(m, m);
  __m256d y = _mm256_mul_pd(m, _mm256_div_pd(_mm256_mul_pd(z, polevl5(m, kP)), p1evl5(m, kQ)));
  y = _mm256_sub_pd(y, _mm256_mul_pd(e, _mm256_set1_pd(2.121944400546905827679e-4)));
  y = _mm256_sub_pd(y, _mm256_mul_pd(z, _mm256_set1_pd(0.5)));
  __m256d out = _mm256_add_pd(m, y);
  out = _mm256_add_pd(out, _mm256_mul_pd(e, _mm256_set1_pd(0.693359375)));
  return out;
}

void water_fill_avx2(std::span<const double> h2, std::span<const double> g2,
                     const WaterFillCoeffs& c, std::span<double> out) {
  const std::size_t n = h2.size();
  const __m256d scale = _mm256_set1_pd(c.scale);
  const __m256d base = _mm256_set1_pd(c.base_price);
  const __m256d iprice = _mm256_set1_pd(c.interference_price);
  const __m256d noise = _mm256_set1_pd(c.noise);
  const __m256d cap = _mm256_set1_pd(c.cap);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d h = _mm256_loadu_pd(h2.data() + i);
    const __m256d g = _mm256_loadu_pd(g2.data() + i);
    const __m256d price = _mm256_add_pd(base, _mm256_mul_pd(iprice, g));
    const __m256d root = _mm256_sub_pd(_mm256_div_pd(scale, price), _mm256_div_pd(noise, h));
    // max(root, 0) with NaN -> 0 matches std::max(root, 0.0) only for non-NaN
    // roots; NaN arises solely from h2 <= 0, which the mask zeroes below.
    __m256d p = _mm256_min_pd(_mm256_max_pd(root, zero), cap);
    const __m256d positive = _mm256_cmp_pd(h, zero, _CMP_GT_OQ);
    p = _mm256_and_pd(p, positive);
    _mm256_storeu_pd(out.data() + i, p);
  }
  for (; i < n; ++i) {
    if (!(h2[i] > 0.0)) {
      out[i] = 0.0;
      continue;
    }
    const double price = c.base_price + c.interference_price * g2[i];
    const double root = c.scale / price - c.noise / h2[i];
    out[i] = std::min(std::max(root, 0.0), c.cap);
  }
}

BranchSums branch_sums_avx2(std::span<const double> h2, std::span<const double> g2,
                            std::span<const double> p, double inv_noise, bool with_rate) {
  const std::size_t n = p.size();
  __m256d acc_p = _mm256_setzero_pd();
  __m256d acc_i = _mm256_setzero_pd();
  __m256d acc_r = _mm256_setzero_pd();
  const __m256d inv = _mm256_set1_pd(inv_noise);
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d pv = _mm256_loadu_pd(p.data() + i);
    const __m256d g = _mm256_loadu_pd(g2.data() + i);
    acc_p = _mm256_add_pd(acc_p, pv);
    acc_i = _mm256_add_pd(acc_i, _mm256_mul_pd(pv, g));
    if (with_rate) {
      const __m256d h = _mm256_loadu_pd(h2.data() + i);
      const __m256d snr = _mm256_mul_pd(_mm256_mul_pd(pv, h), inv);
      acc_r = _mm256_add_pd(acc_r, log_ge1(_mm256_add_pd(one, snr)));
    }
  }
  alignas(32) double lp[4], li[4], lr[4];
  _mm256_store_pd(lp, acc_p);
  _mm256_store_pd(li, acc_i);
  _mm256_store_pd(lr, acc_r);
  BranchSums s;
  s.power = (lp[0] + lp[1]) + (lp[2] + lp[3]);
  s.interference = (li[0] + li[1]) + (li[2] + li[3]);
  double r = (lr[0] + lr[1]) + (lr[2] + lr[3]);
  for (; i < n; ++i) {
    s.power += p[i];
    s.interference += p[i] * g2[i];
    if (with_rate) r += std::log1p(p[i] * h2[i] * inv_noise);
  }
  s.log_rate = r * std::numbers::log2e;
  return s;
}

}  // namespace

const KernelTable* avx2_table() {
  static const KernelTable table{Backend::kAvx2, &water_fill_avx2, &branch_sums_avx2};
  return &table;
}

}  // namespace eecr::kernels

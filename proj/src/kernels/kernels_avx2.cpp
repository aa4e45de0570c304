// AVX2 + FMA variants. Compiled with -mavx2 -mfma; only reached when the
// dispatcher has confirmed both features at run time.
//
// exp and log are evaluated in-register: log by exponent extraction and the
// atanh series on a mantissa in [sqrt(1/2), sqrt(2)), exp by Cody-Waite
// reduction and a degree-13 Taylor polynomial. Both stay within a few ulp
// of libm over the ranges used here.

#include <immintrin.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>

#include "kernels_impl.hpp"

namespace sdosc::kernels::detail {
namespace {

constexpr std::size_t kLanes = 4;

inline __m256d set1(double x) { return _mm256_set1_pd(x); }

inline __m256d abs_pd(__m256d x) {
  return _mm256_andnot_pd(set1(-0.0), x);
}

// sign(x) with sign(0) = 0.
inline __m256d sgn_pd(__m256d x) {
  const __m256d zero = _mm256_setzero_pd();
  const __m256d pos = _mm256_and_pd(_mm256_cmp_pd(x, zero, _CMP_GT_OQ), set1(1.0));
  const __m256d neg = _mm256_and_pd(_mm256_cmp_pd(x, zero, _CMP_LT_OQ), set1(1.0));
  return _mm256_sub_pd(pos, neg);
}

// Natural log for x > 0 (normal or subnormal).
inline __m256d log_pd(__m256d x) {
  const __m256d tiny = _mm256_cmp_pd(x, set1(2.2250738585072014e-308), _CMP_LT_OQ);
  x = _mm256_blendv_pd(x, _mm256_mul_pd(x, set1(18014398509481984.0)), tiny);  // 2^54
  const __m256d e_adjust = _mm256_and_pd(tiny, set1(-54.0));

  const __m256i bits = _mm256_castpd_si256(x);
  const __m256i exp_bits = _mm256_srli_epi64(bits, 52);
  const __m256i mant_bits = _mm256_or_si256(
      _mm256_and_si256(bits, _mm256_set1_epi64x(0x000fffffffffffffLL)),
      _mm256_set1_epi64x(0x3ff0000000000000LL));
  __m256d m = _mm256_castsi256_pd(mant_bits);  // [1, 2)

  // Small non-negative int64 -> double via the 2^52 magic constant.
  const __m256d magic = set1(4503599627370496.0);
  __m256d e = _mm256_sub_pd(
      _mm256_castsi256_pd(_mm256_or_si256(exp_bits, _mm256_castpd_si256(magic))), magic);
  e = _mm256_add_pd(_mm256_sub_pd(e, set1(1023.0)), e_adjust);

  const __m256d big = _mm256_cmp_pd(m, set1(1.4142135623730951), _CMP_GT_OQ);
  m = _mm256_blendv_pd(m, _mm256_mul_pd(m, set1(0.5)), big);
  e = _mm256_add_pd(e, _mm256_and_pd(big, set1(1.0)));

  const __m256d f = _mm256_div_pd(_mm256_sub_pd(m, set1(1.0)), _mm256_add_pd(m, set1(1.0)));
  const __m256d f2 = _mm256_mul_pd(f, f);
  // 2 atanh(f) = 2f (1 + f^2/3 + f^4/5 + ...), |f| <= 0.1716.
  __m256d s = set1(1.0 / 23.0);
  s = _mm256_fmadd_pd(s, f2, set1(1.0 / 21.0));
  s = _mm256_fmadd_pd(s, f2, set1(1.0 / 19.0));
  s = _mm256_fmadd_pd(s, f2, set1(1.0 / 17.0));
  s = _mm256_fmadd_pd(s, f2, set1(1.0 / 15.0));
  s = _mm256_fmadd_pd(s, f2, set1(1.0 / 13.0));
  s = _mm256_fmadd_pd(s, f2, set1(1.0 / 11.0));
  s = _mm256_fmadd_pd(s, f2, set1(1.0 / 9.0));
  s = _mm256_fmadd_pd(s, f2, set1(1.0 / 7.0));
  s = _mm256_fmadd_pd(s, f2, set1(1.0 / 5.0));
  s = _mm256_fmadd_pd(s, f2, set1(1.0 / 3.0));
  s = _mm256_mul_pd(s, f2);
  const __m256d two_f = _mm256_add_pd(f, f);
  const __m256d log_m = _mm256_fmadd_pd(two_f, s, two_f);

  constexpr double ln2_hi = 6.93147180369123816490e-01;
  constexpr double ln2_lo = 1.90821492927058770002e-10;
  return _mm256_fmadd_pd(e, set1(ln2_hi), _mm256_fmadd_pd(e, set1(ln2_lo), log_m));
}

inline __m256d exp_pd(__m256d x) {
  x = _mm256_max_pd(_mm256_min_pd(x, set1(710.0)), set1(-746.0));
  const __m256d n =
      _mm256_round_pd(_mm256_mul_pd(x, set1(1.4426950408889634)), _MM_FROUND_TO_NEAREST_INT |
                                                                     _MM_FROUND_NO_EXC);
  constexpr double ln2_hi = 6.93147180369123816490e-01;
  constexpr double ln2_lo = 1.90821492927058770002e-10;
  __m256d r = _mm256_fnmadd_pd(n, set1(ln2_hi), x);
  r = _mm256_fnmadd_pd(n, set1(ln2_lo), r);

  __m256d p = set1(1.0 / 6227020800.0);  // 1/13!
  p = _mm256_fmadd_pd(p, r, set1(1.0 / 479001600.0));
  p = _mm256_fmadd_pd(p, r, set1(1.0 / 39916800.0));
  p = _mm256_fmadd_pd(p, r, set1(1.0 / 3628800.0));
  p = _mm256_fmadd_pd(p, r, set1(1.0 / 362880.0));
  p = _mm256_fmadd_pd(p, r, set1(1.0 / 40320.0));
  p = _mm256_fmadd_pd(p, r, set1(1.0 / 5040.0));
  p = _mm256_fmadd_pd(p, r, set1(1.0 / 720.0));
  p = _mm256_fmadd_pd(p, r, set1(1.0 / 120.0));
  p = _mm256_fmadd_pd(p, r, set1(1.0 / 24.0));
  p = _mm256_fmadd_pd(p, r, set1(1.0 / 6.0));
  p = _mm256_fmadd_pd(p, r, set1(0.5));
  p = _mm256_fmadd_pd(p, r, set1(1.0));
  p = _mm256_fmadd_pd(p, r, set1(1.0));

  // 2^n as 2^n1 * 2^n2 so both factors stay normal for n in [-1076, 1025].
  const __m256d shifter = set1(6755399441055744.0);  // 1.5 * 2^52
  const __m256d n1 = _mm256_floor_pd(_mm256_mul_pd(n, set1(0.5)));
  const __m256d n2 = _mm256_sub_pd(n, n1);
  auto pow2 = [&](__m256d k) {
    const __m256i ki = _mm256_sub_epi64(_mm256_castpd_si256(_mm256_add_pd(k, shifter)),
                                        _mm256_castpd_si256(shifter));
    return _mm256_castsi256_pd(
        _mm256_slli_epi64(_mm256_add_epi64(ki, _mm256_set1_epi64x(1023)), 52));
  };
  return _mm256_mul_pd(_mm256_mul_pd(p, pow2(n1)), pow2(n2));
}

// |x|^q for |x| >= 0 with the zero convention of the scalar reference.
inline __m256d pow_abs_pd(__m256d ax, double q) {
  const __m256d zero = _mm256_setzero_pd();
  const __m256d is_zero = _mm256_cmp_pd(ax, zero, _CMP_EQ_OQ);
  const __m256d safe = _mm256_blendv_pd(ax, set1(1.0), is_zero);
  const __m256d val = exp_pd(_mm256_mul_pd(set1(q), log_pd(safe)));
  const double at_zero = q > 0.0 ? 0.0 : (q == 0.0 ? 1.0 : HUGE_VAL);
  return _mm256_blendv_pd(val, set1(at_zero), is_zero);
}

// Runs body(i, count) on full blocks of four and once on a zero-padded tail.
template <class Body>
inline void for_blocks(std::size_t n, Body&& body) {
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) body(i, kLanes);
  if (i < n) body(i, n - i);
}

inline __m256d load_partial(const double* p, std::size_t count, double fill) {
  if (count == kLanes) return _mm256_loadu_pd(p);
  alignas(32) std::array<double, kLanes> buf{fill, fill, fill, fill};
  std::copy_n(p, count, buf.begin());
  return _mm256_load_pd(buf.data());
}

inline void store_partial(double* p, std::size_t count, __m256d v) {
  if (count == kLanes) {
    _mm256_storeu_pd(p, v);
    return;
  }
  alignas(32) std::array<double, kLanes> buf{};
  _mm256_store_pd(buf.data(), v);
  std::copy_n(buf.begin(), count, p);
}

void abs_pow(const double* x, std::size_t n, double q, double* out) {
  for_blocks(n, [&](std::size_t i, std::size_t cnt) {
    store_partial(out + i, cnt, pow_abs_pd(abs_pd(load_partial(x + i, cnt, 1.0)), q));
  });
}

void signed_pow(const double* x, std::size_t n, double q, double* out) {
  for_blocks(n, [&](std::size_t i, std::size_t cnt) {
    const __m256d v = load_partial(x + i, cnt, 1.0);
    store_partial(out + i, cnt, _mm256_mul_pd(sgn_pd(v), pow_abs_pd(abs_pd(v), q)));
  });
}

void energy(const double* u, const double* du, std::size_t n, const EnergyCoeffs& k,
            double* out) {
  for_blocks(n, [&](std::size_t i, std::size_t cnt) {
    const __m256d kin = pow_abs_pd(abs_pd(load_partial(du + i, cnt, 0.0)), k.kinetic_exp);
    const __m256d pot = pow_abs_pd(abs_pd(load_partial(u + i, cnt, 0.0)), k.potential_exp);
    store_partial(out + i, cnt,
                  _mm256_fmadd_pd(set1(k.kinetic_coef), kin, _mm256_mul_pd(set1(k.potential_coef), pot)));
  });
}

void phase_field(const double* z, const double* w, std::size_t n, const FieldCoeffs& k,
                 double* dz, double* dw) {
  for_blocks(n, [&](std::size_t i, std::size_t cnt) {
    const __m256d zv = load_partial(z + i, cnt, 1.0);
    const __m256d wv = load_partial(w + i, cnt, 1.0);
    const __m256d az = abs_pd(zv);
    const __m256d aw = abs_pd(wv);
    const __m256d sw = sgn_pd(wv);
    const __m256d zpow = pow_abs_pd(az, k.ez);
    const __m256d a = set1(k.a);
    const __m256d dzv = _mm256_mul_pd(_mm256_mul_pd(a, zpow), _mm256_mul_pd(pow_abs_pd(aw, k.ewz), sw));
    const __m256d restoring =
        _mm256_mul_pd(_mm256_mul_pd(a, pow_abs_pd(aw, k.eww)), _mm256_mul_pd(zpow, zv));
    const __m256d damping = _mm256_mul_pd(set1(k.damping), _mm256_mul_pd(pow_abs_pd(aw, k.ewd), sw));
    store_partial(dz + i, cnt, dzv);
    store_partial(dw + i, cnt, _mm256_sub_pd(_mm256_sub_pd(_mm256_setzero_pd(), restoring), damping));
  });
}

inline double hsum(__m256d v) {
  alignas(32) std::array<double, kLanes> buf{};
  _mm256_store_pd(buf.data(), v);
  return (buf[0] + buf[1]) + (buf[2] + buf[3]);
}

LogLogMoments loglog_moments(const double* t, const double* v, std::size_t n) {
  __m256d sx = _mm256_setzero_pd(), sy = sx, sxx = sx, sxy = sx, syy = sx;
  // Padding with 1.0 contributes log(1) = 0 to every sum.
  for_blocks(n, [&](std::size_t i, std::size_t cnt) {
    const __m256d x = log_pd(load_partial(t + i, cnt, 1.0));
    const __m256d y = log_pd(load_partial(v + i, cnt, 1.0));
    sx = _mm256_add_pd(sx, x);
    sy = _mm256_add_pd(sy, y);
    sxx = _mm256_fmadd_pd(x, x, sxx);
    sxy = _mm256_fmadd_pd(x, y, sxy);
    syy = _mm256_fmadd_pd(y, y, syy);
  });
  LogLogMoments m;
  m.n = n;
  m.sx = hsum(sx);
  m.sy = hsum(sy);
  m.sxx = hsum(sxx);
  m.sxy = hsum(sxy);
  m.syy = hsum(syy);
  return m;
}

double max_increase(const double* x, std::size_t n) {
  if (n < 2) return 0.0;
  __m256d worst = _mm256_setzero_pd();
  const std::size_t pairs = n - 1;
  std::size_t i = 0;
  for (; i + kLanes <= pairs; i += kLanes) {
    const __m256d diff = _mm256_sub_pd(_mm256_loadu_pd(x + i + 1), _mm256_loadu_pd(x + i));
    worst = _mm256_max_pd(worst, diff);
  }
  alignas(32) std::array<double, kLanes> buf{};
  _mm256_store_pd(buf.data(), worst);
  double result = std::max(std::max(buf[0], buf[1]), std::max(buf[2], buf[3]));
  for (; i < pairs; ++i) result = std::max(result, x[i + 1] - x[i]);
  return result;
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable t{Isa::Avx2,  abs_pow,        signed_pow,  energy,
                             phase_field, loglog_moments, max_increase};
  return t;
}

}  // namespace sdosc::kernels::detail

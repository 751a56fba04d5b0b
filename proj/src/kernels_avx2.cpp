#include "mls/kernels.hpp"

#ifdef MLS_HAVE_AVX2

#include <immintrin.h>

// AVX2/FMA kernels. A 256-bit register holds two interleaved complex doubles
// [re0 im0 re1 im1]; real per-mode tables are expanded pairwise with
// _mm256_permute4x64_pd. Tails (n not a multiple of the lane width) fall back
// to the scalar expressions.

namespace mls {
namespace {

// [w0 w1 x x] -> [w0 w0 w1 w1]
inline __m256d expand_pair(const double* w) {
  const __m256d t = _mm256_castpd128_pd256(_mm_loadu_pd(w));
  return _mm256_permute4x64_pd(t, 0x50);  // 0b01'01'00'00
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

void axpy(std::size_t n, Complex* y, double a, const Complex* x) {
  auto* yd = reinterpret_cast<double*>(y);
  const auto* xd = reinterpret_cast<const double*>(x);
  const std::size_t m = 2 * n;
  const __m256d av = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    __m256d r = _mm256_fmadd_pd(av, _mm256_loadu_pd(xd + i), _mm256_loadu_pd(yd + i));
    _mm256_storeu_pd(yd + i, r);
  }
  for (; i < m; ++i) yd[i] += a * xd[i];
}

void rk4_update(std::size_t n, Complex* out, const Complex* y, const Complex* k1,
                const Complex* k2, const Complex* k3, const Complex* k4, double s) {
  auto* od = reinterpret_cast<double*>(out);
  const auto* yd = reinterpret_cast<const double*>(y);
  const auto* a1 = reinterpret_cast<const double*>(k1);
  const auto* a2 = reinterpret_cast<const double*>(k2);
  const auto* a3 = reinterpret_cast<const double*>(k3);
  const auto* a4 = reinterpret_cast<const double*>(k4);
  const std::size_t m = 2 * n;
  const __m256d sv = _mm256_set1_pd(s);
  const __m256d two = _mm256_set1_pd(2.0);
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    __m256d acc = _mm256_loadu_pd(a1 + i);
    acc = _mm256_fmadd_pd(two, _mm256_loadu_pd(a2 + i), acc);
    acc = _mm256_fmadd_pd(two, _mm256_loadu_pd(a3 + i), acc);
    acc = _mm256_add_pd(acc, _mm256_loadu_pd(a4 + i));
    _mm256_storeu_pd(od + i, _mm256_fmadd_pd(sv, acc, _mm256_loadu_pd(yd + i)));
  }
  for (; i < m; ++i) od[i] = yd[i] + s * (a1[i] + 2.0 * a2[i] + 2.0 * a3[i] + a4[i]);
}

// i * z pairwise: swap re/im and negate the (new) real slots.
inline __m256d mul_i(__m256d z) {
  const __m256d sw = _mm256_permute_pd(z, 0x5);  // [im0 re0 im1 re1]
  const __m256d sign = _mm256_set_pd(0.0, -0.0, 0.0, -0.0);  // hi..lo: negate lanes 0,2
  return _mm256_xor_pd(sw, sign);
}

void transport(std::size_t n, Complex* out, const Complex* b, const Complex* a,
               const double* vk) {
  auto* od = reinterpret_cast<double*>(out);
  const auto* bd = reinterpret_cast<const double*>(b);
  const auto* ad = reinterpret_cast<const double*>(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d av = _mm256_loadu_pd(ad + 2 * i);
    const __m256d bv = _mm256_loadu_pd(bd + 2 * i);
    const __m256d vv = expand_pair(vk + i);
    _mm256_storeu_pd(od + 2 * i, _mm256_fmadd_pd(vv, mul_i(av), bv));
  }
  for (; i < n; ++i) {
    const double re = a[i].real(), im = a[i].imag();
    out[i] = Complex(b[i].real() - vk[i] * im, b[i].imag() + vk[i] * re);
  }
}

void wave(std::size_t n, Complex* out, const Complex* a, const Complex* b, const double* k2,
          const double* vk) {
  auto* od = reinterpret_cast<double*>(out);
  const auto* ad = reinterpret_cast<const double*>(a);
  const auto* bd = reinterpret_cast<const double*>(b);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d av = _mm256_loadu_pd(ad + 2 * i);
    const __m256d bv = _mm256_loadu_pd(bd + 2 * i);
    const __m256d k2v = expand_pair(k2 + i);
    const __m256d vv = expand_pair(vk + i);
    __m256d r = _mm256_mul_pd(k2v, av);
    r = _mm256_fmsub_pd(vv, mul_i(bv), r);  // vk*(i b) - k2*a
    _mm256_storeu_pd(od + 2 * i, r);
  }
  for (; i < n; ++i) {
    const double re = b[i].real(), im = b[i].imag();
    out[i] = Complex(-k2[i] * a[i].real() - vk[i] * im, -k2[i] * a[i].imag() + vk[i] * re);
  }
}

void leray(std::size_t n, Complex* f0, Complex* f1, Complex* f2, const double* kx,
           const double* ky, const double* kz, const double* invk2, const double* mask) {
  auto* d0 = reinterpret_cast<double*>(f0);
  auto* d1 = reinterpret_cast<double*>(f1);
  auto* d2 = reinterpret_cast<double*>(f2);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d a = _mm256_loadu_pd(d0 + 2 * i);
    const __m256d b = _mm256_loadu_pd(d1 + 2 * i);
    const __m256d c = _mm256_loadu_pd(d2 + 2 * i);
    const __m256d kxv = expand_pair(kx + i);
    const __m256d kyv = expand_pair(ky + i);
    const __m256d kzv = expand_pair(kz + i);
    __m256d s = _mm256_mul_pd(kxv, a);
    s = _mm256_fmadd_pd(kyv, b, s);
    s = _mm256_fmadd_pd(kzv, c, s);
    s = _mm256_mul_pd(s, expand_pair(invk2 + i));
    const __m256d mv = expand_pair(mask + i);
    _mm256_storeu_pd(d0 + 2 * i, _mm256_mul_pd(_mm256_fnmadd_pd(kxv, s, a), mv));
    _mm256_storeu_pd(d1 + 2 * i, _mm256_mul_pd(_mm256_fnmadd_pd(kyv, s, b), mv));
    _mm256_storeu_pd(d2 + 2 * i, _mm256_mul_pd(_mm256_fnmadd_pd(kzv, s, c), mv));
  }
  for (; i < n; ++i) {
    const Complex s = (kx[i] * f0[i] + ky[i] * f1[i] + kz[i] * f2[i]) * invk2[i];
    f0[i] = (f0[i] - kx[i] * s) * mask[i];
    f1[i] = (f1[i] - ky[i] * s) * mask[i];
    f2[i] = (f2[i] - kz[i] * s) * mask[i];
  }
}

void dot_k(std::size_t n, double* vk, const double* kx, const double* ky, const double* kz,
           double v0, double v1, double v2) {
  const __m256d a = _mm256_set1_pd(v0), b = _mm256_set1_pd(v1), c = _mm256_set1_pd(v2);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d r = _mm256_mul_pd(a, _mm256_loadu_pd(kx + i));
    r = _mm256_fmadd_pd(b, _mm256_loadu_pd(ky + i), r);
    r = _mm256_fmadd_pd(c, _mm256_loadu_pd(kz + i), r);
    _mm256_storeu_pd(vk + i, r);
  }
  for (; i < n; ++i) vk[i] = v0 * kx[i] + v1 * ky[i] + v2 * kz[i];
}

// Interleave 4 real/imag lane-pairs into two complex registers and accumulate.
inline void accumulate_complex4(double* dst, __m256d re4, __m256d im4) {
  const __m256d lo = _mm256_unpacklo_pd(re4, im4);  // [r0 i0 r2 i2]
  const __m256d hi = _mm256_unpackhi_pd(re4, im4);  // [r1 i1 r3 i3]
  const __m256d c01 = _mm256_permute2f128_pd(lo, hi, 0x20);  // [r0 i0 r1 i1]
  const __m256d c23 = _mm256_permute2f128_pd(lo, hi, 0x31);  // [r2 i2 r3 i3]
  _mm256_storeu_pd(dst, _mm256_add_pd(_mm256_loadu_pd(dst), c01));
  _mm256_storeu_pd(dst + 4, _mm256_add_pd(_mm256_loadu_pd(dst + 4), c23));
}

void current(std::size_t n, Complex* f0, Complex* f1, Complex* f2, const double* rho,
             const double* gmr, const double* khx, const double* khy, const double* khz,
             const double v[3], const double w[3]) {
  auto* d0 = reinterpret_cast<double*>(f0);
  auto* d1 = reinterpret_cast<double*>(f1);
  auto* d2 = reinterpret_cast<double*>(f2);
  const __m256d v0 = _mm256_set1_pd(v[0]), v1 = _mm256_set1_pd(v[1]), v2 = _mm256_set1_pd(v[2]);
  const __m256d w0 = _mm256_set1_pd(w[0]), w1 = _mm256_set1_pd(w[1]), w2 = _mm256_set1_pd(w[2]);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d hx = _mm256_loadu_pd(khx + i);
    const __m256d hy = _mm256_loadu_pd(khy + i);
    const __m256d hz = _mm256_loadu_pd(khz + i);
    const __m256d rv = _mm256_loadu_pd(rho + i);
    const __m256d gv = _mm256_loadu_pd(gmr + i);
    __m256d vkh = _mm256_mul_pd(v0, hx);
    vkh = _mm256_fmadd_pd(v1, hy, vkh);
    vkh = _mm256_fmadd_pd(v2, hz, vkh);
    const __m256d re0 = _mm256_mul_pd(rv, _mm256_fnmadd_pd(hx, vkh, v0));
    const __m256d re1 = _mm256_mul_pd(rv, _mm256_fnmadd_pd(hy, vkh, v1));
    const __m256d re2 = _mm256_mul_pd(rv, _mm256_fnmadd_pd(hz, vkh, v2));
    const __m256d im0 = _mm256_mul_pd(gv, _mm256_fmsub_pd(w1, hz, _mm256_mul_pd(w2, hy)));
    const __m256d im1 = _mm256_mul_pd(gv, _mm256_fmsub_pd(w2, hx, _mm256_mul_pd(w0, hz)));
    const __m256d im2 = _mm256_mul_pd(gv, _mm256_fmsub_pd(w0, hy, _mm256_mul_pd(w1, hx)));
    accumulate_complex4(d0 + 2 * i, re0, im0);
    accumulate_complex4(d1 + 2 * i, re1, im1);
    accumulate_complex4(d2 + 2 * i, re2, im2);
  }
  for (; i < n; ++i) {
    const double vkh = v[0] * khx[i] + v[1] * khy[i] + v[2] * khz[i];
    f0[i] += Complex(rho[i] * (v[0] - khx[i] * vkh), gmr[i] * (w[1] * khz[i] - w[2] * khy[i]));
    f1[i] += Complex(rho[i] * (v[1] - khy[i] * vkh), gmr[i] * (w[2] * khx[i] - w[0] * khz[i]));
    f2[i] += Complex(rho[i] * (v[2] - khz[i] * vkh), gmr[i] * (w[0] * khy[i] - w[1] * khx[i]));
  }
}

double dot_re(std::size_t n, const Complex* a, const Complex* b) {
  // Re(a conj b) summed = plain dot product of the interleaved doubles.
  const auto* ad = reinterpret_cast<const double*>(a);
  const auto* bd = reinterpret_cast<const double*>(b);
  const std::size_t m = 2 * n;
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(ad + i), _mm256_loadu_pd(bd + i), acc);
  double tail = 0.0;
  for (; i < m; ++i) tail += ad[i] * bd[i];
  return hsum(acc) + tail;
}

double dot_re_w(std::size_t n, const Complex* a, const Complex* b, const double* w) {
  const auto* ad = reinterpret_cast<const double*>(a);
  const auto* bd = reinterpret_cast<const double*>(b);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d p = _mm256_mul_pd(_mm256_loadu_pd(ad + 2 * i), _mm256_loadu_pd(bd + 2 * i));
    acc = _mm256_fmadd_pd(expand_pair(w + i), p, acc);
  }
  double tail = 0.0;
  for (; i < n; ++i)
    tail += w[i] * (a[i].real() * b[i].real() + a[i].imag() * b[i].imag());
  return hsum(acc) + tail;
}

double dot_im_w(std::size_t n, const Complex* a, const Complex* b, const double* w) {
  // Im(a conj b) per mode = im(a) re(b) - re(a) im(b): swap b, signed weights.
  const auto* ad = reinterpret_cast<const double*>(a);
  const auto* bd = reinterpret_cast<const double*>(b);
  const __m256d sign = _mm256_set_pd(1.0, -1.0, 1.0, -1.0);  // hi..lo: [-1, 1, -1, 1]
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d av = _mm256_loadu_pd(ad + 2 * i);
    const __m256d bsw = _mm256_permute_pd(_mm256_loadu_pd(bd + 2 * i), 0x5);  // [im re ...]
    const __m256d p = _mm256_mul_pd(av, bsw);     // [re_a im_b, im_a re_b, ...]
    const __m256d ws = _mm256_mul_pd(expand_pair(w + i), sign);
    acc = _mm256_fmadd_pd(ws, p, acc);
  }
  double tail = 0.0;
  for (; i < n; ++i)
    tail += w[i] * (a[i].imag() * b[i].real() - a[i].real() * b[i].imag());
  return hsum(acc) + tail;
}

double sum_re_w(std::size_t n, const Complex* a, const double* w) {
  const auto* ad = reinterpret_cast<const double*>(a);
  const __m256d evens = _mm256_set_pd(0.0, 1.0, 0.0, 1.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d ws = _mm256_mul_pd(expand_pair(w + i), evens);
    acc = _mm256_fmadd_pd(ws, _mm256_loadu_pd(ad + 2 * i), acc);
  }
  double tail = 0.0;
  for (; i < n; ++i) tail += w[i] * a[i].real();
  return hsum(acc) + tail;
}

double sum_im_w(std::size_t n, const Complex* a, const double* w) {
  const auto* ad = reinterpret_cast<const double*>(a);
  const __m256d odds = _mm256_set_pd(1.0, 0.0, 1.0, 0.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d ws = _mm256_mul_pd(expand_pair(w + i), odds);
    acc = _mm256_fmadd_pd(ws, _mm256_loadu_pd(ad + 2 * i), acc);
  }
  double tail = 0.0;
  for (; i < n; ++i) tail += w[i] * a[i].imag();
  return hsum(acc) + tail;
}

}  // namespace

const KernelOps& kernels_avx2() {
  static const KernelOps ops = {
      "avx2",  axpy,     rk4_update, transport, wave,     leray,    dot_k,
      current, dot_re,   dot_re_w,   dot_im_w,  sum_re_w, sum_im_w,
  };
  return ops;
}

bool cpu_has_avx2() { return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"); }

}  // namespace mls

#endif  // MLS_HAVE_AVX2

#pragma once
#include <cstddef>

#include "mls/field.hpp"

namespace mls {

// Mode-wise spectral kernels: the inner loops of the right-hand side,
// projections, and Parseval reductions. Two implementations are compiled —
// a scalar reference and (on x86-64) an AVX2/FMA variant — and selected at
// runtime. Complex arrays are interleaved std::complex<double>; real tables
// (k components, masks, profile samples) are plain double arrays of the same
// mode count.
struct KernelOps {
  const char* name;

  // y += a x
  void (*axpy)(std::size_t n, Complex* y, double a, const Complex* x);
  // out = y + s (k1 + 2 k2 + 2 k3 + k4)   (RK4 combination, s = dt/6)
  void (*rk4_update)(std::size_t n, Complex* out, const Complex* y, const Complex* k1,
                     const Complex* k2, const Complex* k3, const Complex* k4, double s);
  // out = b + i vk.*a        (transport stage of the field equations)
  void (*transport)(std::size_t n, Complex* out, const Complex* b, const Complex* a,
                    const double* vk);
  // out = -k2.*a + i vk.*b   (wave stage; source currents are accumulated after)
  void (*wave)(std::size_t n, Complex* out, const Complex* a, const Complex* b,
               const double* k2, const double* vk);
  // In-place divergence-free (Leray) projection of a 3-component field,
  // with the retained-mode mask applied.
  void (*leray)(std::size_t n, Complex* f0, Complex* f1, Complex* f2, const double* kx,
                const double* ky, const double* kz, const double* invk2, const double* mask);
  // vk = v0 kx + v1 ky + v2 kz
  void (*dot_k)(std::size_t n, double* vk, const double* kx, const double* ky,
                const double* kz, double v0, double v1, double v2);
  // f_c += rho.*(v_c - khat_c (v.khat)) + i g.*(w ^ khat)_c  for c = 0,1,2
  void (*current)(std::size_t n, Complex* f0, Complex* f1, Complex* f2, const double* rho,
                  const double* gmr, const double* khx, const double* khy, const double* khz,
                  const double v[3], const double w[3]);

  // Reductions (lattice Parseval sums; caller multiplies by dk^3).
  double (*dot_re)(std::size_t n, const Complex* a, const Complex* b);     // sum Re(a conj b)
  double (*dot_re_w)(std::size_t n, const Complex* a, const Complex* b,
                     const double* w);                                     // sum w Re(a conj b)
  double (*dot_im_w)(std::size_t n, const Complex* a, const Complex* b,
                     const double* w);                                     // sum w Im(a conj b)
  double (*sum_re_w)(std::size_t n, const Complex* a, const double* w);    // sum w Re(a)
  double (*sum_im_w)(std::size_t n, const Complex* a, const double* w);    // sum w Im(a)
};

// Runtime-selected implementation. Honors the MLS_KERNELS environment
// variable ("scalar" or "avx2") for forcing a variant; otherwise picks AVX2
// when the CPU supports it.
const KernelOps& kernels();

const KernelOps& kernels_scalar();
#ifdef MLS_HAVE_AVX2
const KernelOps& kernels_avx2();
bool cpu_has_avx2();
#endif

}  // namespace mls

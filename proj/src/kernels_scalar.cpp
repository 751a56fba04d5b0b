#include "mls/kernels.hpp"

// Reference kernels: straightforward loops, kept branch-free so the compiler
// can auto-vectorize where it likes. These define the semantics the AVX2
// variant is tested against.

namespace mls {
namespace {

void axpy(std::size_t n, Complex* y, double a, const Complex* x) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void rk4_update(std::size_t n, Complex* out, const Complex* y, const Complex* k1,
                const Complex* k2, const Complex* k3, const Complex* k4, double s) {
  for (std::size_t i = 0; i < n; ++i)
    out[i] = y[i] + s * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

void transport(std::size_t n, Complex* out, const Complex* b, const Complex* a,
               const double* vk) {
  for (std::size_t i = 0; i < n; ++i) {
    const double re = a[i].real(), im = a[i].imag();
    out[i] = Complex(b[i].real() - vk[i] * im, b[i].imag() + vk[i] * re);
  }
}

void wave(std::size_t n, Complex* out, const Complex* a, const Complex* b, const double* k2,
          const double* vk) {
  for (std::size_t i = 0; i < n; ++i) {
    const double re = b[i].real(), im = b[i].imag();
    out[i] = Complex(-k2[i] * a[i].real() - vk[i] * im, -k2[i] * a[i].imag() + vk[i] * re);
  }
}

void leray(std::size_t n, Complex* f0, Complex* f1, Complex* f2, const double* kx,
           const double* ky, const double* kz, const double* invk2, const double* mask) {
  for (std::size_t i = 0; i < n; ++i) {
    const Complex s = (kx[i] * f0[i] + ky[i] * f1[i] + kz[i] * f2[i]) * invk2[i];
    f0[i] = (f0[i] - kx[i] * s) * mask[i];
    f1[i] = (f1[i] - ky[i] * s) * mask[i];
    f2[i] = (f2[i] - kz[i] * s) * mask[i];
  }
}

void dot_k(std::size_t n, double* vk, const double* kx, const double* ky, const double* kz,
           double v0, double v1, double v2) {
  for (std::size_t i = 0; i < n; ++i) vk[i] = v0 * kx[i] + v1 * ky[i] + v2 * kz[i];
}

void current(std::size_t n, Complex* f0, Complex* f1, Complex* f2, const double* rho,
             const double* gmr, const double* khx, const double* khy, const double* khz,
             const double v[3], const double w[3]) {
  for (std::size_t i = 0; i < n; ++i) {
    const double vkh = v[0] * khx[i] + v[1] * khy[i] + v[2] * khz[i];
    f0[i] += Complex(rho[i] * (v[0] - khx[i] * vkh), gmr[i] * (w[1] * khz[i] - w[2] * khy[i]));
    f1[i] += Complex(rho[i] * (v[1] - khy[i] * vkh), gmr[i] * (w[2] * khx[i] - w[0] * khz[i]));
    f2[i] += Complex(rho[i] * (v[2] - khz[i] * vkh), gmr[i] * (w[0] * khy[i] - w[1] * khx[i]));
  }
}

double dot_re(std::size_t n, const Complex* a, const Complex* b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    acc += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
  return acc;
}

double dot_re_w(std::size_t n, const Complex* a, const Complex* b, const double* w) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    acc += w[i] * (a[i].real() * b[i].real() + a[i].imag() * b[i].imag());
  return acc;
}

double dot_im_w(std::size_t n, const Complex* a, const Complex* b, const double* w) {
  // Im(a conj b) = im(a) re(b) - re(a) im(b)
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    acc += w[i] * (a[i].imag() * b[i].real() - a[i].real() * b[i].imag());
  return acc;
}

double sum_re_w(std::size_t n, const Complex* a, const double* w) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += w[i] * a[i].real();
  return acc;
}

double sum_im_w(std::size_t n, const Complex* a, const double* w) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += w[i] * a[i].imag();
  return acc;
}

}  // namespace

const KernelOps& kernels_scalar() {
  static const KernelOps ops = {
      "scalar", axpy,     rk4_update, transport, wave,     leray,    dot_k,
      current,  dot_re,   dot_re_w,   dot_im_w,  sum_re_w, sum_im_w,
  };
  return ops;
}

}  // namespace mls

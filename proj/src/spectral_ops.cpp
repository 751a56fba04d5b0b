#include "mls/spectral_ops.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "mls/kernels.hpp"

namespace mls {

namespace {

void check_same_grid(const Grid& g, const SpectralField& F) {
  if (F.modes != g.modes()) throw std::invalid_argument("field does not match grid");
}

// Deterministic standard-normal stream: mt19937_64 + Box-Muller. Written out
// so that recorded seeds reproduce bit-identical fields on any platform
// (std::normal_distribution's sequence is implementation-defined).
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : eng_(seed) {}
  double next() {
    if (have_) {
      have_ = false;
      return spare_;
    }
    double u1;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * M_PI * u2);
    have_ = true;
    return r * std::cos(2.0 * M_PI * u2);
  }

 private:
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool have_ = false;
};

}  // namespace

ProfileTables::ProfileTables(const Grid& grid, const ChargeProfile& profile)
    : grid_(&grid), radius_(profile.radius()) {
  if (radius_ >= grid.L())
    throw std::invalid_argument("charge support does not fit inside the box");
  const std::size_t n = grid.modes();
  rho_.resize(n);
  gmr_.resize(n);
  gkhx_.resize(n);
  gkhy_.resize(n);
  gkhz_.resize(n);
  const double* kk = grid.kabs();
  const double* mask = grid.mask();
  for (std::size_t i = 0; i < n; ++i) {
    rho_[i] = mask[i] != 0.0 ? profile.density_hat(kk[i]) : 0.0;
    gmr_[i] = mask[i] != 0.0 ? profile.moment_radial(kk[i]) : 0.0;
    gkhx_[i] = gmr_[i] * grid.khx()[i];
    gkhy_[i] = gmr_[i] * grid.khy()[i];
    gkhz_[i] = gmr_[i] * grid.khz()[i];
  }
}

void leray_project(const Grid& g, SpectralField& F) {
  check_same_grid(g, F);
  kernels().leray(g.modes(), F.comp(0), F.comp(1), F.comp(2), g.kx(), g.ky(), g.kz(), g.inv_k2(),
                  g.mask());
}

SpectralField leray_projected(const Grid& g, const SpectralField& F) {
  SpectralField out = F;
  leray_project(g, out);
  return out;
}

SpectralField curl(const Grid& g, const SpectralField& F) {
  check_same_grid(g, F);
  SpectralField out(F.modes);
  const double* kx = g.kx();
  const double* ky = g.ky();
  const double* kz = g.kz();
  const Complex* f0 = F.comp(0);
  const Complex* f1 = F.comp(1);
  const Complex* f2 = F.comp(2);
  Complex* o0 = out.comp(0);
  Complex* o1 = out.comp(1);
  Complex* o2 = out.comp(2);
  const Complex iu(0.0, 1.0);
  for (std::size_t i = 0; i < F.modes; ++i) {
    o0[i] = iu * (ky[i] * f2[i] - kz[i] * f1[i]);
    o1[i] = iu * (kz[i] * f0[i] - kx[i] * f2[i]);
    o2[i] = iu * (kx[i] * f1[i] - ky[i] * f0[i]);
  }
  return out;
}

SpectralField laplacian(const Grid& g, const SpectralField& F) {
  check_same_grid(g, F);
  SpectralField out(F.modes);
  const double* k2 = g.k2();
  for (int c = 0; c < 3; ++c) {
    const Complex* f = F.comp(c);
    Complex* o = out.comp(c);
    for (std::size_t i = 0; i < F.modes; ++i) o[i] = -k2[i] * f[i];
  }
  return out;
}

SpectralField advect(const Grid& g, const Vec3& v, const SpectralField& F) {
  check_same_grid(g, F);
  SpectralField out(F.modes);
  std::vector<double> vk(F.modes);
  kernels().dot_k(F.modes, vk.data(), g.kx(), g.ky(), g.kz(), v.x, v.y, v.z);
  for (int c = 0; c < 3; ++c) {
    const Complex* f = F.comp(c);
    Complex* o = out.comp(c);
    for (std::size_t i = 0; i < F.modes; ++i)
      o[i] = Complex(-vk[i] * f[i].imag(), vk[i] * f[i].real());
  }
  return out;
}

double divergence_linf(const Grid& g, const SpectralField& F) {
  check_same_grid(g, F);
  const double* kx = g.kx();
  const double* ky = g.ky();
  const double* kz = g.kz();
  const Complex* f0 = F.comp(0);
  const Complex* f1 = F.comp(1);
  const Complex* f2 = F.comp(2);
  double worst = 0.0;
  for (std::size_t i = 0; i < F.modes; ++i) {
    const Complex d = kx[i] * f0[i] + ky[i] * f1[i] + kz[i] * f2[i];
    worst = std::max(worst, std::abs(d));
  }
  return worst;
}

double hermitian_defect(const Grid& g, const SpectralField& F) {
  check_same_grid(g, F);
  const int N = g.N();
  double worst = 0.0;
  for (int c = 0; c < 3; ++c) {
    const Complex* f = F.comp(c);
    for (int ix = 0; ix < N; ++ix) {
      const int jx = (N - ix) % N;
      for (int iy = 0; iy < N; ++iy) {
        const int jy = (N - iy) % N;
        for (int iz = 0; iz < N; ++iz) {
          const int jz = (N - iz) % N;
          const std::size_t a = (static_cast<std::size_t>(ix) * N + iy) * N + iz;
          const std::size_t b = (static_cast<std::size_t>(jx) * N + jy) * N + jz;
          worst = std::max(worst, std::abs(f[a] - std::conj(f[b])));
        }
      }
    }
  }
  return worst;
}

double inner(const Grid& g, const SpectralField& F, const SpectralField& G) {
  check_same_grid(g, F);
  check_same_grid(g, G);
  const auto& k = kernels();
  double s = 0.0;
  for (int c = 0; c < 3; ++c) s += k.dot_re(F.modes, F.comp(c), G.comp(c));
  const double dk = g.dk();
  return dk * dk * dk * s;
}

double inner_weighted(const Grid& g, const SpectralField& F, const SpectralField& G,
                      const double* w) {
  check_same_grid(g, F);
  check_same_grid(g, G);
  const auto& k = kernels();
  double s = 0.0;
  for (int c = 0; c < 3; ++c) s += k.dot_re_w(F.modes, F.comp(c), G.comp(c), w);
  const double dk = g.dk();
  return dk * dk * dk * s;
}

double norm_l2(const Grid& g, const SpectralField& F) { return std::sqrt(inner(g, F, F)); }

double norm_h1dot(const Grid& g, const SpectralField& F) {
  return std::sqrt(inner_weighted(g, F, F, g.k2()));
}

double norm_hminus1(const Grid& g, const SpectralField& F) {
  const std::size_t n = g.modes();
  const double* k2 = g.k2();
  const auto& k = kernels();
  double s = 0.0;
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = 1.0 / (1.0 + k2[i]);
  for (int c = 0; c < 3; ++c) s += k.dot_re_w(n, F.comp(c), F.comp(c), w.data());
  const double dk = g.dk();
  return std::sqrt(dk * dk * dk * s);
}

double znorm(const Grid& g, const SpectralField& alpha, const SpectralField& beta,
             const Vec3& gamma) {
  const double a = norm_h1dot(g, alpha);
  const double b = norm_l2(g, beta);
  return std::sqrt(a * a + b * b + dot(gamma, gamma));
}

Vec3 momentum_coupling(const Grid& g, const SpectralField& Pi, const SpectralField& A) {
  check_same_grid(g, Pi);
  check_same_grid(g, A);
  const auto& k = kernels();
  const double* kw[3] = {g.kx(), g.ky(), g.kz()};
  Vec3 out{};
  for (int n = 0; n < 3; ++n) {
    double s = 0.0;
    for (int c = 0; c < 3; ++c) s += k.dot_im_w(Pi.modes, Pi.comp(c), A.comp(c), kw[n]);
    out[n] = s;
  }
  const double dk = g.dk();
  return dk * dk * dk * out;
}

Vec3 charge_coupling(const ProfileTables& t, const SpectralField& A) {
  const Grid& g = t.grid();
  check_same_grid(g, A);
  const auto& k = kernels();
  Vec3 out{};
  for (int c = 0; c < 3; ++c) out[c] = k.sum_re_w(A.modes, A.comp(c), t.rho());
  const double dk = g.dk();
  return dk * dk * dk * out;
}

Vec3 charge_coupling(const ProfileTables& t, const SpectralField& A, const Vec3& q) {
  const Grid& g = t.grid();
  check_same_grid(g, A);
  if (std::sqrt(dot(q, q)) + t.radius() > g.L())
    throw std::invalid_argument("charge support escapes the box");
  const std::size_t n = g.modes();
  const double* kx = g.kx();
  const double* ky = g.ky();
  const double* kz = g.kz();
  const double* rho = t.rho();
  Vec3 out{};
  for (std::size_t i = 0; i < n; ++i) {
    if (rho[i] == 0.0) continue;
    const double ph = kx[i] * q.x + ky[i] * q.y + kz[i] * q.z;
    const double cp = std::cos(ph), sp = std::sin(ph);
    for (int c = 0; c < 3; ++c) {
      const Complex a = A.comp(c)[i];
      // Re[Ahat e^{+ik.q}] rho_hat per mode
      out[c] += (a.real() * cp - a.imag() * sp) * rho[i];
    }
  }
  const double dk = g.dk();
  return dk * dk * dk * out;
}

Vec3 moment_coupling(const ProfileTables& t, const SpectralField& alpha) {
  const Grid& g = t.grid();
  check_same_grid(g, alpha);
  const auto& k = kernels();
  const std::size_t n = alpha.modes;
  // M_n = dk^3 sum_c g (e_n ^ khat)_c Im(alpha_c)
  const double m1 =
      k.sum_im_w(n, alpha.comp(2), t.gkh(1)) - k.sum_im_w(n, alpha.comp(1), t.gkh(2));
  const double m2 =
      k.sum_im_w(n, alpha.comp(0), t.gkh(2)) - k.sum_im_w(n, alpha.comp(2), t.gkh(0));
  const double m3 =
      k.sum_im_w(n, alpha.comp(1), t.gkh(0)) - k.sum_im_w(n, alpha.comp(0), t.gkh(1));
  const double dk = g.dk();
  return dk * dk * dk * Vec3{m1, m2, m3};
}

double tail_fraction(const Grid& g, const SpectralField& F) {
  check_same_grid(g, F);
  PhysicalField p = g.to_physical(F);
  const std::size_t n = g.modes();
  const double* yx = g.yx();
  const double* yy = g.yy();
  const double* yz = g.yz();
  const double edge = 0.9 * g.L();
  double tail = 0.0, total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double e = 0.0;
    for (int c = 0; c < 3; ++c) e += p.comp(c)[i] * p.comp(c)[i];
    total += e;
    const double m = std::max(std::abs(yx[i]), std::max(std::abs(yy[i]), std::abs(yz[i])));
    if (m >= edge) tail += e;
  }
  return total > 0.0 ? tail / total : 0.0;
}

AngularCoupling angular_coupling(const Grid& g, const SpectralField& A, const SpectralField& Pi,
                                 int axis, double tail_tolerance) {
  check_same_grid(g, A);
  check_same_grid(g, Pi);
  if (axis < 0 || axis > 2) throw std::invalid_argument("angular_coupling: axis must be 0..2");
  static const int pair[3][2] = {{1, 2}, {2, 0}, {0, 1}};
  const int i0 = pair[axis][0], i1 = pair[axis][1];
  const std::size_t n = g.modes();
  const double* kw[3] = {g.kx(), g.ky(), g.kz()};
  const double* yw[3] = {g.yx(), g.yy(), g.yz()};

  std::vector<Complex> spec(n);
  std::vector<double> d0(n), d1(n), p(n);
  double acc = 0.0;
  for (int c = 0; c < 3; ++c) {
    const Complex* a = A.comp(c);
    for (std::size_t i = 0; i < n; ++i)
      spec[i] = Complex(-kw[i1][i] * a[i].imag(), kw[i1][i] * a[i].real());
    g.to_physical_scalar(spec.data(), d1.data());
    for (std::size_t i = 0; i < n; ++i)
      spec[i] = Complex(-kw[i0][i] * a[i].imag(), kw[i0][i] * a[i].real());
    g.to_physical_scalar(spec.data(), d0.data());
    g.to_physical_scalar(Pi.comp(c), p.data());
    for (std::size_t i = 0; i < n; ++i) acc += (yw[i0][i] * d1[i] - yw[i1][i] * d0[i]) * p[i];
  }
  AngularCoupling out;
  const double h = g.h();
  out.grad_term = acc * h * h * h;
  const auto& k = kernels();
  const double dk3 = g.dk() * g.dk() * g.dk();
  out.wedge_term =
      dk3 * (k.dot_re(n, A.comp(i0), Pi.comp(i1)) - k.dot_re(n, A.comp(i1), Pi.comp(i0)));
  out.tail_fraction_A = tail_fraction(g, A);
  out.tail_fraction_Pi = tail_fraction(g, Pi);
  out.truncation_warning =
      out.tail_fraction_A > tail_tolerance || out.tail_fraction_Pi > tail_tolerance;
  return out;
}

SpectralField random_divfree(const Grid& g, std::uint64_t seed, double k0) {
  if (k0 <= 0.0) throw std::invalid_argument("random_divfree: k0 must be positive");
  const std::size_t n = g.modes();
  SpectralField F(n);
  GaussianStream gs(seed);
  const double* k2 = g.k2();
  const double inv = 1.0 / (k0 * k0);
  for (int c = 0; c < 3; ++c) {
    Complex* f = F.comp(c);
    for (std::size_t i = 0; i < n; ++i) {
      const double re = gs.next();
      const double im = gs.next();
      const double env = std::exp(-k2[i] * inv);
      f[i] = Complex(re * env, im * env);
    }
  }
  // Hermitian symmetrization: F(k) <- (F(k) + conj(F(-k)))/2.
  const int N = g.N();
  SpectralField raw = F;
  for (int c = 0; c < 3; ++c) {
    const Complex* src = raw.comp(c);
    Complex* dst = F.comp(c);
    for (int ix = 0; ix < N; ++ix) {
      const int jx = (N - ix) % N;
      for (int iy = 0; iy < N; ++iy) {
        const int jy = (N - iy) % N;
        for (int iz = 0; iz < N; ++iz) {
          const int jz = (N - iz) % N;
          const std::size_t a = (static_cast<std::size_t>(ix) * N + iy) * N + iz;
          const std::size_t b = (static_cast<std::size_t>(jx) * N + jy) * N + jz;
          dst[a] = 0.5 * (src[a] + std::conj(src[b]));
        }
      }
    }
  }
  leray_project(g, F);
  return F;
}

Vec3 random_gamma(std::uint64_t seed) {
  GaussianStream gs(seed);
  const double a = gs.next(), b = gs.next(), c = gs.next();
  return Vec3{a, b, c};
}

SpectralField random_localized_curl(const Grid& g, std::uint64_t seed, double k0, double sigma) {
  if (sigma <= 0.0) throw std::invalid_argument("random_localized_curl: sigma must be positive");
  SpectralField pot = random_divfree(g, seed, k0);
  PhysicalField phys = g.to_physical(pot);
  const std::size_t n = g.modes();
  const double* yx = g.yx();
  const double* yy = g.yy();
  const double* yz = g.yz();
  const double inv = 1.0 / (2.0 * sigma * sigma);
  for (int c = 0; c < 3; ++c) {
    double* p = phys.comp(c);
    for (std::size_t i = 0; i < n; ++i) {
      const double r2 = yx[i] * yx[i] + yy[i] * yy[i] + yz[i] * yz[i];
      p[i] *= std::exp(-r2 * inv);
    }
  }
  g.to_spectral(phys, pot);
  SpectralField out = curl(g, pot);
  g.apply_mask(out);
  return out;
}

ReconstructedFields reconstruct_EB(const ProfileTables& t, const SpectralField& A,
                                   const SpectralField& Pi, const Vec3& q) {
  const Grid& g = t.grid();
  check_same_grid(g, A);
  check_same_grid(g, Pi);
  if (std::sqrt(dot(q, q)) + t.radius() > g.L())
    throw std::invalid_argument("charge support escapes the box");
  const std::size_t n = g.modes();
  ReconstructedFields out{SpectralField(n), SpectralField(n), std::vector<Complex>(n), q};
  out.B = curl(g, A);

  const double* kx = g.kx();
  const double* ky = g.ky();
  const double* kz = g.kz();
  const double* invk2 = g.inv_k2();
  const double* rho = t.rho();
  double res2 = 0.0, den2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ph = kx[i] * q.x + ky[i] * q.y + kz[i] * q.z;
    // rho(.-q) transform: rho_hat e^{-ik.q}; Coulomb k^2 Phi_hat = rho_q_hat.
    const Complex rho_q = rho[i] * Complex(std::cos(ph), -std::sin(ph));
    const Complex phi = rho_q * invk2[i];
    out.Phi[i] = phi;
    const Complex iu(0.0, 1.0);
    const Complex e0 = -Pi.comp(0)[i] - iu * kx[i] * phi;
    const Complex e1 = -Pi.comp(1)[i] - iu * ky[i] * phi;
    const Complex e2 = -Pi.comp(2)[i] - iu * kz[i] * phi;
    out.E.comp(0)[i] = e0;
    out.E.comp(1)[i] = e1;
    out.E.comp(2)[i] = e2;
    const Complex divE = iu * (kx[i] * e0 + ky[i] * e1 + kz[i] * e2);
    const Complex target = rho_q * g.mask()[i];
    res2 += std::norm(divE - target);
    den2 += std::norm(target);
  }
  out.gauss_residual = den2 > 0.0 ? std::sqrt(res2 / den2) : std::sqrt(res2);
  out.divB_linf = divergence_linf(g, out.B);
  return out;
}

SpectralField transfer(const Grid& coarse, const Grid& fine, const SpectralField& F) {
  if (F.modes != coarse.modes()) throw std::invalid_argument("transfer: field/grid mismatch");
  if (fine.N() < coarse.N() || std::abs(fine.L() - coarse.L()) > 1e-12 * coarse.L())
    throw std::invalid_argument("transfer: fine grid must refine the same box");
  const int Nc = coarse.N(), Nf = fine.N();
  SpectralField out(fine.modes());
  out.set_zero();
  for (int ix = 0; ix < Nc; ++ix) {
    const int nx = (ix < Nc / 2) ? ix : ix - Nc;
    if (std::abs(nx) >= Nc / 2) continue;
    const int fx = (nx + Nf) % Nf;
    for (int iy = 0; iy < Nc; ++iy) {
      const int ny = (iy < Nc / 2) ? iy : iy - Nc;
      if (std::abs(ny) >= Nc / 2) continue;
      const int fy = (ny + Nf) % Nf;
      for (int iz = 0; iz < Nc; ++iz) {
        const int nz = (iz < Nc / 2) ? iz : iz - Nc;
        if (std::abs(nz) >= Nc / 2) continue;
        const int fz = (nz + Nf) % Nf;
        const std::size_t a = (static_cast<std::size_t>(ix) * Nc + iy) * Nc + iz;
        const std::size_t b = (static_cast<std::size_t>(fx) * Nf + fy) * Nf + fz;
        for (int c = 0; c < 3; ++c) out.comp(c)[b] = F.comp(c)[a];
      }
    }
  }
  return out;
}

}  // namespace mls

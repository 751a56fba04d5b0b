#include "mls/linearized.hpp"

#include <cmath>
#include <stdexcept>

#include "mls/kernels.hpp"

namespace mls {

namespace {

double relative_drift(double x, double x0) {
  const double d = std::abs(x - x0);
  return x0 != 0.0 ? d / std::abs(x0) : d;
}

// 3x3 inverse via cofactors; a is row-major.
std::array<double, 9> invert3(const std::array<double, 9>& a) {
  const double c00 = a[4] * a[8] - a[5] * a[7];
  const double c01 = a[5] * a[6] - a[3] * a[8];
  const double c02 = a[3] * a[7] - a[4] * a[6];
  const double det = a[0] * c00 + a[1] * c01 + a[2] * c02;
  if (!(std::abs(det) > 1e-12)) throw std::runtime_error("degenerate constraint frame");
  const double d = 1.0 / det;
  return {c00 * d,
          (a[2] * a[7] - a[1] * a[8]) * d,
          (a[1] * a[5] - a[2] * a[4]) * d,
          c01 * d,
          (a[0] * a[8] - a[2] * a[6]) * d,
          (a[2] * a[3] - a[0] * a[5]) * d,
          c02 * d,
          (a[1] * a[6] - a[0] * a[7]) * d,
          (a[0] * a[4] - a[1] * a[3]) * d};
}

}  // namespace

TangentFrame::TangentFrame(const Grid& g, const ChargeProfile& profile, const Soliton& s,
                           double m, double I)
    : grid_(&g), tables_(g, profile), A0_(s.A), omega_(s.params.omega), m_(m), I_(I) {
  if (norm(s.params.v) != 0.0) throw WrongRegimeError();
  nu_ = 1.0 / I_;
  pi0_ = I_ * omega_ + moment_coupling(tables_, A0_);
  const double w2 = dot(omega_, omega_);
  // Lattice-consistent effective inertia: pi0 = I_eff * omega on the grid.
  I_eff_ = w2 > 0.0 ? dot(pi0_, omega_) / w2 : I_;
  nu_eff_ = 1.0 / I_eff_;

  // b_n in closed form: bhat_n = i (g(r)/r^3) [k_n omega - (omega.k) e_n],
  // the exact spectral reading of e_n ^ A0 - (y ^ grad)_n A0, Leray-projected.
  const std::size_t nm = g.modes();
  const double* kw[3] = {g.kx(), g.ky(), g.kz()};
  const double* kabs = g.kabs();
  const double* mask = g.mask();
  const double* gmr = tables_.moment();
  for (int n = 0; n < 3; ++n) {
    b_[n] = SpectralField(nm);
    for (std::size_t i = 0; i < nm; ++i) {
      if (mask[i] == 0.0) continue;
      const double r = kabs[i];
      const double G = gmr[i] / (r * r * r);
      const double kn = kw[n][i];
      const double wk = omega_.x * kw[0][i] + omega_.y * kw[1][i] + omega_.z * kw[2][i];
      for (int c = 0; c < 3; ++c) {
        const double val = kn * omega_[c] - wk * (c == n ? 1.0 : 0.0);
        b_[n].comp(c)[i] = Complex(0.0, G * val);
      }
    }
  }
  for (int n = 0; n < 3; ++n) {
    for (int k = 0; k < 3; ++k)
      gram_[3 * n + k] = inner(g, b_[n], b_[k]) + (n == k ? 1.0 : 0.0);
  }
  gram_inv_ = invert3(gram_);
}

Vec3 TangentFrame::gram_solve(const Vec3& rhs) const {
  const auto& a = gram_inv_;
  return {a[0] * rhs.x + a[1] * rhs.y + a[2] * rhs.z,
          a[3] * rhs.x + a[4] * rhs.y + a[5] * rhs.z,
          a[6] * rhs.x + a[7] * rhs.y + a[8] * rhs.z};
}

Vec3 constraint_pairing(const TangentFrame& f, const TangentVector& xi) {
  const Grid& g = f.grid();
  return {inner(g, f.b(0), xi.Pi) + xi.pi.x, inner(g, f.b(1), xi.Pi) + xi.pi.y,
          inner(g, f.b(2), xi.Pi) + xi.pi.z};
}

TangentVector project_tangent(const TangentFrame& f, const TangentVector& xi) {
  const Vec3 coef = f.gram_solve(constraint_pairing(f, xi));
  TangentVector out = xi;
  const auto& k = kernels();
  for (int n = 0; n < 3; ++n) {
    k.axpy(3 * out.Pi.modes, out.Pi.data.data(), -coef[n], f.b(n).data.data());
    out.pi[n] -= coef[n];
  }
  return out;
}

TangentVector linear_rhs(const TangentFrame& f, const TangentVector& xi) {
  const Grid& g = f.grid();
  const ProfileTables& t = f.tables();
  const std::size_t n = g.modes();

  const Vec3 dv =
      (momentum_coupling(g, xi.Pi, f.A0()) - charge_coupling(t, xi.A)) / f.m();
  const Vec3 dw = f.nu() * (xi.pi - moment_coupling(t, xi.A));

  TangentVector d;
  // alphadot = beta + (dv.grad) A0
  d.A = advect(g, dv, f.A0());
  const auto& k = kernels();
  k.axpy(3 * n, d.A.data.data(), 1.0, xi.Pi.data.data());

  // betadot = Lap alpha + P[(dv + dw ^ y) rho]
  d.Pi = SpectralField(n);
  std::vector<double> zero_vk(n, 0.0);
  for (int c = 0; c < 3; ++c)
    k.wave(n, d.Pi.comp(c), xi.A.comp(c), xi.Pi.comp(c), g.k2(), zero_vk.data());
  const double varr[3] = {dv.x, dv.y, dv.z};
  const double warr[3] = {dw.x, dw.y, dw.z};
  k.current(n, d.Pi.comp(0), d.Pi.comp(1), d.Pi.comp(2), t.rho(), t.moment(), g.khx(), g.khy(),
            g.khz(), varr, warr);

  // gammadot = -pi0 ^ dw - gamma ^ omega
  d.pi = cross(dw, f.pi0()) + cross(f.omega(), xi.pi);
  return d;
}

double quadratic_hamiltonian(const TangentFrame& f, const TangentVector& xi) {
  const Grid& g = f.grid();
  const ProfileTables& t = f.tables();
  const double beta2 = inner(g, xi.Pi, xi.Pi);
  const double grada2 = inner_weighted(g, xi.A, xi.A, g.k2());
  const Vec3 dp = momentum_coupling(g, xi.Pi, f.A0()) - charge_coupling(t, xi.A);
  const Vec3 dM = xi.pi - moment_coupling(t, xi.A);
  return 0.5 * (beta2 + grada2) + dot(dp, dp) / (2.0 * f.m()) + 0.5 * f.nu() * dot(dM, dM) +
         dot(f.omega(), xi.pi);
}

double linear_lyapunov(const TangentFrame& f, const TangentVector& xi) {
  return quadratic_hamiltonian(f, xi) - 0.5 * f.nu_eff() * dot(xi.pi, xi.pi);
}

LinearRecord integrate_linear(const TangentFrame& f, TangentVector xi, double T, double dt,
                              int record_every) {
  const Grid& g = f.grid();
  if (T <= 0.0 || dt <= 0.0)
    throw std::invalid_argument("integrate_linear: T and dt must be positive");
  const double bound = 0.5 * g.h();  // v = 0 at the rotating soliton
  if (dt > bound * 1.0000001) throw StepSizeError(dt, bound);

  const long n_steps = static_cast<long>(std::ceil(T / dt - 1e-12));
  const int every = record_every > 0 ? record_every : 1;

  LinearRecord rec;
  TangentVector last_good;
  double L0 = 0.0, H0 = 0.0, G0 = 0.0, Z0 = 0.0;

  auto sample = [&](long step) {
    LinearSample row;
    row.t = step * dt;
    row.L = linear_lyapunov(f, xi);
    row.H_quad = quadratic_hamiltonian(f, xi);
    row.gamma2 = dot(xi.pi, xi.pi);
    row.znorm = znorm(g, xi.A, xi.Pi, xi.pi);
    const Vec3 pairs = constraint_pairing(f, xi);
    row.defect = std::max(std::abs(pairs.x), std::max(std::abs(pairs.y), std::abs(pairs.z)));
    if (!std::isfinite(row.L) || !std::isfinite(row.znorm))
      throw DivergenceError(row.t, std::move(last_good));
    if (rec.samples.empty()) {
      L0 = row.L;
      H0 = row.H_quad;
      G0 = row.gamma2;
      Z0 = row.znorm;
    }
    rec.L_drift = std::max(rec.L_drift, relative_drift(row.L, L0));
    rec.H_quad_drift = std::max(rec.H_quad_drift, relative_drift(row.H_quad, H0));
    rec.gamma2_drift = std::max(rec.gamma2_drift, relative_drift(row.gamma2, G0));
    rec.sup_norm_ratio =
        std::max(rec.sup_norm_ratio, Z0 > 0.0 ? row.znorm / Z0 : row.znorm);
    rec.max_defect = std::max(rec.max_defect, row.defect);
    rec.samples.push_back(row);
    last_good = xi;
  };

  const std::size_t n = g.modes();
  const auto& k = kernels();
  TangentVector tmp;
  tmp.A = SpectralField(n);
  tmp.Pi = SpectralField(n);

  sample(0);
  for (long step = 1; step <= n_steps; ++step) {
    const TangentVector k1 = linear_rhs(f, xi);
    tmp = xi;
    axpy_state(tmp, 0.5 * dt, k1);
    const TangentVector k2 = linear_rhs(f, tmp);
    tmp = xi;
    axpy_state(tmp, 0.5 * dt, k2);
    const TangentVector k3 = linear_rhs(f, tmp);
    tmp = xi;
    axpy_state(tmp, dt, k3);
    const TangentVector k4 = linear_rhs(f, tmp);
    const double s = dt / 6.0;
    k.rk4_update(3 * n, xi.A.data.data(), xi.A.data.data(), k1.A.data.data(), k2.A.data.data(),
                 k3.A.data.data(), k4.A.data.data(), s);
    k.rk4_update(3 * n, xi.Pi.data.data(), xi.Pi.data.data(), k1.Pi.data.data(),
                 k2.Pi.data.data(), k3.Pi.data.data(), k4.Pi.data.data(), s);
    xi.pi += s * (k1.pi + 2.0 * k2.pi + 2.0 * k3.pi + k4.pi);
    if (step % every == 0 || step == n_steps) sample(step);
  }
  rec.final_state = std::move(xi);
  return rec;
}

}  // namespace mls

#include "mls/reduced_dynamics.hpp"

#include <cmath>

#include "mls/kernels.hpp"

namespace mls {

namespace {

double relative_drift(double x, double x0) {
  const double d = std::abs(x - x0);
  return x0 != 0.0 ? d / std::abs(x0) : d;
}

}  // namespace

void axpy_state(ReducedState& y, double a, const ReducedState& x) {
  const auto& k = kernels();
  k.axpy(3 * y.A.modes, y.A.data.data(), a, x.A.data.data());
  k.axpy(3 * y.Pi.modes, y.Pi.data.data(), a, x.Pi.data.data());
  y.pi += a * x.pi;
}

ReducedState state_from_soliton(const Soliton& s) {
  ReducedState z;
  z.A = s.A;
  z.Pi = s.Pi;
  z.pi = s.pi;
  return z;
}

Velocities closure_velocities(const Grid& g, const ProfileTables& t, const ModelParams& p,
                              const ReducedState& z) {
  const Vec3 mc = momentum_coupling(g, z.Pi, z.A);
  const Vec3 cc = charge_coupling(t, z.A);
  const Vec3 mo = moment_coupling(t, z.A);
  return {(p.P + mc - cc) / p.m, (z.pi - mo) / p.I};
}

ReducedState rhs(const Grid& g, const ProfileTables& t, const ModelParams& p,
                 const ReducedState& z) {
  const auto [v, w] = closure_velocities(g, t, p, z);
  const std::size_t n = g.modes();
  ReducedState d;
  d.A = SpectralField(n);
  d.Pi = SpectralField(n);
  std::vector<double> vk(n);
  const auto& k = kernels();
  k.dot_k(n, vk.data(), g.kx(), g.ky(), g.kz(), v.x, v.y, v.z);
  for (int c = 0; c < 3; ++c) {
    k.transport(n, d.A.comp(c), z.Pi.comp(c), z.A.comp(c), vk.data());
    k.wave(n, d.Pi.comp(c), z.A.comp(c), z.Pi.comp(c), g.k2(), vk.data());
  }
  const double varr[3] = {v.x, v.y, v.z};
  const double warr[3] = {w.x, w.y, w.z};
  k.current(n, d.Pi.comp(0), d.Pi.comp(1), d.Pi.comp(2), t.rho(), t.moment(), g.khx(), g.khy(),
            g.khz(), varr, warr);
  d.pi = cross(w, z.pi);  // -pi ^ omega
  return d;
}

ReducedState rhs_hamiltonian_form(const Grid& g, const ProfileTables& t, const ModelParams& p,
                                  const ReducedState& z) {
  const auto [v, w] = closure_velocities(g, t, p, z);
  const std::size_t n = g.modes();

  // D_Pi H = Pi + (v.grad) A
  ReducedState d;
  d.A = advect(g, v, z.A);
  const auto& k = kernels();
  k.axpy(3 * n, d.A.data.data(), 1.0, z.Pi.data.data());

  // D_A H = -Lap A - (v.grad) Pi - j,  j = Leray[v rho] + i g (w ^ khat)
  SpectralField j(n);
  const double* rho = t.rho();
  for (int c = 0; c < 3; ++c) {
    Complex* jc = j.comp(c);
    const double vc = v[c];
    for (std::size_t i = 0; i < n; ++i) jc[i] = Complex(vc * rho[i], 0.0);
  }
  leray_project(g, j);
  const double* gmr = t.moment();
  const double* khx = g.khx();
  const double* khy = g.khy();
  const double* khz = g.khz();
  for (std::size_t i = 0; i < n; ++i) {
    j.comp(0)[i] += Complex(0.0, gmr[i] * (w.y * khz[i] - w.z * khy[i]));
    j.comp(1)[i] += Complex(0.0, gmr[i] * (w.z * khx[i] - w.x * khz[i]));
    j.comp(2)[i] += Complex(0.0, gmr[i] * (w.x * khy[i] - w.y * khx[i]));
  }
  SpectralField dAH = laplacian(g, z.A);  // holds +Lap A; D_A H = -(this) - ...
  SpectralField adv = advect(g, v, z.Pi);
  // Pidot = -D_A H = Lap A + (v.grad) Pi + j
  d.Pi = std::move(dAH);
  k.axpy(3 * n, d.Pi.data.data(), 1.0, adv.data.data());
  k.axpy(3 * n, d.Pi.data.data(), 1.0, j.data.data());

  // pidot = -pi ^ D_pi H with D_pi H = omega
  d.pi = cross(w, z.pi);
  return d;
}

double hamiltonian(const Grid& g, const ProfileTables& t, const ModelParams& p,
                   const ReducedState& z) {
  const double fields =
      0.5 * (inner(g, z.Pi, z.Pi) + inner_weighted(g, z.A, z.A, g.k2()));
  const auto [v, w] = closure_velocities(g, t, p, z);
  return fields + 0.5 * p.m * dot(v, v) + 0.5 * p.I * dot(w, w);
}

double casimir(const ReducedState& z) { return dot(z.pi, z.pi); }

Vec3 angular_momentum(const Grid& g, const ProfileTables& t, const ModelParams& p,
                      const ReducedState& z) {
  if (norm(p.P) != 0.0) throw NotAFunctionalError();
  Vec3 J;
  for (int axis = 0; axis < 3; ++axis) {
    const AngularCoupling ac = angular_coupling(g, z.A, z.Pi, axis);
    J[axis] = ac.wedge_term - ac.grad_term + z.pi[axis];
  }
  return J;
}

TrajectoryRecord integrate(const Grid& g, const ProfileTables& t, const ModelParams& p,
                           ReducedState z, double T, double dt, const IntegrateOptions& opts) {
  if (T <= 0.0 || dt <= 0.0) throw std::invalid_argument("integrate: T and dt must be positive");
  if (opts.track_J && norm(p.P) != 0.0) throw NotAFunctionalError();
  const double v0 = norm(closure_velocities(g, t, p, z).v);
  const double bound = 0.5 * g.h() / (1.0 + v0);
  if (dt > bound * 1.0000001) throw StepSizeError(dt, bound);

  const long n_steps = static_cast<long>(std::ceil(T / dt - 1e-12));
  const int every = opts.record_every > 0 ? opts.record_every : 1;

  TrajectoryRecord rec;
  ReducedState last_good;
  double H0 = 0.0, C0 = 0.0, J0 = 0.0;

  const auto& k = kernels();
  const std::size_t n = g.modes();
  ReducedState tmp;
  tmp.A = SpectralField(n);
  tmp.Pi = SpectralField(n);

  auto sample = [&](long step) {
    const double time = step * dt;
    TrajectorySample row;
    row.t = time;
    row.H = hamiltonian(g, t, p, z);
    row.casimir = casimir(z);
    const auto vel = closure_velocities(g, t, p, z);
    row.v = norm(vel.v);
    row.omega = norm(vel.omega);
    if (opts.track_J) row.J = norm(angular_momentum(g, t, p, z));
    if (opts.reference) row.d = distance_to_soliton(g, t, p, z, *opts.reference);
    if (!std::isfinite(row.H) || !std::isfinite(row.casimir))
      throw DivergenceError(time, std::move(last_good));
    if (rec.samples.empty()) {
      H0 = row.H;
      C0 = row.casimir;
      J0 = row.J;
    }
    rec.H_drift = std::max(rec.H_drift, relative_drift(row.H, H0));
    rec.casimir_drift = std::max(rec.casimir_drift, relative_drift(row.casimir, C0));
    if (opts.track_J) rec.J_drift = std::max(rec.J_drift, relative_drift(row.J, J0));
    rec.sup_distance = std::max(rec.sup_distance, row.d);
    rec.samples.push_back(row);
    last_good = z;
  };

  sample(0);
  for (long step = 1; step <= n_steps; ++step) {
    const ReducedState k1 = rhs(g, t, p, z);
    tmp = z;
    axpy_state(tmp, 0.5 * dt, k1);
    const ReducedState k2 = rhs(g, t, p, tmp);
    tmp = z;
    axpy_state(tmp, 0.5 * dt, k2);
    const ReducedState k3 = rhs(g, t, p, tmp);
    tmp = z;
    axpy_state(tmp, dt, k3);
    const ReducedState k4 = rhs(g, t, p, tmp);
    const double s = dt / 6.0;
    k.rk4_update(3 * n, z.A.data.data(), z.A.data.data(), k1.A.data.data(), k2.A.data.data(),
                 k3.A.data.data(), k4.A.data.data(), s);
    k.rk4_update(3 * n, z.Pi.data.data(), z.Pi.data.data(), k1.Pi.data.data(), k2.Pi.data.data(),
                 k3.Pi.data.data(), k4.Pi.data.data(), s);
    z.pi += s * (k1.pi + 2.0 * k2.pi + 2.0 * k3.pi + k4.pi);
    if (step % every == 0 || step == n_steps) sample(step);
  }
  rec.final_state = std::move(z);
  return rec;
}

double lyapunov_nonlinear(const Grid& g, const ProfileTables& t, const ChargeProfile& profile,
                          const ModelParams& p, const ReducedState& z, const Vec3& ref_v,
                          const Vec3& ref_omega) {
  const SigmaClass cls = validate_sigma(ref_v, ref_omega);
  const double nu_eff = 1.0 / effective_inertia(profile, norm(ref_v), cls, p.I);
  return hamiltonian(g, t, p, z) - 0.5 * nu_eff * casimir(z);
}

DeltaHCheck delta_H_check(const Grid& g, const ProfileTables& t, const ModelParams& p,
                          const Soliton& s, const ReducedState& xi) {
  DeltaHCheck out;
  ModelParams ps = p;
  ps.P = s.P;

  ReducedState base = state_from_soliton(s);
  ReducedState pert = base;
  axpy_state(pert, 1.0, xi);
  out.direct = hamiltonian(g, t, ps, pert) - hamiltonian(g, t, ps, base);

  const Vec3 dp = momentum_coupling(g, xi.Pi, s.A) + momentum_coupling(g, s.Pi, xi.A) +
                  momentum_coupling(g, xi.Pi, xi.A) - charge_coupling(t, xi.A);
  const Vec3 dM = xi.pi - moment_coupling(t, xi.A);
  const Vec3 v = s.params.v;
  const Vec3 w = s.params.omega;

  const SpectralField cA = curl(g, s.A);
  const SpectralField ca = curl(g, xi.A);
  const double beta2 = inner(g, xi.Pi, xi.Pi);
  const double curla2 = inner(g, ca, ca);
  out.formula = inner(g, s.Pi, xi.Pi) + inner(g, cA, ca) + 0.5 * (beta2 + curla2) + dot(v, dp) +
                dot(dp, dp) / (2.0 * p.m) + dot(w, dM) + dot(dM, dM) / (2.0 * p.I);

  const double grada2 = inner_weighted(g, xi.A, xi.A, g.k2());
  out.j1_term = 0.5 * (beta2 + grada2) + dot(v, momentum_coupling(g, xi.Pi, xi.A));
  out.j1_floor = 0.5 * (1.0 - norm(v)) * (beta2 + grada2);
  return out;
}

double distance_to_soliton(const Grid& g, const ProfileTables& t, const ModelParams& p,
                           const ReducedState& z, const Soliton& s) {
  if (z.A.modes != g.modes() || s.A.modes != g.modes())
    throw std::invalid_argument("distance_to_soliton: grid mismatch");
  SpectralField dA = z.A;
  SpectralField dPi = z.Pi;
  const auto& k = kernels();
  k.axpy(3 * g.modes(), dA.data.data(), -1.0, s.A.data.data());
  k.axpy(3 * g.modes(), dPi.data.data(), -1.0, s.Pi.data.data());
  const double dz = znorm(g, dA, dPi, z.pi - s.pi);
  const auto vel = closure_velocities(g, t, p, z);
  return dz + norm(vel.v - s.params.v) + norm(vel.omega - s.params.omega);
}

double stationarity_residual(const Grid& g, const ProfileTables& t, const Soliton& s, double m,
                             double I) {
  ModelParams p{m, I, s.P};
  const ReducedState z = state_from_soliton(s);
  const double ny = znorm(g, z.A, z.Pi, z.pi);
  if (ny == 0.0) return 0.0;
  const ReducedState d = rhs(g, t, p, z);
  const double nv = std::sqrt(inner(g, d.A, d.A) + inner(g, d.Pi, d.Pi) + dot(d.pi, d.pi));
  return nv / ny;
}

ReducedState random_perturbation(const Grid& g, std::uint64_t seed, double eps, double k0) {
  ReducedState xi;
  xi.A = random_divfree(g, seed, k0);
  xi.Pi = random_divfree(g, seed + 1, k0);
  xi.pi = random_gamma(seed + 2);
  const double nz = znorm(g, xi.A, xi.Pi, xi.pi);
  const double scale = (eps == 0.0 || nz == 0.0) ? 0.0 : eps / nz;
  for (auto& c : xi.A.data) c *= scale;
  for (auto& c : xi.Pi.data) c *= scale;
  xi.pi *= scale;
  return xi;
}

OrbitalReport orbital_stability_experiment(const Grid& g, const ChargeProfile& profile,
                                           const Vec3& v, double eps, double T,
                                           std::uint64_t seed, double m, double I, double k0,
                                           int record_every, double dt) {
  ProfileTables tables(g, profile);
  const Soliton s = build_soliton(g, profile, v, Vec3{}, m, I);

  ReducedState z0 = state_from_soliton(s);
  const ReducedState xi = random_perturbation(g, seed, eps, k0);
  axpy_state(z0, 1.0, xi);

  OrbitalReport rep;
  rep.eps = eps;
  // Conserved momentum of the perturbed state, evaluated with the soliton's
  // own velocity as q-dot (the perturbation leaves the particle slot alone).
  rep.P = total_momentum(tables, z0.A, z0.Pi, v, m);
  rep.v_star = invert_momentum(g, profile, rep.P, 0.0, m);
  const Soliton comparison = build_soliton(g, profile, rep.v_star, Vec3{}, m, I);

  ModelParams params{m, I, rep.P};
  if (dt <= 0.0) dt = 0.5 * g.h() / (1.0 + norm(v));
  IntegrateOptions opts;
  opts.record_every = record_every;
  opts.reference = &comparison;
  rep.record = integrate(g, tables, params, std::move(z0), T, dt, opts);

  rep.sup_distance = rep.record.sup_distance;
  rep.ratio = eps > 0.0 ? rep.sup_distance / eps : 0.0;
  rep.H_drift = rep.record.H_drift;
  const ReducedState zc = state_from_soliton(comparison);
  const double Hs = hamiltonian(g, tables, params, zc);
  double lo = 0.0, hi = 0.0;
  bool first = true;
  for (const auto& row : rep.record.samples) {
    const double gap = row.H - Hs;
    lo = first ? gap : std::min(lo, gap);
    hi = first ? gap : std::max(hi, gap);
    first = false;
  }
  rep.energy_gap_min = lo;
  rep.energy_gap_max = hi;
  return rep;
}

}  // namespace mls

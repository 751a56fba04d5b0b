#pragma once
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "mls/charge_profile.hpp"
#include "mls/field.hpp"
#include "mls/grid.hpp"
#include "mls/soliton.hpp"
#include "mls/spectral_ops.hpp"
#include "mls/vec3.hpp"

namespace mls {

// Parameters of the reduced Hamiltonian family: bare mass and inertia plus
// the conserved total momentum P that labels the member of the family.
struct ModelParams {
  double m = 1.0;
  double I = 1.0;
  Vec3 P{};
};

// Z = (A, Pi, pi): vector potential, conjugate field, spin angular momentum.
struct ReducedState {
  SpectralField A;
  SpectralField Pi;
  Vec3 pi{};
};

ReducedState state_from_soliton(const Soliton& s);

// y += a x, over both fields and the spin slot.
void axpy_state(ReducedState& y, double a, const ReducedState& x);

struct Velocities {
  Vec3 v;
  Vec3 omega;
};

// Scalar closures eliminating (q, p) and the rotation:
//   v = (P + <Pi, grad A> - <A, rho>) / m,   omega = (pi - <y ^ A, rho>) / I.
Velocities closure_velocities(const Grid& g, const ProfileTables& t, const ModelParams& p,
                              const ReducedState& z);

// Field equations: Adot = Pi + (v.grad)A, Pidot = Lap A + (v.grad)Pi + j,
// pidot = -pi ^ omega, with j the Leray-projected convection+spin current.
ReducedState rhs(const Grid& g, const ProfileTables& t, const ModelParams& p,
                 const ReducedState& z);

// Same derivative assembled as J(Z) DH(Z) from the variational derivatives of
// the Hamiltonian; agreement with rhs is the Hamilton-Poisson structure test.
ReducedState rhs_hamiltonian_form(const Grid& g, const ProfileTables& t, const ModelParams& p,
                                  const ReducedState& z);

double hamiltonian(const Grid& g, const ProfileTables& t, const ModelParams& p,
                   const ReducedState& z);

// Casimir invariant pi . pi.
double casimir(const ReducedState& z);

// Angular momentum is a well-defined functional of the reduced state only at
// P = 0 (the representative-point term q ^ P is dropped by the reduction).
class NotAFunctionalError : public std::logic_error {
 public:
  NotAFunctionalError()
      : std::logic_error("angular momentum is a functional of the reduced state only at P = 0") {}
};

Vec3 angular_momentum(const Grid& g, const ProfileTables& t, const ModelParams& p,
                      const ReducedState& z);

class StepSizeError : public std::invalid_argument {
 public:
  StepSizeError(double dt, double bound)
      : std::invalid_argument("dt = " + std::to_string(dt) +
                              " violates the CFL bound 0.5 h / (1 + |v|) = " +
                              std::to_string(bound)) {}
};

// Non-finite values appeared during integration; carries the most recent
// recorded state and its time so the caller can inspect or restart.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(double t, ReducedState last_good)
      : std::runtime_error("integration diverged (non-finite values) at t = " +
                           std::to_string(t)),
        t_(t),
        last_good_(std::move(last_good)) {}
  double time() const { return t_; }
  const ReducedState& last_good_state() const { return last_good_; }

 private:
  double t_;
  ReducedState last_good_;
};

// One recorded row of a trajectory (scalar reductions of the state).
struct TrajectorySample {
  double t = 0.0;
  double H = 0.0;        // reduced Hamiltonian
  double casimir = 0.0;  // pi . pi
  double J = 0.0;        // |angular momentum| when tracked (P = 0), else 0
  double v = 0.0;        // |closure velocity|
  double omega = 0.0;    // |closure angular velocity|
  double d = 0.0;        // distance to the reference soliton when attached
};

struct IntegrateOptions {
  int record_every = 1;              // sample cadence in steps
  bool track_J = false;              // record angular momentum (requires P = 0)
  const Soliton* reference = nullptr;  // distance target for the d column
};

struct TrajectoryRecord {
  std::vector<TrajectorySample> samples;
  ReducedState final_state;
  double H_drift = 0.0;        // max_t |H(t) - H(0)| / |H(0)| (absolute if H(0) = 0)
  double casimir_drift = 0.0;  // same for pi^2
  double J_drift = 0.0;        // same for |J|, when tracked
  double sup_distance = 0.0;   // max_t d(t), when a reference is attached
};

// Classical RK4 with a hard CFL precondition dt <= 0.5 h / (1 + |v(0)|).
TrajectoryRecord integrate(const Grid& g, const ProfileTables& t, const ModelParams& p,
                           ReducedState z0, double T, double dt,
                           const IntegrateOptions& opts = {});

// Lyapunov function of the stability argument: H - (nu_eff / 2) pi^2, with
// nu_eff = 1 / I_eff at the reference orientation.
double lyapunov_nonlinear(const Grid& g, const ProfileTables& t, const ChargeProfile& profile,
                          const ModelParams& p, const ReducedState& z, const Vec3& ref_v,
                          const Vec3& ref_omega);

struct DeltaHCheck {
  double direct = 0.0;    // H(S + xi) - H(S)
  double formula = 0.0;   // the expanded quadratic-plus-linear decomposition
  double j1_term = 0.0;   // (1/2)(|beta|^2 + |grad alpha|^2) + v.<beta, grad alpha>
  double j1_floor = 0.0;  // (1 - |v|)/2 (|beta|^2 + |grad alpha|^2)
};

// Identity test of the Hamiltonian expansion around a soliton; xi is the
// perturbation triple (alpha, beta, gamma) stored as a ReducedState.
DeltaHCheck delta_H_check(const Grid& g, const ProfileTables& t, const ModelParams& p,
                          const Soliton& s, const ReducedState& xi);

// d = ||Z - S||_z + |v(Z) - v_S| + |omega(Z) - omega_S|.
double distance_to_soliton(const Grid& g, const ProfileTables& t, const ModelParams& p,
                           const ReducedState& z, const Soliton& s);

// || rhs at the soliton state with P = P_soliton || / || soliton state ||.
double stationarity_residual(const Grid& g, const ProfileTables& t, const Soliton& s,
                             double m = 1.0, double I = 1.0);

// Leray-projected Gaussian random triple with spectral envelope
// exp(-k^2/k0^2), normalized to z-norm eps. Streams: seed, seed+1, seed+2.
ReducedState random_perturbation(const Grid& g, std::uint64_t seed, double eps, double k0 = 2.0);

struct OrbitalReport {
  Vec3 v_star{};           // velocity of the matched comparison soliton
  Vec3 P{};                // conserved momentum of the perturbed state
  double eps = 0.0;
  double sup_distance = 0.0;
  double ratio = 0.0;           // sup_distance / eps (0 if eps = 0)
  double H_drift = 0.0;         // integrator drift along the run
  double energy_gap_min = 0.0;  // min_t H_P(Z(t)) - H_P(S_*)  (>= 0 in theory)
  double energy_gap_max = 0.0;
  TrajectoryRecord record;
};

// Perturbs S_{v,0} by a random xi of z-norm eps, recomputes the conserved P,
// re-matches the comparison soliton via invert_momentum, and integrates to T.
// dt = 0 selects the CFL bound.
OrbitalReport orbital_stability_experiment(const Grid& g, const ChargeProfile& profile,
                                           const Vec3& v, double eps, double T,
                                           std::uint64_t seed, double m = 1.0, double I = 1.0,
                                           double k0 = 2.0, int record_every = 5,
                                           double dt = 0.0);

}  // namespace mls

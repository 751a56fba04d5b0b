#pragma once
#include <array>
#include <vector>

#include "mls/charge_profile.hpp"
#include "mls/grid.hpp"
#include "mls/reduced_dynamics.hpp"
#include "mls/soliton.hpp"
#include "mls/spectral_ops.hpp"
#include "mls/vec3.hpp"

namespace mls {

// Perturbation triple xi = (alpha, beta, gamma); the (A, Pi, pi) slots of
// ReducedState hold (alpha, beta, gamma) so the state algebra is shared.
using TangentVector = ReducedState;

// The linearized constraints/flow live at the rotating soliton S_omega, v = 0.
class WrongRegimeError : public std::invalid_argument {
 public:
  WrongRegimeError()
      : std::invalid_argument(
            "tangent frame requires a v = 0 (rotating) soliton; travelling solitons are handled "
            "by the nonlinear orbital machinery") {}
};

// Everything needed around S_omega: the background field, the three
// angular-momentum constraint vectors E_n = (0, b_n, e_n), their Gram matrix
// in the z0 inner product, and the lattice-consistent effective inertia.
class TangentFrame {
 public:
  TangentFrame(const Grid& g, const ChargeProfile& profile, const Soliton& s, double m = 1.0,
               double I = 1.0);

  const Grid& grid() const { return *grid_; }
  const ProfileTables& tables() const { return tables_; }
  const SpectralField& A0() const { return A0_; }
  const SpectralField& b(int n) const { return b_[n]; }
  const Vec3& omega() const { return omega_; }
  const Vec3& pi0() const { return pi0_; }
  double m() const { return m_; }
  double I() const { return I_; }
  double nu() const { return nu_; }            // 1 / I
  double nu_eff() const { return nu_eff_; }    // 1 / I_eff (lattice-consistent)
  double I_eff_lattice() const { return I_eff_; }
  const std::array<double, 9>& gram() const { return gram_; }

  // Solves gram * x = rhs (3x3, SPD by construction).
  Vec3 gram_solve(const Vec3& rhs) const;

 private:
  const Grid* grid_;
  ProfileTables tables_;
  SpectralField A0_;
  std::array<SpectralField, 3> b_;
  Vec3 omega_;
  Vec3 pi0_;
  double m_, I_, nu_, I_eff_, nu_eff_;
  std::array<double, 9> gram_;
  std::array<double, 9> gram_inv_;
};

// (E_n, xi) for n = 1..3: <b_n, beta> + gamma_n.
Vec3 constraint_pairing(const TangentFrame& f, const TangentVector& xi);

// Orthogonal projection onto the complement of span{E_n} in z0.
TangentVector project_tangent(const TangentFrame& f, const TangentVector& xi);

// Linearization of the reduced flow at S_omega:
//   alphadot = beta + (dv.grad) A0
//   betadot  = Lap alpha + P[(dv + dw ^ y) rho]
//   gammadot = -pi0 ^ dw - gamma ^ omega
// with dv = (<beta, grad A0> - <alpha, rho>)/m, dw = nu (gamma - <y^alpha, rho>).
TangentVector linear_rhs(const TangentFrame& f, const TangentVector& xi);

// Quadratic part of the Hamiltonian at S_omega (includes the omega.gamma term).
double quadratic_hamiltonian(const TangentFrame& f, const TangentVector& xi);

// L_omega = H~ - (nu_eff/2) gamma^2; exactly conserved by the linear flow.
double linear_lyapunov(const TangentFrame& f, const TangentVector& xi);

struct LinearSample {
  double t = 0.0;
  double L = 0.0;       // linear Lyapunov function
  double znorm = 0.0;   // ||xi||_z
  double defect = 0.0;  // max_n |(E_n, xi)|
  double H_quad = 0.0;  // quadratic Hamiltonian (not separately conserved)
  double gamma2 = 0.0;  // |gamma|^2 (not separately conserved)
};

struct LinearRecord {
  std::vector<LinearSample> samples;
  TangentVector final_state;
  double L_drift = 0.0;       // relative
  double H_quad_drift = 0.0;  // relative (expected order-1)
  double gamma2_drift = 0.0;  // relative (expected order-1)
  double sup_norm_ratio = 0.0;  // max_t ||xi(t)|| / ||xi(0)||
  double max_defect = 0.0;
};

// RK4 on linear_rhs. Tangency is enforced only through xi0 (project first);
// the run monitors the defects rather than re-projecting.
LinearRecord integrate_linear(const TangentFrame& f, TangentVector xi0, double T, double dt,
                              int record_every = 1);

}  // namespace mls

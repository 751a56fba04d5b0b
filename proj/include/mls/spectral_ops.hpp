#pragma once
#include <cstdint>
#include <vector>

#include "mls/charge_profile.hpp"
#include "mls/field.hpp"
#include "mls/grid.hpp"
#include "mls/vec3.hpp"

namespace mls {

// rho_hat(|k|) and g(|k|) = d rho_hat/dk sampled on a grid's lattice (zero on
// dropped modes). Immutable after construction; safe to share across threads.
class ProfileTables {
 public:
  ProfileTables(const Grid& grid, const ChargeProfile& profile);
  const Grid& grid() const { return *grid_; }
  const double* rho() const { return rho_.data(); }
  const double* moment() const { return gmr_.data(); }
  // g(|k|) * khat_c — the component tables of grad_k rhohat.
  const double* gkh(int c) const { return (c == 0 ? gkhx_ : c == 1 ? gkhy_ : gkhz_).data(); }
  double radius() const { return radius_; }

 private:
  const Grid* grid_;
  double radius_;
  std::vector<double> rho_, gmr_, gkhx_, gkhy_, gkhz_;
};

// --- mode-wise operators -------------------------------------------------

// In-place Leray projection Ahat -> Ahat - k (k.Ahat)/k^2, dropped modes zeroed.
void leray_project(const Grid& g, SpectralField& F);
SpectralField leray_projected(const Grid& g, const SpectralField& F);

SpectralField curl(const Grid& g, const SpectralField& F);       // i k ^ Ahat
SpectralField laplacian(const Grid& g, const SpectralField& F);  // -k^2 Ahat
SpectralField advect(const Grid& g, const Vec3& v, const SpectralField& F);  // i (v.k) Ahat

// Max |k.Ahat| over modes (divergence-free check) and max Hermitian-symmetry
// defect |Ahat(-k) - conj(Ahat(k))| (reality check).
double divergence_linf(const Grid& g, const SpectralField& F);
double hermitian_defect(const Grid& g, const SpectralField& F);

// --- inner products and norms --------------------------------------------

// <f,g> = dk^3 sum_k Re(Fhat . conj(Ghat)), optionally weighted per mode.
double inner(const Grid& g, const SpectralField& F, const SpectralField& G);
double inner_weighted(const Grid& g, const SpectralField& F, const SpectralField& G,
                      const double* w);
double norm_l2(const Grid& g, const SpectralField& F);
double norm_h1dot(const Grid& g, const SpectralField& F);    // weight k^2
double norm_hminus1(const Grid& g, const SpectralField& F);  // weight 1/(1+k^2)
// Phase-space perturbation norm sqrt(|alpha|_{H1dot}^2 + |beta|_{L2}^2 + |gamma|^2).
double znorm(const Grid& g, const SpectralField& alpha, const SpectralField& beta,
             const Vec3& gamma);

// --- couplings against the charge profile ---------------------------------

// Component n: <Pi, d_n A> = dk^3 sum k_n Im(Pihat . conj(Ahat)).
Vec3 momentum_coupling(const Grid& g, const SpectralField& Pi, const SpectralField& A);
// <A(q+y), rho(y)> per component; rho_hat is real so the q=0 form needs only Re(Ahat).
Vec3 charge_coupling(const ProfileTables& t, const SpectralField& A);
Vec3 charge_coupling(const ProfileTables& t, const SpectralField& A, const Vec3& q);
// <y ^ alpha, rho>: component n pairs alpha with w_n_hat = i g(|k|) (e_n ^ khat).
Vec3 moment_coupling(const ProfileTables& t, const SpectralField& alpha);

// ⟨(y∧∇)_n A, Π⟩ evaluated in physical space with centered y (y is not
// periodic; spectral k-differentiation of box coefficients misrepresents it),
// plus the companion wedge term ⟨(A∧Π)_n⟩ from the same pairing.
struct AngularCoupling {
  double grad_term = 0.0;   // <(y ^ grad)_n A, Pi>
  double wedge_term = 0.0;  // <(A ^ Pi)_n>
  bool truncation_warning = false;
  double tail_fraction_A = 0.0, tail_fraction_Pi = 0.0;
};
AngularCoupling angular_coupling(const Grid& g, const SpectralField& A, const SpectralField& Pi,
                                 int axis, double tail_tolerance = 1e-3);

// Energy share of |F|^2 (physical space) in the outer shell max_i |y_i| >= 0.9 L.
double tail_fraction(const Grid& g, const SpectralField& F);

// --- random fields ---------------------------------------------------------

// Leray-projected Hermitian-symmetrized complex Gaussian modes with envelope
// exp(-k^2/k0^2). Deterministic for a given seed (fixed generator + Box-Muller,
// independent of platform libm distribution quirks).
SpectralField random_divfree(const Grid& g, std::uint64_t seed, double k0);
// Standard-normal 3-vector from an independent stream of the same seed.
Vec3 random_gamma(std::uint64_t seed);
// Curl of a Gaussian-enveloped (sigma, physical space) random potential:
// exactly divergence-free with rapidly decaying physical tails — the generator
// of choice for angular-coupling inputs, which require small tail energy.
SpectralField random_localized_curl(const Grid& g, std::uint64_t seed, double k0 = 1.0,
                                    double sigma = 3.0);

// --- field reconstruction and grid transfer -------------------------------

// Lab-frame Maxwell fields from the potentials: B = curl A, E = -Pi - grad Phi
// with Phi the Coulomb potential of rho(.-q). Residuals are spectral.
struct ReconstructedFields {
  SpectralField E, B;
  std::vector<Complex> Phi;  // scalar, length modes()
  Vec3 q;
  double gauss_residual = 0.0;  // ||div E - rho(.-q)|| / ||rho||
  double divB_linf = 0.0;
};
ReconstructedFields reconstruct_EB(const ProfileTables& t, const SpectralField& A,
                                   const SpectralField& Pi, const Vec3& q);

// Copy coarse-grid modes onto a fine grid with the same L (resolution
// refinement oracle; coarse Nyquist planes are dropped).
SpectralField transfer(const Grid& coarse, const Grid& fine, const SpectralField& F);

}  // namespace mls

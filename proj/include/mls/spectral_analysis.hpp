#pragma once
#include <array>
#include <cstddef>
#include <vector>

#include "mls/charge_profile.hpp"
#include "mls/grid.hpp"
#include "mls/spectral_ops.hpp"
#include "mls/vec3.hpp"

namespace mls {

// Real divergence-free Fourier basis on the box lattice, truncated at |k| <= K:
// one half-lattice representative per Hermitian pair, two polarizations per
// mode, and a cosine/sine degree of freedom for each polarization. The alpha
// block is expressed in the H1dot-normalized variable u(k) = |k| alphahat(k),
// which makes the free operator the identity there. Layout of the (alpha,
// gamma) space used by B: [cos (2M) | sin (2M) | gamma (3)], dim 4M+3; the
// full Q space prepends nothing and appends the beta block: [alpha (4M) |
// beta (4M) | gamma (3)], dim 8M+3.
struct OperatorBasis {
  struct Mode {
    std::array<int, 3> n;  // integer lattice vector (half-lattice representative)
    Vec3 k;                // dk * n
    Vec3 khat;
    double kabs = 0.0;
    Vec3 e1, e2;  // orthonormal polarization pair, both orthogonal to k
  };

  int N = 0;          // grid metadata (cap on representable modes)
  double L = 0.0;
  double K = 0.0;     // spectral cutoff
  double dk = 0.0;
  double tail_mass = 0.0;  // charge spectral mass above K, relative
  std::vector<Mode> modes;

  std::size_t M() const { return modes.size(); }
  std::size_t dim_B() const { return 4 * M() + 3; }
  std::size_t dim_Q() const { return 8 * M() + 3; }

  // Degree-of-freedom indices inside the (alpha, gamma) = B layout.
  std::size_t cos_dof(std::size_t m, int pol) const { return 2 * m + pol; }
  std::size_t sin_dof(std::size_t m, int pol) const { return 2 * M() + 2 * m + pol; }
  std::size_t gamma_dof(int n) const { return 4 * M() + n; }
};

OperatorBasis make_basis(const ChargeProfile& profile, int N, double L, double K);

// The spin-coupling functional expanded over the sine dofs: R is 3 x 2M with
// R[n][(m, pol)] the pairing of the unit basis dof with <y ^ . , rho>_n.
// R R^T = delta_I * Id3 exactly (lattice isotropy of the half-mode sum).
struct MomentRows {
  std::size_t cols = 0;
  std::array<std::vector<double>, 3> row;

  double delta_I() const;  // (R R^T)_{00}
};

MomentRows moment_rows(const OperatorBasis& basis, const ChargeProfile& profile);

// Basis-consistent effective-inertia constants: nu_eff = 1/(I + delta_I),
// delta = nu * nu_eff * delta_I. Using these makes the discrete kernel exact.
struct BasisInertia {
  double delta_I = 0.0;
  double nu = 0.0;
  double nu_eff = 0.0;
  double delta = 0.0;
};

BasisInertia basis_inertia(const MomentRows& rows, double I);

// Dense symmetric operator on the chosen basis, with the parameters recorded.
struct OperatorMatrix {
  std::size_t dim = 0;
  std::vector<double> data;  // row-major, full symmetric storage
  double nu = 0.0, nu_eff = 0.0, delta = 0.0, K = 0.0, L = 0.0;
  int N = 0;

  double& at(std::size_t i, std::size_t j) { return data[i * dim + j]; }
  double at(std::size_t i, std::size_t j) const { return data[i * dim + j]; }
};

// y = M x.
std::vector<double> apply(const OperatorMatrix& m, const std::vector<double>& x);

// B on the (alpha, gamma) space: cos block identity; sin block I + nu R^T R;
// sin-gamma coupling -nu R^T; gamma block delta * Id3. Throws
// std::invalid_argument if delta <= 0 (inconsistent parameters).
OperatorMatrix assemble_B(const ChargeProfile& profile, double nu, double delta,
                          const OperatorBasis& basis);

// Q_rho on the full (alpha, beta, gamma) space: beta block the identity, the
// (alpha, gamma) block equal to assemble_B.
OperatorMatrix assemble_Q(const ChargeProfile& profile, double nu, double delta,
                          const OperatorBasis& basis);

// Reference operator Q_0 = diag(Id_alpha, Id_beta, delta Id3).
OperatorMatrix assemble_Q0(const OperatorBasis& basis, double delta);

// Coordinates of the exact discrete kernel vector for gamma = e_n on the B
// layout: sin dofs nu_eff * R[n], gamma slot e_n (cos dofs zero).
std::vector<double> kernel_coordinates(const OperatorBasis& basis, const MomentRows& rows,
                                       double nu_eff, int n);

// The kernel fields sampled on a grid:
//   alphahat_gamma(k) = nu_eff * i * g(|k|) (gamma ^ khat) / k^2,
// for gamma = e1, e2, e3.
std::array<SpectralField, 3> kernel_basis(const Grid& g, const ChargeProfile& profile,
                                          double nu_eff);

// Lowest eigenpairs of a dense symmetric matrix (LAPACK dsyevr). `vectors`
// holds nev contiguous eigenvectors of length dim. The _destructive variant
// overwrites the matrix data instead of copying it (for the large operators).
struct EigenResult {
  std::vector<double> values;
  std::vector<double> vectors;
};

EigenResult smallest_eigenpairs(const OperatorMatrix& m, int nev);
EigenResult smallest_eigenpairs_destructive(OperatorMatrix& m, int nev);
double largest_eigenvalue(const OperatorMatrix& m);

// Scalar spectral functions of the gamma-sector resolvent reduction; lambda
// must be <= 0 (the positive axis is continuous spectrum). Quadratures run on
// the continuum radial representation with nu_eff = 1/(I + delta_I_continuum).
double a_minus(const ChargeProfile& profile, double I, double lambda);
double a_plus(const ChargeProfile& profile, double I, double lambda);
double matrix_A_lambda(const ChargeProfile& profile, double I, double lambda);

// Coercivity of Q_rho against Q_0 on the tangent space {(E_n, xi) = 0}.
// The forms differ from the identity only on the span of the three coupling
// directions, the nonzero constraint fields, and the gamma slots; on the
// complement the Rayleigh quotient is exactly 1, so kappa = min(kappa_red, 1)
// with kappa_red from the reduced constrained pencil.
struct CoercivityResult {
  double kappa = 0.0;
  double kappa_reduced = 0.0;
  double unprojected_smallest = 0.0;  // smallest pencil eigenvalue without constraints (~0)
  std::size_t reduced_dim = 0;
};

CoercivityResult coercivity_constant(const ChargeProfile& profile, const Vec3& omega, double I,
                                     const OperatorBasis& basis);

// Eigenvalue/kernel/coercivity summary at one resolution.
struct SpectralReport {
  std::vector<double> eigenvalues;  // lowest of B (ascending)
  double top_eigenvalue = 0.0;      // scale
  int kernel_dim = 0;               // eigenvalues below gap/100
  double gap = 0.0;                 // first eigenvalue above the kernel cluster
  double kappa = 0.0;
  double min_kernel_alignment = 0.0;  // worst cosine of exact kernel vs computed span
  int N = 0;
  double L = 0.0, K = 0.0;
  double delta_I = 0.0, nu_eff = 0.0, delta = 0.0;
};

// Assembles B at (N, L, K), solves for the lowest `nev` eigenpairs, measures
// kernel alignment against the exact coordinates, and runs the coercivity
// reduction. omega orients the constraint frame.
SpectralReport spectral_stability_report(const ChargeProfile& profile, const Vec3& omega,
                                         double I, int N, double L, double K, int nev = 10);

}  // namespace mls

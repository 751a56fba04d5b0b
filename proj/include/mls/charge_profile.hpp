#pragma once
#include <stdexcept>
#include <vector>

namespace mls {

// Spherically symmetric C-infinity bump charge density of compact support:
//   rho(r) = amplitude * exp(-1 / (1 - (r/radius)^2))  for r < radius, else 0.
//
// Fourier convention: fhat(k) = (2pi)^{-3/2} \int e^{-i k.x} f(x) dx, so for a
// radial profile  fhat(k) = (2pi)^{-3/2} (4pi/k) \int_0^R s f(s) sin(ks) ds.
//
// moment_radial(k) := d/dk density_hat(k); it is the radial factor of
// grad_k rhohat = khat * moment_radial(|k|) and drives every spin/moment
// coupling (the transform of (w ^ y) rho(y) is i * moment_radial * (w ^ khat)).
class ChargeProfile {
 public:
  explicit ChargeProfile(double radius = 1.0, double amplitude = 1.0, int quad_nodes = 200);

  double radius() const { return radius_; }
  double amplitude() const { return amplitude_; }

  double density(double r) const;           // rho(r), physical space
  double density_hat(double k) const;       // rhohat(k), k >= 0
  double moment_radial(double k) const;     // d/dk rhohat(k)

  // Batch evaluation (one quadrature sweep per point; used to fill lattices).
  std::vector<double> density_hat(const std::vector<double>& k) const;
  std::vector<double> moment_radial(const std::vector<double>& k) const;

  double total_charge() const;              // int rho = (2pi)^{3/2} rhohat(0)

  // C_rho = int_0^infty moment_radial(k)^2 dk: the radial constant of the
  // effective-inertia quadratures (angular parts reduce to multiples of it).
  double radial_inertia_constant() const;

 private:
  double radius_, amplitude_;
  std::vector<double> qs_, qw_;  // Gauss-Legendre nodes/weights on [0, radius]
};

// Gauss-Legendre nodes/weights on [a, b] (GSL fixed tables under the hood).
void gauss_legendre(int n, double a, double b, std::vector<double>& x, std::vector<double>& w);

}  // namespace mls

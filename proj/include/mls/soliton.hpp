#pragma once
#include <stdexcept>
#include <utility>

#include "mls/charge_profile.hpp"
#include "mls/field.hpp"
#include "mls/grid.hpp"
#include "mls/spectral_ops.hpp"
#include "mls/vec3.hpp"

namespace mls {

// Admissible orientation classes of the travelling-spinning-wave family: the
// spin axis must vanish, align with the velocity, or be orthogonal to it.
enum class SigmaClass { ZeroSpin, Parallel, Perpendicular };

const char* sigma_class_name(SigmaClass c);

// |v| >= 1: no travelling wave exists.
class SuperluminalError : public std::domain_error {
 public:
  explicit SuperluminalError(double speed);
  double speed() const { return speed_; }

 private:
  double speed_;
};

// (v, omega) outside the admissible set: a genuinely skew spin axis produces a
// secular torque. The error carries the direction of that torque, i.e. the
// direction of the angular-momentum mismatch pi ^ omega.
class SigmaError : public std::invalid_argument {
 public:
  SigmaError(const Vec3& v, const Vec3& omega, const Vec3& torque_direction);
  const Vec3& torque_direction() const { return torque_direction_; }

 private:
  Vec3 torque_direction_;
};

// Raised by closed_form_alphas at v = 0, where the closed forms are 0/0 and
// the caller should use the common limit (4*pi/3) * C_rho instead.
class UseLimitError : public std::domain_error {
 public:
  UseLimitError() : std::domain_error("closed_form_alphas: v = 0; use the limit (4*pi/3)*C_rho") {}
};

struct SolitonParams {
  Vec3 v;
  Vec3 omega;
  SigmaClass cls = SigmaClass::ZeroSpin;
};

// A travelling-spinning wave sampled on a grid, together with the particle
// momenta that make it a fixed point of the reduced flow on that same grid.
struct Soliton {
  SolitonParams params;
  SpectralField A;
  SpectralField Pi;
  Vec3 pi;        // spin momentum, I*omega + <y ^ A, rho> (lattice sum)
  Vec3 P;         // conserved momentum parameter (lattice sum)
  double I_eff = 0.0;
  double energy = 0.0;
};

// Classifies (v, omega); throws SuperluminalError / SigmaError as required.
SigmaClass validate_sigma(const Vec3& v, const Vec3& omega, double tol = 1e-12);

// Samples the closed-form Fourier solution on the grid and computes its
// lattice-consistent momenta. m, I are the bare mass and moment of inertia.
Soliton build_soliton(const Grid& g, const ChargeProfile& profile, const Vec3& v,
                      const Vec3& omega, double m = 1.0, double I = 1.0);

// Conserved momentum of an arbitrary field state moving at qdot:
//   P = m*qdot - <Pi, grad A> + <A, rho>.
Vec3 total_momentum(const ProfileTables& tables, const SpectralField& A, const SpectralField& Pi,
                    const Vec3& qdot, double m = 1.0);
Vec3 total_momentum(const ProfileTables& tables, const Soliton& s, double m = 1.0);

// Angular quadrature of the inertia integrands at speed v (radial x polar
// Gauss-Legendre on the continuum representation). Returns (alpha1, alpha2);
// delta_I_parallel = 2*alpha2, delta_I_perp = alpha1 + alpha2.
std::pair<double, double> alphas_quadrature(const ChargeProfile& profile, double speed);

// Closed forms of the same two constants, given C_rho = integral of g^2 dr.
// Switches to a series expansion below |v| = 0.05 to avoid cancellation.
std::pair<double, double> closed_form_alphas(double c_rho, double speed);

// Series for alpha1 - alpha2 (positive for all 0 < |v| < 1), truncated when a
// term drops below `term_tol` relative to the running sum.
double alpha_difference_series(double c_rho, double speed, double term_tol = 1e-12);

// I_eff = I + delta_I for the given orientation class (zero-spin uses the
// parallel formula; the two coincide at v = 0 anyway).
double effective_inertia(const ChargeProfile& profile, double speed, SigmaClass cls,
                         double I = 1.0);

struct PiMismatch {
  Vec3 pi;        // spin momentum of the would-be travelling wave
  Vec3 q;         // mismatch vector; pi = (I + T) * omega - q
  bool parallel;  // |pi ^ omega| <= 1e-8 * |pi| * |omega|
};

// Continuum quadrature of the spin momentum for an arbitrary (v, omega); the
// `parallel` flag is exactly the admissibility test behind validate_sigma.
PiMismatch pi_mismatch(const ChargeProfile& profile, const Vec3& v, const Vec3& omega,
                       double I = 1.0);

// |P| / |v| for the travelling wave at speed `speed` with |omega| = wmag along
// the same axis, measured with the same lattice sums as total_momentum so that
// invert_momentum round-trips. Continuous extension at speed = 0.
double effective_mass(const Grid& g, const ChargeProfile& profile, double speed, double wmag = 0.0,
                      double m = 1.0);

// Solves m_eff(s, wmag) * s = |P| for s by bisection on [0, 0.99] and returns
// v_* = s * P/|P|. Throws std::runtime_error if the bracket fails.
Vec3 invert_momentum(const Grid& g, const ChargeProfile& profile, const Vec3& P, double wmag = 0.0,
                     double m = 1.0);

}  // namespace mls

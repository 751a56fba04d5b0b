#include "mls/soliton.hpp"

#include <cmath>
#include <sstream>

namespace mls {

namespace {

constexpr int kRadialNodes = 400;
constexpr double kRadialCutoff = 40.0;  // moment_radial^2 is below 1e-30 here
constexpr int kPolarNodes = 160;

// Samples the closed-form travelling-wave fields on the lattice:
//   Ahat = [(v - khat (v.khat)) rhohat + i g (omega ^ khat)] / (k^2 - (v.k)^2)
//   Pihat = -i (v.k) Ahat,   Ahat(0) = 0, Nyquist modes dropped via the mask.
void sample_fields(const Grid& g, const ProfileTables& t, const Vec3& v, const Vec3& w,
                   SpectralField& A, SpectralField& Pi) {
  const std::size_t n = g.modes();
  A = SpectralField(n);
  Pi = SpectralField(n);
  const double* kx = g.kx();
  const double* ky = g.ky();
  const double* kz = g.kz();
  const double* khx = g.khx();
  const double* khy = g.khy();
  const double* khz = g.khz();
  const double* k2 = g.k2();
  const double* mask = g.mask();
  const double* rho = t.rho();
  const double* gmr = t.moment();
  for (std::size_t i = 0; i < n; ++i) {
    if (mask[i] == 0.0) continue;
    const double vk = v.x * kx[i] + v.y * ky[i] + v.z * kz[i];
    const double den = k2[i] - vk * vk;
    const double vkh = v.x * khx[i] + v.y * khy[i] + v.z * khz[i];
    const double cx = w.y * khz[i] - w.z * khy[i];
    const double cy = w.z * khx[i] - w.x * khz[i];
    const double cz = w.x * khy[i] - w.y * khx[i];
    const double re[3] = {(v.x - khx[i] * vkh) * rho[i], (v.y - khy[i] * vkh) * rho[i],
                          (v.z - khz[i] * vkh) * rho[i]};
    const double im[3] = {gmr[i] * cx, gmr[i] * cy, gmr[i] * cz};
    for (int c = 0; c < 3; ++c) {
      const double ar = re[c] / den;
      const double ai = im[c] / den;
      A.comp(c)[i] = Complex(ar, ai);
      Pi.comp(c)[i] = Complex(vk * ai, -vk * ar);
    }
  }
}

Vec3 lattice_momentum(const ProfileTables& t, const SpectralField& A, const SpectralField& Pi,
                      const Vec3& qdot, double m) {
  return m * qdot - momentum_coupling(t.grid(), Pi, A) + charge_coupling(t, A);
}

}  // namespace

const char* sigma_class_name(SigmaClass c) {
  switch (c) {
    case SigmaClass::ZeroSpin:
      return "zero-spin";
    case SigmaClass::Parallel:
      return "parallel";
    default:
      return "perpendicular";
  }
}

SuperluminalError::SuperluminalError(double speed)
    : std::domain_error("no travelling wave exists at |v| = " + std::to_string(speed) + " >= 1"),
      speed_(speed) {}

SigmaError::SigmaError(const Vec3& v, const Vec3& omega, const Vec3& torque_direction)
    : std::invalid_argument([&] {
        std::ostringstream os;
        os << "(v, omega) is not admissible: omega is neither parallel nor orthogonal to v"
           << "; secular torque direction (" << torque_direction.x << ", " << torque_direction.y
           << ", " << torque_direction.z << ") for v = (" << v.x << ", " << v.y << ", " << v.z
           << "), omega = (" << omega.x << ", " << omega.y << ", " << omega.z << ")";
        return os.str();
      }()),
      torque_direction_(torque_direction) {}

SigmaClass validate_sigma(const Vec3& v, const Vec3& omega, double tol) {
  const double nv = norm(v);
  if (nv >= 1.0) throw SuperluminalError(nv);
  const double nw = norm(omega);
  if (nw <= tol) return SigmaClass::ZeroSpin;
  if (nv <= tol) return SigmaClass::Parallel;  // convention: v = 0 satisfies both
  const Vec3 cr = cross(v, omega);
  if (norm(cr) <= tol * nv * nw) return SigmaClass::Parallel;
  const double dt = dot(v, omega);
  if (std::abs(dt) <= tol * nv * nw) return SigmaClass::Perpendicular;
  // pi ^ omega points along (alpha1 - alpha2)(omega.vhat)(vhat ^ omega) with
  // alpha1 > alpha2 > 0, so the sign of the torque is known without quadrature.
  const double s = dt > 0.0 ? 1.0 : -1.0;
  throw SigmaError(v, omega, (s / norm(cr)) * cr);
}

Soliton build_soliton(const Grid& g, const ChargeProfile& profile, const Vec3& v,
                      const Vec3& omega, double m, double I) {
  Soliton s;
  s.params.v = v;
  s.params.omega = omega;
  s.params.cls = validate_sigma(v, omega);
  ProfileTables tables(g, profile);
  sample_fields(g, tables, v, omega, s.A, s.Pi);
  s.pi = I * omega + moment_coupling(tables, s.A);
  s.P = lattice_momentum(tables, s.A, s.Pi, v, m);
  s.I_eff = effective_inertia(profile, norm(v), s.params.cls, I);
  const double field2 = norm_l2(g, s.Pi) * norm_l2(g, s.Pi) +
                        norm_h1dot(g, s.A) * norm_h1dot(g, s.A);
  s.energy = 0.5 * field2 + 0.5 * m * dot(v, v) + 0.5 * I * dot(omega, omega);
  return s;
}

Vec3 total_momentum(const ProfileTables& tables, const SpectralField& A, const SpectralField& Pi,
                    const Vec3& qdot, double m) {
  return lattice_momentum(tables, A, Pi, qdot, m);
}

Vec3 total_momentum(const ProfileTables& tables, const Soliton& s, double m) {
  return lattice_momentum(tables, s.A, s.Pi, s.params.v, m);
}

std::pair<double, double> alphas_quadrature(const ChargeProfile& profile, double speed) {
  const double v = std::abs(speed);
  if (v >= 1.0) throw std::domain_error("effective-inertia integrals diverge at |v| >= 1");
  std::vector<double> xr, wr, xu, wu;
  gauss_legendre(kRadialNodes, 0.0, kRadialCutoff, xr, wr);
  gauss_legendre(kPolarNodes, -1.0, 1.0, xu, wu);
  const std::vector<double> gr = profile.moment_radial(xr);
  const double v2 = v * v;
  double a1 = 0.0, a2 = 0.0;
  for (int r = 0; r < kRadialNodes; ++r) {
    const double base = wr[r] * gr[r] * gr[r];
    double s1 = 0.0, s2 = 0.0;
    for (int u = 0; u < kPolarNodes; ++u) {
      const double uu = xu[u] * xu[u];
      const double den = 1.0 - v2 * uu;
      s1 += wu[u] * uu / den;
      s2 += wu[u] * (1.0 - uu) / den;
    }
    a1 += base * s1;
    a2 += base * s2;
  }
  return {2.0 * M_PI * a1, M_PI * a2};
}

std::pair<double, double> closed_form_alphas(double c_rho, double speed) {
  const double v = std::abs(speed);
  if (v >= 1.0) throw std::domain_error("closed_form_alphas: |v| must be < 1");
  if (v == 0.0) throw UseLimitError();
  if (v < 0.05) {
    // ln((1+v)/(1-v)) - 2v cancels to O(v^3): sum the series instead.
    const double v2 = v * v;
    double a1 = 0.0, a2 = 0.0, p = 1.0;
    for (int j = 0; j < 60; ++j) {
      const double t1 = p / (2.0 * j + 3.0);
      a1 += t1;
      const double t2 = p / ((2.0 * j + 1.0) * (2.0 * j + 3.0));
      a2 += t2;  // index shifted: this is the (j+1)-th term of the alpha2 sum
      if (p < 1e-18) break;
      p *= v2;
    }
    return {4.0 * M_PI * c_rho * a1, 4.0 * M_PI * c_rho * a2};
  }
  const double lg = std::log((1.0 + v) / (1.0 - v));
  const double v3 = v * v * v;
  const double a1 = 2.0 * M_PI * c_rho * (lg - 2.0 * v) / v3;
  const double a2 = M_PI * c_rho * ((v * v - 1.0) * lg + 2.0 * v) / v3;
  return {a1, a2};
}

double alpha_difference_series(double c_rho, double speed, double term_tol) {
  const double v = std::abs(speed);
  if (v >= 1.0) throw std::domain_error("alpha_difference_series: |v| must be < 1");
  const double v2 = v * v;
  double sum = 0.0;
  double p = v2;  // v^{2(j-1)} at j = 2
  for (int j = 2; j < 4000; ++j) {
    const double term = 8.0 * (j - 1.0) / ((2.0 * j + 1.0) * (2.0 * j - 1.0)) * p;
    sum += term;
    if (term <= term_tol * std::abs(sum)) break;
    p *= v2;
  }
  return M_PI * c_rho * sum;
}

double effective_inertia(const ChargeProfile& profile, double speed, SigmaClass cls, double I) {
  const auto [a1, a2] = alphas_quadrature(profile, speed);
  const double delta = (cls == SigmaClass::Perpendicular) ? a1 + a2 : 2.0 * a2;
  return I + delta;
}

PiMismatch pi_mismatch(const ChargeProfile& profile, const Vec3& v, const Vec3& omega, double I) {
  const double nv = norm(v);
  if (nv >= 1.0) throw SuperluminalError(nv);
  const auto [a1, a2] = alphas_quadrature(profile, nv);
  const double trace = a1 + 2.0 * a2;
  PiMismatch out;
  if (nv > 0.0) {
    const Vec3 vh = v / nv;
    out.q = a2 * omega + (a1 - a2) * dot(omega, vh) * vh;
  } else {
    out.q = a2 * omega;
  }
  out.pi = (I + trace) * omega - out.q;
  const double scale = norm(out.pi) * norm(omega);
  out.parallel = norm(cross(out.pi, omega)) <= 1e-8 * scale || scale == 0.0;
  return out;
}

namespace {

// |P(s)| for the travelling wave at speed s along e1 with spin wmag * e1,
// using the same lattice sums as total_momentum.
class MomentumCurve {
 public:
  MomentumCurve(const Grid& g, const ChargeProfile& profile, double wmag, double m)
      : grid_(g), tables_(g, profile), wmag_(wmag), m_(m) {}

  double operator()(double s) const {
    if (s == 0.0) return 0.0;
    SpectralField A, Pi;
    sample_fields(grid_, tables_, Vec3{s, 0.0, 0.0}, Vec3{wmag_, 0.0, 0.0}, A, Pi);
    return norm(lattice_momentum(tables_, A, Pi, Vec3{s, 0.0, 0.0}, m_));
  }

  // Continuous extension of |P(s)|/s at s = 0.
  double slope_at_zero() const {
    const Grid& g = grid_;
    const std::size_t n = g.modes();
    const double* khx = g.khx();
    const double* k2 = g.k2();
    const double* mask = g.mask();
    const double* rho = tables_.rho();
    const double* gmr = tables_.moment();
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask[i] == 0.0) continue;
      const double kh2 = khx[i] * khx[i];
      const double gw = gmr[i] * wmag_;
      s += (1.0 - kh2) * (rho[i] * rho[i] + kh2 * gw * gw) / k2[i];
    }
    const double dk = g.dk();
    return m_ + dk * dk * dk * s;
  }

 private:
  const Grid& grid_;
  ProfileTables tables_;
  double wmag_;
  double m_;
};

}  // namespace

double effective_mass(const Grid& g, const ChargeProfile& profile, double speed, double wmag,
                      double m) {
  const double s = std::abs(speed);
  if (s >= 1.0) throw SuperluminalError(s);
  MomentumCurve curve(g, profile, wmag, m);
  if (s < 1e-12) return curve.slope_at_zero();
  return curve(s) / s;
}

Vec3 invert_momentum(const Grid& g, const ChargeProfile& profile, const Vec3& P, double wmag,
                     double m) {
  const double pm = norm(P);
  if (pm == 0.0) return Vec3{};
  MomentumCurve curve(g, profile, wmag, m);
  double lo = 0.0, hi = 0.99;
  if (curve(hi) < pm)
    throw std::runtime_error("invert_momentum: |P| exceeds the invertible range at |v| = 0.99");
  for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
    const double mid = 0.5 * (lo + hi);
    (curve(mid) < pm ? lo : hi) = mid;
  }
  return (0.5 * (lo + hi) / pm) * P;
}

}  // namespace mls

#include "mls/charge_profile.hpp"

#include <gsl/gsl_integration.h>

#include <cmath>

namespace mls {

void gauss_legendre(int n, double a, double b, std::vector<double>& x, std::vector<double>& w) {
  gsl_integration_glfixed_table* t = gsl_integration_glfixed_table_alloc(n);
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < n; ++i) gsl_integration_glfixed_point(a, b, i, &x[i], &w[i], t);
  gsl_integration_glfixed_table_free(t);
}

ChargeProfile::ChargeProfile(double radius, double amplitude, int quad_nodes)
    : radius_(radius), amplitude_(amplitude) {
  if (radius <= 0.0) throw std::invalid_argument("ChargeProfile: radius must be positive");
  if (amplitude <= 0.0) throw std::invalid_argument("ChargeProfile: amplitude must be positive");
  gauss_legendre(quad_nodes, 0.0, radius, qs_, qw_);
}

double ChargeProfile::density(double r) const {
  double u = r / radius_;
  if (std::abs(u) >= 1.0) return 0.0;
  return amplitude_ * std::exp(-1.0 / (1.0 - u * u));
}

namespace {
constexpr double kFourierScale = 0.06349363593424097;  // (2 pi)^{-3/2}
}

double ChargeProfile::density_hat(double k) const {
  const int n = static_cast<int>(qs_.size());
  k = std::abs(k);
  if (k < 1e-6) {
    // sin(ks)/k ~ s - k^2 s^3 / 6
    double m0 = 0.0, m2 = 0.0;
    for (int i = 0; i < n; ++i) {
      double s = qs_[i], w = qw_[i], rho = density(s);
      m0 += w * s * s * rho;
      m2 += w * s * s * s * s * rho;
    }
    return kFourierScale * 4.0 * M_PI * (m0 - k * k * m2 / 6.0);
  }
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += qw_[i] * qs_[i] * density(qs_[i]) * std::sin(k * qs_[i]);
  return kFourierScale * (4.0 * M_PI / k) * acc;
}

double ChargeProfile::moment_radial(double k) const {
  const int n = static_cast<int>(qs_.size());
  k = std::abs(k);
  if (k < 1e-4) {
    // d/dk of the small-k series: -k m2 / 3 + k^3 m4 / 30
    double m2 = 0.0, m4 = 0.0;
    for (int i = 0; i < n; ++i) {
      double s = qs_[i], w = qw_[i], rho = density(s);
      m2 += w * s * s * s * s * rho;
      m4 += w * s * s * s * s * s * s * rho;
    }
    return kFourierScale * 4.0 * M_PI * (-k * m2 / 3.0 + k * k * k * m4 / 30.0);
  }
  // d/dk [sin(ks)/k] = s cos(ks)/k - sin(ks)/k^2
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    double s = qs_[i], w = qw_[i], rho = density(s);
    acc += w * s * rho * (s * std::cos(k * s) / k - std::sin(k * s) / (k * k));
  }
  return kFourierScale * 4.0 * M_PI * acc;
}

std::vector<double> ChargeProfile::density_hat(const std::vector<double>& k) const {
  std::vector<double> out(k.size());
  for (size_t i = 0; i < k.size(); ++i) out[i] = density_hat(k[i]);
  return out;
}

std::vector<double> ChargeProfile::moment_radial(const std::vector<double>& k) const {
  std::vector<double> out(k.size());
  for (size_t i = 0; i < k.size(); ++i) out[i] = moment_radial(k[i]);
  return out;
}

double ChargeProfile::total_charge() const {
  double acc = 0.0;
  for (size_t i = 0; i < qs_.size(); ++i) acc += qw_[i] * qs_[i] * qs_[i] * density(qs_[i]);
  return 4.0 * M_PI * acc;
}

double ChargeProfile::radial_inertia_constant() const {
  // moment_radial decays fast; [0, 40] with 400 nodes resolves it to ~1e-14.
  std::vector<double> x, w;
  gauss_legendre(400, 0.0, 40.0, x, w);
  double acc = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    double g = moment_radial(x[i]);
    acc += w[i] * g * g;
  }
  return acc;
}

}  // namespace mls

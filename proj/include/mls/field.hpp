#pragma once
#include <algorithm>
#include <complex>
#include <cstddef>
#include <vector>

namespace mls {

using Complex = std::complex<double>;

// Three-component vector field in Fourier representation, component-major:
// data[c * modes + m] is component c at flat mode index m.
struct SpectralField {
  std::size_t modes = 0;
  std::vector<Complex> data;

  SpectralField() = default;
  explicit SpectralField(std::size_t n_modes) : modes(n_modes), data(3 * n_modes) {}

  Complex* comp(int c) { return data.data() + static_cast<std::size_t>(c) * modes; }
  const Complex* comp(int c) const { return data.data() + static_cast<std::size_t>(c) * modes; }

  void set_zero() { std::fill(data.begin(), data.end(), Complex(0.0, 0.0)); }
};

// Real-space samples of a three-component field, same layout.
struct PhysicalField {
  std::size_t points = 0;
  std::vector<double> data;

  PhysicalField() = default;
  explicit PhysicalField(std::size_t n_points) : points(n_points), data(3 * n_points) {}

  double* comp(int c) { return data.data() + static_cast<std::size_t>(c) * points; }
  const double* comp(int c) const { return data.data() + static_cast<std::size_t>(c) * points; }
};

}  // namespace mls

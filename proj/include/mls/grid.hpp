#pragma once
#include <memory>
#include <vector>

#include "mls/field.hpp"

namespace mls {

// Periodic box [-L, L)^3 sampled on N^3 points, spectral lattice k = (pi/L) n
// with fftfreq mode ordering n in {0..N/2-1, -N/2..-1}.
//
// Retained modes: k != 0 and no Nyquist component (the n = -N/2 slot is
// dropped; the vector-potential space does not contain the zero mode and the
// unpaired Nyquist plane cannot carry a Hermitian-symmetric derivative).
//
// Transforms (convention fhat(k) = (2pi)^{-3/2} int e^{-ik.y} f(y) dy on the
// centered grid y_j = -L + j h):
//   to_spectral:  fhat = (2pi)^{-3/2} h^3 (-1)^{n1+n2+n3} FFT(f), masked
//   to_physical:  f = Re[ IFFT(fhat (-1)^{n1+n2+n3}) ] (2pi)^{-3/2} dk^3 N^3
class Grid {
 public:
  Grid(int N, double L);
  ~Grid();
  Grid(const Grid&) = delete;
  Grid& operator=(const Grid&) = delete;

  int N() const { return N_; }
  double L() const { return L_; }
  double dk() const { return dk_; }
  double h() const { return h_; }
  std::size_t modes() const { return modes_; }

  // Flattened per-mode tables, length N^3 (index (ix*N + iy)*N + iz).
  const double* kx() const { return kx_.data(); }
  const double* ky() const { return ky_.data(); }
  const double* kz() const { return kz_.data(); }
  const double* k2() const { return k2_.data(); }
  const double* kabs() const { return kabs_.data(); }
  const double* inv_k2() const { return inv_k2_.data(); }  // 0 on dropped modes
  const double* mask() const { return mask_.data(); }      // 1 kept / 0 dropped
  // Unit khat components (0 at k = 0).
  const double* khx() const { return khx_.data(); }
  const double* khy() const { return khy_.data(); }
  const double* khz() const { return khz_.data(); }
  // Physical coordinates, flattened, y_j = -L + j h per axis.
  const double* yx() const { return yx_.data(); }
  const double* yy() const { return yy_.data(); }
  const double* yz() const { return yz_.data(); }

  SpectralField make_field() const { return SpectralField(modes_); }
  PhysicalField make_physical() const { return PhysicalField(modes_); }

  // Component-wise FFTs with the normalization above.
  void to_physical(const SpectralField& F, PhysicalField& out) const;
  void to_spectral(const PhysicalField& f, SpectralField& out) const;
  PhysicalField to_physical(const SpectralField& F) const;
  SpectralField to_spectral(const PhysicalField& f) const;
  // Single-component variants (buffers of length modes()).
  void to_physical_scalar(const Complex* in, double* out) const;
  void to_spectral_scalar(const double* in, Complex* out) const;

  void apply_mask(SpectralField& F) const;

 private:
  int N_;
  double L_, dk_, h_;
  std::size_t modes_;
  std::vector<double> kx_, ky_, kz_, k2_, kabs_, inv_k2_, mask_, khx_, khy_, khz_;
  std::vector<double> yx_, yy_, yz_;
  std::vector<double> phase_;  // (-1)^{n1+n2+n3}

  struct FftPlans;
  std::unique_ptr<FftPlans> plans_;
  mutable std::vector<Complex> scratch_;
};

}  // namespace mls

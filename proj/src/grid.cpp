#include "mls/grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <stdexcept>

namespace mls {

struct Grid::FftPlans {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
  ~FftPlans() {
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
  }
};

namespace {
constexpr double kFourierScale = 0.06349363593424097;  // (2 pi)^{-3/2}
}

Grid::Grid(int N, double L) : N_(N), L_(L) {
  if (N < 4 || (N % 2) != 0) throw std::invalid_argument("Grid: N must be even and >= 4");
  if (L <= 0.0) throw std::invalid_argument("Grid: L must be positive");
  dk_ = M_PI / L_;
  h_ = 2.0 * L_ / N_;
  modes_ = static_cast<std::size_t>(N) * N * N;

  std::vector<int> n(N);
  for (int i = 0; i < N; ++i) n[i] = (i < N / 2) ? i : i - N;

  kx_.resize(modes_); ky_.resize(modes_); kz_.resize(modes_);
  k2_.resize(modes_); kabs_.resize(modes_); inv_k2_.resize(modes_); mask_.resize(modes_);
  khx_.resize(modes_); khy_.resize(modes_); khz_.resize(modes_);
  yx_.resize(modes_); yy_.resize(modes_); yz_.resize(modes_);
  phase_.resize(modes_);

  std::size_t idx = 0;
  for (int ix = 0; ix < N; ++ix) {
    for (int iy = 0; iy < N; ++iy) {
      for (int iz = 0; iz < N; ++iz, ++idx) {
        const int n1 = n[ix], n2 = n[iy], n3 = n[iz];
        const double a = dk_ * n1, b = dk_ * n2, c = dk_ * n3;
        kx_[idx] = a; ky_[idx] = b; kz_[idx] = c;
        const double q = a * a + b * b + c * c;
        k2_[idx] = q;
        kabs_[idx] = std::sqrt(q);
        const bool nyquist = (n1 == -N / 2) || (n2 == -N / 2) || (n3 == -N / 2);
        const bool keep = !nyquist && q > 0.0;
        mask_[idx] = keep ? 1.0 : 0.0;
        inv_k2_[idx] = keep ? 1.0 / q : 0.0;
        const double ik = keep ? 1.0 / kabs_[idx] : 0.0;
        khx_[idx] = a * ik; khy_[idx] = b * ik; khz_[idx] = c * ik;
        yx_[idx] = -L_ + h_ * ix; yy_[idx] = -L_ + h_ * iy; yz_[idx] = -L_ + h_ * iz;
        phase_[idx] = ((n1 + n2 + n3) % 2 == 0) ? 1.0 : -1.0;
      }
    }
  }

  scratch_.resize(modes_);
  plans_ = std::make_unique<FftPlans>();
  auto* buf = reinterpret_cast<fftw_complex*>(scratch_.data());
  {
    // The FFTW planner is not thread-safe; plan execution is.
    static std::mutex planner_mutex;
    std::lock_guard<std::mutex> lock(planner_mutex);
    plans_->forward = fftw_plan_dft_3d(N, N, N, buf, buf, FFTW_FORWARD,
                                       FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_->backward = fftw_plan_dft_3d(N, N, N, buf, buf, FFTW_BACKWARD,
                                        FFTW_ESTIMATE | FFTW_UNALIGNED);
  }
  if (!plans_->forward || !plans_->backward) throw std::runtime_error("Grid: FFTW plan failed");
}

Grid::~Grid() = default;

void Grid::to_physical_scalar(const Complex* in, double* out) const {
  // Unnormalized FFTW backward sum times (2pi)^{-3/2} dk^3 gives the lattice
  // Fourier series f(y_j) = (2pi)^{-3/2} dk^3 sum_k fhat(k) e^{ik.y_j}.
  const double sc = kFourierScale * dk_ * dk_ * dk_;
  for (std::size_t i = 0; i < modes_; ++i) scratch_[i] = in[i] * phase_[i];
  fftw_execute_dft(plans_->backward, reinterpret_cast<fftw_complex*>(scratch_.data()),
                   reinterpret_cast<fftw_complex*>(scratch_.data()));
  for (std::size_t i = 0; i < modes_; ++i) out[i] = scratch_[i].real() * sc;
}

void Grid::to_spectral_scalar(const double* in, Complex* out) const {
  const double sc = kFourierScale * h_ * h_ * h_;
  for (std::size_t i = 0; i < modes_; ++i) scratch_[i] = Complex(in[i], 0.0);
  fftw_execute_dft(plans_->forward, reinterpret_cast<fftw_complex*>(scratch_.data()),
                   reinterpret_cast<fftw_complex*>(scratch_.data()));
  for (std::size_t i = 0; i < modes_; ++i) out[i] = scratch_[i] * (phase_[i] * sc * mask_[i]);
}

void Grid::to_physical(const SpectralField& F, PhysicalField& out) const {
  for (int c = 0; c < 3; ++c) to_physical_scalar(F.comp(c), out.comp(c));
}

void Grid::to_spectral(const PhysicalField& f, SpectralField& out) const {
  for (int c = 0; c < 3; ++c) to_spectral_scalar(f.comp(c), out.comp(c));
}

PhysicalField Grid::to_physical(const SpectralField& F) const {
  PhysicalField out(modes_);
  to_physical(F, out);
  return out;
}

SpectralField Grid::to_spectral(const PhysicalField& f) const {
  SpectralField out(modes_);
  to_spectral(f, out);
  return out;
}

void Grid::apply_mask(SpectralField& F) const {
  for (int c = 0; c < 3; ++c) {
    Complex* p = F.comp(c);
    for (std::size_t i = 0; i < modes_; ++i) p[i] *= mask_[i];
  }
}

}  // namespace mls

#include "mls/spectral_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <lapacke.h>

namespace mls {

namespace {

constexpr int kRadialNodes = 400;
constexpr double kRadialCutoff = 40.0;

void radial_rule(std::vector<double>& x, std::vector<double>& w) {
  gauss_legendre(kRadialNodes, 0.0, kRadialCutoff, x, w);
}

void check_lapack(int info, const char* what) {
  if (info != 0)
    throw std::runtime_error(std::string(what) + " failed with LAPACK info = " +
                             std::to_string(info));
}

}  // namespace

OperatorBasis make_basis(const ChargeProfile& profile, int N, double L, double K) {
  if (N < 4 || L <= 0.0 || K <= 0.0) throw std::invalid_argument("make_basis: bad parameters");
  OperatorBasis b;
  b.N = N;
  b.L = L;
  b.K = K;
  b.dk = M_PI / L;
  const int cap = N / 2 - 1;
  const int nmax = std::min(cap, static_cast<int>(std::floor(K / b.dk)) + 1);
  const double k2max = K * K + 1e-12;
  for (int n1 = -nmax; n1 <= nmax; ++n1) {
    for (int n2 = -nmax; n2 <= nmax; ++n2) {
      for (int n3 = -nmax; n3 <= nmax; ++n3) {
        if (n1 == 0 && n2 == 0 && n3 == 0) continue;
        // one representative per Hermitian pair: lexicographically positive
        if (n1 < 0 || (n1 == 0 && (n2 < 0 || (n2 == 0 && n3 < 0)))) continue;
        OperatorBasis::Mode m;
        m.n = {n1, n2, n3};
        m.k = Vec3{b.dk * n1, b.dk * n2, b.dk * n3};
        const double k2 = dot(m.k, m.k);
        if (k2 > k2max) continue;
        m.kabs = std::sqrt(k2);
        m.khat = m.k / m.kabs;
        const double ax = std::abs(m.k.x), ay = std::abs(m.k.y), az = std::abs(m.k.z);
        Vec3 a{};
        if (ax <= ay && ax <= az)
          a = Vec3{1.0, 0.0, 0.0};
        else if (ay <= az)
          a = Vec3{0.0, 1.0, 0.0};
        else
          a = Vec3{0.0, 0.0, 1.0};
        Vec3 u = cross(m.k, a);
        m.e1 = u / norm(u);
        Vec3 w = cross(m.khat, m.e1);
        m.e2 = w / norm(w);
        b.modes.push_back(m);
      }
    }
  }
  // relative charge spectral mass above the cutoff
  std::vector<double> xr, wr;
  radial_rule(xr, wr);
  const std::vector<double> rh = profile.density_hat(xr);
  double total = 0.0, tail = 0.0;
  for (int i = 0; i < kRadialNodes; ++i) {
    const double m = wr[i] * rh[i] * rh[i] * xr[i] * xr[i];
    total += m;
    if (xr[i] > K) tail += m;
  }
  b.tail_mass = total > 0.0 ? tail / total : 0.0;
  return b;
}

MomentRows moment_rows(const OperatorBasis& basis, const ChargeProfile& profile) {
  MomentRows r;
  const std::size_t M = basis.M();
  r.cols = 2 * M;
  for (int n = 0; n < 3; ++n) r.row[n].assign(r.cols, 0.0);
  std::vector<double> ks(M);
  for (std::size_t m = 0; m < M; ++m) ks[m] = basis.modes[m].kabs;
  const std::vector<double> g = profile.moment_radial(ks);
  const double dk3 = basis.dk * basis.dk * basis.dk;
  const Vec3 e[3] = {Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{0, 0, 1}};
  for (std::size_t m = 0; m < M; ++m) {
    const auto& md = basis.modes[m];
    const double c = std::sqrt(2.0 * dk3 / (md.kabs * md.kabs)) * g[m];
    for (int n = 0; n < 3; ++n) {
      const Vec3 enk = cross(e[n], md.khat);
      r.row[n][2 * m + 0] = -c * dot(md.e1, enk);
      r.row[n][2 * m + 1] = -c * dot(md.e2, enk);
    }
  }
  return r;
}

double MomentRows::delta_I() const {
  double s = 0.0;
  for (double v : row[0]) s += v * v;
  return s;
}

BasisInertia basis_inertia(const MomentRows& rows, double I) {
  if (I <= 0.0) throw std::invalid_argument("basis_inertia: I must be positive");
  BasisInertia out;
  out.delta_I = rows.delta_I();
  out.nu = 1.0 / I;
  out.nu_eff = 1.0 / (I + out.delta_I);
  out.delta = out.nu * out.nu_eff * out.delta_I;
  return out;
}

std::vector<double> apply(const OperatorMatrix& m, const std::vector<double>& x) {
  if (x.size() != m.dim) throw std::invalid_argument("apply: dimension mismatch");
  std::vector<double> y(m.dim, 0.0);
  for (std::size_t i = 0; i < m.dim; ++i) {
    const double* row = m.data.data() + i * m.dim;
    double s = 0.0;
    for (std::size_t j = 0; j < m.dim; ++j) s += row[j] * x[j];
    y[i] = s;
  }
  return y;
}

OperatorMatrix assemble_B(const ChargeProfile& profile, double nu, double delta,
                          const OperatorBasis& basis) {
  if (delta <= 0.0)
    throw std::invalid_argument("assemble_B: delta = nu - nu_eff must be positive");
  if (nu <= 0.0) throw std::invalid_argument("assemble_B: nu must be positive");
  const MomentRows rows = moment_rows(basis, profile);
  const std::size_t M = basis.M();
  const std::size_t D = basis.dim_B();
  OperatorMatrix out;
  out.dim = D;
  out.data.assign(D * D, 0.0);
  out.nu = nu;
  out.delta = delta;
  out.nu_eff = nu - delta;
  out.K = basis.K;
  out.L = basis.L;
  out.N = basis.N;
  for (std::size_t i = 0; i < 4 * M; ++i) out.at(i, i) = 1.0;
  for (int n = 0; n < 3; ++n) {
    const double* rn = rows.row[n].data();
    for (std::size_t a = 0; a < 2 * M; ++a) {
      if (rn[a] == 0.0) continue;
      const std::size_t ia = basis.sin_dof(a / 2, static_cast<int>(a % 2));
      for (std::size_t c = 0; c < 2 * M; ++c)
        out.at(ia, basis.sin_dof(c / 2, static_cast<int>(c % 2))) += nu * rn[a] * rn[c];
      out.at(ia, basis.gamma_dof(n)) = -nu * rn[a];
      out.at(basis.gamma_dof(n), ia) = -nu * rn[a];
    }
    out.at(basis.gamma_dof(n), basis.gamma_dof(n)) = delta;
  }
  return out;
}

OperatorMatrix assemble_Q(const ChargeProfile& profile, double nu, double delta,
                          const OperatorBasis& basis) {
  const OperatorMatrix B = assemble_B(profile, nu, delta, basis);
  const std::size_t M = basis.M();
  const std::size_t D = basis.dim_Q();
  OperatorMatrix out;
  out.dim = D;
  out.data.assign(D * D, 0.0);
  out.nu = nu;
  out.delta = delta;
  out.nu_eff = nu - delta;
  out.K = basis.K;
  out.L = basis.L;
  out.N = basis.N;
  // alpha-alpha block (indices 0..4M) and gamma rows/cols map from B;
  // the beta block (4M..8M) is the identity.
  auto to_q = [&](std::size_t i) { return i < 4 * M ? i : i + 4 * M; };
  for (std::size_t i = 0; i < B.dim; ++i) {
    for (std::size_t j = 0; j < B.dim; ++j) {
      const double v = B.at(i, j);
      if (v != 0.0) out.at(to_q(i), to_q(j)) = v;
    }
  }
  for (std::size_t i = 4 * M; i < 8 * M; ++i) out.at(i, i) = 1.0;
  return out;
}

OperatorMatrix assemble_Q0(const OperatorBasis& basis, double delta) {
  if (delta <= 0.0) throw std::invalid_argument("assemble_Q0: delta must be positive");
  const std::size_t D = basis.dim_Q();
  OperatorMatrix out;
  out.dim = D;
  out.data.assign(D * D, 0.0);
  out.delta = delta;
  out.K = basis.K;
  out.L = basis.L;
  out.N = basis.N;
  for (std::size_t i = 0; i < 8 * basis.M(); ++i) out.at(i, i) = 1.0;
  // gamma lives at the tail of the Q layout, after both field blocks
  for (std::size_t n = 0; n < 3; ++n) out.at(8 * basis.M() + n, 8 * basis.M() + n) = delta;
  return out;
}

std::vector<double> kernel_coordinates(const OperatorBasis& basis, const MomentRows& rows,
                                       double nu_eff, int n) {
  std::vector<double> x(basis.dim_B(), 0.0);
  for (std::size_t a = 0; a < rows.cols; ++a)
    x[basis.sin_dof(a / 2, static_cast<int>(a % 2))] = nu_eff * rows.row[n][a];
  x[basis.gamma_dof(n)] = 1.0;
  return x;
}

std::array<SpectralField, 3> kernel_basis(const Grid& g, const ChargeProfile& profile,
                                          double nu_eff) {
  ProfileTables tables(g, profile);
  const std::size_t n = g.modes();
  const double* gmr = tables.moment();
  const double* invk2 = g.inv_k2();
  const double* kh[3] = {g.khx(), g.khy(), g.khz()};
  std::array<SpectralField, 3> out;
  for (int c = 0; c < 3; ++c) out[c] = SpectralField(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (gmr[i] == 0.0) continue;
    const double f = nu_eff * gmr[i] * invk2[i];
    // gamma = e_c; alphahat = i f (e_c ^ khat)
    out[0].comp(1)[i] = Complex(0.0, -f * kh[2][i]);
    out[0].comp(2)[i] = Complex(0.0, f * kh[1][i]);
    out[1].comp(0)[i] = Complex(0.0, f * kh[2][i]);
    out[1].comp(2)[i] = Complex(0.0, -f * kh[0][i]);
    out[2].comp(0)[i] = Complex(0.0, -f * kh[1][i]);
    out[2].comp(1)[i] = Complex(0.0, f * kh[0][i]);
  }
  return out;
}

namespace {

EigenResult syevr_range(std::vector<double>& a, std::size_t n, int il, int iu, bool vectors) {
  const int ni = static_cast<int>(n);
  const int want = iu - il + 1;
  EigenResult out;
  out.values.assign(n, 0.0);
  std::vector<double> z;
  std::vector<lapack_int> isuppz(2 * std::max(1, want));
  lapack_int found = 0;
  if (vectors) z.assign(n * static_cast<std::size_t>(want), 0.0);
  // full symmetric storage: column-major 'U' reads the same bytes we filled
  const int info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, vectors ? 'V' : 'N', 'I', 'U', ni, a.data(),
                                  ni, 0.0, 0.0, il, iu, 0.0, &found, out.values.data(),
                                  vectors ? z.data() : nullptr, ni, isuppz.data());
  check_lapack(info, "dsyevr");
  out.values.resize(found);
  if (vectors) {
    z.resize(n * static_cast<std::size_t>(found));
    out.vectors = std::move(z);
  }
  return out;
}

}  // namespace

EigenResult smallest_eigenpairs_destructive(OperatorMatrix& m, int nev) {
  const int iu = std::min<std::size_t>(nev, m.dim);
  return syevr_range(m.data, m.dim, 1, iu, true);
}

EigenResult smallest_eigenpairs(const OperatorMatrix& m, int nev) {
  std::vector<double> a = m.data;
  const int iu = std::min<std::size_t>(nev, m.dim);
  return syevr_range(a, m.dim, 1, iu, true);
}

double largest_eigenvalue(const OperatorMatrix& m) {
  std::vector<double> a = m.data;
  const int n = static_cast<int>(m.dim);
  return syevr_range(a, m.dim, n, n, false).values.at(0);
}

double a_minus(const ChargeProfile& profile, double I, double lambda) {
  if (lambda > 0.0) throw std::domain_error("a_minus: lambda > 0 lies in the continuous spectrum");
  if (I <= 0.0) throw std::invalid_argument("a_minus: I must be positive");
  std::vector<double> xr, wr;
  radial_rule(xr, wr);
  const std::vector<double> g = profile.moment_radial(xr);
  double delta_I = 0.0, resolvent = 0.0;
  for (int i = 0; i < kRadialNodes; ++i) {
    const double g2 = wr[i] * g[i] * g[i];
    const double r2 = xr[i] * xr[i];
    delta_I += g2;
    resolvent += g2 * r2 / (r2 - lambda);
  }
  const double c = 8.0 * M_PI / 3.0;
  delta_I *= c;
  resolvent *= c;
  const double nu = 1.0 / I;
  const double nu_eff = 1.0 / (I + delta_I);
  return nu * (nu_eff + lambda) * resolvent;
}

double a_plus(const ChargeProfile& profile, double I, double lambda) {
  if (lambda > 0.0) throw std::domain_error("a_plus: lambda > 0 lies in the continuous spectrum");
  if (I <= 0.0) throw std::invalid_argument("a_plus: I must be positive");
  std::vector<double> xr, wr;
  radial_rule(xr, wr);
  const std::vector<double> g = profile.moment_radial(xr);
  double delta_I = 0.0;
  for (int i = 0; i < kRadialNodes; ++i) delta_I += wr[i] * g[i] * g[i];
  delta_I *= 8.0 * M_PI / 3.0;
  const double nu = 1.0 / I;
  const double nu_eff = 1.0 / (I + delta_I);
  return (nu - nu_eff) - lambda;
}

double matrix_A_lambda(const ChargeProfile& profile, double I, double lambda) {
  return a_plus(profile, I, lambda) - a_minus(profile, I, lambda);
}

CoercivityResult coercivity_constant(const ChargeProfile& profile, const Vec3& omega, double I,
                                     const OperatorBasis& basis) {
  const MomentRows rows = moment_rows(basis, profile);
  const BasisInertia bi = basis_inertia(rows, I);
  const std::size_t M = basis.M();
  const std::size_t n2M = 2 * M;

  // Normalized coupling directions f_n = R[n] / sqrt(delta_I) in the sin block.
  const double sqI = std::sqrt(bi.delta_I);
  // RF[n][m] = <R[n], f_m> = <R[n], R[m]> / sqrt(delta_I)  (= sqrt(delta_I) Id)
  double RF[3][3];
  for (int n = 0; n < 3; ++n) {
    for (int m = 0; m < 3; ++m) {
      double s = 0.0;
      for (std::size_t a = 0; a < n2M; ++a) s += rows.row[n][a] * rows.row[m][a];
      RF[n][m] = s / sqI;
    }
  }

  // Constraint fields b_n expanded over the beta sin dofs.
  std::vector<double> ks(M);
  for (std::size_t m = 0; m < M; ++m) ks[m] = basis.modes[m].kabs;
  const std::vector<double> g = profile.moment_radial(ks);
  const double dk3 = basis.dk * basis.dk * basis.dk;
  const Vec3 e[3] = {Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{0, 0, 1}};
  std::array<std::vector<double>, 3> bc;
  for (int n = 0; n < 3; ++n) bc[n].assign(n2M, 0.0);
  for (std::size_t m = 0; m < M; ++m) {
    const auto& md = basis.modes[m];
    const double G = g[m] / (md.kabs * md.kabs * md.kabs);
    const double kw = dot(md.k, omega);
    const double c = std::sqrt(2.0 * dk3);
    for (int n = 0; n < 3; ++n) {
      const Vec3 vec = kw * e[n] - md.k[n] * omega;
      bc[n][2 * m + 0] = c * G * dot(md.e1, vec);
      bc[n][2 * m + 1] = c * G * dot(md.e2, vec);
    }
  }
  double G3[3][3];
  for (int n = 0; n < 3; ++n)
    for (int m = 0; m < 3; ++m) {
      double s = 0.0;
      for (std::size_t a = 0; a < n2M; ++a) s += bc[n][a] * bc[m][a];
      G3[n][m] = s;
    }
  std::vector<int> kept;
  for (int n = 0; n < 3; ++n)
    if (G3[n][n] > 1e-24) kept.push_back(n);
  const std::size_t nb = kept.size();
  const std::size_t D = 6 + nb;  // coords: a(3) | c(nb) | gamma(3)

  // Reduced forms: Q_rho and Q_0 restricted to the only directions on which
  // they differ from the identity (plus everything the constraints touch).
  std::vector<double> Qr(D * D, 0.0), Q0(D * D, 0.0);
  auto qr = [&](std::size_t i, std::size_t j) -> double& { return Qr[i * D + j]; };
  auto q0 = [&](std::size_t i, std::size_t j) -> double& { return Q0[i * D + j]; };
  for (int n = 0; n < 3; ++n) {
    for (int m = 0; m < 3; ++m) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += RF[k][n] * RF[k][m];
      qr(n, m) = (n == m ? 1.0 : 0.0) + bi.nu * s;
      q0(n, m) = (n == m ? 1.0 : 0.0);
      qr(3 + nb + n, 3 + nb + m) = (n == m ? bi.delta : 0.0);
      q0(3 + nb + n, 3 + nb + m) = (n == m ? bi.delta : 0.0);
    }
    for (int m = 0; m < 3; ++m) {
      qr(n, 3 + nb + m) = -bi.nu * RF[m][n] * 1.0;
      qr(3 + nb + m, n) = qr(n, 3 + nb + m);
    }
  }
  for (std::size_t i = 0; i < nb; ++i)
    for (std::size_t j = 0; j < nb; ++j) {
      qr(3 + i, 3 + j) = G3[kept[i]][kept[j]];
      q0(3 + i, 3 + j) = G3[kept[i]][kept[j]];
    }

  // Tangency constraints (E_n, xi) = <b_n, beta> + gamma_n = 0, in coords.
  std::vector<double> C(3 * D, 0.0);
  for (int n = 0; n < 3; ++n) {
    for (std::size_t i = 0; i < nb; ++i) C[n * D + 3 + i] = G3[n][kept[i]];
    C[n * D + 3 + nb + n] = 1.0;
  }

  CoercivityResult out;
  out.reduced_dim = D - 3;

  // Unconstrained pencil (diagnostic: the 3-dim kernel shows up as ~0).
  {
    std::vector<double> A = Qr, B = Q0, w(D);
    const int info = LAPACKE_dsygvd(LAPACK_ROW_MAJOR, 1, 'N', 'U', static_cast<int>(D), A.data(),
                                    static_cast<int>(D), B.data(), static_cast<int>(D), w.data());
    check_lapack(info, "dsygvd (unconstrained)");
    out.unprojected_smallest = w[0];
  }

  // Null space of C via SVD; the last D-3 right singular vectors span it.
  std::vector<double> svdA = C;
  std::vector<double> sing(3), U(9), VT(D * D), superb(std::min<std::size_t>(3, D) - 1);
  {
    const int info =
        LAPACKE_dgesvd(LAPACK_ROW_MAJOR, 'N', 'A', 3, static_cast<int>(D), svdA.data(),
                       static_cast<int>(D), sing.data(), U.data(), 3, VT.data(),
                       static_cast<int>(D), superb.data());
    check_lapack(info, "dgesvd");
  }
  const std::size_t Z = D - 3;
  std::vector<double> Ar(Z * Z, 0.0), Br(Z * Z, 0.0);
  auto vt = [&](std::size_t r, std::size_t c) { return VT[r * D + c]; };
  for (std::size_t i = 0; i < Z; ++i) {
    for (std::size_t j = 0; j < Z; ++j) {
      double sa = 0.0, sb = 0.0;
      for (std::size_t p = 0; p < D; ++p) {
        double qa = 0.0, qb = 0.0;
        for (std::size_t q = 0; q < D; ++q) {
          qa += Qr[p * D + q] * vt(3 + j, q);
          qb += Q0[p * D + q] * vt(3 + j, q);
        }
        sa += vt(3 + i, p) * qa;
        sb += vt(3 + i, p) * qb;
      }
      Ar[i * Z + j] = sa;
      Br[i * Z + j] = sb;
    }
  }
  {
    std::vector<double> w(Z);
    const int info = LAPACKE_dsygvd(LAPACK_ROW_MAJOR, 1, 'N', 'U', static_cast<int>(Z), Ar.data(),
                                    static_cast<int>(Z), Br.data(), static_cast<int>(Z), w.data());
    check_lapack(info, "dsygvd (constrained)");
    out.kappa_reduced = w[0];
  }
  out.kappa = std::min(1.0, out.kappa_reduced);
  return out;
}

SpectralReport spectral_stability_report(const ChargeProfile& profile, const Vec3& omega,
                                         double I, int N, double L, double K, int nev) {
  SpectralReport rep;
  rep.N = N;
  rep.L = L;
  rep.K = K;
  const OperatorBasis basis = make_basis(profile, N, L, K);
  const MomentRows rows = moment_rows(basis, profile);
  const BasisInertia bi = basis_inertia(rows, I);
  rep.delta_I = bi.delta_I;
  rep.nu_eff = bi.nu_eff;
  rep.delta = bi.delta;

  OperatorMatrix B = assemble_B(profile, bi.nu, bi.delta, basis);
  rep.top_eigenvalue = largest_eigenvalue(B);
  const int want = std::max(nev, 4);
  const EigenResult eig = smallest_eigenpairs_destructive(B, want);
  rep.eigenvalues = eig.values;
  rep.gap = eig.values.size() > 3 ? eig.values[3] : 0.0;
  int kd = 0;
  for (double v : eig.values)
    if (std::abs(v) < rep.gap / 100.0) ++kd;
  rep.kernel_dim = kd;

  // Worst-case alignment of the exact kernel coordinates with the span of the
  // three lowest computed eigenvectors.
  const std::size_t dim = basis.dim_B();
  double worst = 1.0;
  if (eig.values.size() >= 3) {
    for (int n = 0; n < 3; ++n) {
      std::vector<double> x = kernel_coordinates(basis, rows, bi.nu_eff, n);
      double nx = 0.0;
      for (double v : x) nx += v * v;
      nx = std::sqrt(nx);
      double proj2 = 0.0;
      for (int j = 0; j < 3; ++j) {
        const double* vj = eig.vectors.data() + static_cast<std::size_t>(j) * dim;
        double s = 0.0;
        for (std::size_t i = 0; i < dim; ++i) s += x[i] * vj[i];
        proj2 += (s / nx) * (s / nx);
      }
      worst = std::min(worst, std::sqrt(proj2));
    }
  }
  rep.min_kernel_alignment = worst;

  rep.kappa = coercivity_constant(profile, omega, I, basis).kappa;
  return rep;
}

}  // namespace mls

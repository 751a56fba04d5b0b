// Structural tests of the truncated-operator machinery at a small cutoff.
// The content checks: lattice isotropy of the spin coupling, the exact
// discrete spectrum of B, the kernel in both its coordinate and field
// representations (cross-checked against each other mode by mode), the scalar
// resolvent functions, and the constrained coercivity reduction.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <set>
#include <vector>

#include "mls/charge_profile.hpp"
#include "mls/grid.hpp"
#include "mls/spectral_analysis.hpp"

using namespace mls;

namespace {

const double kNu = 1.0;  // bare 1/I at I = 1

struct Small {
  ChargeProfile profile{1.0, 1.0};
  OperatorBasis basis = make_basis(profile, 16, 4.0, 2.0);
  MomentRows rows = moment_rows(basis, profile);
  BasisInertia bi = basis_inertia(rows, 1.0);
};

double vec_norm(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("basis: half-lattice representatives below the cutoff") {
  Small s;
  const auto& b = s.basis;
  CHECK(b.dk == doctest::Approx(M_PI / 4.0).epsilon(1e-15));

  // brute-force count of half-lattice vectors with |k| <= K
  std::size_t expect = 0;
  for (int n1 = -8; n1 <= 7; ++n1)
    for (int n2 = -8; n2 <= 7; ++n2)
      for (int n3 = -8; n3 <= 7; ++n3) {
        if (n1 == 0 && n2 == 0 && n3 == 0) continue;
        if (n1 < 0 || (n1 == 0 && (n2 < 0 || (n2 == 0 && n3 < 0)))) continue;
        if (b.dk * b.dk * (n1 * n1 + n2 * n2 + n3 * n3) > b.K * b.K + 1e-12) continue;
        ++expect;
      }
  CHECK(b.M() == expect);
  CHECK(b.M() > 0);

  std::set<std::array<int, 3>> seen;
  for (const auto& m : b.modes) {
    CHECK(seen.insert(m.n).second);  // unique
    const bool positive = m.n[0] > 0 || (m.n[0] == 0 && m.n[1] > 0) ||
                          (m.n[0] == 0 && m.n[1] == 0 && m.n[2] > 0);
    CHECK(positive);
    CHECK(m.kabs <= b.K + 1e-9);
    CHECK(m.kabs == doctest::Approx(norm(m.k)).epsilon(1e-14));
    // polarizations: orthonormal, both orthogonal to k
    CHECK(std::abs(norm(m.e1) - 1.0) <= 1e-14);
    CHECK(std::abs(norm(m.e2) - 1.0) <= 1e-14);
    CHECK(std::abs(dot(m.e1, m.e2)) <= 1e-14);
    CHECK(std::abs(dot(m.e1, m.k)) <= 1e-13);
    CHECK(std::abs(dot(m.e2, m.k)) <= 1e-13);
  }

  CHECK(b.tail_mass > 0.0);
  CHECK(b.tail_mass < 1.0);
  CHECK(make_basis(s.profile, 16, 4.0, 3.0).tail_mass < b.tail_mass);

  // the grid cap: a huge cutoff cannot request unrepresentable modes
  const OperatorBasis capped = make_basis(s.profile, 8, 4.0, 50.0);
  for (const auto& m : capped.modes)
    for (int c = 0; c < 3; ++c) CHECK(std::abs(m.n[c]) <= 3);
}

TEST_CASE("moment rows: exact lattice isotropy and the inertia identity") {
  Small s;
  CHECK(s.rows.cols == 2 * s.basis.M());
  double rr[3][3] = {};
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (std::size_t j = 0; j < s.rows.cols; ++j)
        rr[a][b] += s.rows.row[a][j] * s.rows.row[b][j];
  const double dI = s.rows.delta_I();
  CHECK(dI > 0.0);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      if (a == b)
        CHECK(std::abs(rr[a][b] - dI) <= 1e-14 * dI);
      else
        CHECK(std::abs(rr[a][b]) <= 1e-14 * dI);
    }

  CHECK(s.bi.nu == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(s.bi.nu_eff == doctest::Approx(1.0 / (1.0 + dI)).epsilon(1e-14));
  // nu - nu_eff = nu * nu_eff * delta_I is algebraically exact
  CHECK(std::abs(s.bi.nu - s.bi.nu_eff - s.bi.nu * s.bi.nu_eff * dI) <= 1e-15);
  CHECK(s.bi.delta == doctest::Approx(s.bi.nu * s.bi.nu_eff * dI).epsilon(1e-14));
}

TEST_CASE("B: symmetry, block structure, and the exact three-level spectrum") {
  Small s;
  OperatorMatrix B = assemble_B(s.profile, kNu, s.bi.delta, s.basis);
  const std::size_t M = s.basis.M();
  CHECK(B.dim == 4 * M + 3);

  for (std::size_t i = 0; i < B.dim; i += 7)
    for (std::size_t j = 0; j <= i; j += 5) CHECK(B.at(i, j) == B.at(j, i));

  // cos dofs are free: identity rows
  const std::size_t c0 = s.basis.cos_dof(0, 0);
  CHECK(B.at(c0, c0) == 1.0);
  for (std::size_t j = 0; j < B.dim; ++j)
    if (j != c0) CHECK(B.at(c0, j) == 0.0);
  // gamma block is delta * Id3
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      CHECK(B.at(s.basis.gamma_dof(a), s.basis.gamma_dof(b)) ==
            doctest::Approx(a == b ? s.bi.delta : 0.0).epsilon(1e-15));

  // spectrum {0 x3, 1 x(4M-3), 1 + nu dI + delta x3}
  const EigenResult eig = smallest_eigenpairs(B, 5);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(eig.values[i]) <= 1e-12);
  CHECK(eig.values[3] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(eig.values[4] == doctest::Approx(1.0).epsilon(1e-12));
  const double expect_top = 1.0 + kNu * s.rows.delta_I() + s.bi.delta;
  CHECK(largest_eigenvalue(B) == doctest::Approx(expect_top).epsilon(1e-12));

  // exact kernel coordinates annihilate B
  for (int n = 0; n < 3; ++n) {
    const std::vector<double> x = kernel_coordinates(s.basis, s.rows, s.bi.nu_eff, n);
    CHECK(vec_norm(mls::apply(B, x)) <= 1e-12 * vec_norm(x));
  }

  CHECK_THROWS_AS(assemble_B(s.profile, kNu, 0.0, s.basis), std::invalid_argument);
  CHECK_THROWS_AS(assemble_B(s.profile, -1.0, s.bi.delta, s.basis), std::invalid_argument);
}

TEST_CASE("Q: beta block free, (alpha, gamma) block equal to B, same kernel") {
  Small s;
  OperatorMatrix B = assemble_B(s.profile, kNu, s.bi.delta, s.basis);
  OperatorMatrix Q = assemble_Q(s.profile, kNu, s.bi.delta, s.basis);
  const std::size_t M = s.basis.M();
  CHECK(Q.dim == 8 * M + 3);

  auto to_q = [M](std::size_t i) { return i < 4 * M ? i : i + 4 * M; };
  for (std::size_t i = 0; i < B.dim; i += 3)
    for (std::size_t j = 0; j < B.dim; j += 7) CHECK(Q.at(to_q(i), to_q(j)) == B.at(i, j));
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(Q.at(4 * M + i, 4 * M + i) == 1.0);
    CHECK(Q.at(4 * M + i, 4 * M + i + 1) == 0.0);
    CHECK(Q.at(4 * M + i, 2) == 0.0);  // no alpha-beta coupling
  }

  // embedded kernel vectors annihilate Q; the rest of the spectrum starts at 1
  for (int n = 0; n < 3; ++n) {
    const std::vector<double> xb = kernel_coordinates(s.basis, s.rows, s.bi.nu_eff, n);
    std::vector<double> xq(Q.dim, 0.0);
    for (std::size_t i = 0; i < xb.size(); ++i) xq[to_q(i)] = xb[i];
    CHECK(vec_norm(mls::apply(Q, xq)) <= 1e-12 * vec_norm(xq));
  }
  const EigenResult eig = smallest_eigenpairs(Q, 4);
  for (int i = 0; i < 3; ++i) CHECK(eig.values[i] >= -1e-12);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(eig.values[i]) <= 1e-12);
  CHECK(eig.values[3] == doctest::Approx(1.0).epsilon(1e-12));

  OperatorMatrix Q0 = assemble_Q0(s.basis, s.bi.delta);
  CHECK(Q0.dim == Q.dim);
  CHECK(Q0.at(0, 0) == 1.0);
  CHECK(Q0.at(0, 1) == 0.0);
  CHECK(Q0.at(Q.dim - 1, Q.dim - 1) == doctest::Approx(s.bi.delta).epsilon(1e-15));
}

TEST_CASE("kernel coordinates and kernel fields are the same object") {
  // Map the coordinate vector through the H1dot-normalized basis onto the
  // grid lattice and compare against the closed-form kernel field, mode by
  // mode: sin dof x at +k contributes alphahat = -i x e_pol / sqrt(2 dk^3 k^2).
  Small s;
  Grid g(16, 4.0);
  const auto fields = kernel_basis(g, s.profile, s.bi.nu_eff);
  const int N = g.N();
  auto wrap = [N](int n) { return std::size_t((n + N) % N); };

  for (int n = 0; n < 3; ++n) {
    const std::vector<double> x = kernel_coordinates(s.basis, s.rows, s.bi.nu_eff, n);
    double worst = 0.0;
    for (std::size_t m = 0; m < s.basis.M(); ++m) {
      const auto& mode = s.basis.modes[m];
      const std::size_t idx =
          (wrap(mode.n[0]) * N + wrap(mode.n[1])) * N + wrap(mode.n[2]);
      const double snorm = 1.0 / std::sqrt(2.0 * std::pow(g.dk(), 3) * mode.kabs * mode.kabs);
      for (int c = 0; c < 3; ++c) {
        const Complex predicted =
            Complex(0.0, -snorm) * (x[s.basis.sin_dof(m, 0)] * mode.e1[c] +
                                    x[s.basis.sin_dof(m, 1)] * mode.e2[c]);
        worst = std::max(worst, std::abs(fields[n].comp(c)[idx] - predicted));
      }
      // cos dofs carry nothing
      CHECK(x[s.basis.cos_dof(m, 0)] == 0.0);
      CHECK(x[s.basis.cos_dof(m, 1)] == 0.0);
    }
    CHECK(worst <= 1e-13);
  }
}

TEST_CASE("degenerate charge: operators decouple and stay positive") {
  ChargeProfile faint(1.0, 1e-8);
  const OperatorBasis basis = make_basis(faint, 16, 4.0, 2.0);
  OperatorMatrix B = assemble_B(faint, 1.0, 0.3, basis);
  const EigenResult eig = smallest_eigenpairs(B, 4);
  CHECK(eig.values[0] == doctest::Approx(0.3).epsilon(1e-8));
  CHECK(eig.values[2] == doctest::Approx(0.3).epsilon(1e-8));
  CHECK(eig.values[3] == doctest::Approx(1.0).epsilon(1e-12));
  // the coupling scales linearly with the charge amplitude (~3e-3 at 1.0)
  CHECK(std::abs(B.at(basis.sin_dof(0, 0), basis.gamma_dof(0))) <= 1e-10);
}

TEST_CASE("scalar resolvent functions a_-, a_+") {
  ChargeProfile profile(1.0, 1.0);
  const double I = 1.0;
  // both branches meet at lambda = 0 (the inertia identity)
  CHECK(std::abs(a_minus(profile, I, 0.0) - a_plus(profile, I, 0.0)) <=
        1e-10 * std::abs(a_plus(profile, I, 0.0)));
  CHECK(std::abs(matrix_A_lambda(profile, I, 0.0)) <=
        1e-10 * std::abs(a_plus(profile, I, 0.0)));

  // a_+ is affine with slope -1
  CHECK(a_plus(profile, I, -2.0) ==
        doctest::Approx(a_plus(profile, I, 0.0) + 2.0).epsilon(1e-13));

  // strictly positive gap on the negative axis, growing toward -infinity
  double prev = 0.0;
  for (double lam : {-0.01, -0.1, -1.0, -10.0}) {
    const double gap = matrix_A_lambda(profile, I, lam);
    CHECK(gap > 0.0);
    CHECK(gap > prev);
    prev = gap;
  }

  CHECK_THROWS_AS(a_minus(profile, I, 0.5), std::domain_error);
  CHECK_THROWS_AS(a_plus(profile, I, 0.5), std::domain_error);
  CHECK_THROWS_AS(a_minus(profile, 0.0, -1.0), std::invalid_argument);
}

TEST_CASE("coercivity: constrained reduction at a small cutoff") {
  Small s;
  const CoercivityResult r = coercivity_constant(s.profile, Vec3{0.0, 0.0, 1.0}, 1.0, s.basis);
  CHECK(r.kappa > 0.0);
  CHECK(r.kappa <= 1.0);
  CHECK(r.kappa_reduced > 0.5);
  CHECK(std::abs(r.unprojected_smallest) <= 1e-8);
  // omega || e3 kills the third constraint field: D = 6 + 2, minus 3 constraints
  CHECK(r.reduced_dim == 5);

  // lattice isotropy: a rotated spin axis gives the same constant
  const CoercivityResult r1 = coercivity_constant(s.profile, Vec3{1.0, 0.0, 0.0}, 1.0, s.basis);
  CHECK(r1.kappa == doctest::Approx(r.kappa).epsilon(1e-9));
}

TEST_CASE("spectral stability report ties the pieces together") {
  Small s;
  const SpectralReport rep = spectral_stability_report(s.profile, Vec3{0.0, 0.0, 1.0}, 1.0, 16,
                                                       4.0, 2.0, 6);
  CHECK(rep.kernel_dim == 3);
  CHECK(rep.gap == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(rep.min_kernel_alignment >= 1.0 - 1e-10);
  CHECK(rep.kappa > 0.0);
  CHECK(rep.kappa <= 1.0);
  CHECK(rep.top_eigenvalue ==
        doctest::Approx(1.0 + s.rows.delta_I() + s.bi.delta).epsilon(1e-10));
  CHECK(rep.delta_I == doctest::Approx(s.rows.delta_I()).epsilon(1e-12));
  for (std::size_t i = 1; i < rep.eigenvalues.size(); ++i)
    CHECK(rep.eigenvalues[i] >= rep.eigenvalues[i - 1] - 1e-14);
}

TEST_CASE("apply: dense symmetric matvec") {
  OperatorMatrix m;
  m.dim = 2;
  m.data = {2.0, 1.0, 1.0, 3.0};
  const std::vector<double> y = mls::apply(m, {1.0, 1.0});
  CHECK(y[0] == 3.0);
  CHECK(y[1] == 4.0);
}

#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <complex>
#include <set>
#include <vector>

#include "kic/floquet.hpp"
#include "kic/sector_basis.hpp"

using namespace kic;
using Catch::Matchers::WithinAbs;

namespace {

// Independent matrix exponential: scaling and squaring with a plain Taylor
// series, no closed-form shortcut.
Eigen::Matrix2cd expm_taylor(const Eigen::Matrix2cd& a) {
  int s = 0;
  double scale = a.cwiseAbs().sum();
  while (scale > 0.5) {
    scale /= 2.0;
    ++s;
  }
  const Eigen::Matrix2cd x = a / std::pow(2.0, s);
  Eigen::Matrix2cd sum = Eigen::Matrix2cd::Identity();
  Eigen::Matrix2cd term = Eigen::Matrix2cd::Identity();
  for (int n = 1; n <= 30; ++n) {
    term = term * x / static_cast<double>(n);
    sum += term;
  }
  for (int i = 0; i < s; ++i) sum = sum * sum;
  return sum;
}

Eigen::Matrix2cd kick_generator(const std::array<double, 3>& b) {
  const std::complex<double> im(0.0, 1.0);
  Eigen::Matrix2cd g;
  g(0, 0) = b[2];
  g(0, 1) = std::complex<double>(b[0], -b[1]);
  g(1, 0) = std::complex<double>(b[0], b[1]);
  g(1, 1) = -b[2];
  return -im * g;
}

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Eigen::VectorXcd scatter(const SparseVector& v, int L) {
  Eigen::VectorXcd dense = Eigen::VectorXcd::Zero(Eigen::Index{1} << L);
  for (std::size_t i = 0; i < v.codes.size(); ++i)
    dense[static_cast<Eigen::Index>(v.codes[i])] = v.amps[i];
  return dense;
}

}  // namespace

TEST_CASE("single kick matrix against a Taylor-series exponential", "[floquet]") {
  CHECK(single_kick_matrix({0.0, 0.0, 0.0}).isIdentity(1e-15));

  const Eigen::Matrix2cd half_x = single_kick_matrix({M_PI / 2.0, 0.0, 0.0});
  CHECK_THAT(std::abs(half_x(0, 0)), WithinAbs(0.0, 1e-15));
  CHECK_THAT(half_x(0, 1).imag(), WithinAbs(-1.0, 1e-15));

  for (const std::array<double, 3> b :
       {std::array<double, 3>{0.9, 0.0, 0.9}, std::array<double, 3>{0.3, 0.4, 0.5},
        std::array<double, 3>{0.0, 1.1, 0.0}, std::array<double, 3>{2.5, -0.7, 1.9}}) {
    const Eigen::Matrix2cd u = single_kick_matrix(b);
    const Eigen::Matrix2cd ref = expm_taylor(kick_generator(b));
    CHECK((u - ref).cwiseAbs().maxCoeff() < 1e-13);
    CHECK((u.adjoint() * u - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff() < 1e-14);
    CHECK_THAT(std::abs(u.determinant() - std::complex<double>(1.0, 0.0)), WithinAbs(0.0, 1e-13));
  }

  const Eigen::Matrix2cd canonical = single_kick_matrix({0.9, 0.0, 0.9});
  CHECK_THAT(canonical(0, 0).real(), WithinAbs(0.29361288295777016, 1e-12));
  CHECK_THAT(canonical(0, 0).imag(), WithinAbs(-0.67594062506209973, 1e-8));
  CHECK_THAT(canonical(0, 1).real(), WithinAbs(0.0, 1e-15));
  CHECK_THAT(canonical(0, 1).imag(), WithinAbs(-0.67594062506209973, 1e-8));
  CHECK(canonical(1, 1) == std::conj(canonical(0, 0)));
}

TEST_CASE("Ising phases on small states", "[floquet]") {
  CHECK_THAT(ising_phase(BasisState::from_code(0, 4, 2), 0.7), WithinAbs(2.8, 1e-14));
  CHECK_THAT(ising_phase(BasisState::from_code(5, 4, 2), 0.7), WithinAbs(-2.8, 1e-14));
  CHECK_THAT(ising_phase(BasisState::from_code(3, 4, 2), 0.7), WithinAbs(0.0, 1e-14));
  CHECK_THROWS_AS(ising_phase(BasisState::from_code(5, 3, 3), 0.7), ArgumentError);

  // Translation and reflection invariance of the bond sum.
  for (u64 c = 0; c < 256; ++c) {
    const double p = ising_phase_code(c, 8, 0.7);
    CHECK_THAT(ising_phase_code(translate_code(c, 8, 2), 8, 0.7), WithinAbs(p, 1e-14));
    CHECK_THAT(ising_phase_code(reverse_code(c, 8, 2), 8, 0.7), WithinAbs(p, 1e-14));
  }
}

TEST_CASE("kick sweep equals the Kronecker-product kick", "[floquet]") {
  const Eigen::Matrix2cd u = single_kick_matrix({0.9, 0.0, 0.9});

  Eigen::VectorXcd psi1(2);
  psi1 << std::complex<double>(0.3, -0.1), std::complex<double>(0.7, 0.2);
  Eigen::VectorXcd expect1 = u * psi1;
  Eigen::VectorXcd got1 = psi1;
  apply_kick_sweep(got1, u, 1);
  CHECK((got1 - expect1).cwiseAbs().maxCoeff() < 1e-15);

  Eigen::MatrixXcd uuu = kron(kron(u, u), u);
  Eigen::VectorXcd psi3(8);
  for (Eigen::Index i = 0; i < 8; ++i)
    psi3[i] = std::complex<double>(std::cos(0.7 * static_cast<double>(i) + 0.1),
                                   std::sin(1.3 * static_cast<double>(i)));
  Eigen::VectorXcd expect3 = uuu * psi3;
  Eigen::VectorXcd got3 = psi3;
  apply_kick_sweep(got3, u, 3);
  CHECK((got3 - expect3).cwiseAbs().maxCoeff() < 1e-13);

  Eigen::VectorXcd psi8 = Eigen::VectorXcd::Random(256);
  const double before = psi8.norm();
  apply_kick_sweep(psi8, u, 8);
  CHECK_THAT(psi8.norm(), WithinAbs(before, 1e-12));

  Eigen::VectorXcd wrong(7);
  CHECK_THROWS_AS(apply_kick_sweep(wrong, u, 3), ArgumentError);
}

TEST_CASE("full Floquet matrix equals the Kronecker construction", "[floquet]") {
  ModelParams p = ModelParams::canonical(2);
  const Eigen::Matrix2cd u = single_kick_matrix({0.9, 0.0, 0.9});
  Eigen::MatrixXcd kick2 = kron(u, u);
  Eigen::VectorXcd ising(4);
  const std::complex<double> im(0.0, 1.0);
  ising[0] = std::exp(-im * (0.7 * 2.0));
  ising[1] = std::exp(im * (0.7 * 2.0));
  ising[2] = std::exp(im * (0.7 * 2.0));
  ising[3] = std::exp(-im * (0.7 * 2.0));
  const Eigen::MatrixXcd expect = ising.asDiagonal() * kick2;
  const Eigen::MatrixXcd got = build_full_floquet(p, false);
  CHECK((got - expect).cwiseAbs().maxCoeff() < 1e-14);

  const Eigen::Matrix2cd h = single_kick_matrix({0.45, 0.0, 0.45});
  Eigen::MatrixXcd half2 = kron(h, h);
  const Eigen::MatrixXcd expect_sym = half2 * ising.asDiagonal() * half2;
  const Eigen::MatrixXcd got_sym = build_full_floquet(p, true);
  CHECK((got_sym - expect_sym).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("full Floquet trace at L = 6 matches the frozen value", "[floquet]") {
  const ModelParams p = ModelParams::canonical(6);
  const std::complex<double> frozen(-0.3686585696027169, 0.36745629568930016);
  CHECK_THAT(std::abs(build_full_floquet(p, false).trace() - frozen), WithinAbs(0.0, 1e-12));
  CHECK_THAT(std::abs(build_full_floquet(p, true).trace() - frozen), WithinAbs(0.0, 1e-12));
}

TEST_CASE("sector bases are orthonormal and K-invariant", "[basis]") {
  for (int L = 4; L <= 9; ++L) {
    const auto orbits = enumerate_orbit_representatives(L, 2);
    for (int k = 0; k < L; ++k) {
      const SectorBasis basis = build_sector_basis(L, k, orbits);
      REQUIRE(basis.dim() == sector_dimension(L, 2, k));

      for (const auto& v : basis.vectors) {
        // Support is one orbit or one reflection-paired orbit pair.
        std::set<u64> orbit_reps;
        for (u64 c : v.codes) orbit_reps.insert(orbit_representative(c, L, 2));
        REQUIRE((orbit_reps.size() == 1 || orbit_reps.size() == 2));
        if (orbit_reps.size() == 2) {
          const u64 a = *orbit_reps.begin();
          const u64 b = *std::next(orbit_reps.begin());
          CHECK(orbit_representative(reverse_code(a, L, 2), L, 2) == b);
        }

        // K-invariance as an exact amplitude relation.
        for (std::size_t i = 0; i < v.codes.size(); ++i) {
          const u64 rc = reverse_code(v.codes[i], L, 2);
          const auto it = std::lower_bound(v.codes.begin(), v.codes.end(), rc);
          REQUIRE(it != v.codes.end());
          REQUIRE(*it == rc);
          const std::complex<double> partner = v.amps[static_cast<std::size_t>(it - v.codes.begin())];
          CHECK_THAT(std::abs(v.amps[i] - std::conj(partner)), WithinAbs(0.0, 1e-14));
        }
      }

      // Gram matrix via dense scatter.
      Eigen::MatrixXcd b(Eigen::Index{1} << L, static_cast<Eigen::Index>(basis.dim()));
      for (std::size_t j = 0; j < basis.dim(); ++j)
        b.col(static_cast<Eigen::Index>(j)) = scatter(basis.vectors[j], L);
      const Eigen::MatrixXcd gram = b.adjoint() * b;
      CHECK((gram - Eigen::MatrixXcd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() <
            1e-12);
    }
  }
}

TEST_CASE("sector Floquet operators are unitary, symmetric, and block diagonal", "[floquet]") {
  const int L = 6;
  const ModelParams p = ModelParams::canonical(L);
  const auto orbits = enumerate_orbit_representatives(L, 2);
  const Eigen::MatrixXcd full_plain = build_full_floquet(p, false);
  const Eigen::MatrixXcd full_sym = build_full_floquet(p, true);

  std::vector<SectorBasis> bases;
  for (int k = 0; k < L; ++k) bases.push_back(build_sector_basis(L, k, orbits));

  std::complex<double> trace_sum_plain(0.0, 0.0), trace_sum_sym(0.0, 0.0);
  for (int k = 0; k < L; ++k) {
    const SectorOperator plain = sector_floquet(p, bases[static_cast<std::size_t>(k)], false);
    const SectorOperator sym = sector_floquet(p, bases[static_cast<std::size_t>(k)], true);
    trace_sum_plain += plain.matrix.trace();
    trace_sum_sym += sym.matrix.trace();
    CHECK(unitarity_defect(plain.matrix) < 1e-12);
    CHECK(symmetry_defect(sym.matrix) < 1e-12);

    // The full operator maps each sector onto itself: images of sector-k
    // vectors have no overlap with any other sector.
    for (std::size_t j = 0; j < bases[static_cast<std::size_t>(k)].dim(); ++j) {
      const Eigen::VectorXcd image =
          full_sym * scatter(bases[static_cast<std::size_t>(k)].vectors[j], L);
      for (int kp = 0; kp < L; ++kp) {
        if (kp == k) continue;
        for (const auto& w : bases[static_cast<std::size_t>(kp)].vectors) {
          const Eigen::VectorXcd wd = scatter(w, L);
          CHECK(std::abs(wd.dot(image)) < 1e-11);
        }
      }
    }
  }
  CHECK_THAT(std::abs(trace_sum_plain - full_plain.trace()), WithinAbs(0.0, 1e-11));
  CHECK_THAT(std::abs(trace_sum_sym - full_sym.trace()), WithinAbs(0.0, 1e-11));
}

TEST_CASE("sector Floquet at larger sizes keeps its invariants", "[floquet]") {
  const int L = 10;
  const ModelParams p = ModelParams::canonical(L);
  const auto orbits = enumerate_orbit_representatives(L, 2);
  for (int k : {0, 1, 5}) {
    const SectorBasis basis = build_sector_basis(L, k, orbits);
    const SectorOperator op = sector_floquet(p, basis, true);
    CHECK(unitarity_defect(op.matrix) < 1e-12);
    CHECK(symmetry_defect(op.matrix) < 1e-12);
  }
}

TEST_CASE("trivial parameters give trivial sector operators", "[floquet]") {
  ModelParams p;
  p.sites = 8;
  p.coupling = 0.0;
  p.field = {0.0, 0.0, 0.0};
  const SectorBasis basis = build_sector_basis(8, 1);
  const SectorOperator op = sector_floquet(p, basis, true);
  CHECK(op.matrix.isIdentity(1e-14));

  // A pure Ising evolution is diagonal in any translation basis, with the
  // orbit-constant bond phase on the diagonal.
  ModelParams ising_only;
  ising_only.sites = 8;
  ising_only.coupling = 0.7;
  ising_only.field = {0.0, 0.0, 0.0};
  const SectorOperator diag_op = sector_floquet(ising_only, basis, false);
  for (Eigen::Index i = 0; i < diag_op.dim(); ++i) {
    for (Eigen::Index j = 0; j < diag_op.dim(); ++j) {
      if (i == j) continue;
      CHECK(std::abs(diag_op.matrix(i, j)) < 1e-13);
    }
    const u64 code = basis.vectors[static_cast<std::size_t>(i)].codes.front();
    const std::complex<double> expect =
        std::polar(1.0, -ising_phase_code(code, 8, 0.7));
    CHECK_THAT(std::abs(diag_op.matrix(i, i) - expect), WithinAbs(0.0, 1e-13));
  }
}

TEST_CASE("a transverse y field is rotated into the x-z plane", "[floquet]") {
  ModelParams p = ModelParams::canonical(6);
  p.field = {0.9, 0.0, 0.9};
  ModelParams q = ModelParams::canonical(6);
  q.field = {0.0, 0.9, 0.9};

  const EffectiveField ep = effective_field(p);
  CHECK_FALSE(ep.rotated);
  const EffectiveField eq = effective_field(q);
  CHECK(eq.rotated);
  CHECK_THAT(eq.value[0], WithinAbs(0.9, 1e-15));
  CHECK_THAT(eq.value[1], WithinAbs(0.0, 1e-15));

  const SectorBasis basis = build_sector_basis(6, 1);
  const SectorOperator op_p = sector_floquet(p, basis, true);
  const SectorOperator op_q = sector_floquet(q, basis, true);
  CHECK_FALSE(op_p.field_rotated);
  CHECK(op_q.field_rotated);
  // Same rotated field, same operator.
  CHECK((op_p.matrix - op_q.matrix).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("sector Floquet error contracts", "[floquet]") {
  const SectorBasis basis = build_sector_basis(6, 1);
  ModelParams wrong = ModelParams::canonical(8);
  CHECK_THROWS_AS(sector_floquet(wrong, basis, true), ArgumentError);

  const ModelParams p = ModelParams::canonical(6);
  CHECK_THROWS_AS(sector_floquet(p, basis, true, /*tol=*/1e-18), NumericalError);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "scarlab/propagator.hpp"

using namespace scarlab;

namespace {

SymplecticMatrix cat1() {
  IntMat a(2, 2);
  a << 2, 1, 3, 2;
  return {a, 1};
}

SymplecticMatrix shear1() {
  IntMat a(2, 2);
  a << 1, 1, 0, 1;
  return {a, 1};
}

SymplecticMatrix odd_obstructed() {
  IntMat a(2, 2);
  a << 2, 1, 1, 1;
  return {a, 1};
}

// diag(P, P^{-T}) with P = [[2,1],[1,1]]
SymplecticMatrix lagrangian_block() {
  IntMat a = IntMat::Zero(4, 4);
  a(0, 0) = 2; a(0, 1) = 1;
  a(1, 0) = 1; a(1, 1) = 1;
  a(2, 2) = 1; a(2, 3) = -1;
  a(3, 2) = -1; a(3, 3) = 2;
  return {a, 2};
}

// two invariant-plane pairs carrying P and P^{-T}, plus an independent cat pair
SymplecticMatrix three_block() {
  IntMat a = IntMat::Zero(6, 6);
  a(0, 0) = 2; a(0, 1) = 1;
  a(1, 0) = 1; a(1, 1) = 1;
  a(3, 3) = 1; a(3, 4) = -1;
  a(4, 3) = -1; a(4, 4) = 2;
  a(2, 2) = 2; a(2, 5) = 1;
  a(5, 2) = 3; a(5, 5) = 2;
  return {a, 3};
}

double phase_aligned_distance(const DenseMatrix& a, const DenseMatrix& b) {
  const cplx s = (b.adjoint() * a).trace();
  if (std::abs(s) < 1e-12) return (a - b).norm();
  return (a - (s / std::abs(s)) * b).norm();
}

double generator_residual_dense(const HilbertSpace& s, const SymplecticMatrix& a,
                                const DenseMatrix& u, const IntRowVec& n) {
  const IntRowVec na = n * a.a;
  return operator_norm(dense_elementary(s, n).matrix * u - u * dense_elementary(s, na).matrix);
}

}  // namespace

TEST_CASE("parity character gives the intertwiner count") {
  for (i64 n = 1; n <= 12; ++n) CHECK(intertwiner_dimension(cat1(), n) == 1);
  for (i64 n = 1; n <= 12; ++n) {
    CHECK(intertwiner_dimension(odd_obstructed(), n) == (n % 2 == 0 ? 1 : 0));
    CHECK(intertwiner_dimension(shear1(), n) == (n % 2 == 0 ? 1 : 0));
  }
  IntMat eye2 = IntMat::Identity(2, 2);
  IntMat eye4 = IntMat::Identity(4, 4);
  for (i64 n : {2, 3, 7}) {
    CHECK(intertwiner_dimension({eye2, 1}, n) == 1);
    CHECK(intertwiner_dimension({eye4, 2}, n) == 1);
  }
  for (i64 n = 1; n <= 8; ++n) {
    CHECK(intertwiner_dimension(lagrangian_block(), n) == 1);
    CHECK(intertwiner_dimension(three_block(), n) == 1);
  }
}

TEST_CASE("null-space measurement agrees with the character formula") {
  for (i64 n : {3, 4, 5, 8}) {
    const auto s = make_space(n, 1);
    for (const auto& a : {cat1(), shear1(), odd_obstructed()}) {
      const auto ns = intertwiner_null_space(a, s);
      CHECK(ns.dimension == intertwiner_dimension(a, n));
      if (ns.dimension == 1) {
        CHECK((ns.u.adjoint() * ns.u - DenseMatrix::Identity(s.dim, s.dim)).norm() < 1e-10);
        for (int k = 0; k < 2; ++k) {
          IntRowVec g = IntRowVec::Zero(2);
          g(k) = 1;
          CHECK(generator_residual_dense(s, a, ns.u, g) < 1e-8);
        }
      }
    }
  }
  const auto s2 = make_space(3, 2);
  CHECK(intertwiner_null_space(lagrangian_block(), s2).dimension == 1);
}

TEST_CASE("identity map quantizes to the identity matrix") {
  for (i64 n : {2, 7}) {
    for (int d : {1, 2}) {
      const auto s = make_space(n, d);
      const IntMat eye = IntMat::Identity(2 * d, 2 * d);
      const auto u = quantize_linear({eye, d}, s);
      CHECK((u.matrix - DenseMatrix::Identity(s.dim, s.dim)).cwiseAbs().maxCoeff() <= 1e-15);
    }
  }
}

TEST_CASE("cat map construction validates and matches the null-space oracle") {
  for (i64 n = 3; n <= 8; ++n) {
    const auto s = make_space(n, 1);
    const auto lin = build_linear_propagator(cat1(), s);
    REQUIRE(lin.factors.size() == 1);
    CHECK_FALSE(lin.factors[0].is_permutation);
    for (double r : lin.generator_residuals) CHECK(r <= 1e-8);
    const auto u = materialize(lin);
    CHECK((u.matrix.adjoint() * u.matrix - DenseMatrix::Identity(s.dim, s.dim)).norm() < 1e-10);
    for (i64 a = -3; a <= 3; ++a)
      for (i64 b = -3; b <= 3; ++b) {
        IntRowVec f(2);
        f << a, b;
        CHECK(generator_residual_dense(s, cat1(), u.matrix, f) <= 1e-7);
      }
    const auto ns = intertwiner_null_space(cat1(), s);
    REQUIRE(ns.dimension == 1);
    CHECK(phase_aligned_distance(u.matrix, ns.u) < 1e-6);
  }
}

TEST_CASE("invariant-plane pairs quantize as exact position maps") {
  for (i64 n : {3, 4, 5}) {
    const auto s = make_space(n, 2);
    const auto lin = build_linear_propagator(lagrangian_block(), s);
    REQUIRE(lin.factors.size() == 1);
    CHECK(lin.factors[0].is_permutation);
    for (double r : lin.generator_residuals) CHECK(r == 0.0);
    const auto u = materialize(lin);
    CHECK((u.matrix.adjoint() * u.matrix - DenseMatrix::Identity(s.dim, s.dim)).norm() < 1e-12);
  }
  // the structured and generic paths build the same unitary up to global phase
  for (i64 n : {3, 4}) {
    const auto s = make_space(n, 2);
    const auto u = quantize_linear(lagrangian_block(), s);
    const auto ns = intertwiner_null_space(lagrangian_block(), s);
    REQUIRE(ns.dimension == 1);
    CHECK(phase_aligned_distance(u.matrix, ns.u) < 1e-6);
  }
}

TEST_CASE("coupling blocks factor independently") {
  const auto s = make_space(4, 3);
  const auto lin = build_linear_propagator(three_block(), s);
  REQUIRE(lin.factors.size() == 2);
  CHECK(lin.factors[0].axes == std::vector<int>{0, 1});
  CHECK(lin.factors[0].is_permutation);
  CHECK(lin.factors[1].axes == std::vector<int>{2});
  CHECK_FALSE(lin.factors[1].is_permutation);
  REQUIRE(lin.generator_residuals.size() == 6);
  for (double r : lin.generator_residuals) CHECK(r <= 1e-8);
  const auto u = materialize(lin);
  CHECK((u.matrix.adjoint() * u.matrix - DenseMatrix::Identity(s.dim, s.dim)).norm() < 1e-10);
  std::mt19937 rng(11);
  std::uniform_int_distribution<i64> pick(-3, 3);
  for (int trial = 0; trial < 40; ++trial) {
    IntRowVec f(6);
    for (int i = 0; i < 6; ++i) f(i) = pick(rng);
    CHECK(generator_residual_dense(s, three_block(), u.matrix, f) <= 1e-7);
  }
}

TEST_CASE("parity obstruction is reported") {
  CHECK_THROWS_AS(build_linear_propagator(odd_obstructed(), make_space(5, 1)), ObstructionError);
  CHECK_THROWS_AS(build_linear_propagator(shear1(), make_space(3, 1)), ObstructionError);
  const auto lin = build_linear_propagator(odd_obstructed(), make_space(4, 1));
  for (double r : lin.generator_residuals) CHECK(r <= 1e-8);
  const auto lin2 = build_linear_propagator(shear1(), make_space(4, 1));
  for (double r : lin2.generator_residuals) CHECK(r <= 1e-8);
}

TEST_CASE("generic blocks above the cost cap are refused") {
  // mix position and momentum across a coupled pair so no position map exists
  IntMat rot = IntMat::Zero(4, 4);
  rot(0, 2) = 1;
  rot(1, 1) = 1;
  rot(2, 0) = -1;
  rot(3, 3) = 1;
  const IntMat mixed = lagrangian_block().a * rot;
  const SymplecticMatrix a{mixed, 2};
  validate_symplectic(a.a);
  const auto lin = build_linear_propagator(a, make_space(5, 2));
  REQUIRE(lin.factors.size() == 1);
  CHECK_FALSE(lin.factors[0].is_permutation);
  for (double r : lin.generator_residuals) CHECK(r <= 1e-8);
  CHECK_THROWS_AS(build_linear_propagator(a, make_space(17, 2)), CostCapError);
}

TEST_CASE("hamiltonian exponential basics") {
  const auto s = make_space(5, 1);
  const auto id = quantize_hamiltonian(TrigPolynomial(2), s);
  CHECK((id.matrix - DenseMatrix::Identity(s.dim, s.dim)).norm() < 1e-12);

  const auto c = quantize_hamiltonian(TrigPolynomial::constant(2, 0.3), s);
  const cplx expected = e2pi(-5.0 * 0.3);
  CHECK((c.matrix - expected * DenseMatrix::Identity(s.dim, s.dim)).norm() < 1e-12);

  const auto s8 = make_space(8, 1);
  IntRowVec q(2);
  q << 0, 1;
  const auto u = quantize_hamiltonian(TrigPolynomial::cosine(q, 0.05), s8);
  CHECK((u.matrix.adjoint() * u.matrix - DenseMatrix::Identity(s8.dim, s8.dim)).norm() < 1e-10);

  TrigPolynomial bad(2);
  IntRowVec n(2);
  n << 1, 0;
  bad.add_term(n, cplx(0.0, 1.0));
  CHECK_THROWS_AS(quantize_hamiltonian(bad, s), ValidationError);
}

TEST_CASE("flow generated inside the dual lattice commutes with lattice operators") {
  const auto s = make_space(6, 2);
  IntRowVec h(4);
  h << 1, 0, 0, 0;
  const auto u = quantize_hamiltonian(TrigPolynomial::cosine(h, 0.05), s);
  for (auto [a, b] : {std::pair<i64, i64>{1, 0}, {2, 3}}) {
    IntRowVec n(4);
    n << a, b, 0, 0;
    const DenseMatrix op = dense_elementary(s, n).matrix;
    CHECK(operator_norm(u.matrix * op - op * u.matrix) < 1e-10);
  }
}

TEST_CASE("perturbed bundle assembles and validates") {
  const auto s = make_space(6, 1);
  IntRowVec q(2);
  q << 0, 1;
  const TrigPolynomial h = TrigPolynomial::cosine(q, 0.05);

  const auto free = quantize_perturbed(cat1(), TrigPolynomial(2), s);
  CHECK((free.u_total.matrix - free.u_linear.matrix).norm() < 1e-12);

  IntMat eye = IntMat::Identity(2, 2);
  const auto kick = quantize_perturbed({eye, 1}, h, s);
  CHECK((kick.u_total.matrix - kick.u_hamiltonian.matrix).norm() < 1e-12);

  const auto full = quantize_perturbed(cat1(), h, s);
  CHECK(full.validation.unitary_defect_linear < 1e-10);
  CHECK(full.validation.unitary_defect_hamiltonian < 1e-10);
  CHECK(full.validation.unitary_defect_total < 1e-10);
  for (double r : full.validation.generator_residuals) CHECK(r <= 1e-8);
}

TEST_CASE("unperturbed map satisfies the exact relabeling identity") {
  for (i64 n : {4, 8}) {
    const auto s = make_space(n, 1);
    const auto b = quantize_perturbed(cat1(), TrigPolynomial(2), s);
    IntRowVec fq(2), fp(2), fe(2);
    fq << 0, 1;
    fp << 1, 0;
    fe << 1, 1;
    TrigPolynomial f = TrigPolynomial::cosine(fq, 1.0) + TrigPolynomial::cosine(fp, 0.5);
    CHECK(egorov_residual(b, f, f.relabeled(cat1().a)) < 1e-10);
    const TrigPolynomial g = TrigPolynomial::elementary(fe);
    CHECK(egorov_residual(b, g, g.relabeled(cat1().a)) < 1e-10);
  }
  const auto s2 = make_space(4, 2);
  const auto b2 = quantize_perturbed(lagrangian_block(), TrigPolynomial(4), s2);
  IntRowVec q1(4);
  q1 << 0, 0, 1, 0;
  const TrigPolynomial f2 = TrigPolynomial::cosine(q1, 1.0);
  CHECK(egorov_residual(b2, f2, f2.relabeled(lagrangian_block().a)) < 1e-10);
}

TEST_CASE("propagator cache shares instances per matrix and size") {
  const auto s = make_space(6, 1);
  const auto p1 = cached_linear_propagator(cat1(), s);
  const auto p2 = cached_linear_propagator(cat1(), s);
  CHECK(p1.get() == p2.get());
  const auto p3 = cached_linear_propagator(cat1(), make_space(7, 1));
  CHECK(p1.get() != p3.get());
}

TEST_CASE("construction is deterministic") {
  const auto s = make_space(5, 1);
  const auto u1 = quantize_linear(cat1(), s);
  const auto u2 = quantize_linear(cat1(), s);
  CHECK((u1.matrix - u2.matrix).cwiseAbs().maxCoeff() == 0.0);
}

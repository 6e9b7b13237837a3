#pragma once

#include <vector>

#include "scarlab/integer_linalg.hpp"

namespace scarlab {

// J = [[0, I], [-I, 0]] in (p, q) coordinate order
IntMat j_matrix(int d);

// m J n^T for row vectors of length 2d
i64 symplectic_form(const IntRowVec& m, const IntRowVec& n, int d);

struct SymplecticMatrix {
  IntMat a;
  int d = 0;
};

// checks A J A^T = J, A^T J A = J, det A = +-1, all in exact arithmetic
SymplecticMatrix validate_symplectic(const IntMat& a);

struct HyperbolicityReport {
  bool hyperbolic = false;
  std::vector<double> moduli;  // sorted ascending
};

HyperbolicityReport hyperbolicity_report(const IntMat& a, double tol = 1e-9);

inline HyperbolicityReport is_hyperbolic(const SymplecticMatrix& a, double tol = 1e-9) {
  return hyperbolicity_report(a.a, tol);
}

// basis of (rational row span) intersect Z^n; requires full row rank
IntMat saturate_lattice(const IntMat& rows);

struct IsotropicLattice {
  IntMat basis;   // d0 x 2d, saturated
  IntMat action;  // T with basis * A = T * basis, |det T| = 1
  int d = 0;
  int d0 = 0;
};

// validates saturation, isotropy and A-invariance; returns the certificate T
IsotropicLattice check_invariant_isotropic(const SymplecticMatrix& a, const IntMat& basis);

// dual pairs: omega(n_i, m_j) = delta_ij, both families isotropic.
// n_basis spans the same lattice as the input (the induction may rebase it).
struct DualSystem {
  IntMat n_basis;
  IntMat m_basis;
};

DualSystem symplectic_dual_basis(const IsotropicLattice& lat);

// saturated basis of { k : omega(n, k) = 0 for all n in the lattice }
IntMat lambda_perp(const IsotropicLattice& lat);

// Omega = W cap Z^{2d} with W = { x : n . x = 0 for all n }, and the matrix of
// A's action on it: A * omega_basis^T = omega_basis^T * B
struct QuotientSystem {
  IntMat omega_basis;
  IntMat b_matrix;
  HyperbolicityReport hyp;
};

QuotientSystem quotient_action(const SymplecticMatrix& a, const IsotropicLattice& lat);

struct FixedPoint {
  IntVec numerator;   // length 2d, entries in [0, denominator)
  i64 denominator = 1;
};

struct FixedPointSet {
  std::vector<FixedPoint> points;
  i64 r = 0;  // det(A - I); |r| equals the number of points
};

FixedPointSet fixed_points(const SymplecticMatrix& a);

// rational orthogonal projections P_V = pv_num / den onto span(basis) and
// P_U = I - P_V, stored over the reduced common denominator
struct RepresentativeSystem {
  IntMat pv_num;
  IntMat pu_num;
  i64 den = 1;
  double c_sigma = 0.0;  // |omega(n, m)| <= c_sigma * |k|^2 for every split
};

RepresentativeSystem build_representative_system(const IsotropicLattice& lat);

struct SplitFrequency {
  IntRowVec n;
  IntRowVec m;  // lies in the lattice
};

// deterministic split k = n + m with m = P_V(k - r), r = k mod den
SplitFrequency representative_decompose(const IntRowVec& k, const IsotropicLattice& lat,
                                        const RepresentativeSystem& rs);

}  // namespace scarlab

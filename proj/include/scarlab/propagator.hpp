#pragma once

#include <memory>
#include <variant>
#include <vector>

#include "scarlab/hilbert.hpp"
#include "scarlab/symplectic.hpp"
#include "scarlab/trigpoly.hpp"

namespace scarlab {

// Unitaries U with U^* Op(e_n) U = Op(e_{nA}) exist only when a parity character of A
// vanishes correctly.  The returned count is the dimension of the space of intertwiners
// (0 or 1; anything else is reported as an inconsistency).
int intertwiner_dimension(const SymplecticMatrix& a, i64 big_n);

// Direct measurement of the same dimension: stack the linear conditions
// Op(e_g) U - U Op(e_{gA}) = 0 over the 2d generators g and count the singular
// values below rank_tol * sigma_max.  Expensive; intended as an oracle on small spaces.
struct IntertwinerNullSpace {
  int dimension = 0;
  DenseMatrix u;  // unitarized representative when dimension >= 1, else empty
};
IntertwinerNullSpace intertwiner_null_space(const SymplecticMatrix& a, const HilbertSpace& s,
                                            double rank_tol = 1e-8);

// One tensor factor of a quantized symplectic map.  Factors act on disjoint sets of
// coordinate axes; a factor is either a position permutation Q -> P^T Q mod N
// (exact for block matrices diag(P, P^{-T})) or a dense unitary on its sub-space.
struct LinearFactor {
  std::vector<int> axes;        // pair indices into 0..d-1, ascending
  bool is_permutation = false;
  IntMat p_transpose;           // permutation case: P^T over the integers
  DenseMatrix dense;            // generic case
};

struct LinearPropagator {
  HilbertSpace space;
  cplx phase{1.0, 0.0};
  std::vector<LinearFactor> factors;
  std::vector<double> generator_residuals;  // one per standard frequency generator, length 2d
};

// Builds the quantized map for A, choosing per coupling block: identity, position
// permutation, or Schur-averaged generic construction.  Throws ObstructionError when no
// intertwiner exists, CostCapError when a generic block would be too large, and
// ConsistencyError when validation fails.
LinearPropagator build_linear_propagator(const SymplecticMatrix& a, const HilbertSpace& s,
                                         double tol = 1e-8);

StateVec apply_linear(const LinearPropagator& u, const StateVec& psi);
StateVec apply_linear_adjoint(const LinearPropagator& u, const StateVec& psi);
DenseOperator materialize(const LinearPropagator& u);

// Convenience wrapper: build and materialize in one step.
DenseOperator quantize_linear(const SymplecticMatrix& a, const HilbertSpace& s,
                              double tol = 1e-8);

// exp(-2 pi i N Op(h)) for a real trigonometric polynomial h, via the spectral
// decomposition of the Hermitian matrix Op(h).
DenseOperator quantize_hamiltonian(const TrigPolynomial& h, const HilbertSpace& s);

struct PropagatorValidation {
  std::vector<double> generator_residuals;
  double unitary_defect_linear = 0.0;
  double unitary_defect_hamiltonian = 0.0;
  double unitary_defect_total = 0.0;
};

// Quantization of the perturbed map A o flow(h): U = U_A * exp(-2 pi i N Op(h)).
struct PropagatorBundle {
  HilbertSpace space;
  DenseOperator u_linear;
  DenseOperator u_hamiltonian;
  DenseOperator u_total;
  PropagatorValidation validation;
};
PropagatorBundle quantize_perturbed(const SymplecticMatrix& a, const TrigPolynomial& h,
                                    const HilbertSpace& s, double tol = 1e-8);

// || U^* Op(f) U - Op(pushforward) ||  for the bundle's total propagator.
double egorov_residual(const PropagatorBundle& b, const TrigPolynomial& f,
                       const TrigPolynomial& pushforward);

// Process-wide cache of structural propagators, keyed by the matrix entries and N.
// Concurrent readers share the map; construction happens outside the lock.
std::shared_ptr<const LinearPropagator> cached_linear_propagator(const SymplecticMatrix& a,
                                                                 const HilbertSpace& s,
                                                                 double tol = 1e-8);

}  // namespace scarlab

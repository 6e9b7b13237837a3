#pragma once

#include <Eigen/Dense>

#include "scarlab/symplectic.hpp"
#include "scarlab/trigpoly.hpp"

namespace scarlab {

// H_N = L^2((Z/NZ)^d) with inner product <phi,psi> = N^{-d} sum phi(Q) conj(psi(Q))
struct HilbertSpace {
  i64 n = 1;
  int d = 1;
  i64 dim = 1;  // n^d
};

HilbertSpace make_space(i64 n, int d);

using StateVec = Eigen::VectorXcd;
using DenseMatrix = Eigen::MatrixXcd;

enum class OperatorKind { elementary, observable, propagator, derived };

struct DenseOperator {
  DenseMatrix matrix;
  OperatorKind kind = OperatorKind::derived;
};

// states are indexed row-major over Q in {0..N-1}^d with the LAST coordinate fastest
i64 encode_index(const HilbertSpace& s, const std::vector<i64>& digits);
std::vector<i64> decode_index(const HilbertSpace& s, i64 flat);

cplx state_inner(const HilbertSpace& s, const StateVec& phi, const StateVec& psi);
double state_norm(const HilbertSpace& s, const StateVec& psi);

// (Op_N(e_n) psi)(Q) = e(n1.n2 / 2N) e(n2.Q / N) psi(Q + n1 mod N), matrix-free
StateVec apply_elementary(const HilbertSpace& s, const IntRowVec& n, const StateVec& psi);

// the same operator as a gather table: (Op psi)(Q) = phase[Q] * psi(source[Q])
struct ElementaryAction {
  std::vector<i64> source;
  std::vector<cplx> phase;
};
ElementaryAction elementary_action(const HilbertSpace& s, const IntRowVec& n);

DenseOperator dense_elementary(const HilbertSpace& s, const IntRowVec& n);

// phase with Op(e_m) Op(e_n) = e(omega(m,n)/2N) Op(e_{n+m}); the integer
// symplectic form is reduced mod 4N before the half-integer division
cplx compose_phase(const IntRowVec& m, const IntRowVec& n, i64 big_n);

// Op_N(f) = sum fhat(n) Op_N(e_n); Hermitian iff f is real (verified)
DenseOperator quantize_observable(const HilbertSpace& s, const TrigPolynomial& f);

// matrix-free Op_N(f) psi
StateVec apply_observable(const HilbertSpace& s, const TrigPolynomial& f, const StateVec& psi);

// Op_N(f) applied to every column; parallelized per column through the kernel layer
DenseMatrix apply_observable_columns(const HilbertSpace& s, const TrigPolynomial& f,
                                     const DenseMatrix& cols);

// <Op_N(e_n) psi, psi> for a unit state
cplx wigner_coefficient(const HilbertSpace& s, const IntRowVec& n, const StateVec& psi);

// largest singular value: exact SVD up to dimension 4096, then deterministic
// power iteration (seed 0, 500 iterations, tolerance 1e-12)
double operator_norm(const DenseMatrix& m);

// | Op(f) Op(g) - Op(fg) | with fg formed by exact coefficient convolution
double product_defect(const HilbertSpace& s, const TrigPolynomial& f, const TrigPolynomial& g);

}  // namespace scarlab

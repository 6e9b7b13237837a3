#pragma once

#include <string>
#include <vector>

#include "scarlab/classical.hpp"
#include "scarlab/propagator.hpp"

namespace scarlab {

struct Admissibility {
  bool admissible = false;
  std::string diagnosis;  // names the failing generator when inadmissible
};

// e_n(xi)^N must match the scalar that Op_N(e_n)^N is forced to be, for every
// lattice generator n. Exact rational arithmetic throughout.
Admissibility character_admissible(const HilbertSpace& s, const SubmanifoldSpec& spec);

// joint eigenspace { psi : Op_N(e_n) psi = e_n(xi) psi for all n in the lattice }
struct ScarSubspace {
  HilbertSpace space;
  SubmanifoldSpec spec;
  DenseMatrix basis;  // orthonormal columns under the scaled inner product
  i64 dim = 0;
};

// projector averaging over each generator's cyclic group, then modified
// Gram-Schmidt at rank tolerance 1e-8; dimension must come out N^(d-d0)
ScarSubspace build_scar_subspace(const HilbertSpace& s, const SubmanifoldSpec& spec);

// |(I - P) U P| with P the orthogonal projector onto the subspace
double check_invariance(const ScarSubspace& sub, const DenseMatrix& u);

// When every lattice generator is a pure index shift (zero modulation part),
// the subspace has an explicit basis indexed by cosets of the shifted index
// grid, and restrictions of elementary operators have one nonzero per column.
// This is the path that scales to large N.
struct CosetFrame {
  HilbertSpace space;
  SubmanifoldSpec spec;
  IntMat v;         // rows 0..d0-1 generate the shift lattice; unimodular d x d
  IntMat w;         // V^{-T}, the index change Q -> R
  i64 dim = 0;      // N^(d-d0)
  double norm = 1;  // normalization of one basis column
  std::vector<i64> char_num;   // generator i has character e(char_num[i]/char_den)
  i64 char_den = 1;
  std::vector<i64> coset_of;   // flat Q -> flat coset label
  std::vector<cplx> phase_of;  // flat Q -> character phase at that point
};

bool shift_frame_available(const SubmanifoldSpec& spec);
CosetFrame build_coset_frame(const HilbertSpace& s, const SubmanifoldSpec& spec);

StateVec frame_column(const CosetFrame& f, i64 c);
DenseMatrix materialize_frame(const CosetFrame& f);

// restriction of Op_N(e_n) to the frame: either zero or a phase permutation
struct SparseRestricted {
  bool zero = true;
  std::vector<i64> row;
  std::vector<cplx> val;
};

SparseRestricted restricted_elementary(const CosetFrame& f, const IntRowVec& n);
DenseMatrix restricted_observable(const CosetFrame& f, const TrigPolynomial& g);
DenseMatrix restricted_linear(const CosetFrame& f, const LinearPropagator& u);

struct RestrictedPropagator {
  DenseMatrix m;
  std::vector<double> eigenphases;  // ascending in [0, 2 pi)
  DenseMatrix eigenvectors;         // unit columns, deterministic phase
  double unitary_defect = 0.0;
};

// M = (restricted U_N(A)) * exp(-2 pi i N restricted Op(H)), exact when every
// Hamiltonian frequency commutes with the lattice (checked); never touches a
// full-space dense operator
RestrictedPropagator restricted_propagator(const CosetFrame& f, const SymplecticMatrix& a,
                                           const TrigPolynomial& h, double tol = 1e-8);

// M = B* U B for an explicit orthonormal basis; the invariance defect
// |U B - B M| must stay below tol
RestrictedPropagator restrict_full_propagator(const HilbertSpace& s, const DenseMatrix& basis,
                                              const DenseMatrix& u, double tol = 1e-8);

struct WignerRow {
  i64 state = 0;
  double eigenphase = 0.0;
  IntRowVec n;
  cplx value{0.0, 0.0};
};

std::vector<WignerRow> wigner_table(const CosetFrame& f, const RestrictedPropagator& rp,
                                    const std::vector<IntRowVec>& freqs);

enum class AverageKind { lattice, forced_zero, resonant };

// why the subspace-averaged Wigner value of e_n is pinned (or not) at this N
AverageKind classify_average(const SubmanifoldSpec& spec, i64 big_n, const IntRowVec& n);

// (1/dim) trace of Op_N(e_n) restricted to the subspace
cplx average_wigner(const CosetFrame& f, const IntRowVec& n);

// (1/dim) sum_i | <Op(g) psi_i, psi_i> - integral of g over the subtorus |^2
double quantum_variance(const CosetFrame& f, const RestrictedPropagator& rp,
                        const TrigPolynomial& g);

// pi * sum over terms |ghat(n+m)| |omega(n, m)| with n + m split by the
// representative system; max_i |<Op(g) psi_i, psi_i>| <= scar_constant / N
double scar_constant(const TrigPolynomial& g, const SubmanifoldSpec& spec);

struct ScarPoint {
  i64 big_n = 0;
  i64 dim = 0;
  double max_value = 0.0;
  double mean_value = 0.0;
  double bound = 0.0;  // scar_constant / N
};

struct ScarSweep {
  std::vector<ScarPoint> points;
  std::vector<i64> skipped;  // inadmissible N
  double slope = 0.0;        // least squares on (log N, log max)
  bool exact_vanishing = false;
  double c_f = 0.0;
};

// requires the sharp coefficients of g to vanish (g restricts to zero on the
// subtorus); sweeps the restricted eigenbasis over N
ScarSweep scarring_sweep(const SymplecticMatrix& a, const TrigPolynomial& h,
                         const SubmanifoldSpec& spec, const TrigPolynomial& g,
                         const std::vector<i64>& n_list, double tol = 1e-8);

struct DensityRow {
  i64 big_n = 0;
  i64 dim = 0;
  double fraction = 0.0;       // |S_N| / dim
  double chebyshev_sum = 0.0;  // sum of sigma_N(n) over the frequency ball
  i64 freq_count = 0;          // frequencies outside the lattice with |n| <= M
};

// S_N = states with |W(e_n)| <= sqrt(sigma_N(n)) for every n outside the
// lattice in the Euclidean ball of radius M; sigma_N(n) is the standard
// deviation of the Wigner values, so |J_N|/dim <= sum sigma_N(n) by Chebyshev
DensityRow density_one_report(const CosetFrame& f, const RestrictedPropagator& rp,
                              double cutoff_m);

}  // namespace scarlab

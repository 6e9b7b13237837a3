#pragma once

#include <map>
#include <vector>

#include "scarlab/symplectic.hpp"
#include "scarlab/trigpoly.hpp"

namespace scarlab {

// {f,g} = sum_j (df/dp_j dg/dq_j - df/dq_j dg/dp_j); on elementary waves
// {e_m, e_n} = -4 pi^2 omega(m,n) e_{m+n}
TrigPolynomial poisson_bracket(const TrigPolynomial& f, const TrigPolynomial& g);

struct IntegratorSettings {
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
  double initial_step = 1e-3;
};

// The perturbed dynamical system Phi = A o flow(h).  h is the effective Hamiltonian
// (already scaled by epsilon, which is kept for reporting).
struct ClassicalMap {
  SymplecticMatrix a;
  TrigPolynomial h;
  double epsilon = 0.0;
  IntegratorSettings integrator;
};

ClassicalMap make_classical_map(const SymplecticMatrix& a, const TrigPolynomial& h_base,
                                double epsilon);

// every frequency of h must pair to zero with the lattice (support inside Lambda-perp)
void validate_map_lattice(const ClassicalMap& map, const IsotropicLattice& lat);

using Point = Eigen::VectorXd;  // (p_1..p_d, q_1..q_d)

// q' = dH/dp, p' = -dH/dq, integrated for time t, wrapped into [0,1)
Point hamiltonian_flow(const ClassicalMap& map, const Point& x0, double t);

Point perturbed_map(const ClassicalMap& map, const Point& x);
Point perturbed_map_inverse(const ClassicalMap& map, const Point& x);

// The invariant subtorus X_xi and its frequency bookkeeping.
struct SubmanifoldSpec {
  IsotropicLattice lattice;
  FixedPoint xi;
  RepresentativeSystem sigma;
};

SubmanifoldSpec make_submanifold_spec(const IsotropicLattice& lat, const FixedPoint& xi);

// e_n(xi) for the rational point xi; exact in the phase exponent
cplx character_at_xi(const IntRowVec& n, const FixedPoint& xi);

// Fourier coefficients of f o Phi^t (integer t, negative allowed).  H = 0 bypasses the
// grid entirely and relabels n -> n A^t.  Otherwise samples on a uniform grid with
// grid_points per axis (power of two), transforms, and discards magnitudes below trunc.
// Frequencies above grid_points/4 per axis count as aliasing mass; more than 100*trunc
// of it is a resolution error.
TrigPolynomial pushforward_coefficients(const TrigPolynomial& f, const ClassicalMap& map,
                                        i64 t, i64 grid_points, double trunc);

// Fourier coefficients of f o flow(h)^s for real s (pure Hamiltonian flow, no A step)
TrigPolynomial flow_pushforward(const TrigPolynomial& f, const ClassicalMap& map, double s,
                                i64 grid_points, double trunc);

// (1/(T+1)) sum_{t=0..T} f o Phi^t, sampled along orbits in a single grid pass
TrigPolynomial time_average(const TrigPolynomial& f, const ClassicalMap& map, i64 t_max,
                            i64 grid_points, double trunc);

// integral of f over X_xi: sum over lattice frequencies of f-hat(m) e_m(xi)
cplx submanifold_average(const TrigPolynomial& f, const SubmanifoldSpec& spec);

// f-sharp(n) = sum_{m in Lambda} f-hat(n+m) e_m(xi), grouped by representative class
std::map<std::vector<i64>, cplx> sharp_coefficients(const TrigPolynomial& f,
                                                    const SubmanifoldSpec& spec);

double sharp_max_abs(const TrigPolynomial& f, const SubmanifoldSpec& spec);

// || f ||^2 over X_xi by Parseval on the representative classes
double restricted_l2_norm(const TrigPolynomial& f, const SubmanifoldSpec& spec);

// | orbit average - reference |; diagnostic only, nothing is asserted about ergodicity
double birkhoff_diagnostic(const ClassicalMap& map, const TrigPolynomial& f, const Point& x0,
                           i64 steps, cplx reference);

// Monte Carlo quadrature over X_xi with a fixed-seed generator.
struct McEstimate {
  cplx mean{0.0, 0.0};
  double std_error = 0.0;
};

McEstimate mc_submanifold_average(const TrigPolynomial& f, const SubmanifoldSpec& spec,
                                  i64 samples = 100000, unsigned seed = 0);
McEstimate mc_restricted_l2(const TrigPolynomial& f, const SubmanifoldSpec& spec,
                            i64 samples = 100000, unsigned seed = 0);
double mc_sup_abs(const TrigPolynomial& f, const SubmanifoldSpec& spec, i64 samples = 100000,
                  unsigned seed = 0);

// pointwise estimate of || (1/(T+1)) sum_t f o Phi^t ||^2 over X_xi; orbits are iterated
// per sample, so this stays feasible when the grid transform does not
McEstimate mc_time_average_l2(const TrigPolynomial& f, const ClassicalMap& map,
                              const SubmanifoldSpec& spec, i64 t_max, i64 samples = 2000,
                              unsigned seed = 0);

}  // namespace scarlab

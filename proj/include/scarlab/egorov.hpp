#pragma once

#include <vector>

#include "scarlab/classical.hpp"
#include "scarlab/hilbert.hpp"
#include "scarlab/trigpoly.hpp"

namespace scarlab {

// Certified bound for the smoothness weight c_f = sup |(-Delta)^(d+2) f|:
// bound = sum_n |fhat(n)| (4 pi^2 |n|^2)^(d+2), with d read off the frequency
// dimension of f.  sampled is a grid estimate of the true sup, for diagnostics
// only; bound >= sampled always.
struct SobolevBound {
  double bound = 0.0;
  double sampled = 0.0;
};

SobolevBound sobolev_constant(const TrigPolynomial& f);

// Squared regularized lattice sum (sum over n != 0 of (2 pi |n|)^(-(2d+1)))^2,
// evaluated by direct summation over an inf-norm box plus a certified tail
// bound.  Monotone decreasing in d.  Supported for d in {1, 2, 3}.
double lemma_constant(int d);

// Defect of the exact commutator against the transported bracket for a single
// pair of elementary observables f = e_m, g = e_n:
//   gap(f, g) = Op({g, f}) - [2 pi i N Op(g), Op(f)].
// Both sides are multiples of Op(e_{m+n}), so the norm has the closed form
//   predicted = |(2 pi)^2 w - 4 pi N sin(pi w / N)|,   w = omega(m, n),
// and measured must agree to rounding.
struct BracketGap {
  double predicted = 0.0;
  double measured = 0.0;
};

BracketGap bracket_commutator_gap_elementary(const IntRowVec& m, const IntRowVec& n,
                                             const HilbertSpace& s);

// Same defect for trigonometric polynomials, with the certified estimate
//   measured <= lemma_constant(d) * c_g * c_f / N^2 = bound.
struct PolyGap {
  double measured = 0.0;
  double bound = 0.0;
};

PolyGap bracket_commutator_gap_poly(const TrigPolynomial& f, const TrigPolynomial& g,
                                    const HilbertSpace& s);

// Norm of (U(dt) - I)/dt + 2 pi i N Op(g) where U(dt) = exp(-2 pi i N dt Op(g)).
// Small (order dt) exactly when the quantized flow has generator
// -2 pi i N Op(g).
double derivative_defect(const TrigPolynomial& g, const HilbertSpace& s, double dt = 1e-4);

// One dimension N of the flow comparison: residual is the norm of
// U^* Op(f) U - Op(f o phi^t) for the pure kick flow phi of g, and bound is
// the transported certificate t * c_fg / N^2.
struct EgorovPoint {
  i64 big_n = 0;
  double residual = 0.0;
  double bound = 0.0;
};

struct EgorovSweep {
  std::vector<EgorovPoint> points;
  // least squares slope of log residual against log N over the points above
  // the rounding floor; 0 when fewer than two usable points remain
  double slope = 0.0;
  // lemma_constant(d) * c_g * sup over s in [0, t] of c_{f o phi^s}
  double c_fg = 0.0;
};

// Integer time t >= 0.  The flow transport f o phi^s is computed on a grid
// with the given resolution and coefficient truncation; the sup in c_fg is
// sampled at eight subintervals of [0, t].
EgorovSweep egorov_sweep(const TrigPolynomial& f, const TrigPolynomial& g, i64 t,
                         const std::vector<i64>& n_list, i64 grid_points = 128,
                         double trunc = 1e-12);

}  // namespace scarlab

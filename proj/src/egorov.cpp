#include "scarlab/egorov.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "scarlab/propagator.hpp"
#include "scarlab/symplectic.hpp"

namespace scarlab {

namespace {

// dense matrices appear per dimension in the sweep
constexpr i64 kDenseSweepCap = 2048;

double mode_weight(const IntRowVec& n, int d) {
  return std::pow(4.0 * kPi * kPi * static_cast<double>(n.squaredNorm()),
                  static_cast<double>(d + 2));
}

// |x|^(-(2k+1)/2) for x = |n|^2, via one sqrt and an integer power
double inv_half_odd_power(double x, int k) {
  double p = std::sqrt(x);
  for (int i = 0; i < k; ++i) p *= x;
  return 1.0 / p;
}

// sum over the inf-norm box of |n|^(-(2d+1)) plus a certified bound on the
// rest of the lattice; Kahan accumulation keeps the large boxes reproducible
double box_tail_sum(int d) {
  const i64 box = d == 3 ? 10 : 50;
  double sum = 0.0, carry = 0.0;
  const auto feed = [&](double term) {
    const double y = term - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  };
  if (d == 1) {
    for (i64 a = -box; a <= box; ++a)
      for (i64 b = -box; b <= box; ++b) {
        const i64 r2 = a * a + b * b;
        if (r2 == 0) continue;
        feed(inv_half_odd_power(static_cast<double>(r2), 1));
      }
  } else if (d == 2) {
    for (i64 a = -box; a <= box; ++a)
      for (i64 b = -box; b <= box; ++b)
        for (i64 c = -box; c <= box; ++c)
          for (i64 e = -box; e <= box; ++e) {
            const i64 r2 = a * a + b * b + c * c + e * e;
            if (r2 == 0) continue;
            feed(inv_half_odd_power(static_cast<double>(r2), 2));
          }
  } else {
    for (i64 a = -box; a <= box; ++a)
      for (i64 b = -box; b <= box; ++b)
        for (i64 c = -box; c <= box; ++c)
          for (i64 e = -box; e <= box; ++e) {
            const i64 base = a * a + b * b + c * c + e * e;
            for (i64 u = -box; u <= box; ++u)
              for (i64 v = -box; v <= box; ++v) {
                const i64 r2 = base + u * u + v * v;
                if (r2 == 0) continue;
                feed(inv_half_odd_power(static_cast<double>(r2), 3));
              }
          }
  }
  const double tail =
      4.0 * d * std::pow(3.0, static_cast<double>(2 * d - 1)) / static_cast<double>(box);
  return sum + tail;
}

double lemma_value(int d) {
  const double s = box_tail_sum(d) * std::pow(2.0 * kPi, -static_cast<double>(2 * d + 1));
  return s * s;
}

double gap_norm(const TrigPolynomial& f, const TrigPolynomial& g, const HilbertSpace& s) {
  const DenseMatrix of = quantize_observable(s, f).matrix;
  const DenseMatrix og = quantize_observable(s, g).matrix;
  const DenseMatrix bracket = quantize_observable(s, poisson_bracket(g, f)).matrix;
  const cplx scale(0.0, 2.0 * kPi * static_cast<double>(s.n));
  return operator_norm(bracket - scale * (og * of - of * og));
}

void check_frequency_dim(const TrigPolynomial& f, const HilbertSpace& s) {
  if (f.dim2() != 2 * s.d) throw DimensionError("observable dimension does not match the space");
}

}  // namespace

SobolevBound sobolev_constant(const TrigPolynomial& f) {
  const int two_d = f.dim2();
  const int d = two_d / 2;
  SobolevBound out;
  for (const auto& [key, coef] : f.terms()) {
    const IntRowVec n = TrigPolynomial::to_row(key);
    if (n.squaredNorm() == 0) continue;
    out.bound += std::abs(coef) * mode_weight(n, d);
  }
  if (out.bound == 0.0) return out;

  // sup estimate of |(-Delta)^(d+2) f| at the origin and scattered points
  std::mt19937_64 rng(0);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<double> x(static_cast<size_t>(two_d), 0.0);
  for (int j = 0; j <= 1024; ++j) {
    if (j > 0)
      for (double& xi : x) xi = uni(rng);
    cplx acc(0.0, 0.0);
    for (const auto& [key, coef] : f.terms()) {
      const IntRowVec n = TrigPolynomial::to_row(key);
      if (n.squaredNorm() == 0) continue;
      double dot = 0.0;
      for (int i = 0; i < two_d; ++i) dot += static_cast<double>(n(i)) * x[static_cast<size_t>(i)];
      acc += coef * mode_weight(n, d) * e2pi(dot);
    }
    out.sampled = std::max(out.sampled, std::abs(acc));
  }
  return out;
}

double lemma_constant(int d) {
  if (d < 1 || d > 3)
    throw PreconditionError("regularized lattice sum is tabulated for d in {1, 2, 3}");
  switch (d) {
    case 1: {
      static const double c = lemma_value(1);
      return c;
    }
    case 2: {
      static const double c = lemma_value(2);
      return c;
    }
    default: {
      static const double c = lemma_value(3);
      return c;
    }
  }
}

BracketGap bracket_commutator_gap_elementary(const IntRowVec& m, const IntRowVec& n,
                                             const HilbertSpace& s) {
  if (m.size() != 2 * s.d || n.size() != 2 * s.d)
    throw DimensionError("frequency dimension does not match the space");
  const double w = static_cast<double>(symplectic_form(m, n, s.d));
  const double big_n = static_cast<double>(s.n);
  BracketGap out;
  out.predicted =
      std::abs(4.0 * kPi * kPi * w - 4.0 * kPi * big_n * std::sin(kPi * w / big_n));
  out.measured = gap_norm(TrigPolynomial::elementary(m), TrigPolynomial::elementary(n), s);
  return out;
}

PolyGap bracket_commutator_gap_poly(const TrigPolynomial& f, const TrigPolynomial& g,
                                    const HilbertSpace& s) {
  check_frequency_dim(f, s);
  check_frequency_dim(g, s);
  PolyGap out;
  out.measured = gap_norm(f, g, s);
  out.bound = lemma_constant(s.d) * sobolev_constant(g).bound * sobolev_constant(f).bound /
              static_cast<double>(s.n * s.n);
  return out;
}

double derivative_defect(const TrigPolynomial& g, const HilbertSpace& s, double dt) {
  check_frequency_dim(g, s);
  if (!(dt > 0.0)) throw PreconditionError("finite difference step must be positive");
  const DenseMatrix og = quantize_observable(s, g).matrix;
  const DenseMatrix u = quantize_hamiltonian(dt * g, s).matrix;
  const DenseMatrix id = DenseMatrix::Identity(s.dim, s.dim);
  const cplx scale(0.0, 2.0 * kPi * static_cast<double>(s.n));
  return operator_norm((u - id) / dt + scale * og);
}

EgorovSweep egorov_sweep(const TrigPolynomial& f, const TrigPolynomial& g, i64 t,
                         const std::vector<i64>& n_list, i64 grid_points, double trunc) {
  if (f.dim2() != g.dim2())
    throw DimensionError("flow comparison needs matching frequency dimensions");
  if (t < 0) throw PreconditionError("flow time must be a nonnegative integer");
  const int d = f.dim2() / 2;
  for (i64 big_n : n_list) {
    i64 dim = 1;
    for (int i = 0; i < d; ++i) dim *= big_n;
    if (big_n < 1 || dim > kDenseSweepCap)
      throw CostCapError("sweep dimension exceeds the dense comparison cap");
  }

  const SymplecticMatrix id_map{IntMat::Identity(2 * d, 2 * d), d};
  const ClassicalMap map = make_classical_map(id_map, g, 1.0);

  const double c_g = sobolev_constant(g).bound;
  double c_sup = sobolev_constant(flow_pushforward(f, map, 0.0, grid_points, trunc)).bound;
  if (t > 0 && c_g > 0.0) {
    const int subdiv = 8;
    for (int k = 1; k <= subdiv; ++k) {
      const double sk = static_cast<double>(t) * static_cast<double>(k) / subdiv;
      c_sup = std::max(
          c_sup, sobolev_constant(flow_pushforward(f, map, sk, grid_points, trunc)).bound);
    }
  }

  EgorovSweep sweep;
  sweep.c_fg = lemma_constant(d) * c_g * c_sup;

  const TrigPolynomial ft =
      flow_pushforward(f, map, static_cast<double>(t), grid_points, trunc);
  for (i64 big_n : n_list) {
    const HilbertSpace s = make_space(big_n, d);
    const DenseMatrix of = quantize_observable(s, f).matrix;
    const DenseMatrix oft = quantize_observable(s, ft).matrix;
    DenseMatrix u = DenseMatrix::Identity(s.dim, s.dim);
    if (t > 0) {
      const DenseMatrix step = quantize_hamiltonian(g, s).matrix;
      for (i64 k = 0; k < t; ++k) u = step * u;
    }
    EgorovPoint pt;
    pt.big_n = big_n;
    pt.residual = operator_norm(u.adjoint() * of * u - oft);
    pt.bound = static_cast<double>(t) * sweep.c_fg /
               (static_cast<double>(big_n) * static_cast<double>(big_n));
    sweep.points.push_back(pt);
  }

  const double floor = 1e-12 * std::max(1.0, f.one_norm());
  std::vector<double> xs, ys;
  for (const EgorovPoint& pt : sweep.points)
    if (pt.residual > floor) {
      xs.push_back(std::log(static_cast<double>(pt.big_n)));
      ys.push_back(std::log(pt.residual));
    }
  if (xs.size() >= 2) {
    double mx = 0.0, my = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
      mx += xs[i];
      my += ys[i];
    }
    mx /= static_cast<double>(xs.size());
    my /= static_cast<double>(xs.size());
    double sxx = 0.0, sxy = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
      sxx += (xs[i] - mx) * (xs[i] - mx);
      sxy += (xs[i] - mx) * (ys[i] - my);
    }
    sweep.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  }
  return sweep;
}

}  // namespace scarlab

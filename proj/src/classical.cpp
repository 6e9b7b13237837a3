#include "scarlab/classical.hpp"

#include <fftw3.h>

#include <algorithm>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <random>

#include "scarlab/kernels.hpp"

namespace scarlab {

namespace {

constexpr i64 kGridPointCap = i64(1) << 22;

struct FlowTerm {
  std::vector<double> freq;
  cplx coef;
};

std::vector<FlowTerm> flow_terms(const TrigPolynomial& h) {
  std::vector<FlowTerm> out;
  for (const auto& [key, coef] : h.terms()) {
    FlowTerm t;
    t.freq.assign(key.begin(), key.end());
    t.coef = coef;
    out.push_back(std::move(t));
  }
  return out;
}

Point wrap_point(Point x) {
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) -= std::floor(x(i));
  return x;
}

IntMat integer_power(const IntMat& a, i64 t) {
  IntMat base = t >= 0 ? a : unimodular_inverse(a);
  i64 k = t >= 0 ? t : -t;
  IntMat acc = IntMat::Identity(a.rows(), a.cols());
  while (k > 0) {
    if (k & 1) acc = IntMat(acc * base);
    base = IntMat(base * base);
    k >>= 1;
  }
  return acc;
}

void check_grid(const TrigPolynomial& f, i64 grid, int d) {
  if (grid < 4 || (grid & (grid - 1)) != 0)
    throw PreconditionError("grid size must be a power of two, got " + std::to_string(grid));
  if (grid < 4 * f.max_abs_freq())
    throw PreconditionError("grid of " + std::to_string(grid) +
                            " points per axis cannot resolve input frequency " +
                            std::to_string(f.max_abs_freq()));
  double total = 1.0;
  for (int i = 0; i < 2 * d; ++i) total *= static_cast<double>(grid);
  if (total > static_cast<double>(kGridPointCap))
    throw CostCapError("grid would need " + std::to_string(total) + " points");
}

// in-place forward DFT, normalization 1/total, then truncation and the aliasing gate
TrigPolynomial transform_grid(std::vector<cplx>& values, int two_d, i64 grid, double trunc) {
  const i64 total = static_cast<i64>(values.size());
  std::vector<int> dims(static_cast<size_t>(two_d), static_cast<int>(grid));
  fftw_plan plan = fftw_plan_dft(two_d, dims.data(),
                                 reinterpret_cast<fftw_complex*>(values.data()),
                                 reinterpret_cast<fftw_complex*>(values.data()),
                                 FFTW_FORWARD, FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);
  TrigPolynomial out(two_d);
  double alias_mass = 0.0;
  std::vector<i64> signed_freq(static_cast<size_t>(two_d));
  for (i64 flat = 0; flat < total; ++flat) {
    const cplx c = values[static_cast<size_t>(flat)] / static_cast<double>(total);
    if (std::abs(c) <= trunc) continue;
    i64 rem = flat;
    i64 sup = 0;
    for (int i = two_d - 1; i >= 0; --i) {
      i64 k = rem % grid;
      rem /= grid;
      if (k > grid / 2) k -= grid;
      signed_freq[static_cast<size_t>(i)] = k;
      sup = std::max(sup, std::abs(k));
    }
    if (sup > grid / 4) {
      alias_mass += std::abs(c);
      continue;
    }
    IntRowVec n(two_d);
    for (int i = 0; i < two_d; ++i) n(i) = signed_freq[static_cast<size_t>(i)];
    out.add_term(n, c);
  }
  if (alias_mass > 100.0 * trunc)
    throw ResolutionError("aliasing mass " + std::to_string(alias_mass) +
                          " exceeds 100x the truncation threshold; refine the grid");
  return out;
}

// samples fn at every grid point (parallel, no shared state), then transforms
template <typename Fn>
TrigPolynomial sampled_coefficients(const Fn& fn, int two_d, i64 grid, double trunc) {
  i64 total = 1;
  for (int i = 0; i < two_d; ++i) total *= grid;
  std::vector<cplx> values(static_cast<size_t>(total));
  kernels::for_each_index(total, [&](i64 flat) {
    Point x(two_d);
    i64 rem = flat;
    for (int i = two_d - 1; i >= 0; --i) {
      x(i) = static_cast<double>(rem % grid) / static_cast<double>(grid);
      rem /= grid;
    }
    values[static_cast<size_t>(flat)] = fn(x);
  });
  return transform_grid(values, two_d, grid, trunc);
}

std::vector<Point> xi_frame(const SubmanifoldSpec& spec) {
  // columns of Omega^T span the tangent directions of X_0
  const IntMat omega = kernel_rows(spec.lattice.basis);
  std::vector<Point> cols;
  for (Eigen::Index r = 0; r < omega.rows(); ++r) {
    Point c(omega.cols());
    for (Eigen::Index j = 0; j < omega.cols(); ++j) c(j) = static_cast<double>(omega(r, j));
    cols.push_back(std::move(c));
  }
  return cols;
}

Point xi_point(const SubmanifoldSpec& spec) {
  const auto& xi = spec.xi;
  Point p(xi.numerator.size());
  for (Eigen::Index i = 0; i < p.size(); ++i)
    p(i) = static_cast<double>(xi.numerator(i)) / static_cast<double>(xi.denominator);
  return p;
}

template <typename Fn>
void mc_over_submanifold(const SubmanifoldSpec& spec, i64 samples, unsigned seed, const Fn& fn) {
  const auto frame = xi_frame(spec);
  const Point base = xi_point(spec);
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (i64 i = 0; i < samples; ++i) {
    Point x = base;
    for (const auto& dir : frame) x += unit(rng) * dir;
    fn(wrap_point(std::move(x)));
  }
}

}  // namespace

TrigPolynomial poisson_bracket(const TrigPolynomial& f, const TrigPolynomial& g) {
  if (f.dim2() != g.dim2()) throw DimensionError("bracket arguments live on different tori");
  const int d = f.dim2() / 2;
  TrigPolynomial out(f.dim2());
  for (const auto& [mk, mc] : f.terms()) {
    const IntRowVec m = TrigPolynomial::to_row(mk);
    for (const auto& [nk, nc] : g.terms()) {
      const IntRowVec n = TrigPolynomial::to_row(nk);
      const i64 w = symplectic_form(m, n, d);
      if (w == 0) continue;
      out.add_term(m + n, -4.0 * kPi * kPi * static_cast<double>(w) * mc * nc);
    }
  }
  return out;
}

ClassicalMap make_classical_map(const SymplecticMatrix& a, const TrigPolynomial& h_base,
                                double epsilon) {
  h_base.require_real("Hamiltonian");
  if (h_base.dim2() != 2 * a.d) throw DimensionError("Hamiltonian dimension does not match A");
  ClassicalMap map{a, epsilon * h_base, epsilon, IntegratorSettings{}};
  map.h.prune(0.0);
  return map;
}

void validate_map_lattice(const ClassicalMap& map, const IsotropicLattice& lat) {
  const IntMat perp = lambda_perp(lat);
  for (const auto& [key, coef] : map.h.terms()) {
    const IntRowVec n = TrigPolynomial::to_row(key);
    if (!in_row_lattice(perp, n))
      throw ValidationError("Hamiltonian frequency outside the dual-invariant sublattice");
  }
}

Point hamiltonian_flow(const ClassicalMap& map, const Point& x0, double t) {
  const int two_d = 2 * map.a.d;
  if (x0.size() != two_d) throw DimensionError("point has wrong length");
  if (t == 0.0 || map.h.terms().empty()) return wrap_point(x0);
  const auto terms = flow_terms(map.h);
  const int d = map.a.d;
  auto rhs = [&](const std::vector<double>& s, std::vector<double>& dxdt, double) {
    std::vector<double> grad(static_cast<size_t>(two_d), 0.0);
    for (const auto& term : terms) {
      double dot = 0.0;
      for (int i = 0; i < two_d; ++i) dot += term.freq[static_cast<size_t>(i)] * s[static_cast<size_t>(i)];
      const cplx z = term.coef * e2pi(dot);
      const double im = z.imag();
      for (int i = 0; i < two_d; ++i)
        grad[static_cast<size_t>(i)] += -2.0 * kPi * term.freq[static_cast<size_t>(i)] * im;
    }
    for (int j = 0; j < d; ++j) {
      dxdt[static_cast<size_t>(j)] = -grad[static_cast<size_t>(d + j)];
      dxdt[static_cast<size_t>(d + j)] = grad[static_cast<size_t>(j)];
    }
  };
  std::vector<double> state(x0.data(), x0.data() + two_d);
  namespace ode = boost::numeric::odeint;
  ode::runge_kutta_fehlberg78<std::vector<double>> stepper;
  auto controlled = ode::make_controlled(map.integrator.abs_tol, map.integrator.rel_tol, stepper);
  const double dt0 = t > 0 ? map.integrator.initial_step : -map.integrator.initial_step;
  try {
    ode::integrate_adaptive(controlled, rhs, state, 0.0, t, dt0);
  } catch (const std::exception& e) {
    throw IntegrationError(std::string("flow integration failed: ") + e.what());
  }
  Point out(two_d);
  for (int i = 0; i < two_d; ++i) out(i) = state[static_cast<size_t>(i)];
  return wrap_point(std::move(out));
}

Point perturbed_map(const ClassicalMap& map, const Point& x) {
  const Point y = hamiltonian_flow(map, x, 1.0);
  return wrap_point(map.a.a.cast<double>() * y);
}

Point perturbed_map_inverse(const ClassicalMap& map, const Point& x) {
  const Point y = wrap_point(unimodular_inverse(map.a.a).cast<double>() * x);
  return hamiltonian_flow(map, y, -1.0);
}

SubmanifoldSpec make_submanifold_spec(const IsotropicLattice& lat, const FixedPoint& xi) {
  if (xi.numerator.size() != 2 * lat.d)
    throw DimensionError("fixed point has wrong length");
  return SubmanifoldSpec{lat, xi, build_representative_system(lat)};
}

cplx character_at_xi(const IntRowVec& n, const FixedPoint& xi) {
  if (n.cols() != xi.numerator.size()) throw DimensionError("frequency has wrong length");
  i64 dot = 0;
  for (Eigen::Index i = 0; i < n.cols(); ++i) dot += n(i) * xi.numerator(i);
  const i64 den = xi.denominator;
  const i64 r = ((dot % den) + den) % den;
  return e2pi(static_cast<double>(r) / static_cast<double>(den));
}

TrigPolynomial pushforward_coefficients(const TrigPolynomial& f, const ClassicalMap& map,
                                        i64 t, i64 grid_points, double trunc) {
  if (f.dim2() != 2 * map.a.d) throw DimensionError("observable dimension does not match the map");
  if (map.h.terms().empty()) return f.relabeled(integer_power(map.a.a, t));
  if (t == 0) {
    TrigPolynomial out = f;
    out.prune(trunc);
    return out;
  }
  check_grid(f, grid_points, map.a.d);
  auto fn = [&](const Point& x) {
    Point y = x;
    for (i64 k = 0; k < std::abs(t); ++k)
      y = t > 0 ? perturbed_map(map, y) : perturbed_map_inverse(map, y);
    return f.evaluate(y);
  };
  return sampled_coefficients(fn, f.dim2(), grid_points, trunc);
}

TrigPolynomial flow_pushforward(const TrigPolynomial& f, const ClassicalMap& map, double s,
                                i64 grid_points, double trunc) {
  if (f.dim2() != 2 * map.a.d) throw DimensionError("observable dimension does not match the map");
  if (s == 0.0 || map.h.terms().empty()) {
    TrigPolynomial out = f;
    out.prune(trunc);
    return out;
  }
  check_grid(f, grid_points, map.a.d);
  auto fn = [&](const Point& x) { return f.evaluate(hamiltonian_flow(map, x, s)); };
  return sampled_coefficients(fn, f.dim2(), grid_points, trunc);
}

TrigPolynomial time_average(const TrigPolynomial& f, const ClassicalMap& map, i64 t_max,
                            i64 grid_points, double trunc) {
  if (t_max < 0) throw PreconditionError("time average needs T >= 0");
  if (f.dim2() != 2 * map.a.d) throw DimensionError("observable dimension does not match the map");
  const double weight = 1.0 / static_cast<double>(t_max + 1);
  if (map.h.terms().empty()) {
    TrigPolynomial acc(f.dim2());
    for (i64 t = 0; t <= t_max; ++t) acc += weight * f.relabeled(integer_power(map.a.a, t));
    acc.prune(trunc);
    return acc;
  }
  check_grid(f, grid_points, map.a.d);
  auto fn = [&](const Point& x) {
    Point y = x;
    cplx acc = f.evaluate(y);
    for (i64 t = 1; t <= t_max; ++t) {
      y = perturbed_map(map, y);
      acc += f.evaluate(y);
    }
    return acc * weight;
  };
  return sampled_coefficients(fn, f.dim2(), grid_points, trunc);
}

cplx submanifold_average(const TrigPolynomial& f, const SubmanifoldSpec& spec) {
  cplx acc(0.0, 0.0);
  for (const auto& [key, coef] : f.terms()) {
    const IntRowVec n = TrigPolynomial::to_row(key);
    if (spec.lattice.d0 == 0 ? n.isZero() : in_row_lattice(spec.lattice.basis, n).has_value())
      acc += coef * character_at_xi(n, spec.xi);
  }
  return acc;
}

std::map<std::vector<i64>, cplx> sharp_coefficients(const TrigPolynomial& f,
                                                    const SubmanifoldSpec& spec) {
  std::map<std::vector<i64>, cplx> out;
  for (const auto& [key, coef] : f.terms()) {
    const IntRowVec k = TrigPolynomial::to_row(key);
    const SplitFrequency split = representative_decompose(k, spec.lattice, spec.sigma);
    std::vector<i64> rep(split.n.data(), split.n.data() + split.n.cols());
    out[rep] += coef * character_at_xi(split.m, spec.xi);
  }
  return out;
}

double sharp_max_abs(const TrigPolynomial& f, const SubmanifoldSpec& spec) {
  double top = 0.0;
  for (const auto& [rep, coef] : sharp_coefficients(f, spec)) top = std::max(top, std::abs(coef));
  return top;
}

double restricted_l2_norm(const TrigPolynomial& f, const SubmanifoldSpec& spec) {
  double acc = 0.0;
  for (const auto& [rep, coef] : sharp_coefficients(f, spec)) acc += std::norm(coef);
  return acc;
}

double birkhoff_diagnostic(const ClassicalMap& map, const TrigPolynomial& f, const Point& x0,
                           i64 steps, cplx reference) {
  if (steps < 1) throw PreconditionError("orbit average needs at least one step");
  Point y = wrap_point(x0);
  cplx acc(0.0, 0.0);
  for (i64 t = 0; t < steps; ++t) {
    acc += f.evaluate(y);
    y = perturbed_map(map, y);
  }
  return std::abs(acc / static_cast<double>(steps) - reference);
}

McEstimate mc_submanifold_average(const TrigPolynomial& f, const SubmanifoldSpec& spec,
                                  i64 samples, unsigned seed) {
  cplx sum(0.0, 0.0);
  double sum_sq = 0.0;
  mc_over_submanifold(spec, samples, seed, [&](const Point& x) {
    const cplx v = f.evaluate(x);
    sum += v;
    sum_sq += std::norm(v);
  });
  const cplx mean = sum / static_cast<double>(samples);
  const double var =
      std::max(0.0, (sum_sq - static_cast<double>(samples) * std::norm(mean)) /
                        static_cast<double>(samples - 1));
  return McEstimate{mean, std::sqrt(var / static_cast<double>(samples))};
}

McEstimate mc_restricted_l2(const TrigPolynomial& f, const SubmanifoldSpec& spec, i64 samples,
                            unsigned seed) {
  double sum = 0.0, sum_sq = 0.0;
  mc_over_submanifold(spec, samples, seed, [&](const Point& x) {
    const double v = std::norm(f.evaluate(x));
    sum += v;
    sum_sq += v * v;
  });
  const double mean = sum / static_cast<double>(samples);
  const double var = std::max(0.0, (sum_sq - static_cast<double>(samples) * mean * mean) /
                                       static_cast<double>(samples - 1));
  return McEstimate{cplx(mean, 0.0), std::sqrt(var / static_cast<double>(samples))};
}

double mc_sup_abs(const TrigPolynomial& f, const SubmanifoldSpec& spec, i64 samples,
                  unsigned seed) {
  double top = 0.0;
  mc_over_submanifold(spec, samples, seed,
                      [&](const Point& x) { top = std::max(top, std::abs(f.evaluate(x))); });
  return top;
}

McEstimate mc_time_average_l2(const TrigPolynomial& f, const ClassicalMap& map,
                              const SubmanifoldSpec& spec, i64 t_max, i64 samples,
                              unsigned seed) {
  if (t_max < 0) throw PreconditionError("time average needs T >= 0");
  double sum = 0.0, sum_sq = 0.0;
  const double weight = 1.0 / static_cast<double>(t_max + 1);
  mc_over_submanifold(spec, samples, seed, [&](const Point& x) {
    Point y = x;
    cplx acc = f.evaluate(y);
    for (i64 t = 1; t <= t_max; ++t) {
      y = perturbed_map(map, y);
      acc += f.evaluate(y);
    }
    const double v = std::norm(acc * weight);
    sum += v;
    sum_sq += v * v;
  });
  const double mean = sum / static_cast<double>(samples);
  const double var = std::max(0.0, (sum_sq - static_cast<double>(samples) * mean * mean) /
                                       static_cast<double>(samples - 1));
  return McEstimate{cplx(mean, 0.0), std::sqrt(var / static_cast<double>(samples))};
}

}  // namespace scarlab

#include "scarlab/scarring.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "scarlab/kernels.hpp"

namespace scarlab {

namespace {

constexpr i64 kRestrictedCap = 4096;

i64 mod_pos(i64 a, i64 m) {
  i64 r = a % m;
  return r < 0 ? r + m : r;
}

i64 int_power(i64 base, int e) {
  i64 out = 1;
  for (int i = 0; i < e; ++i) out *= base;
  return out;
}

// exact test of e_n(xi)^N == e(N n1.n2 / 2), the scalar value of Op(e_n)^N
bool generator_admissible(const IntRowVec& n, const FixedPoint& xi, i64 big_n, int d) {
  i64 dot = 0;
  for (int i = 0; i < 2 * d; ++i) dot += n(i) * xi.numerator(i);
  i64 cross = 0;
  for (int i = 0; i < d; ++i) cross += n(i) * n(d + i);
  // 2 N dot / den == N cross  (mod 2), both sides over the denominator 2 den
  return mod_pos(2 * big_n * dot - big_n * cross * xi.denominator, 2 * xi.denominator) == 0;
}

double projector_norm(const HilbertSpace& s) { return std::pow(double(s.n), double(s.d)); }

struct EigenOrder {
  std::vector<double> phases;
  DenseMatrix vectors;
};

// sorted eigenphases in [0, 2 pi) with a deterministic per-vector phase:
// the largest-magnitude entry (lowest index among near-ties) is real positive
EigenOrder ordered_eigensystem(const DenseMatrix& m) {
  Eigen::ComplexEigenSolver<DenseMatrix> es(m, true);
  if (es.info() != Eigen::Success)
    throw ConsistencyError("eigendecomposition of the restricted propagator failed");
  const i64 r = m.rows();
  std::vector<double> phase(r);
  for (i64 i = 0; i < r; ++i) {
    double a = std::arg(es.eigenvalues()(i));
    if (a < 0.0) a += 2.0 * kPi;
    if (a >= 2.0 * kPi) a -= 2.0 * kPi;
    phase[i] = a;
  }
  std::vector<i64> order(r);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](i64 a, i64 b) {
    if (phase[a] != phase[b]) return phase[a] < phase[b];
    return a < b;
  });
  EigenOrder out;
  out.phases.resize(r);
  out.vectors.resize(r, r);
  for (i64 k = 0; k < r; ++k) {
    out.phases[k] = phase[order[k]];
    StateVec v = es.eigenvectors().col(order[k]);
    i64 best = 0;
    for (i64 i = 1; i < r; ++i)
      if (std::abs(v(i)) > std::abs(v(best)) + 1e-12) best = i;
    if (std::abs(v(best)) > 0.0) v *= std::conj(v(best)) / std::abs(v(best));
    v /= v.norm();
    out.vectors.col(k) = v;
  }
  return out;
}

RestrictedPropagator finish_restricted(DenseMatrix m) {
  RestrictedPropagator rp;
  const i64 r = m.rows();
  rp.unitary_defect =
      operator_norm(m.adjoint() * m - DenseMatrix::Identity(r, r));
  if (rp.unitary_defect > 1e-9) {
    std::ostringstream os;
    os << "restricted propagator is not unitary (defect " << rp.unitary_defect
       << "); the subspace is not invariant";
    throw ConsistencyError(os.str());
  }
  EigenOrder eo = ordered_eigensystem(m);
  rp.m = std::move(m);
  rp.eigenphases = std::move(eo.phases);
  rp.eigenvectors = std::move(eo.vectors);
  return rp;
}

// decode a flat coset label into its d - d0 digits, last fastest
void coset_digits(i64 c, i64 big_n, int count, std::vector<i64>& out) {
  out.resize(count);
  for (int i = count - 1; i >= 0; --i) {
    out[i] = c % big_n;
    c /= big_n;
  }
}

cplx sparse_expectation(const SparseRestricted& sr, const StateVec& v) {
  if (sr.zero) return {0.0, 0.0};
  cplx acc(0.0, 0.0);
  for (i64 c = 0; c < i64(sr.row.size()); ++c)
    acc += std::conj(v(sr.row[c])) * sr.val[c] * v(c);
  return acc;
}

}  // namespace

Admissibility character_admissible(const HilbertSpace& s, const SubmanifoldSpec& spec) {
  if (spec.lattice.d != s.d)
    throw DimensionError("lattice and space have different d");
  Admissibility out;
  out.admissible = true;
  for (int i = 0; i < spec.lattice.d0; ++i) {
    const IntRowVec n = spec.lattice.basis.row(i);
    if (generator_admissible(n, spec.xi, s.n, s.d)) continue;
    out.admissible = false;
    std::ostringstream os;
    os << "generator " << i << " (";
    for (int j = 0; j < n.cols(); ++j) os << (j ? "," : "") << n(j);
    os << "): e_n(xi)^N does not match the scalar of Op(e_n)^N at N = " << s.n;
    out.diagnosis = os.str();
    return out;
  }
  out.diagnosis = "all generators consistent";
  return out;
}

ScarSubspace build_scar_subspace(const HilbertSpace& s, const SubmanifoldSpec& spec) {
  const Admissibility adm = character_admissible(s, spec);
  if (!adm.admissible) throw PreconditionError("inadmissible character: " + adm.diagnosis);
  const i64 big_n = s.n;
  const i64 dim = s.dim;
  i64 expected = int_power(big_n, s.d - spec.lattice.d0);

  // average each generator's cyclic group over the identity columns
  DenseMatrix acc = DenseMatrix::Identity(dim, dim);
  for (int g = 0; g < spec.lattice.d0; ++g) {
    const IntRowVec n = spec.lattice.basis.row(g);
    DenseMatrix next = DenseMatrix::Zero(dim, dim);
    for (i64 k = 0; k < big_n; ++k) {
      IntRowVec kn = k * n;
      const ElementaryAction act = elementary_action(s, kn);
      const cplx lam_k = character_at_xi(kn, spec.xi);  // e_n(xi)^k, exactly
      const double inv_n = 1.0 / double(big_n);
      kernels::for_each_index(dim, [&](i64 q) {
        next.row(q) += (std::conj(lam_k) * act.phase[q] * inv_n) * acc.row(act.source[q]);
      });
    }
    acc = std::move(next);
  }

  // modified Gram-Schmidt under the scaled inner product, two passes per column
  ScarSubspace sub;
  sub.space = s;
  sub.spec = spec;
  std::vector<StateVec> cols;
  for (i64 q = 0; q < dim; ++q) {
    StateVec v = acc.col(q);
    for (int pass = 0; pass < 2; ++pass)
      for (const StateVec& b : cols) v -= state_inner(s, v, b) * b;
    const double nrm = state_norm(s, v);
    if (nrm <= 1e-8) continue;
    cols.push_back(v / nrm);
    if (i64(cols.size()) > expected) break;
  }
  if (i64(cols.size()) != expected) {
    std::ostringstream os;
    os << "projector rank " << cols.size() << " but the character predicts " << expected
       << " at N = " << big_n;
    throw DimensionError(os.str());
  }
  sub.dim = expected;
  sub.basis.resize(dim, expected);
  for (i64 c = 0; c < expected; ++c) sub.basis.col(c) = cols[c];

  // joint eigenvector and orthonormality certificates
  for (int g = 0; g < spec.lattice.d0; ++g) {
    const IntRowVec n = spec.lattice.basis.row(g);
    const ElementaryAction act = elementary_action(s, n);
    const cplx lam = character_at_xi(n, spec.xi);
    for (i64 c = 0; c < expected; ++c) {
      StateVec r(dim);
      for (i64 q = 0; q < dim; ++q)
        r(q) = act.phase[q] * sub.basis(act.source[q], c) - lam * sub.basis(q, c);
      if (state_norm(s, r) > 1e-10)
        throw ConsistencyError("subspace column is not a joint eigenvector");
    }
  }
  DenseMatrix gram =
      (sub.basis.adjoint() * sub.basis) / projector_norm(s) - DenseMatrix::Identity(expected, expected);
  if (gram.norm() > 1e-12) throw ConsistencyError("subspace basis is not orthonormal");
  return sub;
}

double check_invariance(const ScarSubspace& sub, const DenseMatrix& u) {
  const DenseMatrix p = sub.basis * sub.basis.adjoint() / projector_norm(sub.space);
  const DenseMatrix up = u * p;
  return operator_norm(up - p * up);
}

bool shift_frame_available(const SubmanifoldSpec& spec) {
  const int d = spec.lattice.d;
  for (int i = 0; i < spec.lattice.d0; ++i)
    for (int j = 0; j < d; ++j)
      if (spec.lattice.basis(i, d + j) != 0) return false;
  return true;
}

CosetFrame build_coset_frame(const HilbertSpace& s, const SubmanifoldSpec& spec) {
  if (spec.lattice.d != s.d) throw DimensionError("lattice and space have different d");
  if (!shift_frame_available(spec))
    throw PreconditionError("coset frame requires pure shift generators");
  const int d = s.d;
  const int d0 = spec.lattice.d0;
  const i64 big_n = s.n;

  CosetFrame f;
  f.space = s;
  f.spec = spec;
  if (d0 == 0) {
    f.v = IntMat::Identity(d, d);
    f.w = IntMat::Identity(d, d);
  } else {
    const IntMat shifts = spec.lattice.basis.leftCols(d);
    const SmithForm sf = smith_form(shifts);
    if (sf.rank != d0) throw ConsistencyError("shift generators are not independent");
    for (int i = 0; i < d0; ++i)
      if (sf.d(i, i) != 1)
        throw ConsistencyError("shift lattice is not saturated");
    f.v = unimodular_inverse(sf.v);  // rows 0..d0-1 span the shift lattice
    f.w = sf.v.transpose();          // V^{-T}
  }

  f.char_den = spec.xi.denominator;
  f.char_num.resize(d0);
  for (int i = 0; i < d0; ++i) {
    IntRowVec gen = IntRowVec::Zero(2 * d);
    gen.leftCols(d) = f.v.row(i);
    i64 dot = 0;
    for (int j = 0; j < 2 * d; ++j) dot += gen(j) * spec.xi.numerator(j);
    f.char_num[i] = mod_pos(dot, f.char_den);
    if (mod_pos(big_n * f.char_num[i], f.char_den) != 0) {
      const Admissibility adm = character_admissible(s, spec);
      throw PreconditionError("inadmissible character: " + adm.diagnosis);
    }
  }

  f.dim = int_power(big_n, d - d0);
  f.norm = std::pow(double(big_n), 0.5 * double(d - d0));
  f.coset_of.resize(s.dim);
  f.phase_of.resize(s.dim);
  kernels::for_each_index(s.dim, [&](i64 flat) {
    const std::vector<i64> q = decode_index(s, flat);
    i64 expo = 0;
    i64 coset = 0;
    for (int i = 0; i < d; ++i) {
      i64 r = 0;
      for (int j = 0; j < d; ++j) r += f.w(i, j) * q[j];
      r = mod_pos(r, big_n);
      if (i < d0)
        expo += mod_pos(r * f.char_num[i], f.char_den);
      else
        coset = coset * big_n + r;
    }
    f.coset_of[flat] = coset;
    f.phase_of[flat] = e2pi(double(expo % f.char_den) / double(f.char_den));
  });
  return f;
}

StateVec frame_column(const CosetFrame& f, i64 c) {
  StateVec z = StateVec::Zero(f.space.dim);
  for (i64 q = 0; q < f.space.dim; ++q)
    if (f.coset_of[q] == c) z(q) = f.norm * f.phase_of[q];
  return z;
}

DenseMatrix materialize_frame(const CosetFrame& f) {
  DenseMatrix b = DenseMatrix::Zero(f.space.dim, f.dim);
  for (i64 q = 0; q < f.space.dim; ++q)
    b(q, f.coset_of[q]) = f.norm * f.phase_of[q];
  return b;
}

SparseRestricted restricted_elementary(const CosetFrame& f, const IntRowVec& n) {
  const int d = f.space.d;
  const int d0 = f.spec.lattice.d0;
  const i64 big_n = f.space.n;
  if (n.cols() != 2 * d) throw DimensionError("frequency length mismatch");
  const IntRowVec n1 = n.leftCols(d);
  const IntRowVec n2 = n.rightCols(d);

  SparseRestricted sr;
  const IntRowVec mu = n2 * f.v.transpose();
  for (int i = 0; i < d0; ++i)
    if (mu(i) % big_n != 0) return sr;  // averaged to zero over the fiber

  IntVec rho(d);
  for (int i = 0; i < d; ++i) {
    i64 acc = 0;
    for (int j = 0; j < d; ++j) acc += f.w(i, j) * n1(j);
    rho(i) = acc;
  }
  i64 cross = 0;
  for (int i = 0; i < d; ++i) cross += n1(i) * n2(i);
  double base = double(mod_pos(cross, 2 * big_n)) / double(2 * big_n);
  i64 expo = 0;
  for (int i = 0; i < d0; ++i) expo += mod_pos(rho(i), big_n) * f.char_num[i] % f.char_den;
  base += double(expo % f.char_den) / double(f.char_den);

  sr.zero = false;
  sr.row.resize(f.dim);
  sr.val.resize(f.dim);
  const int tail = d - d0;
  std::vector<i64> digits;
  for (i64 c = 0; c < f.dim; ++c) {
    coset_digits(c, big_n, tail, digits);
    i64 target = 0;
    i64 mdot = 0;
    for (int j = 0; j < tail; ++j) {
      const i64 cj = mod_pos(digits[j] - rho(d0 + j), big_n);
      target = target * big_n + cj;
      mdot += mod_pos(mu(d0 + j), big_n) * cj;
    }
    sr.row[c] = target;
    sr.val[c] = e2pi(base + double(mdot % big_n) / double(big_n));
  }
  return sr;
}

DenseMatrix restricted_observable(const CosetFrame& f, const TrigPolynomial& g) {
  if (g.dim2() != 2 * f.space.d) throw DimensionError("observable dimension mismatch");
  if (f.dim > kRestrictedCap)
    throw CostCapError("restricted matrix would exceed the dense size ceiling");
  DenseMatrix m = DenseMatrix::Zero(f.dim, f.dim);
  for (const auto& [key, coef] : g.terms()) {
    const SparseRestricted sr = restricted_elementary(f, TrigPolynomial::to_row(key));
    if (sr.zero) continue;
    for (i64 c = 0; c < f.dim; ++c) m(sr.row[c], c) += coef * sr.val[c];
  }
  return m;
}

DenseMatrix restricted_linear(const CosetFrame& f, const LinearPropagator& u) {
  if (f.dim > kRestrictedCap)
    throw CostCapError("restricted matrix would exceed the dense size ceiling");
  DenseMatrix m = DenseMatrix::Zero(f.dim, f.dim);
  const double scale = f.norm / projector_norm(f.space);
  kernels::for_each_index(f.dim, [&](i64 c) {
    const StateVec w = apply_linear(u, frame_column(f, c));
    for (i64 q = 0; q < f.space.dim; ++q)
      m(f.coset_of[q], c) += w(q) * std::conj(f.phase_of[q]);
    m.col(c) *= scale;
  });
  return m;
}

RestrictedPropagator restricted_propagator(const CosetFrame& f, const SymplecticMatrix& a,
                                           const TrigPolynomial& h, double tol) {
  if (!h.empty()) {
    h.require_real("hamiltonian");
    const IntMat perp = lambda_perp(f.spec.lattice);
    for (const auto& [key, coef] : h.terms()) {
      (void)coef;
      if (!in_row_lattice(perp, TrigPolynomial::to_row(key)))
        throw PreconditionError(
            "hamiltonian frequency does not commute with the lattice; "
            "only the full-space path can restrict it");
    }
  }
  const auto lp = cached_linear_propagator(a, f.space, tol);
  DenseMatrix m = restricted_linear(f, *lp);
  if (!h.empty()) {
    DenseMatrix rh = restricted_observable(f, h);
    if ((rh - DenseMatrix(rh.adjoint())).norm() > 1e-10 * std::max(1.0, rh.norm()))
      throw ConsistencyError("restricted hamiltonian is not hermitian");
    rh = 0.5 * (rh + DenseMatrix(rh.adjoint()));
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(rh);
    if (es.info() != Eigen::Success)
      throw ConsistencyError("restricted hamiltonian eigendecomposition failed");
    DenseMatrix ex = DenseMatrix::Zero(f.dim, f.dim);
    for (i64 i = 0; i < f.dim; ++i) ex(i, i) = e2pi(-double(f.space.n) * es.eigenvalues()(i));
    m = m * (es.eigenvectors() * ex * es.eigenvectors().adjoint());
  }
  return finish_restricted(std::move(m));
}

RestrictedPropagator restrict_full_propagator(const HilbertSpace& s, const DenseMatrix& basis,
                                              const DenseMatrix& u, double tol) {
  const double nd = projector_norm(s);
  const DenseMatrix ub = u * basis;
  DenseMatrix m = (basis.adjoint() * ub) / nd;
  const double defect = operator_norm(ub - basis * m) / std::sqrt(nd);
  if (defect > tol) {
    std::ostringstream os;
    os << "subspace is not invariant under the propagator (defect " << defect << ")";
    throw ConsistencyError(os.str());
  }
  return finish_restricted(std::move(m));
}

std::vector<WignerRow> wigner_table(const CosetFrame& f, const RestrictedPropagator& rp,
                                    const std::vector<IntRowVec>& freqs) {
  const i64 r = f.dim;
  const i64 nf = i64(freqs.size());
  std::vector<SparseRestricted> ops(nf);
  for (i64 k = 0; k < nf; ++k) ops[k] = restricted_elementary(f, freqs[k]);
  std::vector<WignerRow> rows(r * nf);
  kernels::for_each_index(r, [&](i64 i) {
    const StateVec v = rp.eigenvectors.col(i);
    for (i64 k = 0; k < nf; ++k) {
      WignerRow& row = rows[i * nf + k];
      row.state = i;
      row.eigenphase = rp.eigenphases[i];
      row.n = freqs[k];
      row.value = sparse_expectation(ops[k], v);
    }
  });
  return rows;
}

AverageKind classify_average(const SubmanifoldSpec& spec, i64 big_n, const IntRowVec& n) {
  const int d = spec.lattice.d;
  if (n.isZero()) return AverageKind::lattice;
  if (spec.lattice.d0 > 0 && in_row_lattice(spec.lattice.basis, n)) return AverageKind::lattice;
  for (int i = 0; i < spec.lattice.d0; ++i) {
    const i64 w = symplectic_form(spec.lattice.basis.row(i), n, d);
    if (w % big_n != 0) return AverageKind::forced_zero;
  }
  const IntMat perp = lambda_perp(spec.lattice);
  if (in_row_lattice(perp, n)) {
    for (i64 k = 0; k < perp.rows(); ++k) {
      const i64 w = symplectic_form(n, perp.row(k), d);
      if (w % big_n != 0) return AverageKind::forced_zero;
    }
  }
  return AverageKind::resonant;
}

cplx average_wigner(const CosetFrame& f, const IntRowVec& n) {
  const SparseRestricted sr = restricted_elementary(f, n);
  if (sr.zero) return {0.0, 0.0};
  cplx acc(0.0, 0.0);
  for (i64 c = 0; c < f.dim; ++c)
    if (sr.row[c] == c) acc += sr.val[c];
  return acc / double(f.dim);
}

double quantum_variance(const CosetFrame& f, const RestrictedPropagator& rp,
                        const TrigPolynomial& g) {
  const DenseMatrix rg = restricted_observable(f, g);
  const cplx center = submanifold_average(g, f.spec);
  double acc = 0.0;
  for (i64 i = 0; i < f.dim; ++i) {
    const StateVec v = rp.eigenvectors.col(i);
    acc += std::norm(v.dot(rg * v) - center);
  }
  return acc / double(f.dim);
}

double scar_constant(const TrigPolynomial& g, const SubmanifoldSpec& spec) {
  double c = 0.0;
  for (const auto& [key, coef] : g.terms()) {
    const SplitFrequency split =
        representative_decompose(TrigPolynomial::to_row(key), spec.lattice, spec.sigma);
    c += std::abs(coef) * kPi *
         std::abs(double(symplectic_form(split.n, split.m, spec.lattice.d)));
  }
  return c;
}

ScarSweep scarring_sweep(const SymplecticMatrix& a, const TrigPolynomial& h,
                         const SubmanifoldSpec& spec, const TrigPolynomial& g,
                         const std::vector<i64>& n_list, double tol) {
  const double sharp = sharp_max_abs(g, spec);
  if (sharp > 1e-12 * std::max(1.0, g.one_norm()))
    throw PreconditionError("observable does not restrict to zero on the subtorus");
  ScarSweep sweep;
  sweep.c_f = scar_constant(g, spec);
  for (const i64 big_n : n_list) {
    const HilbertSpace s = make_space(big_n, spec.lattice.d);
    if (!character_admissible(s, spec).admissible) {
      sweep.skipped.push_back(big_n);
      continue;
    }
    const CosetFrame frame = build_coset_frame(s, spec);
    const RestrictedPropagator rp = restricted_propagator(frame, a, h, tol);
    const DenseMatrix rg = restricted_observable(frame, g);
    ScarPoint pt;
    pt.big_n = big_n;
    pt.dim = frame.dim;
    pt.bound = sweep.c_f / double(big_n);
    double acc = 0.0;
    for (i64 i = 0; i < frame.dim; ++i) {
      const StateVec v = rp.eigenvectors.col(i);
      const double w = std::abs(v.dot(rg * v));
      pt.max_value = std::max(pt.max_value, w);
      acc += w;
    }
    pt.mean_value = acc / double(frame.dim);
    sweep.points.push_back(pt);
  }

  double top = 0.0;
  for (const ScarPoint& pt : sweep.points) top = std::max(top, pt.max_value);
  const double floor = 1e-12 * std::max(1.0, g.one_norm());
  std::vector<double> xs, ys;
  for (const ScarPoint& pt : sweep.points)
    if (pt.max_value > floor) {
      xs.push_back(std::log(double(pt.big_n)));
      ys.push_back(std::log(pt.max_value));
    }
  if (xs.empty()) {
    sweep.exact_vanishing = true;
    sweep.slope = 0.0;
    return sweep;
  }
  if (xs.size() >= 2) {
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
    double sxx = 0.0, sxy = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
      sxx += (xs[i] - mx) * (xs[i] - mx);
      sxy += (xs[i] - mx) * (ys[i] - my);
    }
    sweep.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  }
  return sweep;
}

DensityRow density_one_report(const CosetFrame& f, const RestrictedPropagator& rp,
                              double cutoff_m) {
  const int two_d = 2 * f.space.d;
  const i64 rad = i64(std::floor(cutoff_m));
  const double m2 = cutoff_m * cutoff_m + 1e-9;
  DensityRow out;
  out.big_n = f.space.n;
  out.dim = f.dim;
  std::vector<bool> flagged(f.dim, false);

  IntRowVec n(two_d);
  std::vector<i64> digit(two_d, -rad);
  const i64 total = int_power(2 * rad + 1, two_d);
  for (i64 step = 0; step < total; ++step) {
    i64 acc = step;
    i64 sumsq = 0;
    for (int i = two_d - 1; i >= 0; --i) {
      digit[i] = acc % (2 * rad + 1) - rad;
      acc /= (2 * rad + 1);
      sumsq += digit[i] * digit[i];
    }
    if (sumsq == 0 || double(sumsq) > m2) continue;
    for (int i = 0; i < two_d; ++i) n(i) = digit[i];
    if (f.spec.lattice.d0 > 0 && in_row_lattice(f.spec.lattice.basis, n)) continue;
    out.freq_count += 1;
    const SparseRestricted sr = restricted_elementary(f, n);
    if (sr.zero) continue;  // every Wigner value is exactly zero
    std::vector<double> w(f.dim);
    double var = 0.0;
    for (i64 i = 0; i < f.dim; ++i) {
      w[i] = std::abs(sparse_expectation(sr, rp.eigenvectors.col(i)));
      var += w[i] * w[i];
    }
    const double sigma = std::sqrt(var / double(f.dim));
    out.chebyshev_sum += sigma;
    const double gate = std::sqrt(sigma);
    for (i64 i = 0; i < f.dim; ++i)
      if (w[i] > gate) flagged[i] = true;
  }
  i64 bad = 0;
  for (i64 i = 0; i < f.dim; ++i) bad += flagged[i] ? 1 : 0;
  out.fraction = double(f.dim - bad) / double(f.dim);
  return out;
}

}  // namespace scarlab

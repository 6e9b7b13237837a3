#include "scarlab/symplectic.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace scarlab {

namespace {

std::string fmt_row(const IntRowVec& v) {
  std::ostringstream os;
  os << "(";
  for (Eigen::Index i = 0; i < v.cols(); ++i) os << (i ? "," : "") << v(i);
  os << ")";
  return os.str();
}

// g = gcd(a, b) >= 0 with a x + b y = g
i64 xgcd(i64 a, i64 b, i64& x, i64& y) {
  if (b == 0) {
    x = (a < 0) ? -1 : 1;
    y = 0;
    return std::abs(a);
  }
  i64 x1, y1;
  const i64 g = xgcd(b, a % b, x1, y1);
  x = y1;
  y = x1 - (a / b) * y1;
  return g;
}

// integer y with c . y = gcd(entries of c); requires the gcd to be 1 here
IntRowVec solve_unit_pairing(const IntRowVec& c) {
  IntRowVec y = IntRowVec::Zero(c.cols());
  i64 g = 0;
  for (Eigen::Index i = 0; i < c.cols(); ++i) {
    if (c(i) == 0) continue;
    i64 s, t;
    const i64 g2 = xgcd(g, c(i), s, t);
    for (Eigen::Index j = 0; j < i; ++j) y(j) *= s;
    y(i) = t;
    g = g2;
  }
  if (g != 1) throw ConsistencyError("pairing vector is not primitive, gcd = " + std::to_string(g));
  return y;
}

// adjugate via cofactors; matrices here are tiny (at most 2d x 2d)
IntMat adjugate(const IntMat& m) {
  const Eigen::Index n = m.rows();
  IntMat adj(n, n);
  if (n == 0) return adj;
  if (n == 1) {
    adj(0, 0) = 1;
    return adj;
  }
  IntMat minor(n - 1, n - 1);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index r = 0, rr = 0; r < n; ++r) {
        if (r == i) continue;
        for (Eigen::Index c = 0, cc = 0; c < n; ++c) {
          if (c == j) continue;
          minor(rr, cc++) = m(r, c);
        }
        ++rr;
      }
      const i64 cof = det_integer(minor);
      adj(j, i) = ((i + j) % 2 == 0) ? cof : -cof;
    }
  return adj;
}

}  // namespace

IntMat j_matrix(int d) {
  IntMat j = IntMat::Zero(2 * d, 2 * d);
  for (int i = 0; i < d; ++i) {
    j(i, d + i) = 1;
    j(d + i, i) = -1;
  }
  return j;
}

i64 symplectic_form(const IntRowVec& m, const IntRowVec& n, int d) {
  if (m.cols() != 2 * d || n.cols() != 2 * d)
    throw DimensionError("symplectic form arguments must have length 2d");
  __int128 acc = 0;
  for (int i = 0; i < d; ++i)
    acc += static_cast<__int128>(m(i)) * n(d + i) - static_cast<__int128>(m(d + i)) * n(i);
  if (acc > INT64_MAX || acc < INT64_MIN) throw ConsistencyError("symplectic form overflow");
  return static_cast<i64>(acc);
}

SymplecticMatrix validate_symplectic(const IntMat& a) {
  if (a.rows() != a.cols() || a.rows() == 0 || a.rows() % 2 != 0)
    throw ValidationError("symplectic matrix must be square of even size");
  const int d = static_cast<int>(a.rows()) / 2;
  const IntMat j = j_matrix(d);
  const IntMat lhs1 = a * j * a.transpose();
  const IntMat lhs2 = a.transpose() * j * a;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index k = 0; k < a.cols(); ++k) {
      if (lhs1(i, k) != j(i, k))
        throw ValidationError("matrix is not symplectic: (A J A^T) entry (" + std::to_string(i) +
                              "," + std::to_string(k) + ") = " + std::to_string(lhs1(i, k)) +
                              ", expected " + std::to_string(j(i, k)));
      if (lhs2(i, k) != j(i, k))
        throw ValidationError("matrix is not symplectic: (A^T J A) entry (" + std::to_string(i) +
                              "," + std::to_string(k) + ") = " + std::to_string(lhs2(i, k)) +
                              ", expected " + std::to_string(j(i, k)));
    }
  const i64 det = det_integer(a);
  if (det != 1 && det != -1)
    throw ValidationError("symplectic matrix must have determinant +-1, got " + std::to_string(det));
  return SymplecticMatrix{a, d};
}

HyperbolicityReport hyperbolicity_report(const IntMat& a, double tol) {
  HyperbolicityReport rep;
  if (a.rows() == 0) {
    rep.hyperbolic = true;
    return rep;
  }
  Eigen::MatrixXd ad = a.cast<double>();
  Eigen::EigenSolver<Eigen::MatrixXd> es(ad, false);
  rep.moduli.resize(a.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) rep.moduli[i] = std::abs(es.eigenvalues()(i));
  std::sort(rep.moduli.begin(), rep.moduli.end());
  rep.hyperbolic = true;
  for (double m : rep.moduli)
    if (std::abs(m - 1.0) <= tol) rep.hyperbolic = false;
  return rep;
}

IntMat saturate_lattice(const IntMat& rows) {
  const SmithForm s = smith_form(rows);
  if (s.rank != rows.rows())
    throw RankError("lattice generators are rank-deficient: rank " + std::to_string(s.rank) +
                    " from " + std::to_string(rows.rows()) + " rows");
  return saturate_rows(rows);
}

IsotropicLattice check_invariant_isotropic(const SymplecticMatrix& a, const IntMat& basis) {
  if (basis.rows() > 0 && basis.cols() != 2 * a.d)
    throw ValidationError("lattice basis width does not match the matrix dimension");
  IsotropicLattice lat;
  lat.d = a.d;
  lat.d0 = static_cast<int>(basis.rows());
  lat.basis = basis.rows() > 0 ? basis : IntMat(0, 2 * a.d);

  if (lat.d0 > 0) {
    const IntMat sat = saturate_lattice(lat.basis);
    if (!same_row_lattice(sat, lat.basis))
      throw ValidationError("lattice basis is not saturated; saturation strictly contains it");
    for (int i = 0; i < lat.d0; ++i)
      for (int j = i + 1; j < lat.d0; ++j) {
        const i64 w = symplectic_form(lat.basis.row(i), lat.basis.row(j), a.d);
        if (w != 0)
          throw ValidationError("lattice is not isotropic: omega(" + fmt_row(lat.basis.row(i)) +
                                ", " + fmt_row(lat.basis.row(j)) + ") = " + std::to_string(w));
      }
  }

  lat.action = IntMat::Zero(lat.d0, lat.d0);
  for (int i = 0; i < lat.d0; ++i) {
    const IntRowVec image = lat.basis.row(i) * a.a;
    const auto coeff = in_row_lattice(lat.basis, image);
    if (!coeff)
      throw ValidationError("lattice is not invariant: " + fmt_row(lat.basis.row(i)) +
                            " maps to " + fmt_row(image) + " outside the lattice");
    lat.action.row(i) = *coeff;
  }
  if (lat.d0 > 0) {
    const i64 dt = det_integer(lat.action);
    if (dt != 1 && dt != -1)
      throw ValidationError("lattice maps into a strict sublattice of itself, action determinant " +
                            std::to_string(dt));
  }
  return lat;
}

DualSystem symplectic_dual_basis(const IsotropicLattice& lat) {
  const int d0 = lat.d0;
  DualSystem sys;
  sys.n_basis = lat.basis;
  sys.m_basis = IntMat::Zero(d0, 2 * lat.d);
  const IntMat j = j_matrix(lat.d);

  for (int l = 0; l < d0; ++l) {
    // make n_l pair to zero with the m's already built
    for (int i = 0; i < l; ++i) {
      const i64 c = symplectic_form(sys.n_basis.row(l), sys.m_basis.row(i), lat.d);
      if (c != 0) sys.n_basis.row(l) -= c * sys.n_basis.row(i);
    }
    IntRowVec y = solve_unit_pairing(sys.n_basis.row(l) * j);
    // kill pairings with the other adjusted n's, then with the previous m's
    for (int i = 0; i < l; ++i) {
      const i64 c = symplectic_form(sys.n_basis.row(i), y, lat.d);
      if (c != 0) y -= c * sys.m_basis.row(i);
    }
    for (int i = 0; i < l; ++i) {
      const i64 c = symplectic_form(y, sys.m_basis.row(i), lat.d);
      if (c != 0) y -= c * sys.n_basis.row(i);
    }
    sys.m_basis.row(l) = y;
  }

  if (d0 > 0 && !same_row_lattice(sys.n_basis, lat.basis))
    throw ConsistencyError("dual basis construction changed the lattice");
  for (int i = 0; i < d0; ++i)
    for (int j2 = 0; j2 < d0; ++j2) {
      const i64 nm = symplectic_form(sys.n_basis.row(i), sys.m_basis.row(j2), lat.d);
      if (nm != (i == j2 ? 1 : 0))
        throw ConsistencyError("dual basis pairing check failed at (" + std::to_string(i) + "," +
                               std::to_string(j2) + ") = " + std::to_string(nm));
      const i64 mm = symplectic_form(sys.m_basis.row(i), sys.m_basis.row(j2), lat.d);
      if (mm != 0) throw ConsistencyError("dual m-vectors are not mutually isotropic");
    }
  return sys;
}

IntMat lambda_perp(const IsotropicLattice& lat) {
  if (lat.d0 == 0) return IntMat::Identity(2 * lat.d, 2 * lat.d);
  return kernel_rows(lat.basis * j_matrix(lat.d));
}

QuotientSystem quotient_action(const SymplecticMatrix& a, const IsotropicLattice& lat) {
  QuotientSystem q;
  q.omega_basis = lat.d0 == 0 ? IntMat::Identity(2 * a.d, 2 * a.d) : kernel_rows(lat.basis);
  const Eigen::Index k = q.omega_basis.rows();
  q.b_matrix = IntMat::Zero(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    // A acting on the i-th basis column; expand back in the basis
    const IntRowVec image = q.omega_basis.row(i) * a.a.transpose();
    const auto coeff = in_row_lattice(q.omega_basis, image);
    if (!coeff) throw ConsistencyError("quotient lattice is not invariant under the map");
    q.b_matrix.col(i) = coeff->transpose();
  }
  const i64 det = det_integer(q.b_matrix);
  if (det != 1 && det != -1)
    throw ConsistencyError("quotient action determinant is " + std::to_string(det));
  q.hyp = hyperbolicity_report(q.b_matrix);
  return q;
}

FixedPointSet fixed_points(const SymplecticMatrix& a) {
  const int n = 2 * a.d;
  const IntMat m = a.a - IntMat::Identity(n, n);
  FixedPointSet out;
  out.r = det_integer(m);
  if (out.r == 0) throw DegeneracyError("det(A - I) = 0: fixed points are not isolated");

  const SmithForm s = smith_form(m);
  // solutions of (A - I) x in Z^n are x = V D^{-1} k mod 1
  const i64 big = s.d(n - 1, n - 1);  // every elementary divisor divides the last
  std::vector<FixedPoint> pts;
  std::vector<i64> idx(n, 0);
  while (true) {
    IntVec num(n);
    for (int j = 0; j < n; ++j) {
      i64 acc = 0;
      for (int l = 0; l < n; ++l) acc += s.v(j, l) * idx[l] * (big / s.d(l, l));
      num(j) = ((acc % big) + big) % big;
    }
    pts.push_back({num, big});
    int c = n - 1;
    while (c >= 0 && idx[c] + 1 == s.d(c, c)) idx[c--] = 0;
    if (c < 0) break;
    ++idx[c];
  }

  std::sort(pts.begin(), pts.end(), [](const FixedPoint& a1, const FixedPoint& b1) {
    for (Eigen::Index i = 0; i < a1.numerator.size(); ++i)
      if (a1.numerator(i) != b1.numerator(i)) return a1.numerator(i) < b1.numerator(i);
    return false;
  });
  for (size_t i = 1; i < pts.size(); ++i)
    if (pts[i].numerator == pts[i - 1].numerator)
      throw ConsistencyError("fixed point enumeration produced duplicates");
  if (static_cast<i64>(pts.size()) != std::abs(out.r))
    throw ConsistencyError("fixed point count " + std::to_string(pts.size()) +
                           " does not equal |det(A - I)| = " + std::to_string(std::abs(out.r)));

  // reduce each point to lowest common denominator; it still divides R
  for (auto& p : pts) {
    i64 g = p.denominator;
    for (Eigen::Index i = 0; i < p.numerator.size(); ++i) g = std::gcd(g, p.numerator(i));
    if (g > 1) {
      p.denominator /= g;
      for (Eigen::Index i = 0; i < p.numerator.size(); ++i) p.numerator(i) /= g;
    }
  }
  out.points = std::move(pts);
  return out;
}

RepresentativeSystem build_representative_system(const IsotropicLattice& lat) {
  const int n = 2 * lat.d;
  const IntMat& b = lat.basis;
  const IntMat gram = b * b.transpose();
  const i64 gdet = det_integer(gram);
  if (lat.d0 > 0 && gdet <= 0) throw ConsistencyError("Gram matrix of lattice basis is singular");
  IntMat num = b.transpose() * adjugate(gram) * b;  // P_V = num / gdet
  i64 den = (lat.d0 == 0) ? 1 : gdet;
  const i64 g = std::gcd(gcd_entries(num), den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  RepresentativeSystem rs;
  rs.pv_num = num;
  rs.pu_num = IntMat::Identity(n, n) * den - num;
  rs.den = den;
  // P_V (k - r) drops norm, |r| <= den sqrt(2d): |omega(n,m)| <= (1 + den sqrt(2d)) |k|^2
  rs.c_sigma = 1.0 + static_cast<double>(den) * std::sqrt(static_cast<double>(n));
  // idempotency of the rational projection, exactly
  if ((num * num) != den * num) throw ConsistencyError("projection matrix is not idempotent");
  return rs;
}

SplitFrequency representative_decompose(const IntRowVec& k, const IsotropicLattice& lat,
                                        const RepresentativeSystem& rs) {
  if (k.cols() != 2 * lat.d) throw DimensionError("frequency vector must have length 2d");
  const i64 dd = rs.den;
  IntRowVec w(k.cols());
  for (Eigen::Index i = 0; i < k.cols(); ++i) {
    const i64 r = ((k(i) % dd) + dd) % dd;
    w(i) = (k(i) - r) / dd;
  }
  SplitFrequency out;
  out.m = w * rs.pv_num;  // pv_num symmetric, so row-vector action matches P_V
  out.n = k - out.m;
  if (lat.d0 == 0) {
    if (out.m != IntRowVec::Zero(k.cols())) throw ConsistencyError("trivial lattice split is nonzero");
  } else if (!in_row_lattice(lat.basis, out.m)) {
    throw ConsistencyError("decomposition component is not in the lattice");
  }
  return out;
}

}  // namespace scarlab

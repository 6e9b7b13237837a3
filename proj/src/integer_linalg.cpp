#include "scarlab/integer_linalg.hpp"

#include <cstdlib>
#include <numeric>
#include <vector>

namespace scarlab {

namespace {

i64 checked_i64(__int128 p, const char* what) {
  if (p > INT64_MAX || p < INT64_MIN) throw ConsistencyError(std::string("integer overflow in ") + what);
  return static_cast<i64>(p);
}

// m.row(i) -= q * m.row(t), overflow-checked
void row_sub(IntMat& m, Eigen::Index i, Eigen::Index t, i64 q) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    __int128 r = static_cast<__int128>(m(i, j)) - static_cast<__int128>(q) * m(t, j);
    m(i, j) = checked_i64(r, "row operation");
  }
}

void col_sub(IntMat& m, Eigen::Index j, Eigen::Index t, i64 q) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    __int128 r = static_cast<__int128>(m(i, j)) - static_cast<__int128>(q) * m(i, t);
    m(i, j) = checked_i64(r, "column operation");
  }
}

}  // namespace

SmithForm smith_form(const IntMat& m) {
  const Eigen::Index r = m.rows(), c = m.cols();
  SmithForm s;
  s.u = IntMat::Identity(r, r);
  s.v = IntMat::Identity(c, c);
  s.d = m;
  IntMat& w = s.d;

  Eigen::Index t = 0;
  const Eigen::Index tmax = std::min(r, c);
  while (t < tmax) {
    // minimal nonzero entry of the trailing submatrix becomes the pivot
    Eigen::Index pi = -1, pj = -1;
    for (Eigen::Index i = t; i < r; ++i)
      for (Eigen::Index j = t; j < c; ++j)
        if (w(i, j) != 0 && (pi < 0 || std::abs(w(i, j)) < std::abs(w(pi, pj)))) {
          pi = i;
          pj = j;
        }
    if (pi < 0) break;
    if (pi != t) {
      w.row(pi).swap(w.row(t));
      s.u.row(pi).swap(s.u.row(t));
    }
    if (pj != t) {
      w.col(pj).swap(w.col(t));
      s.v.col(pj).swap(s.v.col(t));
    }

    bool settled = false;
    while (!settled) {
      // clear the pivot column with Euclidean row steps
      for (Eigen::Index i = t + 1; i < r; ++i) {
        while (w(i, t) != 0) {
          const i64 q = w(i, t) / w(t, t);
          row_sub(w, i, t, q);
          row_sub(s.u, i, t, q);
          if (w(i, t) != 0) {
            w.row(i).swap(w.row(t));
            s.u.row(i).swap(s.u.row(t));
          }
        }
      }
      // clear the pivot row; column swaps can dirty the column again
      for (Eigen::Index j = t + 1; j < c; ++j) {
        while (w(t, j) != 0) {
          const i64 q = w(t, j) / w(t, t);
          col_sub(w, j, t, q);
          col_sub(s.v, j, t, q);
          if (w(t, j) != 0) {
            w.col(j).swap(w.col(t));
            s.v.col(j).swap(s.v.col(t));
          }
        }
      }
      settled = true;
      for (Eigen::Index i = t + 1; i < r && settled; ++i)
        if (w(i, t) != 0) settled = false;
    }

    // fold any non-divisible trailing entry into the pivot and redo
    bool divides = true;
    for (Eigen::Index i = t + 1; i < r && divides; ++i)
      for (Eigen::Index j = t + 1; j < c && divides; ++j)
        if (w(i, j) % w(t, t) != 0) {
          row_sub(w, t, i, -1);
          row_sub(s.u, t, i, -1);
          divides = false;
        }
    if (!divides) continue;

    if (w(t, t) < 0) {
      w.row(t) = -w.row(t);
      s.u.row(t) = -s.u.row(t);
    }
    ++t;
  }
  s.rank = static_cast<int>(t);
  return s;
}

IntMat kernel_rows(const IntMat& m) {
  const Eigen::Index n = m.cols();
  const SmithForm s = smith_form(m);
  const Eigen::Index k = n - s.rank;
  IntMat out(k, n);
  for (Eigen::Index i = 0; i < k; ++i) out.row(i) = s.v.col(s.rank + i).transpose();
  return out;
}

IntMat saturate_rows(const IntMat& rows) {
  return kernel_rows(kernel_rows(rows));
}

std::optional<IntRowVec> in_row_lattice(const IntMat& basis, const IntRowVec& v) {
  if (v.cols() != basis.cols()) throw ValidationError("vector length does not match lattice ambient dimension");
  const Eigen::Index k = basis.rows(), n = basis.cols();
  const SmithForm s = smith_form(basis);
  IntRowVec w(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    __int128 acc = 0;
    for (Eigen::Index l = 0; l < n; ++l) acc += static_cast<__int128>(v(l)) * s.v(l, j);
    w(j) = checked_i64(acc, "membership transform");
  }
  IntRowVec y = IntRowVec::Zero(k);
  for (Eigen::Index j = 0; j < n; ++j) {
    if (j < s.rank) {
      if (w(j) % s.d(j, j) != 0) return std::nullopt;
      y(j) = w(j) / s.d(j, j);
    } else if (w(j) != 0) {
      return std::nullopt;
    }
  }
  IntRowVec x(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    __int128 acc = 0;
    for (Eigen::Index l = 0; l < k; ++l) acc += static_cast<__int128>(y(l)) * s.u(l, j);
    x(j) = checked_i64(acc, "membership transform");
  }
  // exactness guard: x really reproduces v
  for (Eigen::Index j = 0; j < n; ++j) {
    __int128 acc = 0;
    for (Eigen::Index l = 0; l < k; ++l) acc += static_cast<__int128>(x(l)) * basis(l, j);
    if (acc != v(j)) throw ConsistencyError("lattice membership solve failed verification");
  }
  return x;
}

bool same_row_lattice(const IntMat& a, const IntMat& b) {
  if (a.cols() != b.cols()) return false;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    if (!in_row_lattice(b, a.row(i))) return false;
  for (Eigen::Index i = 0; i < b.rows(); ++i)
    if (!in_row_lattice(a, b.row(i))) return false;
  return true;
}

i64 det_integer(const IntMat& m) {
  if (m.rows() != m.cols()) throw ValidationError("determinant of a non-square matrix");
  const Eigen::Index n = m.rows();
  if (n == 0) return 1;
  std::vector<__int128> w(n * n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) w[i * n + j] = m(i, j);
  auto at = [&](Eigen::Index i, Eigen::Index j) -> __int128& { return w[i * n + j]; };
  __int128 prev = 1;
  int sign = 1;
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    if (at(k, k) == 0) {
      Eigen::Index p = -1;
      for (Eigen::Index i = k + 1; i < n; ++i)
        if (at(i, k) != 0) {
          p = i;
          break;
        }
      if (p < 0) return 0;
      for (Eigen::Index j = 0; j < n; ++j) std::swap(at(k, j), at(p, j));
      sign = -sign;
    }
    for (Eigen::Index i = k + 1; i < n; ++i)
      for (Eigen::Index j = k + 1; j < n; ++j)
        at(i, j) = (at(i, j) * at(k, k) - at(i, k) * at(k, j)) / prev;
    prev = at(k, k);
  }
  return checked_i64(sign * at(n - 1, n - 1), "determinant");
}

i64 gcd_entries(const IntMat& m) {
  i64 g = 0;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) g = std::gcd(g, m(i, j));
  return g;
}

IntMat unimodular_inverse(const IntMat& m) {
  if (m.rows() != m.cols()) throw DimensionError("inverse of a non-square matrix");
  const int n = static_cast<int>(m.rows());
  const i64 det = det_integer(m);
  if (det != 1 && det != -1)
    throw ConsistencyError("matrix is not unimodular, determinant " + std::to_string(det));
  IntMat adj(n, n);
  if (n == 1) {
    adj(0, 0) = 1;
  } else {
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) {
        IntMat minor(n - 1, n - 1);
        for (int i = 0, mi = 0; i < n; ++i) {
          if (i == r) continue;
          for (int j = 0, mj = 0; j < n; ++j) {
            if (j == c) continue;
            minor(mi, mj++) = m(i, j);
          }
          ++mi;
        }
        adj(c, r) = (((r + c) % 2 == 0) ? 1 : -1) * det_integer(minor);
      }
  }
  return det == 1 ? adj : IntMat(-adj);
}

}  // namespace scarlab

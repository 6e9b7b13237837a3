#include "scarlab/propagator.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <functional>
#include <map>
#include <mutex>
#include <random>
#include <shared_mutex>
#include <string>
#include <vector>

namespace scarlab {

namespace {

// Hard ceiling on dim^2 for a generic (Schur-averaged) block construction.
constexpr i64 kGenericCostCap = 65536;
// Dense materialization ceiling for full-space matrices.
constexpr i64 kMaterializeCap = 2048;
// Null-space oracle ceiling on dim^2 (the stacked system has 2d * dim^4 entries).
constexpr i64 kNullSpaceCap = 1100;

std::string axes_label(const std::vector<int>& axes) {
  std::string out = "{";
  for (size_t i = 0; i < axes.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(axes[i]);
  }
  return out + "}";
}

i64 mod_pos(i64 v, i64 n) { return ((v % n) + n) % n; }

// Connected components of the pair-coupling graph: axes i and j are coupled when any of
// the four entries of A linking pair i to pair j is nonzero.
std::vector<std::vector<int>> coupling_blocks(const IntMat& a, int d) {
  std::vector<int> parent(static_cast<size_t>(d));
  for (int i = 0; i < d; ++i) parent[static_cast<size_t>(i)] = i;
  std::function<int(int)> find = [&](int x) {
    while (parent[static_cast<size_t>(x)] != x) {
      parent[static_cast<size_t>(x)] = parent[static_cast<size_t>(parent[static_cast<size_t>(x)])];
      x = parent[static_cast<size_t>(x)];
    }
    return x;
  };
  auto unite = [&](int x, int y) { parent[static_cast<size_t>(find(x))] = find(y); };
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      if (i == j) continue;
      const bool coupled = a(i, j) != 0 || a(i, d + j) != 0 || a(d + i, j) != 0 || a(d + i, d + j) != 0;
      if (coupled) unite(i, j);
    }
  std::map<int, std::vector<int>> groups;
  for (int i = 0; i < d; ++i) groups[find(i)].push_back(i);
  std::vector<std::vector<int>> blocks;
  for (auto& [root, axes] : groups) {
    std::sort(axes.begin(), axes.end());
    blocks.push_back(axes);
  }
  std::sort(blocks.begin(), blocks.end());
  return blocks;
}

// Restriction of A to the pairs listed in axes, in the same (p..., q...) ordering.
IntMat restrict_matrix(const IntMat& a, int d, const std::vector<int>& axes) {
  const int db = static_cast<int>(axes.size());
  auto full = [&](int k) { return k < db ? axes[static_cast<size_t>(k)] : d + axes[static_cast<size_t>(k - db)]; };
  IntMat sub(2 * db, 2 * db);
  for (int r = 0; r < 2 * db; ++r)
    for (int c = 0; c < 2 * db; ++c) sub(r, c) = a(full(r), full(c));
  return sub;
}

// Digit strides of each axis in the row-major flat index (last axis fastest).
std::vector<i64> axis_strides(const HilbertSpace& s) {
  std::vector<i64> stride(static_cast<size_t>(s.d));
  i64 acc = 1;
  for (int i = s.d - 1; i >= 0; --i) {
    stride[static_cast<size_t>(i)] = acc;
    acc *= s.n;
  }
  return stride;
}

struct SliceLayout {
  std::vector<i64> sub_offsets;  // flat offsets of the block digits, block-row-major order
  std::vector<i64> bases;        // flat indices with all block digits zero
};

SliceLayout slice_layout(const HilbertSpace& s, const std::vector<int>& axes) {
  const auto stride = axis_strides(s);
  const i64 N = s.n;
  SliceLayout lay;
  i64 sub_dim = 1;
  for (size_t k = 0; k < axes.size(); ++k) sub_dim *= N;
  lay.sub_offsets.assign(static_cast<size_t>(sub_dim), 0);
  for (i64 f = 0; f < sub_dim; ++f) {
    i64 rem = f, off = 0;
    for (int k = static_cast<int>(axes.size()) - 1; k >= 0; --k) {
      off += (rem % N) * stride[static_cast<size_t>(axes[static_cast<size_t>(k)])];
      rem /= N;
    }
    lay.sub_offsets[static_cast<size_t>(f)] = off;
  }
  std::vector<int> rest;
  for (int i = 0; i < s.d; ++i)
    if (std::find(axes.begin(), axes.end(), i) == axes.end()) rest.push_back(i);
  i64 rest_dim = 1;
  for (size_t k = 0; k < rest.size(); ++k) rest_dim *= N;
  lay.bases.assign(static_cast<size_t>(rest_dim), 0);
  for (i64 f = 0; f < rest_dim; ++f) {
    i64 rem = f, base = 0;
    for (int k = static_cast<int>(rest.size()) - 1; k >= 0; --k) {
      base += (rem % N) * stride[static_cast<size_t>(rest[static_cast<size_t>(k)])];
      rem /= N;
    }
    lay.bases[static_cast<size_t>(f)] = base;
  }
  return lay;
}

// (U psi)(Q) = psi(P^T Q mod N) on the block digits; the adjoint gathers through the
// inverse position map.  p_transpose is stored unreduced so its integer inverse exists.
void apply_permutation_factor(const HilbertSpace& s, const LinearFactor& f, bool adjoint,
                              const StateVec& in, StateVec& out) {
  const i64 N = s.n;
  const auto stride = axis_strides(s);
  const IntMat m = adjoint ? unimodular_inverse(f.p_transpose) : f.p_transpose;
  const int db = static_cast<int>(f.axes.size());
  std::vector<i64> digits(static_cast<size_t>(s.d));
  for (i64 flat = 0; flat < s.dim; ++flat) {
    i64 rem = flat;
    for (int i = s.d - 1; i >= 0; --i) {
      digits[static_cast<size_t>(i)] = rem % N;
      rem /= N;
    }
    i64 src = flat;
    for (int r = 0; r < db; ++r) {
      i64 acc = 0;
      for (int c = 0; c < db; ++c)
        acc += m(r, c) * digits[static_cast<size_t>(f.axes[static_cast<size_t>(c)])];
      const int axis = f.axes[static_cast<size_t>(r)];
      src += (mod_pos(acc, N) - digits[static_cast<size_t>(axis)]) * stride[static_cast<size_t>(axis)];
    }
    out(flat) = in(src);
  }
}

void apply_dense_factor(const HilbertSpace& s, const LinearFactor& f, bool adjoint,
                        const StateVec& in, StateVec& out) {
  const auto lay = slice_layout(s, f.axes);
  const i64 sub_dim = static_cast<i64>(lay.sub_offsets.size());
  StateVec v(sub_dim), w(sub_dim);
  for (const i64 base : lay.bases) {
    for (i64 i = 0; i < sub_dim; ++i) v(i) = in(base + lay.sub_offsets[static_cast<size_t>(i)]);
    if (adjoint)
      w.noalias() = f.dense.adjoint() * v;
    else
      w.noalias() = f.dense * v;
    for (i64 i = 0; i < sub_dim; ++i) out(base + lay.sub_offsets[static_cast<size_t>(i)]) = w(i);
  }
}

StateVec apply_factor(const HilbertSpace& s, const LinearFactor& f, bool adjoint, const StateVec& in) {
  StateVec out(s.dim);
  if (f.is_permutation)
    apply_permutation_factor(s, f, adjoint, in, out);
  else
    apply_dense_factor(s, f, adjoint, in, out);
  return out;
}

// Forward position permutation table on the block's own space.
std::vector<i64> permutation_table(const HilbertSpace& sub, const IntMat& pt) {
  const i64 N = sub.n;
  const int db = sub.d;
  std::vector<i64> table(static_cast<size_t>(sub.dim));
  std::vector<i64> digits(static_cast<size_t>(db));
  for (i64 flat = 0; flat < sub.dim; ++flat) {
    i64 rem = flat;
    for (int i = db - 1; i >= 0; --i) {
      digits[static_cast<size_t>(i)] = rem % N;
      rem /= N;
    }
    i64 img = 0;
    for (int r = 0; r < db; ++r) {
      i64 acc = 0;
      for (int c = 0; c < db; ++c) acc += pt(r, c) * digits[static_cast<size_t>(c)];
      img = img * N + mod_pos(acc, N);
    }
    table[static_cast<size_t>(flat)] = img;
  }
  return table;
}

std::vector<i64> invert_table(const std::vector<i64>& table) {
  std::vector<i64> inv(table.size(), -1);
  for (size_t i = 0; i < table.size(); ++i) {
    if (inv[static_cast<size_t>(table[i])] != -1)
      throw ConsistencyError("position map is not a bijection");
    inv[static_cast<size_t>(table[i])] = static_cast<i64>(i);
  }
  return inv;
}

// Exact residual of a permutation factor against one generator pair, without dense
// matrices.  Both sides map basis vectors to single spikes; when the spike positions
// agree everywhere the residual operator is diagonal-times-permutation and the value
// returned is its exact norm.
double permutation_generator_residual(const HilbertSpace& sub, const IntMat& pt,
                                      const IntRowVec& g, const IntRowVec& ga) {
  const auto fwd = permutation_table(sub, pt);
  const auto inv = invert_table(fwd);
  const auto act_g = elementary_action(sub, g);
  const auto act_ga = elementary_action(sub, ga);
  std::vector<i64> inv_src_g(static_cast<size_t>(sub.dim));
  for (i64 q = 0; q < sub.dim; ++q) inv_src_g[static_cast<size_t>(act_g.source[static_cast<size_t>(q)])] = q;
  std::vector<i64> inv_src_ga(static_cast<size_t>(sub.dim));
  for (i64 q = 0; q < sub.dim; ++q) inv_src_ga[static_cast<size_t>(act_ga.source[static_cast<size_t>(q)])] = q;
  double worst = 0.0;
  for (i64 j = 0; j < sub.dim; ++j) {
    // column j of Op(e_g) U: U delta_j = delta_{inv sigma(j)}
    const i64 uj = inv[static_cast<size_t>(j)];
    const i64 q1 = inv_src_g[static_cast<size_t>(uj)];
    const cplx a1 = act_g.phase[static_cast<size_t>(q1)];
    // column j of U Op(e_{gA})
    const i64 q2p = inv_src_ga[static_cast<size_t>(j)];
    const cplx a2 = act_ga.phase[static_cast<size_t>(q2p)];
    const i64 q2 = inv[static_cast<size_t>(q2p)];
    const double col = (q1 == q2) ? std::abs(a1 - a2) : std::sqrt(std::norm(a1) + std::norm(a2));
    worst = std::max(worst, col);
  }
  return worst;
}

DenseMatrix polar_unitary(const DenseMatrix& m, const std::string& what) {
  Eigen::BDCSVD<DenseMatrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv(0) <= 0.0) throw ConsistencyError(what + ": averaged operator vanished");
  const double spread = (sv(0) - sv(sv.size() - 1)) / sv(0);
  if (spread > 1e-6)
    throw ConsistencyError(what + ": singular values spread by " + std::to_string(spread) +
                           ", intertwiner space is not one dimensional");
  return svd.matrixU() * svd.matrixV().adjoint();
}

// Rotate so the first significant entry of row 0 is real positive.
void canonicalize_phase(DenseMatrix& u) {
  const auto row = u.row(0);
  const double top = row.cwiseAbs().maxCoeff();
  for (i64 c = 0; c < row.cols(); ++c) {
    if (std::abs(row(c)) >= 1e-6 * top) {
      u *= std::conj(row(c)) / std::abs(row(c));
      return;
    }
  }
}

// Schur-type average sum_{n in [0,N)^{2db}} Op(e_n) X Op(e_{nA})^H.  The sum over the
// full period-2N frequency box collapses onto this one (coset phases cancel up to the
// same parity character that controls existence), so when an intertwiner exists and is
// unique this average lands on it for generic X.
DenseMatrix schur_average(const HilbertSpace& sub, const SymplecticMatrix& as) {
  const i64 N = sub.n;
  const i64 D = sub.dim;
  const int w = 2 * as.d;
  for (int attempt = 0; attempt < 5; ++attempt) {
    std::mt19937 rng(static_cast<unsigned>(attempt));
    std::normal_distribution<double> gauss(0.0, 1.0);
    DenseMatrix x(D, D);
    for (i64 c = 0; c < D; ++c)
      for (i64 r = 0; r < D; ++r) x(r, c) = cplx(gauss(rng), gauss(rng));
    DenseMatrix acc = DenseMatrix::Zero(D, D);
    IntRowVec n = IntRowVec::Zero(w);
    while (true) {
      const IntRowVec na = n * as.a;
      const auto au = elementary_action(sub, n);
      const auto av = elementary_action(sub, na);
      for (i64 c = 0; c < D; ++c) {
        const cplx pv = std::conj(av.phase[static_cast<size_t>(c)]);
        const auto xcol = x.col(av.source[static_cast<size_t>(c)]);
        for (i64 r = 0; r < D; ++r)
          acc(r, c) += au.phase[static_cast<size_t>(r)] * pv * xcol(au.source[static_cast<size_t>(r)]);
      }
      int k = w - 1;
      while (k >= 0 && n(k) == N - 1) n(k--) = 0;
      if (k < 0) break;
      ++n(k);
    }
    if (acc.norm() > 1e-9 * x.norm()) return acc;
  }
  throw ConsistencyError("averaged intertwiner vanished for every seed tried");
}

std::vector<double> dense_generator_residuals(const HilbertSpace& sub, const SymplecticMatrix& as,
                                              const DenseMatrix& u) {
  std::vector<double> out;
  for (int k = 0; k < 2 * as.d; ++k) {
    IntRowVec g = IntRowVec::Zero(2 * as.d);
    g(k) = 1;
    const IntRowVec ga = g * as.a;
    const DenseMatrix r =
        dense_elementary(sub, g).matrix * u - u * dense_elementary(sub, ga).matrix;
    out.push_back(operator_norm(r));
  }
  return out;
}

std::string cache_key(const SymplecticMatrix& a, const HilbertSpace& s) {
  std::string key = std::to_string(s.n) + "/" + std::to_string(s.d) + ":";
  for (i64 r = 0; r < a.a.rows(); ++r)
    for (i64 c = 0; c < a.a.cols(); ++c) key += std::to_string(a.a(r, c)) + ",";
  return key;
}

}  // namespace

int intertwiner_dimension(const SymplecticMatrix& a, i64 big_n) {
  validate_symplectic(a.a);
  if (big_n < 1) throw DimensionError("N must be positive");
  const int w = 2 * a.d;
  i64 total = 0;
  IntRowVec s = IntRowVec::Zero(w);
  while (true) {
    i64 q1 = 0;
    for (int i = 0; i < a.d; ++i) q1 += s(i) * s(a.d + i);
    const IntRowVec sa = s * a.a;
    i64 q2 = 0;
    for (int i = 0; i < a.d; ++i) q2 += sa(i) * sa(a.d + i);
    const bool odd = ((big_n % 2) != 0) && (((q1 + q2) % 2 + 2) % 2 == 1);
    total += odd ? -1 : 1;
    int k = w - 1;
    while (k >= 0 && s(k) == 1) s(k--) = 0;
    if (k < 0) break;
    ++s(k);
  }
  const i64 box = i64(1) << w;
  if (total % box != 0)
    throw ConsistencyError("parity character sum " + std::to_string(total) +
                           " is not a multiple of " + std::to_string(box));
  const i64 dim = total / box;
  if (dim < 0 || dim > 1)
    throw ConsistencyError("intertwiner dimension " + std::to_string(dim) +
                           " outside {0,1}");
  return static_cast<int>(dim);
}

IntertwinerNullSpace intertwiner_null_space(const SymplecticMatrix& a, const HilbertSpace& s,
                                            double rank_tol) {
  validate_symplectic(a.a);
  if (2 * a.d != 2 * s.d) throw DimensionError("matrix dimension does not match the space");
  const i64 D = s.dim;
  if (D * D > kNullSpaceCap)
    throw CostCapError("null-space solver refused: dim^2 = " + std::to_string(D * D));
  const i64 cols = D * D;
  const i64 rows = 2 * s.d * cols;
  DenseMatrix m = DenseMatrix::Zero(rows, cols);
  for (int k = 0; k < 2 * s.d; ++k) {
    IntRowVec g = IntRowVec::Zero(2 * s.d);
    g(k) = 1;
    const IntRowVec ga = g * a.a;
    const auto lg = elementary_action(s, g);
    const auto lga = elementary_action(s, ga);
    const i64 off = static_cast<i64>(k) * cols;
    // (L U)(q,t) = phase_g[q] U(src_g[q], t); (U V)(q,t) = U(q,c) phase_ga[c] at t = src_ga[c]
    for (i64 t = 0; t < D; ++t)
      for (i64 q = 0; q < D; ++q)
        m(off + q + t * D, lg.source[static_cast<size_t>(q)] + t * D) +=
            lg.phase[static_cast<size_t>(q)];
    for (i64 c = 0; c < D; ++c) {
      const i64 t = lga.source[static_cast<size_t>(c)];
      const cplx ph = lga.phase[static_cast<size_t>(c)];
      for (i64 q = 0; q < D; ++q) m(off + q + t * D, q + c * D) -= ph;
    }
  }
  Eigen::BDCSVD<DenseMatrix> svd(m, Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double top = sv(0);
  int null_dim = 0;
  for (i64 i = 0; i < sv.size(); ++i)
    if (sv(i) <= rank_tol * top) ++null_dim;
  IntertwinerNullSpace out;
  out.dimension = null_dim;
  if (null_dim >= 1) {
    const Eigen::VectorXcd nv = svd.matrixV().col(sv.size() - 1);
    DenseMatrix u = Eigen::Map<const DenseMatrix>(nv.data(), D, D);
    u = polar_unitary(u, "null-space representative");
    canonicalize_phase(u);
    out.u = u;
  }
  return out;
}

LinearPropagator build_linear_propagator(const SymplecticMatrix& a, const HilbertSpace& s,
                                         double tol) {
  validate_symplectic(a.a);
  if (a.d != s.d) throw DimensionError("matrix dimension does not match the space");
  LinearPropagator u;
  u.space = s;
  u.generator_residuals.assign(static_cast<size_t>(2 * s.d), 0.0);
  const auto blocks = coupling_blocks(a.a, a.d);
  std::vector<std::vector<double>> block_residuals;
  for (const auto& axes : blocks) {
    const int db = static_cast<int>(axes.size());
    SymplecticMatrix as{restrict_matrix(a.a, a.d, axes), db};
    validate_symplectic(as.a);
    if (intertwiner_dimension(as, s.n) == 0)
      throw ObstructionError("no exact intertwiner for block " + axes_label(axes) +
                             " at N = " + std::to_string(s.n) + " (parity obstruction)");
    const HilbertSpace sub = make_space(s.n, db);
    LinearFactor f;
    f.axes = axes;
    // structured candidate: A_S = diag(P, P^{-T}) acts as the exact position map
    // psi -> psi(P^T Q mod N) for every N
    const IntMat p = as.a.topLeftCorner(db, db);
    const IntMat r = as.a.bottomRightCorner(db, db);
    const bool off_zero = as.a.topRightCorner(db, db).isZero() && as.a.bottomLeftCorner(db, db).isZero();
    bool structured = false;
    if (off_zero) {
      IntMat prt = IntMat::Zero(db, db);
      for (int i = 0; i < db; ++i)
        for (int j = 0; j < db; ++j) {
          i64 acc = 0;
          for (int k = 0; k < db; ++k) acc += p(i, k) * r(j, k);
          prt(i, j) = acc;
        }
      structured = prt.isIdentity();
    }
    std::vector<double> res;
    if (structured) {
      f.is_permutation = true;
      f.p_transpose = p.transpose();
      for (int k = 0; k < 2 * db; ++k) {
        IntRowVec g = IntRowVec::Zero(2 * db);
        g(k) = 1;
        const IntRowVec ga = g * as.a;
        res.push_back(permutation_generator_residual(sub, f.p_transpose, g, ga));
      }
      const double worst = *std::max_element(res.begin(), res.end());
      if (worst > tol)
        throw ConsistencyError("position-map factor for block " + axes_label(axes) +
                               " failed validation, residual " + std::to_string(worst));
    } else {
      if (sub.dim * sub.dim > kGenericCostCap)
        throw CostCapError("generic construction refused for block " + axes_label(axes) +
                           ": dim^2 = " + std::to_string(sub.dim * sub.dim));
      DenseMatrix avg = schur_average(sub, as);
      DenseMatrix uu = polar_unitary(avg, "block " + axes_label(axes));
      canonicalize_phase(uu);
      res = dense_generator_residuals(sub, as, uu);
      const double worst = *std::max_element(res.begin(), res.end());
      if (worst > tol)
        throw ConsistencyError("generic factor for block " + axes_label(axes) +
                               " failed validation, residual " + std::to_string(worst));
      f.dense = std::move(uu);
    }
    block_residuals.push_back(res);
    u.factors.push_back(std::move(f));
  }
  // a full-space generator touches one block; its residual equals the block residual
  // because the other factors are unitary
  for (int k = 0; k < 2 * s.d; ++k) {
    const int axis = k < s.d ? k : k - s.d;
    for (size_t b = 0; b < blocks.size(); ++b) {
      const auto& axes = blocks[b];
      const auto it = std::find(axes.begin(), axes.end(), axis);
      if (it == axes.end()) continue;
      const int idx = static_cast<int>(it - axes.begin());
      const int db = static_cast<int>(axes.size());
      const int sub_k = k < s.d ? idx : db + idx;
      u.generator_residuals[static_cast<size_t>(k)] =
          block_residuals[b][static_cast<size_t>(sub_k)];
      break;
    }
  }
  // global phase: first significant entry of row 0 made real positive
  StateVec delta0 = StateVec::Zero(s.dim);
  delta0(0) = 1.0;
  const StateVec w = apply_linear_adjoint(u, delta0);
  const double top = w.cwiseAbs().maxCoeff();
  for (i64 c = 0; c < s.dim; ++c) {
    if (std::abs(w(c)) >= 1e-6 * top) {
      u.phase = w(c) / std::abs(w(c));
      break;
    }
  }
  return u;
}

StateVec apply_linear(const LinearPropagator& u, const StateVec& psi) {
  if (psi.size() != u.space.dim) throw DimensionError("state has wrong length");
  StateVec cur = psi;
  for (const auto& f : u.factors) cur = apply_factor(u.space, f, false, cur);
  return u.phase * cur;
}

StateVec apply_linear_adjoint(const LinearPropagator& u, const StateVec& psi) {
  if (psi.size() != u.space.dim) throw DimensionError("state has wrong length");
  StateVec cur = psi;
  for (const auto& f : u.factors) cur = apply_factor(u.space, f, true, cur);
  return std::conj(u.phase) * cur;
}

DenseOperator materialize(const LinearPropagator& u) {
  if (u.space.dim > kMaterializeCap)
    throw CostCapError("refusing to materialize a propagator of dimension " +
                       std::to_string(u.space.dim));
  DenseMatrix m(u.space.dim, u.space.dim);
  StateVec basis = StateVec::Zero(u.space.dim);
  for (i64 j = 0; j < u.space.dim; ++j) {
    basis(j) = 1.0;
    m.col(j) = apply_linear(u, basis);
    basis(j) = 0.0;
  }
  return DenseOperator{std::move(m), OperatorKind::propagator};
}

DenseOperator quantize_linear(const SymplecticMatrix& a, const HilbertSpace& s, double tol) {
  return materialize(build_linear_propagator(a, s, tol));
}

DenseOperator quantize_hamiltonian(const TrigPolynomial& h, const HilbertSpace& s) {
  h.require_real("Hamiltonian");
  if (s.dim > kMaterializeCap)
    throw CostCapError("refusing to exponentiate on a space of dimension " +
                       std::to_string(s.dim));
  const DenseOperator oph = quantize_observable(s, h);
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(oph.matrix);
  if (es.info() != Eigen::Success) throw ConsistencyError("eigendecomposition failed");
  const auto& lam = es.eigenvalues();
  Eigen::VectorXcd ph(lam.size());
  for (i64 i = 0; i < lam.size(); ++i)
    ph(i) = e2pi(-static_cast<double>(s.n) * lam(i));
  DenseMatrix m = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
  const double defect = (m.adjoint() * m - DenseMatrix::Identity(s.dim, s.dim)).norm();
  if (defect > 1e-10 * static_cast<double>(s.dim))
    throw ConsistencyError("exponential is not unitary, defect " + std::to_string(defect));
  return DenseOperator{std::move(m), OperatorKind::propagator};
}

PropagatorBundle quantize_perturbed(const SymplecticMatrix& a, const TrigPolynomial& h,
                                    const HilbertSpace& s, double tol) {
  PropagatorBundle b;
  b.space = s;
  const LinearPropagator lin = build_linear_propagator(a, s, tol);
  b.u_linear = materialize(lin);
  b.u_hamiltonian = quantize_hamiltonian(h, s);
  b.u_total = DenseOperator{DenseMatrix(b.u_linear.matrix * b.u_hamiltonian.matrix),
                            OperatorKind::propagator};
  b.validation.generator_residuals = lin.generator_residuals;
  const DenseMatrix eye = DenseMatrix::Identity(s.dim, s.dim);
  b.validation.unitary_defect_linear = (b.u_linear.matrix.adjoint() * b.u_linear.matrix - eye).norm();
  b.validation.unitary_defect_hamiltonian =
      (b.u_hamiltonian.matrix.adjoint() * b.u_hamiltonian.matrix - eye).norm();
  b.validation.unitary_defect_total = (b.u_total.matrix.adjoint() * b.u_total.matrix - eye).norm();
  return b;
}

double egorov_residual(const PropagatorBundle& b, const TrigPolynomial& f,
                       const TrigPolynomial& pushforward) {
  const DenseOperator opf = quantize_observable(b.space, f);
  const DenseOperator opp = quantize_observable(b.space, pushforward);
  const DenseMatrix r =
      b.u_total.matrix.adjoint() * opf.matrix * b.u_total.matrix - opp.matrix;
  return operator_norm(r);
}

namespace {
std::shared_mutex g_cache_mutex;
std::map<std::string, std::shared_ptr<const LinearPropagator>> g_cache;
}  // namespace

std::shared_ptr<const LinearPropagator> cached_linear_propagator(const SymplecticMatrix& a,
                                                                 const HilbertSpace& s,
                                                                 double tol) {
  const std::string key = cache_key(a, s);
  {
    std::shared_lock lock(g_cache_mutex);
    const auto it = g_cache.find(key);
    if (it != g_cache.end()) {
      const auto& res = it->second->generator_residuals;
      const double worst = res.empty() ? 0.0 : *std::max_element(res.begin(), res.end());
      if (worst <= tol) return it->second;
    }
  }
  auto built = std::make_shared<const LinearPropagator>(build_linear_propagator(a, s, tol));
  std::unique_lock lock(g_cache_mutex);
  auto [it, inserted] = g_cache.try_emplace(key, built);
  if (!inserted) it->second = built;
  return it->second;
}

}  // namespace scarlab

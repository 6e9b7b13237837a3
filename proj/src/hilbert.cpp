#include "scarlab/hilbert.hpp"

#include <Eigen/SVD>
#include <random>

#include "scarlab/kernels.hpp"

namespace scarlab {

namespace {

constexpr i64 kDimCap = 1 << 21;

struct ElementaryLayout {
  std::vector<i64> shift;   // n1 mod N, per axis
  std::vector<i64> qfreq;   // n2 mod N, per axis
  std::vector<i64> stride;  // row-major, last axis fastest
  i64 half_exponent = 0;    // n1 . n2 reduced mod 4N
};

ElementaryLayout layout_for(const HilbertSpace& s, const IntRowVec& n) {
  if (n.cols() != 2 * s.d) throw DimensionError("frequency vector length must be 2d");
  const i64 N = s.n;
  const int d = s.d;
  ElementaryLayout lay;
  lay.shift.resize(d);
  lay.qfreq.resize(d);
  lay.stride.resize(d);
  for (int i = 0; i < d; ++i) {
    lay.shift[i] = ((n(i) % N) + N) % N;
    lay.qfreq[i] = ((n(d + i) % N) + N) % N;
  }
  lay.stride[d - 1] = 1;
  for (int i = d - 2; i >= 0; --i) lay.stride[i] = lay.stride[i + 1] * N;
  __int128 a = 0;
  for (int i = 0; i < d; ++i) a += static_cast<__int128>(n(i)) * n(d + i);
  const i64 m4 = 4 * N;
  lay.half_exponent = static_cast<i64>(((a % m4) + m4) % m4);
  return lay;
}

std::vector<cplx> phase_table(i64 N) {
  std::vector<cplx> table(static_cast<size_t>(2 * N));
  for (i64 j = 0; j < 2 * N; ++j) table[static_cast<size_t>(j)] = e2pi(static_cast<double>(j) / (2.0 * static_cast<double>(N)));
  return table;
}

// visits every flat index Q, giving the phase-table exponent and the shifted source index
template <typename Fn>
void scan_elementary(const HilbertSpace& s, const ElementaryLayout& lay, Fn&& fn) {
  const i64 N = s.n;
  const int d = s.d;
  for (i64 flat = 0; flat < s.dim; ++flat) {
    i64 rem = flat, b = 0, shifted = 0;
    for (int i = d - 1; i >= 0; --i) {
      const i64 qi = rem % N;
      rem /= N;
      b += (lay.qfreq[i] * qi) % N;
      shifted += ((qi + lay.shift[i]) % N) * lay.stride[i];
    }
    const i64 t = (lay.half_exponent + 2 * (b % N)) % (2 * N);
    fn(flat, t, shifted);
  }
}

}  // namespace

HilbertSpace make_space(i64 n, int d) {
  if (n < 1 || d < 1) throw ValidationError("Hilbert space needs N >= 1 and d >= 1");
  i64 dim = 1;
  for (int i = 0; i < d; ++i) {
    dim *= n;
    if (dim > kDimCap) throw CostCapError("Hilbert space dimension N^d exceeds the size ceiling");
  }
  return HilbertSpace{n, d, dim};
}

i64 encode_index(const HilbertSpace& s, const std::vector<i64>& digits) {
  if (static_cast<int>(digits.size()) != s.d) throw DimensionError("index digit count must equal d");
  i64 flat = 0;
  for (int i = 0; i < s.d; ++i) {
    const i64 q = ((digits[i] % s.n) + s.n) % s.n;
    flat = flat * s.n + q;
  }
  return flat;
}

std::vector<i64> decode_index(const HilbertSpace& s, i64 flat) {
  std::vector<i64> digits(s.d);
  for (int i = s.d - 1; i >= 0; --i) {
    digits[i] = flat % s.n;
    flat /= s.n;
  }
  return digits;
}

cplx state_inner(const HilbertSpace& s, const StateVec& phi, const StateVec& psi) {
  if (phi.size() != s.dim || psi.size() != s.dim) throw DimensionError("state has wrong length");
  // <phi, psi> = N^{-d} sum phi conj(psi)
  return psi.dot(phi) / static_cast<double>(s.dim);
}

double state_norm(const HilbertSpace& s, const StateVec& psi) {
  return std::sqrt(std::abs(state_inner(s, psi, psi)));
}

StateVec apply_elementary(const HilbertSpace& s, const IntRowVec& n, const StateVec& psi) {
  if (psi.size() != s.dim) throw DimensionError("state has wrong length");
  const auto lay = layout_for(s, n);
  const auto table = phase_table(s.n);
  StateVec out(s.dim);
  scan_elementary(s, lay, [&](i64 flat, i64 t, i64 shifted) {
    out(flat) = table[static_cast<size_t>(t)] * psi(shifted);
  });
  return out;
}

ElementaryAction elementary_action(const HilbertSpace& s, const IntRowVec& n) {
  const auto lay = layout_for(s, n);
  const auto table = phase_table(s.n);
  ElementaryAction act;
  act.source.resize(static_cast<size_t>(s.dim));
  act.phase.resize(static_cast<size_t>(s.dim));
  scan_elementary(s, lay, [&](i64 flat, i64 t, i64 shifted) {
    act.source[static_cast<size_t>(flat)] = shifted;
    act.phase[static_cast<size_t>(flat)] = table[static_cast<size_t>(t)];
  });
  return act;
}

DenseOperator dense_elementary(const HilbertSpace& s, const IntRowVec& n) {
  const auto lay = layout_for(s, n);
  const auto table = phase_table(s.n);
  DenseMatrix m = DenseMatrix::Zero(s.dim, s.dim);
  scan_elementary(s, lay, [&](i64 flat, i64 t, i64 shifted) {
    m(flat, shifted) = table[static_cast<size_t>(t)];
  });
  return DenseOperator{std::move(m), OperatorKind::elementary};
}

cplx compose_phase(const IntRowVec& m, const IntRowVec& n, i64 big_n) {
  if (m.cols() != n.cols() || m.cols() % 2 != 0)
    throw DimensionError("compose_phase requires two frequency vectors of equal even length");
  const int d = static_cast<int>(m.cols()) / 2;
  const i64 w = symplectic_form(m, n, d);
  const i64 m4 = 4 * big_n;
  const i64 r = ((w % m4) + m4) % m4;
  return e2pi(static_cast<double>(r) / (2.0 * static_cast<double>(big_n)));
}

DenseOperator quantize_observable(const HilbertSpace& s, const TrigPolynomial& f) {
  if (f.dim2() != 2 * s.d) throw DimensionError("observable dimension does not match the space");
  const auto table = phase_table(s.n);
  DenseMatrix m = DenseMatrix::Zero(s.dim, s.dim);
  for (const auto& [key, coef] : f.terms()) {
    const auto lay = layout_for(s, TrigPolynomial::to_row(key));
    scan_elementary(s, lay, [&](i64 flat, i64 t, i64 shifted) {
      m(flat, shifted) += coef * table[static_cast<size_t>(t)];
    });
  }
  if (f.is_real()) {
    const double defect = (m - m.adjoint()).cwiseAbs().maxCoeff();
    if (defect > 1e-12 * std::max(1.0, f.one_norm()))
      throw ConsistencyError("quantization of a real observable is not Hermitian, defect " +
                             std::to_string(defect));
  }
  return DenseOperator{std::move(m), OperatorKind::observable};
}

StateVec apply_observable(const HilbertSpace& s, const TrigPolynomial& f, const StateVec& psi) {
  if (f.dim2() != 2 * s.d) throw DimensionError("observable dimension does not match the space");
  if (psi.size() != s.dim) throw DimensionError("state has wrong length");
  const auto table = phase_table(s.n);
  StateVec out = StateVec::Zero(s.dim);
  for (const auto& [key, coef] : f.terms()) {
    const auto lay = layout_for(s, TrigPolynomial::to_row(key));
    scan_elementary(s, lay, [&](i64 flat, i64 t, i64 shifted) {
      out(flat) += coef * table[static_cast<size_t>(t)] * psi(shifted);
    });
  }
  return out;
}

DenseMatrix apply_observable_columns(const HilbertSpace& s, const TrigPolynomial& f,
                                     const DenseMatrix& cols) {
  DenseMatrix out(cols.rows(), cols.cols());
  kernels::for_each_index(cols.cols(), [&](i64 j) {
    out.col(j) = apply_observable(s, f, cols.col(j));
  });
  return out;
}

cplx wigner_coefficient(const HilbertSpace& s, const IntRowVec& n, const StateVec& psi) {
  const double nr = state_norm(s, psi);
  if (std::abs(nr - 1.0) > 1e-10)
    throw NormalizationError("Wigner coefficient needs a unit state, norm is " + std::to_string(nr));
  return state_inner(s, apply_elementary(s, n, psi), psi);
}

double operator_norm(const DenseMatrix& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  if (std::max(m.rows(), m.cols()) <= 4096) {
    Eigen::BDCSVD<DenseMatrix> svd(m);
    return svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
  }
  // power iteration on M^H M, fixed seed for determinism
  std::mt19937 rng(0);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::VectorXcd v(m.cols());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double re = g(rng), im = g(rng);
    v(i) = cplx(re, im);
  }
  v.normalize();
  double prev = 0.0;
  for (int it = 0; it < 500; ++it) {
    Eigen::VectorXcd w = m * v;
    v.noalias() = m.adjoint() * w;
    const double nrm = v.norm();
    if (nrm == 0.0) return 0.0;
    v /= nrm;
    const double sigma = std::sqrt(nrm);
    if (std::abs(sigma - prev) <= 1e-12 * std::max(1.0, sigma)) return sigma;
    prev = sigma;
  }
  return prev;
}

double product_defect(const HilbertSpace& s, const TrigPolynomial& f, const TrigPolynomial& g) {
  const DenseOperator of = quantize_observable(s, f);
  const DenseOperator og = quantize_observable(s, g);
  const DenseOperator ofg = quantize_observable(s, f * g);
  return operator_norm(of.matrix * og.matrix - ofg.matrix);
}

}  // namespace scarlab

#include "scarlab/trigpoly.hpp"

#include <cmath>

namespace scarlab {

TrigPolynomial::Key TrigPolynomial::to_key(const IntRowVec& n) {
  return Key(n.data(), n.data() + n.cols());
}

IntRowVec TrigPolynomial::to_row(const Key& k) {
  IntRowVec r(k.size());
  for (size_t i = 0; i < k.size(); ++i) r(static_cast<Eigen::Index>(i)) = k[i];
  return r;
}

void TrigPolynomial::add_term(const IntRowVec& n, cplx c) {
  if (n.cols() != dim2_) throw DimensionError("frequency length does not match polynomial dimension");
  add_term(to_key(n), c);
}

void TrigPolynomial::add_term(const Key& n, cplx c) {
  if (static_cast<int>(n.size()) != dim2_)
    throw DimensionError("frequency length does not match polynomial dimension");
  auto [it, inserted] = terms_.try_emplace(n, c);
  if (!inserted) {
    it->second += c;
    if (it->second == cplx(0.0, 0.0)) terms_.erase(it);
  } else if (c == cplx(0.0, 0.0)) {
    terms_.erase(it);
  }
}

cplx TrigPolynomial::coefficient(const IntRowVec& n) const {
  auto it = terms_.find(to_key(n));
  return it == terms_.end() ? cplx(0.0, 0.0) : it->second;
}

void TrigPolynomial::prune(double eps) {
  for (auto it = terms_.begin(); it != terms_.end();) {
    if (std::abs(it->second) <= eps)
      it = terms_.erase(it);
    else
      ++it;
  }
}

bool TrigPolynomial::is_real(double tol) const {
  for (const auto& [k, c] : terms_) {
    Key neg(k.size());
    for (size_t i = 0; i < k.size(); ++i) neg[i] = -k[i];
    auto it = terms_.find(neg);
    const cplx other = it == terms_.end() ? cplx(0.0, 0.0) : it->second;
    if (std::abs(c - std::conj(other)) > tol) return false;
  }
  return true;
}

void TrigPolynomial::require_real(const std::string& what) const {
  if (!is_real()) throw ValidationError(what + " must be real-valued (conjugate-symmetric coefficients)");
}

cplx TrigPolynomial::evaluate(const Eigen::VectorXd& x) const {
  if (x.size() != dim2_) throw DimensionError("evaluation point has wrong dimension");
  cplx acc(0.0, 0.0);
  for (const auto& [k, c] : terms_) {
    double dot = 0.0;
    for (int i = 0; i < dim2_; ++i) dot += static_cast<double>(k[i]) * x(i);
    acc += c * e2pi(dot);
  }
  return acc;
}

double TrigPolynomial::evaluate_real(const Eigen::VectorXd& x) const { return evaluate(x).real(); }

TrigPolynomial TrigPolynomial::conjugate() const {
  TrigPolynomial out(dim2_);
  for (const auto& [k, c] : terms_) {
    Key neg(k.size());
    for (size_t i = 0; i < k.size(); ++i) neg[i] = -k[i];
    out.add_term(neg, std::conj(c));
  }
  return out;
}

TrigPolynomial TrigPolynomial::relabeled(const IntMat& a) const {
  if (a.rows() != dim2_ || a.cols() != dim2_)
    throw DimensionError("relabeling matrix has wrong dimensions");
  TrigPolynomial out(dim2_);
  for (const auto& [k, c] : terms_) {
    const IntRowVec n = to_row(k);
    out.add_term(IntRowVec(n * a), c);
  }
  return out;
}

double TrigPolynomial::one_norm() const {
  double s = 0.0;
  for (const auto& [k, c] : terms_) s += std::abs(c);
  return s;
}

i64 TrigPolynomial::max_abs_freq() const {
  i64 m = 0;
  for (const auto& [k, c] : terms_)
    for (i64 v : k) m = std::max(m, std::abs(v));
  return m;
}

TrigPolynomial& TrigPolynomial::operator+=(const TrigPolynomial& o) {
  if (o.dim2_ != dim2_) throw DimensionError("polynomial dimension mismatch");
  for (const auto& [k, c] : o.terms_) add_term(k, c);
  return *this;
}

TrigPolynomial& TrigPolynomial::operator-=(const TrigPolynomial& o) {
  if (o.dim2_ != dim2_) throw DimensionError("polynomial dimension mismatch");
  for (const auto& [k, c] : o.terms_) add_term(k, -c);
  return *this;
}

TrigPolynomial& TrigPolynomial::operator*=(double s) {
  if (s == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto& [k, c] : terms_) c *= s;
  return *this;
}

TrigPolynomial TrigPolynomial::constant(int dim2, cplx c) {
  TrigPolynomial out(dim2);
  out.add_term(Key(dim2, 0), c);
  return out;
}

TrigPolynomial TrigPolynomial::elementary(const IntRowVec& n) {
  TrigPolynomial out(static_cast<int>(n.cols()));
  out.add_term(n, cplx(1.0, 0.0));
  return out;
}

TrigPolynomial TrigPolynomial::cosine(const IntRowVec& n, double amplitude) {
  TrigPolynomial out(static_cast<int>(n.cols()));
  out.add_term(n, cplx(amplitude / 2.0, 0.0));
  out.add_term(IntRowVec(-n), cplx(amplitude / 2.0, 0.0));
  return out;
}

TrigPolynomial operator+(TrigPolynomial a, const TrigPolynomial& b) {
  a += b;
  return a;
}

TrigPolynomial operator-(TrigPolynomial a, const TrigPolynomial& b) {
  a -= b;
  return a;
}

TrigPolynomial operator*(double s, TrigPolynomial a) {
  a *= s;
  return a;
}

TrigPolynomial operator*(const TrigPolynomial& a, const TrigPolynomial& b) {
  if (a.dim2() != b.dim2()) throw DimensionError("polynomial dimension mismatch");
  TrigPolynomial out(a.dim2());
  for (const auto& [ka, ca] : a.terms())
    for (const auto& [kb, cb] : b.terms()) {
      TrigPolynomial::Key sum(ka.size());
      for (size_t i = 0; i < ka.size(); ++i) sum[i] = ka[i] + kb[i];
      out.add_term(sum, ca * cb);
    }
  return out;
}

}  // namespace scarlab

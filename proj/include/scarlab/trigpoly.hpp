#pragma once

#include <map>
#include <vector>

#include "scarlab/integer_linalg.hpp"

namespace scarlab {

// Finite trigonometric polynomial on the torus T^{2d},
//   f(x) = sum_n fhat(n) e(n . x),  e(x) = exp(2 pi i x),
// with x = (p_1..p_d, q_1..q_d) and integer frequency rows n = (n_1 | n_2).
// Coefficients are keyed by frequency in lexicographic order, so every
// iteration over terms is deterministic.
class TrigPolynomial {
 public:
  using Key = std::vector<i64>;

  explicit TrigPolynomial(int dim2 = 0) : dim2_(dim2) {}

  int dim2() const { return dim2_; }
  const std::map<Key, cplx>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  static Key to_key(const IntRowVec& n);
  static IntRowVec to_row(const Key& k);

  void add_term(const IntRowVec& n, cplx c);
  void add_term(const Key& n, cplx c);
  cplx coefficient(const IntRowVec& n) const;

  // drop coefficients with |c| <= eps
  void prune(double eps);

  // fhat(-n) = conj(fhat(n)) for every stored term
  bool is_real(double tol = 1e-12) const;
  void require_real(const std::string& what) const;

  cplx evaluate(const Eigen::VectorXd& x) const;
  double evaluate_real(const Eigen::VectorXd& x) const;

  TrigPolynomial conjugate() const;

  // coefficients of f
  // composed with the linear map x -> a x  (frequency relabeling n -> n a)
  TrigPolynomial relabeled(const IntMat& a) const;

  double one_norm() const;
  i64 max_abs_freq() const;

  TrigPolynomial& operator+=(const TrigPolynomial& o);
  TrigPolynomial& operator-=(const TrigPolynomial& o);
  TrigPolynomial& operator*=(double s);

  static TrigPolynomial constant(int dim2, cplx c);
  static TrigPolynomial elementary(const IntRowVec& n);
  // amplitude * cos(2 pi n . x)
  static TrigPolynomial cosine(const IntRowVec& n, double amplitude);

 private:
  int dim2_;
  std::map<Key, cplx> terms_;
};

TrigPolynomial operator+(TrigPolynomial a, const TrigPolynomial& b);
TrigPolynomial operator-(TrigPolynomial a, const TrigPolynomial& b);
TrigPolynomial operator*(double s, TrigPolynomial a);
// exact coefficient convolution
TrigPolynomial operator*(const TrigPolynomial& a, const TrigPolynomial& b);

}  // namespace scarlab

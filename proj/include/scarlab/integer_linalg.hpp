#pragma once

#include <Eigen/Dense>
#include <optional>

#include "scarlab/common.hpp"

namespace scarlab {

using IntMat = Eigen::Matrix<i64, Eigen::Dynamic, Eigen::Dynamic>;
using IntVec = Eigen::Matrix<i64, Eigen::Dynamic, 1>;
using IntRowVec = Eigen::Matrix<i64, 1, Eigen::Dynamic>;

// u * m * v == d with u, v unimodular, d diagonal, d_i >= 0, d_i | d_{i+1}
struct SmithForm {
  IntMat u;
  IntMat d;
  IntMat v;
  int rank = 0;
};

SmithForm smith_form(const IntMat& m);

// basis rows of { x in Z^cols : m x^T = 0 }; always a saturated lattice
IntMat kernel_rows(const IntMat& m);

// basis rows of the saturation of the row span: all integer vectors in its Q-span
IntMat saturate_rows(const IntMat& rows);

bool same_row_lattice(const IntMat& a, const IntMat& b);

// x with x * basis == v when v lies in the row lattice; empty otherwise.
// Unique when basis rows are independent.
std::optional<IntRowVec> in_row_lattice(const IntMat& basis, const IntRowVec& v);

// exact determinant (Bareiss elimination, 128-bit intermediates)
i64 det_integer(const IntMat& m);

// exact inverse of a matrix with determinant +-1, via cofactors
IntMat unimodular_inverse(const IntMat& m);

// gcd of all entries, 0 for the zero matrix
i64 gcd_entries(const IntMat& m);

}  // namespace scarlab

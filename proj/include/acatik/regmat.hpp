#pragma once

#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "acatik/oracle.hpp"

namespace acatik {

enum class RegKind { l0, l1, l2 };

enum class RegStructure { identity, banded, kron_stack };

/// Sparse regularization operator L (p x n).
///
///   l0: I_n
///   l1: (1/2) bidiagonal(1, -1),        (n-1) x n
///   l2: (1/4) tridiagonal(-1, 2, -1),   (n-2) x n
///
/// Kronecker stacks act on grid vectors of length n = g^2 (column-major grid,
/// fast index first) as [I (x) L_d ; L_d (x) I]. For l0 the stack is [I; I].
class RegMatrix {
 public:
  using Sparse = Eigen::SparseMatrix<double, Eigen::RowMajor>;

  RegMatrix(RegKind kind, RegStructure structure, Sparse matrix);

  Index rows() const { return matrix_.rows(); }
  Index cols() const { return matrix_.cols(); }
  RegKind kind() const { return kind_; }
  RegStructure structure() const { return structure_; }
  const Sparse& sparse() const { return matrix_; }

  /// L X for an n x k block; O(nnz(L) k).
  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;

  Eigen::MatrixXd dense() const { return Eigen::MatrixXd(matrix_); }

 private:
  RegKind kind_;
  RegStructure structure_;
  Sparse matrix_;
};

RegMatrix build_regmat(RegKind kind, Index n);
RegMatrix build_kron_regmat(RegKind kind, Index grid_n);

/// Band description of the 1D operators: row r holds coefficient c_q at column r + q.
std::vector<double> band_coefficients(RegKind kind);

RegKind parse_reg_kind(std::string_view name);
std::string_view to_string(RegKind kind);

}  // namespace acatik

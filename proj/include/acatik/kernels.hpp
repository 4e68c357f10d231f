#pragma once

#include <Eigen/Core>

namespace acatik {

/// Thin QR factors W = Q R with diag(R) >= 0.
struct QrFactors {
  Eigen::MatrixXd Q;
  Eigen::MatrixXd R;
  /// True when some |R_ii| <= rank_tolerance * max_j |R_jj|.
  bool rank_deficient = false;
  double min_diagonal = 0.0;
  double max_diagonal = 0.0;
};

struct SvdFactors {
  Eigen::MatrixXd U;
  Eigen::VectorXd sigma;  ///< nonincreasing
  Eigen::MatrixXd V;
};

/// Householder QR of an n x k matrix with n >= k >= 1.
QrFactors qr_skinny(const Eigen::MatrixXd& w, double rank_tolerance = 1e-13);

/// SVD of a small square (or rectangular) matrix.
SvdFactors svd_small(const Eigen::MatrixXd& b);

/// Solves R x = b, or R^T x = b when `transposed`, for upper triangular R.
/// Throws SingularTriangular on an exactly zero diagonal.
Eigen::VectorXd tri_solve(const Eigen::MatrixXd& r, const Eigen::VectorXd& b,
                          bool transposed = false);

/// Matrix right-hand side variant of tri_solve.
Eigen::MatrixXd tri_solve(const Eigen::MatrixXd& r, const Eigen::MatrixXd& b,
                          bool transposed = false);

/// Dense condition number sigma_max / sigma_min (infinity if singular).
double condition_number(const Eigen::MatrixXd& m);

}  // namespace acatik

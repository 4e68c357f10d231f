#include "acatik/kernels.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Householder>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "acatik/errors.hpp"

namespace acatik {

QrFactors qr_skinny(const Eigen::MatrixXd& w, double rank_tolerance) {
  const Eigen::Index n = w.rows();
  const Eigen::Index k = w.cols();
  if (k < 1 || n < k) throw ShapeMismatch("qr_skinny needs rows >= cols >= 1");

  Eigen::HouseholderQR<Eigen::MatrixXd> qr(w);
  QrFactors f;
  f.Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, k);
  f.R = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();

  // Flip signs so that diag(R) >= 0; Q R is unchanged.
  for (Eigen::Index i = 0; i < k; ++i) {
    if (f.R(i, i) < 0.0) {
      f.R.row(i) *= -1.0;
      f.Q.col(i) *= -1.0;
    }
  }
  const Eigen::VectorXd diag = f.R.diagonal();
  f.min_diagonal = diag.minCoeff();
  f.max_diagonal = diag.maxCoeff();
  f.rank_deficient = !(f.min_diagonal > rank_tolerance * f.max_diagonal);
  return f;
}

SvdFactors svd_small(const Eigen::MatrixXd& b) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(b, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

namespace {

void check_triangular(const Eigen::MatrixXd& r, Eigen::Index rhs_rows) {
  if (r.rows() != r.cols() || r.rows() != rhs_rows) {
    throw ShapeMismatch("tri_solve: shapes do not conform");
  }
  for (Eigen::Index i = 0; i < r.rows(); ++i) {
    if (r(i, i) == 0.0 || !std::isfinite(r(i, i))) {
      throw SingularTriangular("zero diagonal entry at " + std::to_string(i));
    }
  }
}

}  // namespace

Eigen::VectorXd tri_solve(const Eigen::MatrixXd& r, const Eigen::VectorXd& b, bool transposed) {
  check_triangular(r, b.size());
  if (transposed) return r.transpose().triangularView<Eigen::Lower>().solve(b);
  return r.triangularView<Eigen::Upper>().solve(b);
}

Eigen::MatrixXd tri_solve(const Eigen::MatrixXd& r, const Eigen::MatrixXd& b, bool transposed) {
  check_triangular(r, b.rows());
  if (transposed) return r.transpose().triangularView<Eigen::Lower>().solve(b);
  return r.triangularView<Eigen::Upper>().solve(b);
}

double condition_number(const Eigen::MatrixXd& m) {
  const Eigen::VectorXd s = Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues();
  const double smin = s(s.size() - 1);
  if (smin == 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

}  // namespace acatik

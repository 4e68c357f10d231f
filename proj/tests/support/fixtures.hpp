#pragma once

#include <string>

#include <Eigen/Dense>

#include "acatik/aca.hpp"
#include "acatik/errors.hpp"
#include "acatik/problems.hpp"
#include "acatik/regmat.hpp"
#include "acatik/tikhonov.hpp"
#include "support/dense_reference.hpp"

namespace acatik::testing {

/// An ACA model of a problem with the data needed for dense cross-checks.
struct SubspaceFixture {
  ProblemInstance instance;
  AcaModel model{0, 0};
  Eigen::MatrixXd a;   ///< dense A
  Eigen::MatrixXd mk;  ///< dense M_k
};

inline SubspaceFixture make_fixture(const std::string& problem, Index n, Index k, double delta,
                                    std::uint64_t seed = 3) {
  ProblemInstance inst = add_noise(make_problem(problem, n), NoiseSpec::absolute(delta), seed);
  AcaOptions aca;
  aca.probe_count = 10 * inst.core.oracle.rows();
  aca.seed = seed + 1;
  CrossApproximation builder(inst.core.oracle, aca);
  for (Index l = 0; l < k; ++l) {
    try {
      builder.step();
    } catch (const RankExhausted&) {
      break;
    }
  }
  SubspaceFixture f{std::move(inst), builder.model(), {}, {}};
  f.a = f.instance.core.oracle.materialize();
  f.mk = f.model.column_factor() * f.model.row_factor().transpose();
  return f;
}

inline RegMatrix reg_for(int order, const ProblemCore& core) {
  const RegKind kind = order == 0 ? RegKind::l0 : order == 1 ? RegKind::l1 : RegKind::l2;
  return build_regmat(kind, core.oracle.cols());
}

/// Dense long-double reference for the subspace-restricted Tikhonov problem.
///
/// The subspace basis comes from an independent QR of W^(r); quantities that
/// do not depend on the basis (x, ||x||, residuals) are compared.
class NormalEquationsReference {
 public:
  using MatL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  using VecL = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

  NormalEquationsReference(const Eigen::MatrixXd& mk, const Eigen::MatrixXd& wr,
                           const Eigen::MatrixXd& wc, const Eigen::MatrixXd& l,
                           const Eigen::VectorXd& g) {
    const Eigen::Index k = wr.cols();
    Eigen::HouseholderQR<MatL> qr(wr.cast<long double>());
    q_ = qr.householderQ() * MatL::Identity(wr.rows(), k);
    Eigen::HouseholderQR<MatL> qc(wc.cast<long double>());
    const MatL qcm = qc.householderQ() * MatL::Identity(wc.rows(), k);
    mq_ = mk.cast<long double>() * q_;
    lq_ = l.cast<long double>() * q_;
    g_ = g.cast<long double>();
    gproj_ = qcm * (qcm.transpose() * g_);
  }

  Eigen::VectorXd x(double mu) const { return (q_ * y(mu)).cast<double>(); }

  /// ||M_k x - Q_c Q_c^T g||.
  double residual_proj(double mu) const {
    return static_cast<double>((mq_ * y(mu) - gproj_).norm());
  }

 private:
  VecL y(double mu) const {
    const long double m = mu;
    const MatL lhs = mq_.transpose() * mq_ + m * lq_.transpose() * lq_;
    return lhs.ldlt().solve(mq_.transpose() * g_);
  }

  MatL q_, mq_, lq_;
  VecL g_, gproj_;
};

inline NormalEquationsReference reference_for(const SubspaceFixture& f, const RegMatrix& reg,
                                              const Eigen::VectorXd& g) {
  return NormalEquationsReference(f.mk, f.model.row_factor(), f.model.column_factor(),
                                  reg.dense(), g);
}

}  // namespace acatik::testing

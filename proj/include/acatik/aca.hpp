#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "acatik/oracle.hpp"

namespace acatik {

/// Rank-k cross approximation M_k = sum_l c_l r_l^T of an m x n matrix.
///
/// c_l (length m) are the scaled residual columns and r_l (length n) the
/// residual rows at the pivots (row_pivots[l], col_pivots[l]).
class AcaModel {
 public:
  AcaModel(Index rows, Index cols) : rows_(rows), cols_(cols) {}

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Index rank() const { return static_cast<Index>(col_vectors_.size()); }

  const std::vector<Eigen::VectorXd>& col_vectors() const { return col_vectors_; }
  const std::vector<Eigen::VectorXd>& row_vectors() const { return row_vectors_; }
  const std::vector<Index>& row_pivots() const { return row_pivots_; }
  const std::vector<Index>& col_pivots() const { return col_pivots_; }

  /// W^(c) as an m x k matrix.
  Eigen::MatrixXd column_factor() const;
  /// W^(r) as an n x k matrix.
  Eigen::MatrixXd row_factor() const;

  double entry(Index i, Index j) const;
  std::vector<double> materialize(const std::vector<std::pair<Index, Index>>& positions) const;

  /// y = M_k x without forming M_k.
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;

  void append(Index row_pivot, Index col_pivot, Eigen::VectorXd col_vector,
              Eigen::VectorXd row_vector);

 private:
  Index rows_;
  Index cols_;
  std::vector<Eigen::VectorXd> col_vectors_;
  std::vector<Eigen::VectorXd> row_vectors_;
  std::vector<Index> row_pivots_;
  std::vector<Index> col_pivots_;
};

struct ProbePoint {
  Index row;
  Index col;
  double residual;  ///< (A - M_k)(row, col)
};

/// Randomly sampled positions whose residuals are tracked across steps.
struct ProbeSet {
  std::vector<ProbePoint> entries;
  std::uint64_t seed = 0;

  Index size() const { return static_cast<Index>(entries.size()); }
  double residual_sum_of_squares() const;
};

enum class ScalingMode {
  consistent,     ///< sqrt((m n / t) * sum r^2), unbiased for ||R||_F^2
  paper_literal,  ///< sqrt(sum r^2) * (m n / t)
};

struct ErrorEstimate {
  double value = 0.0;
  ScalingMode mode = ScalingMode::consistent;
};

ErrorEstimate estimate_error(const ProbeSet& probes, Index rows, Index cols,
                             ScalingMode mode = ScalingMode::consistent);

struct AcaOptions {
  Index probe_count = 1;
  std::uint64_t seed = 0;
  Index start_row = 0;
  /// A pivot is rejected when |delta| < pivot_tolerance * |delta_1|.
  double pivot_tolerance = 1e-14;
  /// Rows tried after a rejected pivot before giving up.
  int max_restarts = 3;
  /// When a tracked probe residual exceeds the pivot found by the row chain,
  /// restart the step at that probe's row. Costs one extra row evaluation in
  /// the affected steps; off by default.
  bool probe_guided = false;
};

/// Partially pivoted adaptive cross approximation driven by an entry oracle.
///
/// Each step reads one row and one column of A; the probe entries are read
/// once at construction. Used row and column indices are excluded from the
/// pivot search.
class CrossApproximation {
 public:
  CrossApproximation(EntryOracle oracle, const AcaOptions& options);

  /// Adds one skeleton. Throws RankExhausted when no acceptable pivot is found
  /// (the model is left unchanged in that case).
  void step();

  const AcaModel& model() const { return model_; }
  const ProbeSet& probes() const { return probes_; }
  const CountedOracle& access() const { return access_; }
  const EvalCounter& counter() const { return access_.counter(); }

  ErrorEstimate estimate_error(ScalingMode mode = ScalingMode::consistent) const {
    return acatik::estimate_error(probes_, model_.rows(), model_.cols(), mode);
  }

 private:
  Index next_row_candidate() const;
  Index restart_row() const;
  const ProbePoint* largest_free_probe() const;
  Eigen::VectorXd residual_row(Index i);
  Eigen::VectorXd residual_col(Index j);

  CountedOracle access_;
  AcaOptions options_;
  AcaModel model_;
  ProbeSet probes_;
  std::vector<bool> row_used_;
  std::vector<bool> col_used_;
  std::vector<bool> row_rejected_;
  double first_pivot_ = 0.0;
};

}  // namespace acatik

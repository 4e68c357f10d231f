#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <unordered_set>
#include <vector>

#include <Eigen/Core>

namespace acatik {

using Index = Eigen::Index;

/// Read-only view of a matrix through its entries.
///
/// The entry function must be deterministic; copies share it. Oracles do no
/// bookkeeping of their own, see CountedOracle.
class EntryOracle {
 public:
  using EntryFn = std::function<double(Index, Index)>;

  EntryOracle(Index rows, Index cols, EntryFn entry);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }

  /// A(i, j); throws ContractViolation for indices outside the shape.
  double entry(Index i, Index j) const;
  double operator()(Index i, Index j) const { return entry(i, j); }

  Eigen::VectorXd row(Index i) const;
  Eigen::VectorXd col(Index j) const;

  /// Dense copy of the full matrix. Costs rows*cols evaluations.
  Eigen::MatrixXd materialize() const;

 private:
  Index rows_;
  Index cols_;
  std::shared_ptr<const EntryFn> entry_;
};

EntryOracle dense_oracle(Eigen::MatrixXd matrix);

/// Oracle for the outer product u v^T.
EntryOracle outer_product_oracle(Eigen::VectorXd u, Eigen::VectorXd v);

/// Counts evaluated entries: every call, and distinct (i, j) positions.
class EvalCounter {
 public:
  EvalCounter(Index rows, Index cols);

  void record(Index i, Index j);

  std::uint64_t unique_entries() const { return unique_; }
  std::uint64_t total_calls() const { return total_; }

 private:
  Index rows_;
  Index cols_;
  std::uint64_t unique_ = 0;
  std::uint64_t total_ = 0;
  // Bitmap for moderate shapes, hash set beyond kBitmapLimit positions.
  std::vector<std::uint64_t> bitmap_;
  std::unordered_set<std::uint64_t> seen_;
};

/// An oracle paired with the counter of the solver that reads it.
class CountedOracle {
 public:
  explicit CountedOracle(EntryOracle oracle);

  Index rows() const { return oracle_.rows(); }
  Index cols() const { return oracle_.cols(); }

  double entry(Index i, Index j);
  Eigen::VectorXd row(Index i);
  Eigen::VectorXd col(Index j);

  const EntryOracle& oracle() const { return oracle_; }
  const EvalCounter& counter() const { return counter_; }

 private:
  EntryOracle oracle_;
  EvalCounter counter_;
};

}  // namespace acatik

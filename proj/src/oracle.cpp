#include "acatik/oracle.hpp"

#include <string>
#include <utility>

#include "acatik/errors.hpp"

namespace acatik {

namespace {

constexpr std::uint64_t kBitmapLimit = std::uint64_t{1} << 30;

void check_index(Index i, Index bound, const char* what) {
  if (i < 0 || i >= bound) {
    throw ContractViolation(std::string(what) + " index " + std::to_string(i) +
                            " outside [0, " + std::to_string(bound) + ")");
  }
}

}  // namespace

EntryOracle::EntryOracle(Index rows, Index cols, EntryFn entry)
    : rows_(rows), cols_(cols), entry_(std::make_shared<const EntryFn>(std::move(entry))) {
  if (rows <= 0 || cols <= 0) {
    throw InvalidConfiguration("oracle shape must be positive");
  }
}

double EntryOracle::entry(Index i, Index j) const {
  check_index(i, rows_, "row");
  check_index(j, cols_, "column");
  return (*entry_)(i, j);
}

Eigen::VectorXd EntryOracle::row(Index i) const {
  check_index(i, rows_, "row");
  Eigen::VectorXd v(cols_);
  for (Index j = 0; j < cols_; ++j) v(j) = (*entry_)(i, j);
  return v;
}

Eigen::VectorXd EntryOracle::col(Index j) const {
  check_index(j, cols_, "column");
  Eigen::VectorXd v(rows_);
  for (Index i = 0; i < rows_; ++i) v(i) = (*entry_)(i, j);
  return v;
}

Eigen::MatrixXd EntryOracle::materialize() const {
  Eigen::MatrixXd dense(rows_, cols_);
  for (Index j = 0; j < cols_; ++j)
    for (Index i = 0; i < rows_; ++i) dense(i, j) = (*entry_)(i, j);
  return dense;
}

EntryOracle dense_oracle(Eigen::MatrixXd matrix) {
  const Index rows = matrix.rows();
  const Index cols = matrix.cols();
  auto shared = std::make_shared<const Eigen::MatrixXd>(std::move(matrix));
  return EntryOracle(rows, cols, [shared](Index i, Index j) { return (*shared)(i, j); });
}

EntryOracle outer_product_oracle(Eigen::VectorXd u, Eigen::VectorXd v) {
  const Index rows = u.size();
  const Index cols = v.size();
  return EntryOracle(rows, cols, [u = std::move(u), v = std::move(v)](Index i, Index j) {
    return u(i) * v(j);
  });
}

EvalCounter::EvalCounter(Index rows, Index cols) : rows_(rows), cols_(cols) {
  const auto positions = static_cast<std::uint64_t>(rows) * static_cast<std::uint64_t>(cols);
  if (positions <= kBitmapLimit) bitmap_.assign((positions + 63) / 64, 0);
}

void EvalCounter::record(Index i, Index j) {
  ++total_;
  const auto key = static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(cols_) +
                   static_cast<std::uint64_t>(j);
  if (!bitmap_.empty()) {
    auto& word = bitmap_[key / 64];
    const std::uint64_t bit = std::uint64_t{1} << (key % 64);
    if (!(word & bit)) {
      word |= bit;
      ++unique_;
    }
  } else if (seen_.insert(key).second) {
    ++unique_;
  }
}

CountedOracle::CountedOracle(EntryOracle oracle)
    : oracle_(std::move(oracle)), counter_(oracle_.rows(), oracle_.cols()) {}

double CountedOracle::entry(Index i, Index j) {
  const double value = oracle_.entry(i, j);
  counter_.record(i, j);
  return value;
}

Eigen::VectorXd CountedOracle::row(Index i) {
  Eigen::VectorXd v = oracle_.row(i);
  for (Index j = 0; j < v.size(); ++j) counter_.record(i, j);
  return v;
}

Eigen::VectorXd CountedOracle::col(Index j) {
  Eigen::VectorXd v = oracle_.col(j);
  for (Index i = 0; i < v.size(); ++i) counter_.record(i, j);
  return v;
}

}  // namespace acatik

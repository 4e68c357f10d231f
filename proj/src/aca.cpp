#include "acatik/aca.hpp"

#include <cmath>
#include <string>

#include "acatik/errors.hpp"
#include "acatik/random.hpp"

namespace acatik {

Eigen::MatrixXd AcaModel::column_factor() const {
  Eigen::MatrixXd w(rows_, rank());
  for (Index l = 0; l < rank(); ++l) w.col(l) = col_vectors_[l];
  return w;
}

Eigen::MatrixXd AcaModel::row_factor() const {
  Eigen::MatrixXd w(cols_, rank());
  for (Index l = 0; l < rank(); ++l) w.col(l) = row_vectors_[l];
  return w;
}

double AcaModel::entry(Index i, Index j) const {
  double sum = 0.0;
  for (Index l = 0; l < rank(); ++l) sum += col_vectors_[l](i) * row_vectors_[l](j);
  return sum;
}

std::vector<double> AcaModel::materialize(
    const std::vector<std::pair<Index, Index>>& positions) const {
  std::vector<double> values;
  values.reserve(positions.size());
  for (const auto& [i, j] : positions) values.push_back(entry(i, j));
  return values;
}

Eigen::VectorXd AcaModel::apply(const Eigen::VectorXd& x) const {
  Eigen::VectorXd y = Eigen::VectorXd::Zero(rows_);
  for (Index l = 0; l < rank(); ++l) y += col_vectors_[l] * row_vectors_[l].dot(x);
  return y;
}

void AcaModel::append(Index row_pivot, Index col_pivot, Eigen::VectorXd col_vector,
                      Eigen::VectorXd row_vector) {
  row_pivots_.push_back(row_pivot);
  col_pivots_.push_back(col_pivot);
  col_vectors_.push_back(std::move(col_vector));
  row_vectors_.push_back(std::move(row_vector));
}

double ProbeSet::residual_sum_of_squares() const {
  double sum = 0.0;
  for (const auto& p : entries) sum += p.residual * p.residual;
  return sum;
}

ErrorEstimate estimate_error(const ProbeSet& probes, Index rows, Index cols, ScalingMode mode) {
  if (probes.entries.empty()) throw InvalidConfiguration("probe set is empty");
  const double scale = static_cast<double>(rows) * static_cast<double>(cols) /
                       static_cast<double>(probes.size());
  const double sum = probes.residual_sum_of_squares();
  ErrorEstimate estimate;
  estimate.mode = mode;
  estimate.value = mode == ScalingMode::consistent ? std::sqrt(scale * sum)
                                                   : std::sqrt(sum) * scale;
  return estimate;
}

CrossApproximation::CrossApproximation(EntryOracle oracle, const AcaOptions& options)
    : access_(std::move(oracle)),
      options_(options),
      model_(access_.rows(), access_.cols()),
      row_used_(static_cast<std::size_t>(access_.rows()), false),
      col_used_(static_cast<std::size_t>(access_.cols()), false),
      row_rejected_(static_cast<std::size_t>(access_.rows()), false) {
  const auto rows = static_cast<std::uint64_t>(access_.rows());
  const auto cols = static_cast<std::uint64_t>(access_.cols());
  if (options.probe_count < 1 || static_cast<std::uint64_t>(options.probe_count) > rows * cols) {
    throw InvalidConfiguration("probe count " + std::to_string(options.probe_count) +
                               " must lie in [1, rows*cols]");
  }
  if (options.start_row < 0 || options.start_row >= access_.rows()) {
    throw InvalidConfiguration("start row outside the matrix");
  }
  Rng rng(options.seed);
  const auto keys =
      sample_without_replacement(rng, rows * cols, static_cast<std::uint64_t>(options.probe_count));
  probes_.seed = options.seed;
  probes_.entries.reserve(keys.size());
  for (const auto key : keys) {
    const auto i = static_cast<Index>(key / cols);
    const auto j = static_cast<Index>(key % cols);
    probes_.entries.push_back({i, j, access_.entry(i, j)});
  }
}

Index CrossApproximation::next_row_candidate() const {
  if (model_.rank() == 0) return row_rejected_[options_.start_row] ? restart_row() : options_.start_row;
  const Eigen::VectorXd& last = model_.col_vectors().back();
  Index best = -1;
  double best_value = -1.0;
  for (Index i = 0; i < model_.rows(); ++i) {
    if (row_used_[i] || row_rejected_[i]) continue;
    const double value = std::abs(last(i));
    if (value > best_value) {
      best_value = value;
      best = i;
    }
  }
  return best;
}

Index CrossApproximation::restart_row() const {
  Index best = -1;
  double best_value = 0.0;
  for (const auto& p : probes_.entries) {
    if (row_used_[p.row] || row_rejected_[p.row]) continue;
    const double value = std::abs(p.residual);
    if (value > best_value) {
      best_value = value;
      best = p.row;
    }
  }
  return best;
}

const ProbePoint* CrossApproximation::largest_free_probe() const {
  const ProbePoint* best = nullptr;
  for (const auto& p : probes_.entries) {
    if (row_used_[p.row] || col_used_[p.col] || row_rejected_[p.row]) continue;
    if (!best || std::abs(p.residual) > std::abs(best->residual)) best = &p;
  }
  return best;
}

Eigen::VectorXd CrossApproximation::residual_row(Index i) {
  Eigen::VectorXd row = access_.row(i);
  for (Index l = 0; l < model_.rank(); ++l)
    row -= model_.col_vectors()[l](i) * model_.row_vectors()[l];
  return row;
}

Eigen::VectorXd CrossApproximation::residual_col(Index j) {
  Eigen::VectorXd col = access_.col(j);
  for (Index l = 0; l < model_.rank(); ++l)
    col -= model_.row_vectors()[l](j) * model_.col_vectors()[l];
  return col;
}

void CrossApproximation::step() {
  if (model_.rank() >= std::min(model_.rows(), model_.cols())) {
    throw RankExhausted("every row or column index is already a pivot");
  }
  Index i = next_row_candidate();
  for (int attempt = 0; attempt <= options_.max_restarts; ++attempt) {
    if (i < 0) break;
    Eigen::VectorXd row = residual_row(i);
    Index j = -1;
    double best = -1.0;
    for (Index c = 0; c < model_.cols(); ++c) {
      if (col_used_[c]) continue;
      if (std::abs(row(c)) > best) {
        best = std::abs(row(c));
        j = c;
      }
    }
    if (j < 0) break;
    if (options_.probe_guided && attempt == 0) {
      const ProbePoint* probe = largest_free_probe();
      if (probe && probe->row != i && std::abs(probe->residual) > std::abs(row(j))) {
        i = probe->row;
        row = residual_row(i);
        j = -1;
        best = -1.0;
        for (Index c = 0; c < model_.cols(); ++c) {
          if (!col_used_[c] && std::abs(row(c)) > best) {
            best = std::abs(row(c));
            j = c;
          }
        }
      }
    }
    const double delta = row(j);
    const bool acceptable = model_.rank() == 0
                                ? delta != 0.0
                                : std::abs(delta) >= options_.pivot_tolerance * std::abs(first_pivot_);
    if (acceptable) {
      Eigen::VectorXd col = residual_col(j) / delta;
      for (auto& p : probes_.entries) p.residual -= col(p.row) * row(p.col);
      if (model_.rank() == 0) first_pivot_ = delta;
      row_used_[i] = true;
      col_used_[j] = true;
      model_.append(i, j, std::move(col), std::move(row));
      return;
    }
    row_rejected_[i] = true;
    i = restart_row();
  }
  throw RankExhausted("no acceptable pivot after " + std::to_string(options_.max_restarts) +
                      " restarts at rank " + std::to_string(model_.rank()));
}

}  // namespace acatik

#include "acatik/regmat.hpp"

#include <string>
#include <utility>

#include "acatik/errors.hpp"

namespace acatik {

namespace {

using Triplet = Eigen::Triplet<double>;

Index band_rows(RegKind kind, Index n) {
  return n - static_cast<Index>(band_coefficients(kind).size()) + 1;
}

void check_size(RegKind kind, Index n) {
  const Index minimum = kind == RegKind::l2 ? 3 : (kind == RegKind::l1 ? 2 : 1);
  if (n < minimum) {
    throw InvalidConfiguration("regularization matrix " + std::string(to_string(kind)) +
                               " needs n >= " + std::to_string(minimum));
  }
}

}  // namespace

std::vector<double> band_coefficients(RegKind kind) {
  switch (kind) {
    case RegKind::l0: return {1.0};
    case RegKind::l1: return {0.5, -0.5};
    case RegKind::l2: return {-0.25, 0.5, -0.25};
  }
  return {};
}

RegMatrix::RegMatrix(RegKind kind, RegStructure structure, Sparse matrix)
    : kind_(kind), structure_(structure), matrix_(std::move(matrix)) {
  matrix_.makeCompressed();
}

Eigen::MatrixXd RegMatrix::apply(const Eigen::MatrixXd& x) const {
  if (x.rows() != cols()) {
    throw ShapeMismatch("regularization matrix has " + std::to_string(cols()) +
                        " columns, block has " + std::to_string(x.rows()) + " rows");
  }
  return matrix_ * x;
}

RegMatrix build_regmat(RegKind kind, Index n) {
  check_size(kind, n);
  const auto band = band_coefficients(kind);
  const Index p = band_rows(kind, n);
  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(p) * band.size());
  for (Index r = 0; r < p; ++r)
    for (std::size_t q = 0; q < band.size(); ++q)
      triplets.emplace_back(r, r + static_cast<Index>(q), band[q]);
  RegMatrix::Sparse m(p, n);
  m.setFromTriplets(triplets.begin(), triplets.end());
  return RegMatrix(kind, kind == RegKind::l0 ? RegStructure::identity : RegStructure::banded,
                   std::move(m));
}

RegMatrix build_kron_regmat(RegKind kind, Index grid_n) {
  if (grid_n < 3) throw InvalidConfiguration("Kronecker regularization needs grid_n >= 3");
  const auto band = band_coefficients(kind);
  const Index pb = band_rows(kind, grid_n);
  const Index n = grid_n * grid_n;
  const Index top = grid_n * pb;
  std::vector<Triplet> triplets;
  triplets.reserve(2 * static_cast<std::size_t>(top) * band.size());
  for (Index r = 0; r < pb; ++r) {
    for (std::size_t q = 0; q < band.size(); ++q) {
      const Index c = r + static_cast<Index>(q);
      for (Index b = 0; b < grid_n; ++b) {
        // I (x) L_d: block b maps grid column b.
        triplets.emplace_back(b * pb + r, b * grid_n + c, band[q]);
        // L_d (x) I: differences across grid columns.
        triplets.emplace_back(top + r * grid_n + b, c * grid_n + b, band[q]);
      }
    }
  }
  RegMatrix::Sparse m(2 * top, n);
  m.setFromTriplets(triplets.begin(), triplets.end());
  return RegMatrix(kind, RegStructure::kron_stack, std::move(m));
}

RegKind parse_reg_kind(std::string_view name) {
  if (name == "l0") return RegKind::l0;
  if (name == "l1") return RegKind::l1;
  if (name == "l2") return RegKind::l2;
  throw InvalidConfiguration("unknown regularization kind '" + std::string(name) + "'");
}

std::string_view to_string(RegKind kind) {
  switch (kind) {
    case RegKind::l0: return "l0";
    case RegKind::l1: return "l1";
    case RegKind::l2: return "l2";
  }
  return "?";
}

}  // namespace acatik

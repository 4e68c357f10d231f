#include "acatik/problems.hpp"

#include <cmath>
#include <numbers>
#include <utility>

#include "acatik/errors.hpp"
#include "acatik/random.hpp"

namespace acatik {

namespace {

using std::numbers::pi;

Eigen::VectorXd midpoints(Index n, double a, double b) {
  Eigen::VectorXd t(n);
  const double h = (b - a) / static_cast<double>(n);
  for (Index i = 0; i < n; ++i) t(i) = a + (static_cast<double>(i) + 0.5) * h;
  return t;
}

Eigen::VectorXd apply_oracle(const EntryOracle& a, const Eigen::VectorXd& x) {
  Eigen::VectorXd g(a.rows());
  for (Index i = 0; i < a.rows(); ++i) g(i) = a.row(i).dot(x);
  return g;
}

ProblemCore finish(std::string name, EntryOracle oracle, Eigen::VectorXd x, Index grid_n = 0) {
  Eigen::VectorXd g = apply_oracle(oracle, x);
  return {std::move(name), std::move(oracle), std::move(x), std::move(g), grid_n};
}

void require_size(Index n, Index minimum, const char* name) {
  if (n < minimum) {
    throw InvalidConfiguration(std::string(name) + " needs n >= " + std::to_string(minimum));
  }
}

double phillips_theta(double x) {
  return std::abs(x) < 3.0 ? 1.0 + std::cos(pi * x / 3.0) : 0.0;
}

EntryOracle baart_oracle(Index n) {
  const Eigen::VectorXd s = midpoints(n, 0.0, pi / 2.0);
  const Eigen::VectorXd t = midpoints(n, 0.0, pi);
  const double w = pi / static_cast<double>(n);
  Eigen::VectorXd cos_t = t.array().cos();
  return EntryOracle(n, n, [s, cos_t, w](Index i, Index j) {
    return w * std::exp(s(i) * cos_t(j));
  });
}

}  // namespace

ProblemCore gravity(Index n, double depth) {
  require_size(n, 8, "gravity");
  const Eigen::VectorXd t = midpoints(n, 0.0, 1.0);
  const double w = 1.0 / static_cast<double>(n);
  EntryOracle oracle(n, n, [t, w, depth](Index i, Index j) {
    const double diff = t(i) - t(j);
    return w * depth / std::pow(depth * depth + diff * diff, 1.5);
  });
  Eigen::VectorXd x = (pi * t.array()).sin() + 0.5 * (2.0 * pi * t.array()).sin();
  return finish("gravity", std::move(oracle), std::move(x));
}

ProblemCore baart(Index n) {
  require_size(n, 2, "baart");
  Eigen::VectorXd x = midpoints(n, 0.0, pi).array().sin();
  return finish("baart", baart_oracle(n), std::move(x));
}

Eigen::VectorXd baart_analytic_rhs(Index n) {
  const Eigen::VectorXd s = midpoints(n, 0.0, pi / 2.0);
  return 2.0 * s.array().sinh() / s.array();
}

ProblemCore phillips(Index n) {
  require_size(n, 4, "phillips");
  const Eigen::VectorXd t = midpoints(n, -6.0, 6.0);
  const double w = 12.0 / static_cast<double>(n);
  EntryOracle oracle(n, n, [t, w](Index i, Index j) { return w * phillips_theta(t(i) - t(j)); });
  Eigen::VectorXd x = t.unaryExpr([](double v) { return phillips_theta(v); });
  return finish("phillips", std::move(oracle), std::move(x));
}

ProblemCore baart2d(Index base_n) {
  require_size(base_n, 3, "baart2d");
  const EntryOracle base = baart_oracle(base_n);
  const Index n = base_n * base_n;
  // Row i = p*base_n + q, column j = r*base_n + s: (B (x) B)_{ij} = B_pr B_qs.
  EntryOracle oracle(n, n, [base, base_n](Index i, Index j) {
    return base.entry(i / base_n, j / base_n) * base.entry(i % base_n, j % base_n);
  });
  const Eigen::VectorXd xb = midpoints(base_n, 0.0, pi).array().sin();
  Eigen::VectorXd x(n);
  for (Index p = 0; p < base_n; ++p)
    for (Index q = 0; q < base_n; ++q) x(p * base_n + q) = xb(p) * xb(q);
  return finish("baart2d", std::move(oracle), std::move(x), base_n);
}

ProblemCore rank_one(Index n) {
  require_size(n, 2, "rank1");
  const Eigen::VectorXd t = midpoints(n, 0.0, 1.0);
  Eigen::VectorXd u = 1.0 + t.array();
  Eigen::VectorXd v = (-t.array()).exp() / static_cast<double>(n);
  Eigen::VectorXd x = (pi * t.array()).sin();
  return finish("rank1", outer_product_oracle(std::move(u), std::move(v)), std::move(x));
}

ProblemCore make_problem(std::string_view name, Index n) {
  if (name == "gravity") return gravity(n);
  if (name == "baart") return baart(n);
  if (name == "phillips") return phillips(n);
  if (name == "rank1") return rank_one(n);
  if (name == "baart2d") {
    const auto side = static_cast<Index>(std::lround(std::sqrt(static_cast<double>(n))));
    if (side * side != n) throw InvalidConfiguration("baart2d needs n to be a perfect square");
    return baart2d(side);
  }
  throw InvalidConfiguration("unknown problem '" + std::string(name) + "'");
}

ProblemInstance add_noise(ProblemCore core, const NoiseSpec& spec, std::uint64_t seed) {
  const double delta =
      spec.kind == NoiseSpec::Kind::absolute ? spec.value : spec.value * core.g_exact.norm();
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw InvalidConfiguration("noise level must be positive");
  }
  Rng rng(seed);
  const Eigen::VectorXd w = gaussian_vector(rng, core.g_exact.size());
  Eigen::VectorXd g = core.g_exact + (delta / w.norm()) * w;
  return ProblemInstance{std::move(core), std::move(g), delta, seed};
}

}  // namespace acatik

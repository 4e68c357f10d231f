#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "acatik/oracle.hpp"

namespace acatik {

/// A discretized first-kind integral equation A x = g with known solution.
struct ProblemCore {
  std::string name;
  EntryOracle oracle;
  Eigen::VectorXd x_exact;
  Eigen::VectorXd g_exact;  ///< A x_exact, computed through the oracle
  /// Grid side for problems posed on a square grid (n = grid_n^2), else 0.
  Index grid_n = 0;
};

/// Midpoint discretization of the gravity surveying kernel
/// d (d^2 + (s - t)^2)^{-3/2} on [0, 1]^2, x(t) = sin(pi t) + sin(2 pi t) / 2.
ProblemCore gravity(Index n, double depth = 0.25);

/// Kernel exp(s cos t), s in [0, pi/2], t in [0, pi]; x(t) = sin t.
ProblemCore baart(Index n);

/// Right-hand side 2 sinh(s) / s of the continuous baart equation at the
/// collocation points.
Eigen::VectorXd baart_analytic_rhs(Index n);

/// Phillips' kernel theta(s - t) on [-6, 6] with theta(x) = 1 + cos(pi x / 3)
/// for |x| < 3, else 0; x = theta.
ProblemCore phillips(Index n);

/// A = B (x) B with B the baart matrix of order base_n; x = x_B (x) x_B.
ProblemCore baart2d(Index base_n = 40);

/// Smooth rank-one matrix u v^T with u_i = 1 + t_i, v_j = exp(-t_j) / n.
ProblemCore rank_one(Index n);

/// Builds a problem by name: gravity, baart, phillips, baart2d, rank1.
/// For baart2d `n` is the total size and must be a perfect square.
ProblemCore make_problem(std::string_view name, Index n);

struct NoiseSpec {
  enum class Kind { absolute, relative };
  Kind kind = Kind::absolute;
  double value = 0.0;  ///< delta, or rho with delta = rho ||g_exact||

  static NoiseSpec absolute(double delta) { return {Kind::absolute, delta}; }
  static NoiseSpec relative(double rho) { return {Kind::relative, rho}; }
};

struct ProblemInstance {
  ProblemCore core;
  Eigen::VectorXd g_noisy;
  double delta = 0.0;  ///< ||g_noisy - g_exact|| = delta
  std::uint64_t seed = 0;
};

/// Adds seeded Gaussian noise rescaled to norm exactly delta.
ProblemInstance add_noise(ProblemCore core, const NoiseSpec& spec, std::uint64_t seed);

}  // namespace acatik

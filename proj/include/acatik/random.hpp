#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace acatik {

/// Seeded generator with platform-independent derived distributions.
///
/// std::mt19937_64 is fully specified by the standard, but the standard
/// distributions are not, so bounded integers and normals are derived here
/// with fixed algorithms (rejection sampling and Box-Muller).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();

  double normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Draws `count` distinct integers from [0, population) (Floyd's algorithm).
/// The result keeps Floyd's insertion order.
std::vector<std::uint64_t> sample_without_replacement(Rng& rng, std::uint64_t population,
                                                      std::uint64_t count);

Eigen::VectorXd gaussian_vector(Rng& rng, Eigen::Index n);

}  // namespace acatik

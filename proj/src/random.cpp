#include "acatik/random.hpp"

#include <cmath>
#include <numbers>
#include <unordered_set>

#include "acatik/errors.hpp"

namespace acatik {

std::uint64_t Rng::below(std::uint64_t bound) {
  if (bound == 0) throw InvalidConfiguration("Rng::below requires a positive bound");
  // Reject the top partial bucket so every residue is equally likely.
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
  std::uint64_t draw = engine_();
  while (draw >= limit) draw = engine_();
  return draw % bound;
}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 == 0.0) u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

std::vector<std::uint64_t> sample_without_replacement(Rng& rng, std::uint64_t population,
                                                      std::uint64_t count) {
  if (count > population) {
    throw InvalidConfiguration("cannot sample more elements than the population holds");
  }
  std::vector<std::uint64_t> picked;
  picked.reserve(count);
  std::unordered_set<std::uint64_t> taken;
  taken.reserve(count);
  for (std::uint64_t j = population - count; j < population; ++j) {
    const std::uint64_t candidate = rng.below(j + 1);
    const std::uint64_t value = taken.contains(candidate) ? j : candidate;
    taken.insert(value);
    picked.push_back(value);
  }
  return picked;
}

Eigen::VectorXd gaussian_vector(Rng& rng, Eigen::Index n) {
  Eigen::VectorXd w(n);
  for (Eigen::Index i = 0; i < n; ++i) w(i) = rng.normal();
  return w;
}

}  // namespace acatik

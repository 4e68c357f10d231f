#include <doctest.h>

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "acatik/errors.hpp"
#include "acatik/tikhonov.hpp"
#include "support/fixtures.hpp"

using namespace acatik;
using testing::make_fixture;
using testing::reg_for;

namespace {

// M_3 = I on a 3 x 3 matrix, so B = I and (with L = I) Bhat = I.
AcaModel identity_model() {
  AcaModel m(3, 3);
  for (Index l = 0; l < 3; ++l)
    m.append(l, l, Eigen::VectorXd::Unit(3, l), Eigen::VectorXd::Unit(3, l));
  return m;
}

ReducedSystem identity_system() {
  return factorize(identity_model(), build_regmat(RegKind::l0, 3), Eigen::VectorXd::Unit(3, 0));
}

std::vector<double> log_grid(double lo, double hi, int count) {
  std::vector<double> out;
  for (int q = 0; q < count; ++q)
    out.push_back(std::pow(10.0, std::log10(lo) + (std::log10(hi) - std::log10(lo)) * q / (count - 1)));
  return out;
}

}  // namespace

TEST_CASE("identity system has unit factors") {
  const ReducedSystem sys = identity_system();
  CHECK((sys.B.cwiseAbs() - Eigen::MatrixXd::Identity(3, 3)).norm() < 1e-15);
  CHECK((sys.Rl.cwiseAbs() - Eigen::MatrixXd::Identity(3, 3)).norm() < 1e-15);
  CHECK(sys.uses_substitution());
  CHECK(sys.well_posed());
  CHECK(sys.g_orth_norm == doctest::Approx(0.0));
}

TEST_CASE("filter factor one half at mu = 1") {
  const TikhonovSolution s = solve_for_mu(identity_system(), 1.0);
  CHECK((s.y - 0.5 * Eigen::VectorXd::Unit(3, 0)).norm() < 1e-15);
  CHECK(s.residual_proj == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(s.xnorm == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("large mu drives the solution to zero") {
  const ReducedSystem sys = identity_system();
  const TikhonovSolution s = solve_for_mu(sys, 1e12);
  CHECK(s.xnorm < 1e-11);
  CHECK(s.residual_proj == doctest::Approx(sys.gproj.norm()).epsilon(1e-4));
}

TEST_CASE("nonpositive mu is rejected") {
  const ReducedSystem sys = identity_system();
  CHECK_THROWS_AS(solve_for_mu(sys, 0.0), InvalidConfiguration);
  CHECK_THROWS_AS(solve_for_mu(sys, -1.0), InvalidConfiguration);
  CHECK_THROWS_AS(evaluate_reduced(sys, std::nan("")), InvalidConfiguration);
}

TEST_CASE("analytic discrepancy roots") {
  const ReducedSystem sys = identity_system();
  CHECK(discrepancy_root(sys, 0.5).mu == doctest::Approx(1.0).epsilon(1e-10));
  for (const double t : {0.1, 0.25, 0.9})
    CHECK(discrepancy_root(sys, t).mu == doctest::Approx(t / (1.0 - t)).epsilon(1e-10));
}

TEST_CASE("discrepancy targets out of range") {
  const ReducedSystem sys = identity_system();
  CHECK_THROWS_AS(discrepancy_root(sys, 1.0), NoRootAboveRange);
  CHECK_THROWS_AS(discrepancy_root(sys, 2.0), NoRootAboveRange);
  CHECK_THROWS_AS(discrepancy_root(sys, 0.0), InvalidConfiguration);
}

TEST_CASE("target below the smallest searched residual") {
  const ReducedSystem sys = identity_system();
  const double floor = evaluate_reduced(sys, sys.mu_min).residual_proj;
  REQUIRE(floor > 0.0);
  CHECK_THROWS_AS(discrepancy_root(sys, 0.5 * floor), NoRootBelowRange);
}

TEST_CASE("normal-equations oracle agrees at n = 32") {
  const auto f = make_fixture("gravity", 32, 8, 1e-3);
  for (const int order : {0, 1, 2}) {
    const RegMatrix reg = reg_for(order, f.instance.core);
    const ReducedSystem sys = factorize(f.model, reg, f.instance.g_noisy);
    const auto ref = testing::reference_for(f, reg, f.instance.g_noisy);
    for (const double mu : {1e-6, 1e-2, 1.0}) {
      const TikhonovSolution s = solve_for_mu(sys, mu);
      const Eigen::VectorXd x = ref.x(mu);
      CHECK((s.x - x).norm() <= 1e-8 * x.norm());
      CHECK(s.residual_proj == doctest::Approx(ref.residual_proj(mu)).epsilon(1e-8));
      CHECK(s.xnorm == doctest::Approx(s.x.norm()).epsilon(1e-12));
    }
  }
}

TEST_CASE("evaluate_reduced matches the full solve") {
  const auto f = make_fixture("baart", 48, 6, 1e-3);
  const ReducedSystem sys = factorize(f.model, reg_for(1, f.instance.core), f.instance.g_noisy);
  for (const double mu : {1e-8, 1e-3, 10.0}) {
    const TikhonovSolution s = solve_for_mu(sys, mu);
    const ReducedEvaluation e = evaluate_reduced(sys, mu);
    CHECK(e.residual_proj == doctest::Approx(s.residual_proj).epsilon(1e-14));
    CHECK(e.ynorm == doctest::Approx(s.xnorm).epsilon(1e-14));
  }
}

TEST_CASE("gravity root agrees with a bisection oracle") {
  const auto f = make_fixture("gravity", 64, 12, 1e-2);
  const RegMatrix reg = reg_for(2, f.instance.core);
  const ReducedSystem sys = factorize(f.model, reg, f.instance.g_noisy);
  const auto ref = testing::reference_for(f, reg, f.instance.g_noisy);
  const double target = f.instance.delta;
  const TikhonovSolution s = discrepancy_root(sys, target);
  CHECK(std::abs(s.residual_proj - target) <= 1e-8 * target);
  CHECK(std::abs(ref.residual_proj(s.mu) - target) <= 1e-8 * target);
  const double mu_bisect = testing::bisect_log(
      [&](double mu) { return ref.residual_proj(mu) - target; }, sys.mu_min, sys.mu_max, 60);
  CHECK(s.mu == doctest::Approx(mu_bisect).epsilon(1e-6));
}

TEST_CASE("projector and factorization identities") {
  const auto f = make_fixture("gravity", 64, 10, 1e-2);
  const ReducedSystem sys = factorize(f.model, reg_for(1, f.instance.core), f.instance.g_noisy);
  CHECK((f.mk * sys.Qr - sys.Qc * sys.B).norm() < 1e-10);
  CHECK((sys.B - sys.Rc * sys.Rr.transpose()).norm() <= 1e-12 * sys.B.norm());
  const Eigen::VectorXd g = testing::random_vector(64, 51);
  const ReducedSystem rnd = factorize(f.model, reg_for(1, f.instance.core), g);
  const double lhs = rnd.gproj.squaredNorm() + rnd.g_orth_norm * rnd.g_orth_norm;
  CHECK(lhs == doctest::Approx(g.squaredNorm()).epsilon(1e-10));
}

TEST_CASE("residual splits into projected and orthogonal parts") {
  const auto f = make_fixture("phillips", 64, 9, 1e-2);
  const ReducedSystem sys = factorize(f.model, reg_for(2, f.instance.core), f.instance.g_noisy);
  for (std::uint64_t seed = 60; seed < 65; ++seed) {
    const Eigen::VectorXd y = testing::random_vector(sys.rank(), seed);
    const double full = (f.mk * (sys.Qr * y) - f.instance.g_noisy).squaredNorm();
    const double split = (sys.B * y - sys.gproj).squaredNorm() + sys.g_orth_norm * sys.g_orth_norm;
    CHECK(full == doctest::Approx(split).epsilon(1e-10));
  }
}

TEST_CASE("residual rises and the penalized norm falls with mu") {
  for (const char* problem : {"gravity", "baart", "phillips"}) {
    const auto f = make_fixture(problem, 64, 8, 1e-2);
    for (const int order : {0, 1, 2}) {
      const ReducedSystem sys = factorize(f.model, reg_for(order, f.instance.core), f.instance.g_noisy);
      const auto grid = log_grid(1e-12, 1e12, 50);
      TikhonovSolution prev = solve_for_mu(sys, grid[0]);
      for (std::size_t q = 1; q < grid.size(); ++q) {
        const TikhonovSolution s = solve_for_mu(sys, grid[q]);
        CHECK(s.residual_proj > prev.residual_proj);
        CHECK((sys.Rl * s.y).norm() < (sys.Rl * prev.y).norm());
        if (order == 0) CHECK(s.xnorm < prev.xnorm);
        prev = s;
      }
    }
  }
}

TEST_CASE("the plain norm need not fall with mu for general L") {
  // baart, n = 64, k = 8, L2: ||x_mu|| rises by about 2e-3 (relative) at one
  // grid step while ||L x_mu|| keeps falling.
  const auto f = make_fixture("baart", 64, 8, 1e-2);
  const ReducedSystem sys = factorize(f.model, reg_for(2, f.instance.core), f.instance.g_noisy);
  double biggest_rise = 0.0;
  const auto grid = log_grid(1e-12, 1e12, 50);
  for (std::size_t q = 1; q < grid.size(); ++q) {
    const double before = evaluate_reduced(sys, grid[q - 1]).ynorm;
    biggest_rise = std::max(biggest_rise, evaluate_reduced(sys, grid[q]).ynorm / before - 1.0);
  }
  CHECK(biggest_rise > 1e-3);
}

TEST_CASE("well-posed systems have trivially intersecting null spaces") {
  for (const int order : {0, 1, 2}) {
    for (const Index k : {2, 5, 9}) {
      const auto f = make_fixture("gravity", 24, k, 1e-2);
      const RegMatrix reg = reg_for(order, f.instance.core);
      const ReducedSystem sys = factorize(f.model, reg, f.instance.g_noisy);
      if (!sys.well_posed()) continue;
      Eigen::MatrixXd stacked(f.mk.rows() + reg.rows(), sys.rank());
      stacked << f.mk * sys.Qr, reg.dense() * sys.Qr;
      CHECK(testing::numerical_rank(stacked, 1e-12) == sys.rank());
    }
  }
}

TEST_CASE("ill-conditioned R_L takes the stacked least-squares path") {
  const auto f = make_fixture("gravity", 32, 8, 1e-3);
  const RegMatrix reg = reg_for(2, f.instance.core);
  FactorizeOptions opts;
  opts.rl_condition_limit = 1.0;  // force the fallback
  const ReducedSystem stacked = factorize(f.model, reg, f.instance.g_noisy, opts);
  const ReducedSystem standard = factorize(f.model, reg, f.instance.g_noisy);
  CHECK_FALSE(stacked.uses_substitution());
  CHECK(standard.uses_substitution());
  const auto ref = testing::reference_for(f, reg, f.instance.g_noisy);
  for (const double mu : {1e-6, 1e-2, 1.0}) {
    const Eigen::VectorXd x = ref.x(mu);
    CHECK((solve_for_mu(stacked, mu).x - x).norm() <= 1e-8 * x.norm());
  }
  const double target = f.instance.delta;
  CHECK(discrepancy_root(stacked, target).mu ==
        doctest::Approx(discrepancy_root(standard, target).mu).epsilon(1e-6));
}

TEST_CASE("zero estimate with exact data accepts through the discrepancy path") {
  const ReducedSystem sys = identity_system();
  const StopDecision d = stopping_check(sys, 0.0, 0.25, 1.0, 1.0);
  CHECK(d.accepted);
  CHECK(d.status == StopStatus::accepted_small_estimate);
  CHECK(d.mu_star == doctest::Approx(0.25 / 0.75).epsilon(1e-10));
  CHECK(d.term2 <= 0.25 * (1 + 1e-8));
}

TEST_CASE("stopping root solves S_k ||x|| = eta1 delta") {
  const ReducedSystem sys = identity_system();
  // ||y(mu)|| = 1 / (1 + mu); S_k = 1, eta1 delta = 0.2 gives mu = 4, residual 0.8.
  const StopDecision rejected = stopping_check(sys, 1.0, 0.2, 1.0, 1.0);
  CHECK(rejected.mu_star == doctest::Approx(4.0).epsilon(1e-10));
  CHECK(rejected.term1 == doctest::Approx(0.2).epsilon(1e-10));
  CHECK(rejected.term2 == doctest::Approx(0.8).epsilon(1e-10));
  CHECK_FALSE(rejected.accepted);
  CHECK(rejected.status == StopStatus::residual_too_large);
  const StopDecision accepted = stopping_check(sys, 1.0, 0.2, 1.0, 4.0);
  CHECK(accepted.accepted);
  CHECK(accepted.status == StopStatus::accepted_estimate_root);
}

TEST_CASE("data outside the range is not accepted") {
  AcaModel m(3, 3);
  m.append(0, 0, Eigen::VectorXd::Unit(3, 0), Eigen::VectorXd::Unit(3, 0));
  const ReducedSystem sys = factorize(m, build_regmat(RegKind::l0, 3), Eigen::Vector3d(0, 1, 0));
  const StopDecision d = stopping_check(sys, 0.0, 0.5, 1.0, 1.0);
  CHECK_FALSE(d.accepted);
  CHECK(d.status == StopStatus::outside_range);
}

TEST_CASE("invalid stopping inputs") {
  const ReducedSystem sys = identity_system();
  CHECK_THROWS_AS(stopping_check(sys, -1.0, 0.1, 1, 1), InvalidConfiguration);
  CHECK_THROWS_AS(stopping_check(sys, 1.0, 0.0, 1, 1), InvalidConfiguration);
  CHECK_THROWS_AS(stopping_check(sys, 1.0, 0.1, 0, 1), InvalidConfiguration);
}

TEST_CASE("accepted decisions respect both bounds") {
  const auto f = make_fixture("gravity", 128, 20, 1e-2);
  const ReducedSystem sys = factorize(f.model, reg_for(2, f.instance.core), f.instance.g_noisy);
  for (const double s : {0.0, 1e-6, 1e-4, 1e-2}) {
    const StopDecision d = stopping_check(sys, s, 1e-2, 1.0, 1.0);
    if (!d.accepted) continue;
    CHECK(d.term1 <= 1e-2 * (1 + 1e-8));
    CHECK(d.term2 <= 1e-2 * (1 + 1e-8));
  }
}

TEST_CASE("true residual at acceptance stays within the stopping bound") {
  for (const char* problem : {"gravity", "baart", "phillips"}) {
    for (const int order : {0, 1, 2}) {
      const ProblemInstance inst =
          add_noise(make_problem(problem, 256), NoiseSpec::absolute(1e-2), 8);
      SolverOptions o;
      o.delta = inst.delta;
      o.max_k = 80;
      o.aca.probe_count = 50 * 256;
      o.aca.seed = 9;
      const RegMatrix reg = reg_for(order, inst.core);
      const SolverResult r = run_solver(inst.core.oracle, reg, inst.g_noisy, o);
      if (!r.accepted) continue;
      const Eigen::MatrixXd a = inst.core.oracle.materialize();
      const double truth = (a * r.solution.x - inst.g_noisy).norm();
      INFO(problem, " L", order, " k*=", r.decision.k_star, " residual=", truth);
      CHECK(truth <= 2.0 * (o.eta1 + o.eta2) * o.delta);
    }
  }
}

TEST_CASE("rank-one consistent system halts after one step") {
  const ProblemInstance inst = add_noise(rank_one(100), NoiseSpec::absolute(1e-10), 4);
  SolverOptions o;
  o.delta = inst.delta;
  o.max_k = 10;
  o.aca.probe_count = 1000;
  o.x_reference = inst.core.x_exact;
  const SolverResult r = run_solver(inst.core.oracle, build_regmat(RegKind::l0, 100), inst.g_noisy, o);
  REQUIRE(r.accepted);
  CHECK(r.decision.k_star == 1);
  const Eigen::VectorXd ax = inst.core.oracle.materialize() * r.solution.x;
  CHECK((ax - inst.g_noisy).norm() / inst.g_noisy.norm() < inst.delta);
}

TEST_CASE("trace records every evaluated step") {
  const ProblemInstance inst = add_noise(gravity(128), NoiseSpec::absolute(1e-2), 5);
  SolverOptions o;
  o.delta = inst.delta;
  o.max_k = 12;
  o.stride = 3;
  o.aca.probe_count = 128 * 50;
  o.x_reference = inst.core.x_exact;
  o.run_to_max_k = true;
  const SolverResult r = run_solver(inst.core.oracle, build_regmat(RegKind::l2, 128), inst.g_noisy, o);
  REQUIRE(r.trace.size() == 4);
  for (std::size_t q = 0; q < r.trace.size(); ++q) {
    CHECK(r.trace[q].k == static_cast<Index>(3 * (q + 1)));
    CHECK(std::isfinite(r.trace[q].rel_error));
  }
  CHECK(r.model.rank() <= 12);
}

TEST_CASE("solver option validation") {
  const ProblemInstance inst = add_noise(gravity(16), NoiseSpec::absolute(1e-2), 5);
  const RegMatrix reg = build_regmat(RegKind::l0, 16);
  SolverOptions o;
  o.delta = 0.0;
  CHECK_THROWS_AS(run_solver(inst.core.oracle, reg, inst.g_noisy, o), InvalidConfiguration);
  o.delta = 1e-2;
  o.max_k = 17;
  CHECK_THROWS_AS(run_solver(inst.core.oracle, reg, inst.g_noisy, o), InvalidConfiguration);
  o.max_k = 4;
  CHECK_THROWS_AS(run_solver(inst.core.oracle, reg, Eigen::VectorXd::Ones(5), o), ShapeMismatch);
}

TEST_CASE("mu rule names") {
  CHECK(parse_mu_rule("stop") == MuRule::stopping);
  CHECK(parse_mu_rule("discrepancy") == MuRule::discrepancy);
  CHECK(to_string(MuRule::discrepancy) == "discrepancy");
  CHECK_THROWS_AS(parse_mu_rule("gcv"), InvalidConfiguration);
}

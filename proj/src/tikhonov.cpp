#include "acatik/tikhonov.hpp"

#include <cmath>
#include <string>
#include <utility>

#include <Eigen/SVD>

#include "acatik/errors.hpp"

namespace acatik {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Sample {
  double value;
  double slope;  // NaN when unavailable
};

// Root of a function on [lo, hi] (log-mu coordinates) whose endpoint values
// have opposite signs. Newton steps are used when a slope is supplied and
// land inside the bracket; otherwise Illinois false position. The bracket
// always shrinks, so the iteration cannot escape.
double bracketed_root(const std::function<Sample(double)>& fn, double lo, double hi, double f_lo,
                      double f_hi, double ftol) {
  int side = 0;
  double s = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const Sample f = fn(s);
    if (std::abs(f.value) <= ftol) return s;
    if ((f.value < 0.0) == (f_lo < 0.0)) {
      lo = s;
      f_lo = f.value;
      if (side == -1) f_hi *= 0.5;
      side = -1;
    } else {
      hi = s;
      f_hi = f.value;
      if (side == 1) f_lo *= 0.5;
      side = 1;
    }
    if (hi - lo <= 1e-15 * std::max(1.0, std::abs(s))) return s;
    double next = kNaN;
    if (std::isfinite(f.slope) && f.slope != 0.0) next = s - f.value / f.slope;
    if (!(next > lo && next < hi)) next = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    s = next;
  }
  return s;
}

struct FullEvaluation {
  Eigen::VectorXd y;
  double residual_proj = 0.0;
  double dres2_dmu = kNaN;   // d residual^2 / d mu
  double dy2_dmu = kNaN;     // d ||y||^2 / d mu
};

FullEvaluation evaluate_full(const ReducedSystem& sys, double mu) {
  FullEvaluation out;
  if (sys.uses_substitution()) {
    const auto& svd = *sys.bhat_svd;
    const Eigen::ArrayXd s2 = svd.sigma.array().square();
    const Eigen::ArrayXd beta = sys.gproj_coeffs.array();
    const Eigen::ArrayXd denom = s2 + mu;
    const Eigen::ArrayXd filter = svd.sigma.array() / denom;
    const Eigen::VectorXd z = svd.V * (filter * beta).matrix();
    out.y = tri_solve(sys.Rl, z);
    const Eigen::ArrayXd damp = mu / denom;
    out.residual_proj = std::sqrt((damp * beta).square().sum());
    out.dres2_dmu = (2.0 * damp * s2 / denom.square() * beta.square()).sum();
    const Eigen::VectorXd dz = svd.V * (-svd.sigma.array() / denom.square() * beta).matrix();
    out.dy2_dmu = 2.0 * out.y.dot(tri_solve(sys.Rl, dz));
  } else {
    const Index k = sys.rank();
    Eigen::MatrixXd stacked(2 * k, k);
    stacked << sys.B, std::sqrt(mu) * sys.Rl;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(2 * k);
    rhs.head(k) = sys.gproj;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(stacked, Eigen::ComputeThinU | Eigen::ComputeThinV);
    out.y = svd.solve(rhs);
    out.residual_proj = (sys.B * out.y - sys.gproj).norm();
  }
  return out;
}

void check_mu(double mu) {
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    throw InvalidConfiguration("regularization parameter must be positive and finite");
  }
}

}  // namespace

ReducedSystem factorize(const AcaModel& model, const RegMatrix& reg, const Eigen::VectorXd& g,
                        const FactorizeOptions& options) {
  const Index k = model.rank();
  if (k < 1) throw InvalidConfiguration("factorize needs a model of rank >= 1");
  if (reg.cols() != model.cols()) throw ShapeMismatch("regularization matrix width != matrix width");
  if (g.size() != model.rows()) throw ShapeMismatch("data vector length != matrix height");
  if (reg.rows() < k) throw ShapeMismatch("regularization matrix has fewer rows than the rank");

  ReducedSystem sys;
  QrFactors qc = qr_skinny(model.column_factor());
  QrFactors qr = qr_skinny(model.row_factor());
  QrFactors ql = qr_skinny(reg.apply(qr.Q));
  sys.rc_deficient = qc.rank_deficient;
  sys.rr_deficient = qr.rank_deficient;
  sys.rl_deficient = ql.rank_deficient;
  sys.Qc = std::move(qc.Q);
  sys.Rc = std::move(qc.R);
  sys.Qr = std::move(qr.Q);
  sys.Rr = std::move(qr.R);
  sys.Ql = std::move(ql.Q);
  sys.Rl = std::move(ql.R);
  sys.B = sys.Rc * sys.Rr.transpose();

  sys.gproj = sys.Qc.transpose() * g;
  sys.g_norm = g.norm();
  sys.g_orth_norm = (g - sys.Qc * sys.gproj).norm();
  sys.rl_condition = condition_number(sys.Rl);

  // Generalized singular value range of (B, R_L), exact on the substitution path.
  double high = 0.0;
  double low = 0.0;
  if (sys.rl_condition <= options.rl_condition_limit) {
    // Bhat R_L = B  <=>  R_L^T Bhat^T = B^T.
    sys.Bhat = tri_solve(sys.Rl, Eigen::MatrixXd(sys.B.transpose()), true).transpose();
    sys.bhat_svd = svd_small(sys.Bhat);
    sys.gproj_coeffs = sys.bhat_svd->U.transpose() * sys.gproj;
    high = sys.bhat_svd->sigma(0);
    low = sys.bhat_svd->sigma(k - 1);
  } else {
    const SvdFactors b = svd_small(sys.B);
    const SvdFactors l = svd_small(sys.Rl);
    if (l.sigma(0) > 0.0) {
      high = b.sigma(0) / l.sigma(k - 1);
      low = b.sigma(k - 1) / l.sigma(0);
    }
  }
  if (!(high > 0.0) || !std::isfinite(high)) high = 1.0;
  const double widen = std::pow(10.0, options.bracket_decades);
  sys.mu_min = high * high / widen;
  // Reach below the smallest filter pole so mu_min behaves like mu -> 0+.
  if (low > 0.0) sys.mu_min = std::min(sys.mu_min, 1e-4 * low * low);
  sys.mu_max = high * high * widen;
  return sys;
}

ReducedEvaluation evaluate_reduced(const ReducedSystem& sys, double mu) {
  check_mu(mu);
  const FullEvaluation e = evaluate_full(sys, mu);
  return {e.residual_proj, e.y.norm()};
}

TikhonovSolution solve_for_mu(const ReducedSystem& sys, double mu) {
  check_mu(mu);
  FullEvaluation e = evaluate_full(sys, mu);
  TikhonovSolution sol;
  sol.mu = mu;
  sol.x = sys.Qr * e.y;
  sol.xnorm = e.y.norm();
  sol.y = std::move(e.y);
  sol.residual_proj = e.residual_proj;
  return sol;
}

TikhonovSolution discrepancy_root(const ReducedSystem& sys, double target) {
  if (!(target > 0.0)) throw InvalidConfiguration("discrepancy target must be positive");
  const double gproj_norm = sys.gproj.norm();
  if (target >= gproj_norm) {
    throw NoRootAboveRange("target " + std::to_string(target) + " >= ||Q_c^T g|| = " +
                           std::to_string(gproj_norm));
  }
  const double lo = std::log(sys.mu_min);
  const double hi = std::log(sys.mu_max);
  auto fn = [&](double s) {
    const double mu = std::exp(s);
    const FullEvaluation e = evaluate_full(sys, mu);
    const double r2 = e.residual_proj * e.residual_proj;
    // log r - log target; slope d(log r)/d(log mu) = mu phi' / (2 phi).
    return Sample{std::log(e.residual_proj) - std::log(target), mu * e.dres2_dmu / (2.0 * r2)};
  };
  const Sample f_lo = fn(lo);
  const Sample f_hi = fn(hi);
  if (f_lo.value > 0.0) {
    throw NoRootBelowRange("target below the mu -> 0 residual");
  }
  if (f_hi.value < 0.0) {
    throw NoRootAboveRange("target above the residual at the largest searched mu");
  }
  if (f_lo.value == 0.0) return solve_for_mu(sys, sys.mu_min);
  if (f_hi.value == 0.0) return solve_for_mu(sys, sys.mu_max);
  const double s = bracketed_root(fn, lo, hi, f_lo.value, f_hi.value, 1e-14);
  return solve_for_mu(sys, std::exp(s));
}

std::string_view to_string(StopStatus status) {
  switch (status) {
    case StopStatus::accepted_estimate_root: return "accepted";
    case StopStatus::accepted_small_estimate: return "accepted_small_estimate";
    case StopStatus::residual_too_large: return "residual_too_large";
    case StopStatus::estimate_too_large: return "estimate_too_large";
    case StopStatus::outside_range: return "outside_range";
  }
  return "?";
}

StopDecision stopping_check(const ReducedSystem& sys, double S_k, double delta, double eta1,
                            double eta2) {
  if (!(S_k >= 0.0)) throw InvalidConfiguration("error estimate must be nonnegative");
  if (!(delta > 0.0) || !(eta1 > 0.0) || !(eta2 > 0.0)) {
    throw InvalidConfiguration("delta, eta1 and eta2 must be positive");
  }
  StopDecision d;
  d.k_star = sys.rank();
  d.S_k = S_k;
  const double bound1 = eta1 * delta;
  const double bound2 = eta2 * delta;
  auto full_residual = [&](double residual_proj) {
    return std::hypot(residual_proj, sys.g_orth_norm);
  };

  const double lo = std::log(sys.mu_min);
  const double hi = std::log(sys.mu_max);
  const FullEvaluation at_lo = evaluate_full(sys, sys.mu_min);
  const double sup_term1 = S_k * at_lo.y.norm();

  if (S_k > 0.0 && sup_term1 >= bound1) {
    auto fn = [&](double s) {
      const double mu = std::exp(s);
      const FullEvaluation e = evaluate_full(sys, mu);
      const double y2 = e.y.squaredNorm();
      return Sample{std::log(S_k) + 0.5 * std::log(y2) - std::log(bound1),
                    mu * e.dy2_dmu / (2.0 * y2)};
    };
    const Sample f_hi = fn(hi);
    if (f_hi.value > 0.0) {
      const FullEvaluation e = evaluate_full(sys, sys.mu_max);
      d.mu_star = sys.mu_max;
      d.term1 = S_k * e.y.norm();
      d.term2 = full_residual(e.residual_proj);
      d.status = StopStatus::estimate_too_large;
      return d;
    }
    const double f_lo = std::log(sup_term1) - std::log(bound1);
    double s = lo;
    if (f_lo > 0.0) s = f_hi.value == 0.0 ? hi : bracketed_root(fn, lo, hi, f_lo, f_hi.value, 1e-13);
    d.mu_star = std::exp(s);
    const FullEvaluation e = evaluate_full(sys, d.mu_star);
    d.term1 = S_k * e.y.norm();
    d.term2 = full_residual(e.residual_proj);
    d.accepted = d.term2 <= bound2;
    d.status = d.accepted ? StopStatus::accepted_estimate_root : StopStatus::residual_too_large;
    return d;
  }

  // S_k ||x_mu|| stays below eta1 delta for every mu: only the residual
  // condition remains, solved through the exact orthogonal split.
  const double target2 = bound2 * bound2 - sys.g_orth_norm * sys.g_orth_norm;
  if (target2 > 0.0) {
    try {
      const TikhonovSolution sol = discrepancy_root(sys, std::sqrt(target2));
      d.mu_star = sol.mu;
      d.term1 = S_k * sol.xnorm;
      d.term2 = full_residual(sol.residual_proj);
      d.accepted = true;
      d.status = StopStatus::accepted_small_estimate;
      return d;
    } catch (const NoRootAboveRange&) {
    } catch (const NoRootBelowRange&) {
    }
  }
  d.mu_star = sys.mu_min;
  d.term1 = sup_term1;
  d.term2 = full_residual(at_lo.residual_proj);
  d.status = StopStatus::outside_range;
  return d;
}

std::string_view to_string(MuRule rule) {
  return rule == MuRule::stopping ? "stop" : "discrepancy";
}

MuRule parse_mu_rule(std::string_view name) {
  if (name == "stop") return MuRule::stopping;
  if (name == "discrepancy") return MuRule::discrepancy;
  throw InvalidConfiguration("unknown mu rule '" + std::string(name) + "'");
}

TikhonovSolution reported_solution(const ReducedSystem& sys, double target, double fallback_mu) {
  try {
    return discrepancy_root(sys, target);
  } catch (const NoRootAboveRange&) {
  } catch (const NoRootBelowRange&) {
  }
  return solve_for_mu(sys, fallback_mu > 0.0 ? fallback_mu : sys.mu_min);
}

SolverResult run_solver(const EntryOracle& oracle, const RegMatrix& reg, const Eigen::VectorXd& g,
                        const SolverOptions& options) {
  if (!(options.delta > 0.0)) throw InvalidConfiguration("noise bound delta must be positive");
  if (options.max_k < 1 || options.max_k > std::min(oracle.rows(), oracle.cols())) {
    throw InvalidConfiguration("max_k must lie in [1, min(rows, cols)]");
  }
  if (options.stride < 1) throw InvalidConfiguration("stride must be >= 1");
  if (g.size() != oracle.rows()) throw ShapeMismatch("data vector length != matrix height");
  if (options.x_reference && options.x_reference->size() != oracle.cols()) {
    throw ShapeMismatch("reference solution length != matrix width");
  }

  CrossApproximation aca(oracle, options.aca);
  SolverResult result;
  Index evaluated_rank = 0;
  for (Index k = 1; k <= options.max_k; ++k) {
    bool exhausted = false;
    try {
      aca.step();
    } catch (const RankExhausted&) {
      exhausted = true;
      result.rank_exhausted = true;
    }
    const Index rank = aca.model().rank();
    if (rank == 0 || (exhausted && rank == evaluated_rank)) break;
    if (!exhausted && rank % options.stride != 0 && k != options.max_k) continue;

    const ReducedSystem sys = factorize(aca.model(), reg, g, options.factorize);
    const double S_k = aca.estimate_error(options.sk_mode).value;
    StepRecord rec;
    rec.k = rank;
    rec.S_k = S_k;
    rec.decision = stopping_check(sys, S_k, options.delta, options.eta1, options.eta2);
    TikhonovSolution sol =
        options.mu_rule == MuRule::stopping
            ? solve_for_mu(sys, rec.decision.mu_star)
            : reported_solution(sys, options.eta * options.delta, rec.decision.mu_star);
    rec.mu = sol.mu;
    rec.term1 = rec.decision.term1;
    rec.term2 = rec.decision.term2;
    rec.xnorm = sol.xnorm;
    rec.unique_evals = aca.counter().unique_entries();
    if (options.x_reference) {
      rec.rel_error = (sol.x - *options.x_reference).norm() / options.x_reference->norm();
    }
    if (options.observer) options.observer(aca, rec);
    evaluated_rank = rank;
    const bool newly_accepted = !result.accepted && rec.decision.accepted;
    if (!result.accepted) {
      result.decision = rec.decision;
      result.solution = std::move(sol);
      result.model = aca.model();
    }
    result.trace.push_back(std::move(rec));
    if (newly_accepted) {
      result.accepted = true;
      if (!options.run_to_max_k) break;
    }
    if (exhausted) break;
  }
  if (!result.accepted) result.model = aca.model();
  result.unique_evals = aca.counter().unique_entries();
  result.total_calls = aca.counter().total_calls();
  return result;
}

}  // namespace acatik

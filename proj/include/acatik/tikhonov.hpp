#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "acatik/aca.hpp"
#include "acatik/kernels.hpp"
#include "acatik/regmat.hpp"

namespace acatik {

/// The Tikhonov problem restricted to span(Q^(r)) and reduced to k x k:
///
///   min_y ||B y - Q_c^T g||^2 + mu ||R_L y||^2,  B = R_c R_r^T,  L Q_r = Q_L R_L.
///
/// With R_L acceptably conditioned it is solved in standard form through the
/// SVD of Bhat = B R_L^{-1}; otherwise each mu is solved from the stacked
/// 2k x k least-squares problem [B; sqrt(mu) R_L].
struct ReducedSystem {
  Eigen::MatrixXd Qc, Rc;
  Eigen::MatrixXd Qr, Rr;
  Eigen::MatrixXd Ql, Rl;
  Eigen::MatrixXd B;
  Eigen::MatrixXd Bhat;                 ///< empty unless uses_substitution()
  std::optional<SvdFactors> bhat_svd;
  Eigen::VectorXd gproj;                ///< Q_c^T g
  Eigen::VectorXd gproj_coeffs;         ///< U^T gproj on the substitution path
  double g_norm = 0.0;
  double g_orth_norm = 0.0;             ///< ||g - Q_c Q_c^T g||
  double rl_condition = 0.0;
  bool rc_deficient = false;
  bool rr_deficient = false;
  bool rl_deficient = false;
  double mu_min = 0.0;                  ///< root-search bracket
  double mu_max = 0.0;

  Index rank() const { return Rc.rows(); }
  bool uses_substitution() const { return bhat_svd.has_value(); }
  /// Unique solvability of the reduced problem is guaranteed.
  bool well_posed() const { return !rc_deficient && !rr_deficient && !rl_deficient; }
};

struct FactorizeOptions {
  double rl_condition_limit = 1e12;
  double bracket_decades = 14.0;
};

ReducedSystem factorize(const AcaModel& model, const RegMatrix& reg, const Eigen::VectorXd& g,
                        const FactorizeOptions& options = {});

struct TikhonovSolution {
  double mu = 0.0;
  Eigen::VectorXd y;             ///< coefficients in span(Q_r)
  Eigen::VectorXd x;             ///< Q_r y
  double residual_proj = 0.0;    ///< ||B y - gproj||
  double xnorm = 0.0;            ///< ||x|| = ||y||
};

/// Solution for one mu > 0 with x lifted to full length.
TikhonovSolution solve_for_mu(const ReducedSystem& sys, double mu);

/// Residual and norm only, without the O(nk) lift.
struct ReducedEvaluation {
  double residual_proj = 0.0;
  double ynorm = 0.0;
};
ReducedEvaluation evaluate_reduced(const ReducedSystem& sys, double mu);

/// mu with residual_proj(mu) = target (projected discrepancy equation).
TikhonovSolution discrepancy_root(const ReducedSystem& sys, double target);

enum class StopStatus {
  accepted_estimate_root,     ///< S_k ||x_mu|| = eta1 delta solved, residual within eta2 delta
  accepted_small_estimate,    ///< S_k ||x_mu|| < eta1 delta for all mu
  residual_too_large,         ///< root found but ||M_k x - g|| > eta2 delta
  estimate_too_large,         ///< S_k ||x_mu|| > eta1 delta even at mu_max
  outside_range,              ///< g outside range(M_k) by more than eta2 delta
};

std::string_view to_string(StopStatus status);

struct StopDecision {
  Index k_star = 0;
  double mu_star = 0.0;
  double S_k = 0.0;
  double term1 = 0.0;      ///< S_k ||x_mu||
  double term2 = 0.0;      ///< ||M_k x_mu - g||
  bool accepted = false;
  StopStatus status = StopStatus::outside_range;
};

StopDecision stopping_check(const ReducedSystem& sys, double S_k, double delta, double eta1,
                            double eta2);

struct StepRecord {
  Index k = 0;
  double S_k = 0.0;
  double mu = 0.0;           ///< parameter of the reported solution
  double term1 = 0.0;
  double term2 = 0.0;
  double xnorm = 0.0;
  double rel_error = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t unique_evals = 0;
  double true_resid_fro = std::numeric_limits<double>::quiet_NaN();
  StopDecision decision;
};

/// How the reported solution's mu is picked at each evaluated step.
enum class MuRule {
  stopping,     ///< mu* of the stopping check
  discrepancy,  ///< projected discrepancy ||M_k x - Q_c Q_c^T g|| = eta delta
};

std::string_view to_string(MuRule rule);
MuRule parse_mu_rule(std::string_view name);

struct SolverOptions {
  double delta = 0.0;
  double eta = 1.0;          ///< discrepancy factor for MuRule::discrepancy
  double eta1 = 1.0;
  double eta2 = 1.0;
  Index max_k = 30;
  Index stride = 1;          ///< stopping check every `stride` steps
  MuRule mu_rule = MuRule::discrepancy;
  AcaOptions aca;
  ScalingMode sk_mode = ScalingMode::consistent;
  FactorizeOptions factorize;
  /// Keep stepping to max_k after acceptance; the result still reports the
  /// first accepted step.
  bool run_to_max_k = false;
  std::optional<Eigen::VectorXd> x_reference;
  /// Called after each evaluated step; may fill extra fields of the record.
  std::function<void(const CrossApproximation&, StepRecord&)> observer;
};

struct SolverResult {
  AcaModel model{0, 0};
  StopDecision decision;
  TikhonovSolution solution;
  std::vector<StepRecord> trace;
  std::uint64_t unique_evals = 0;
  std::uint64_t total_calls = 0;
  bool accepted = false;
  bool rank_exhausted = false;
};

/// Reported solution for a factorized system: the projected discrepancy
/// root at eta * delta, or `fallback_mu` when that equation has no root.
TikhonovSolution reported_solution(const ReducedSystem& sys, double target, double fallback_mu);

SolverResult run_solver(const EntryOracle& oracle, const RegMatrix& reg, const Eigen::VectorXd& g,
                        const SolverOptions& options);

}  // namespace acatik

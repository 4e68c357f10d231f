#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "acatik/aca.hpp"
#include "acatik/problems.hpp"
#include "acatik/regmat.hpp"
#include "acatik/tikhonov.hpp"

namespace acatik {

/// Settings of one experiment run.
///
/// The plain-text form has one `key = value` per line; `#` starts a comment.
/// Keys match the CLI flags without the leading dashes:
///
///   problem       gravity | baart | phillips | baart2d | rank1   (gravity)
///   n             problem size; baart2d takes the total size      (1024)
///   delta         absolute noise bound ||e||                       (1e-2)
///   delta-rel     relative noise, delta = value * ||g_exact||      (unset)
///   mu-rule       stop | discrepancy: mu of the reported solution  (discrepancy)
///   eta           discrepancy factor used by mu-rule discrepancy   (1)
///   eta1, eta2    stopping-rule factors                            (1, 1)
///   reg           l0 | l1 | l2 | l0kron | l1kron | l2kron          (l2)
///   max-k         step limit                                       (30)
///   seed          noise seed; probes use seed + 1                  (1)
///   probe-factor  probes t = probe-factor * n                      (50)
///   sk-mode       consistent | paper-literal                       (consistent)
///   probe-guided  restart pivot rows from large probe residuals    (false)
///   dense-limit   largest n with dense reference norms             (2048)
///   stride        stopping check every stride steps                (1)
///   full-trace    keep stepping to max-k after acceptance          (false)
///   out           output CSV path                                  (empty: stdout)
struct ExperimentConfig {
  std::string problem = "gravity";
  Index n = 1024;
  std::optional<double> delta = 1e-2;
  std::optional<double> delta_rel;
  MuRule mu_rule = MuRule::discrepancy;
  double eta = 1.0;
  double eta1 = 1.0;
  double eta2 = 1.0;
  std::string reg = "l2";
  Index max_k = 30;
  std::uint64_t seed = 1;
  double probe_factor = 50.0;
  ScalingMode sk_mode = ScalingMode::consistent;
  bool probe_guided = false;
  Index dense_limit = 2048;
  Index stride = 1;
  bool full_trace = false;
  std::string out;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Applies one key/value pair; throws InvalidConfiguration on unknown keys
/// or malformed values.
void apply_setting(ExperimentConfig& config, std::string_view key, std::string_view value);
ExperimentConfig parse_config(std::string_view text);
std::string serialize_config(const ExperimentConfig& config);

std::string_view to_string(ScalingMode mode);
ScalingMode parse_scaling_mode(std::string_view name);

/// Builds the regularization operator named in a config for a problem.
RegMatrix make_regmat(std::string_view name, const ProblemCore& core);

/// A double in round-trip form (17 significant digits); empty for NaN.
std::string format_real(double value);

struct ExperimentOutcome {
  SolverResult result;
  std::string csv;
  std::string summary;
  int exit_code = 0;  ///< 0 accepted, 2 max_k reached without acceptance
};

inline constexpr std::string_view kTraceHeader =
    "k,S_k,true_resid_fro,mu,term1,term2,rel_error,unique_evals";

ExperimentOutcome run_experiment(const ExperimentConfig& config);

struct SweepOutcome {
  std::vector<std::string> regs;
  std::vector<ExperimentOutcome> runs;
  std::string table;  ///< k,rel_error_<reg>,... aligned by k
  std::string summary;
  int exit_code = 0;
};

SweepOutcome sweep(const ExperimentConfig& config, const std::vector<std::string>& regs,
                   bool parallel = false);

struct EstimatorRow {
  Index k = 0;
  double S_k = 0.0;
  double resid_spectral = 0.0;
  double resid_fro = 0.0;
};

inline constexpr std::string_view kEstimatorHeader = "k,S_k,resid_spectral,resid_fro";

struct EstimatorReport {
  std::vector<EstimatorRow> rows;
  double a_fro = 0.0;
  std::string csv;
};

/// ACA steps up to max_k with S_k against dense ||A - M_k||_2 and ||A - M_k||_F.
EstimatorReport estimator_report(const ExperimentConfig& config);

/// Writes via a temporary file and rename, so no partial file survives.
void write_file_atomic(const std::string& path, std::string_view contents);

}  // namespace acatik

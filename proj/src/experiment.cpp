#include "acatik/experiment.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "acatik/errors.hpp"

namespace acatik {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(std::string_view key, std::string_view value) {
  double out = 0.0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end || !std::isfinite(out)) {
    throw InvalidConfiguration("invalid number '" + std::string(value) + "' for " +
                               std::string(key));
  }
  return out;
}

template <typename Int>
Int parse_int(std::string_view key, std::string_view value) {
  Int out = 0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw InvalidConfiguration("invalid integer '" + std::string(value) + "' for " +
                               std::string(key));
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw InvalidConfiguration("invalid flag value '" + std::string(value) + "' for " +
                             std::string(key));
}

struct ProblemSetup {
  ProblemInstance instance;
  RegMatrix reg;
};

ProblemSetup setup(const ExperimentConfig& config) {
  if (config.max_k < 1) throw InvalidConfiguration("max-k must be >= 1");
  ProblemCore core = make_problem(config.problem, config.n);
  const NoiseSpec noise = config.delta_rel ? NoiseSpec::relative(*config.delta_rel)
                                           : NoiseSpec::absolute(config.delta.value_or(0.0));
  RegMatrix reg = make_regmat(config.reg, core);
  return {add_noise(std::move(core), noise, config.seed), std::move(reg)};
}

AcaOptions aca_options(const ExperimentConfig& config, Index n) {
  const auto t = static_cast<Index>(std::llround(config.probe_factor * static_cast<double>(n)));
  if (t < 1) throw InvalidConfiguration("probe-factor yields an empty probe set");
  AcaOptions aca;
  aca.probe_count = t;
  aca.seed = config.seed + 1;
  aca.probe_guided = config.probe_guided;
  return aca;
}

/// Dense residual A - M_k, updated as skeletons arrive.
class DenseResidual {
 public:
  explicit DenseResidual(const EntryOracle& oracle) : residual_(oracle.materialize()) {}

  void catch_up(const AcaModel& model) {
    for (; applied_ < model.rank(); ++applied_) {
      residual_.noalias() -=
          model.col_vectors()[applied_] * model.row_vectors()[applied_].transpose();
    }
  }

  const Eigen::MatrixXd& matrix() const { return residual_; }

  /// Largest singular value by power iteration on R^T R, warm-started.
  double spectral_norm() {
    const Index n = residual_.cols();
    if (start_.size() != n) start_ = Eigen::VectorXd::Ones(n) / std::sqrt(static_cast<double>(n));
    Eigen::VectorXd v = start_;
    double sigma = 0.0;
    for (int it = 0; it < 2000; ++it) {
      const Eigen::VectorXd w = residual_.transpose() * (residual_ * v);
      const double norm = w.norm();
      if (norm == 0.0) return 0.0;
      const double next = std::sqrt(norm);
      v = w / norm;
      if (std::abs(next - sigma) <= 1e-13 * next) {
        sigma = next;
        break;
      }
      sigma = next;
    }
    start_ = v;
    return sigma;
  }

 private:
  Eigen::MatrixXd residual_;
  Eigen::VectorXd start_;
  Index applied_ = 0;
};

std::string csv_line(const StepRecord& r) {
  return std::to_string(r.k) + "," + format_real(r.S_k) + "," + format_real(r.true_resid_fro) +
         "," + format_real(r.mu) + "," + format_real(r.term1) + "," + format_real(r.term2) + "," +
         format_real(r.rel_error) + "," + std::to_string(r.unique_evals) + "\n";
}

}  // namespace

void apply_setting(ExperimentConfig& c, std::string_view key, std::string_view raw) {
  const std::string_view value = trim(raw);
  if (key == "problem") {
    c.problem = std::string(value);
  } else if (key == "n") {
    c.n = parse_int<Index>(key, value);
  } else if (key == "delta") {
    c.delta = parse_double(key, value);
    c.delta_rel.reset();
  } else if (key == "delta-rel") {
    c.delta_rel = parse_double(key, value);
    c.delta.reset();
  } else if (key == "mu-rule") {
    c.mu_rule = parse_mu_rule(value);
  } else if (key == "eta") {
    c.eta = parse_double(key, value);
  } else if (key == "eta1") {
    c.eta1 = parse_double(key, value);
  } else if (key == "eta2") {
    c.eta2 = parse_double(key, value);
  } else if (key == "reg") {
    c.reg = std::string(value);
  } else if (key == "max-k") {
    c.max_k = parse_int<Index>(key, value);
  } else if (key == "seed") {
    c.seed = parse_int<std::uint64_t>(key, value);
  } else if (key == "probe-factor") {
    c.probe_factor = parse_double(key, value);
  } else if (key == "sk-mode") {
    c.sk_mode = parse_scaling_mode(value);
  } else if (key == "probe-guided") {
    c.probe_guided = parse_bool(key, value);
  } else if (key == "dense-limit") {
    c.dense_limit = parse_int<Index>(key, value);
  } else if (key == "stride") {
    c.stride = parse_int<Index>(key, value);
  } else if (key == "full-trace") {
    c.full_trace = parse_bool(key, value);
  } else if (key == "out") {
    c.out = std::string(value);
  } else {
    throw InvalidConfiguration("unknown configuration key '" + std::string(key) + "'");
  }
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig config;
  std::istringstream in{std::string(text)};
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw InvalidConfiguration("config line " + std::to_string(number) + ": expected key = value");
    }
    apply_setting(config, trim(view.substr(0, eq)), view.substr(eq + 1));
  }
  return config;
}

std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "problem = " << c.problem << "\n";
  out << "n = " << c.n << "\n";
  if (c.delta_rel) {
    out << "delta-rel = " << format_real(*c.delta_rel) << "\n";
  } else if (c.delta) {
    out << "delta = " << format_real(*c.delta) << "\n";
  }
  out << "mu-rule = " << to_string(c.mu_rule) << "\n";
  out << "eta = " << format_real(c.eta) << "\n";
  out << "eta1 = " << format_real(c.eta1) << "\n";
  out << "eta2 = " << format_real(c.eta2) << "\n";
  out << "reg = " << c.reg << "\n";
  out << "max-k = " << c.max_k << "\n";
  out << "seed = " << c.seed << "\n";
  out << "probe-factor = " << format_real(c.probe_factor) << "\n";
  out << "sk-mode = " << to_string(c.sk_mode) << "\n";
  out << "probe-guided = " << (c.probe_guided ? "true" : "false") << "\n";
  out << "dense-limit = " << c.dense_limit << "\n";
  out << "stride = " << c.stride << "\n";
  out << "full-trace = " << (c.full_trace ? "true" : "false") << "\n";
  if (!c.out.empty()) out << "out = " << c.out << "\n";
  return out.str();
}

std::string_view to_string(ScalingMode mode) {
  return mode == ScalingMode::consistent ? "consistent" : "paper-literal";
}

ScalingMode parse_scaling_mode(std::string_view name) {
  if (name == "consistent") return ScalingMode::consistent;
  if (name == "paper-literal") return ScalingMode::paper_literal;
  throw InvalidConfiguration("unknown sk-mode '" + std::string(name) + "'");
}

RegMatrix make_regmat(std::string_view name, const ProblemCore& core) {
  constexpr std::string_view suffix = "kron";
  if (name.size() > suffix.size() && name.ends_with(suffix)) {
    const RegKind kind = parse_reg_kind(name.substr(0, name.size() - suffix.size()));
    if (core.grid_n == 0) {
      throw InvalidConfiguration("regularizer '" + std::string(name) +
                                 "' needs a problem on a square grid");
    }
    return build_kron_regmat(kind, core.grid_n);
  }
  return build_regmat(parse_reg_kind(name), core.oracle.cols());
}

std::string format_real(double value) {
  if (std::isnan(value)) return {};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

ExperimentOutcome run_experiment(const ExperimentConfig& config) {
  ProblemSetup ps = setup(config);
  const ProblemInstance& inst = ps.instance;
  const Index n = inst.core.oracle.cols();

  SolverOptions opt;
  opt.delta = inst.delta;
  opt.eta = config.eta;
  opt.mu_rule = config.mu_rule;
  opt.eta1 = config.eta1;
  opt.eta2 = config.eta2;
  opt.max_k = config.max_k;
  opt.stride = config.stride;
  opt.aca = aca_options(config, n);
  opt.sk_mode = config.sk_mode;
  opt.run_to_max_k = config.full_trace;
  opt.x_reference = inst.core.x_exact;

  std::optional<DenseResidual> dense;
  if (n <= config.dense_limit) {
    dense.emplace(inst.core.oracle);
    opt.observer = [&dense](const CrossApproximation& aca, StepRecord& rec) {
      dense->catch_up(aca.model());
      rec.true_resid_fro = dense->matrix().norm();
    };
  }

  ExperimentOutcome out;
  out.result = run_solver(inst.core.oracle, ps.reg, inst.g_noisy, opt);
  const SolverResult& r = out.result;

  std::string csv(kTraceHeader);
  csv += "\n";
  for (const auto& rec : r.trace) csv += csv_line(rec);
  out.csv = std::move(csv);

  std::uint64_t evals_at_stop = r.unique_evals;
  for (const auto& rec : r.trace)
    if (rec.k == r.decision.k_star) evals_at_stop = rec.unique_evals;
  const double rel_error = (r.solution.x - inst.core.x_exact).norm() / inst.core.x_exact.norm();
  std::ostringstream summary;
  summary << "problem=" << config.problem << " n=" << n << " reg=" << config.reg
          << " accepted=" << (r.accepted ? "yes" : "no") << " k*=" << r.decision.k_star
          << " mu*=" << format_real(r.solution.mu) << " mu_stop=" << format_real(r.decision.mu_star)
          << " rel_error=" << format_real(rel_error) << " unique_evals=" << evals_at_stop
          << " status=" << to_string(r.decision.status);
  out.summary = summary.str();
  out.exit_code = r.accepted ? 0 : 2;
  return out;
}

SweepOutcome sweep(const ExperimentConfig& config, const std::vector<std::string>& regs,
                   bool parallel) {
  if (regs.empty()) throw InvalidConfiguration("sweep needs at least one regularizer");
  SweepOutcome out;
  out.regs = regs;
  out.runs.resize(regs.size());
  std::vector<ExperimentConfig> configs(regs.size(), config);
  for (std::size_t i = 0; i < regs.size(); ++i) {
    configs[i].reg = regs[i];
    configs[i].full_trace = true;
  }
  if (parallel) {
    std::vector<std::exception_ptr> errors(regs.size());
    std::vector<std::thread> workers;
    for (std::size_t i = 0; i < regs.size(); ++i) {
      workers.emplace_back([&, i] {
        try {
          out.runs[i] = run_experiment(configs[i]);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      });
    }
    for (auto& w : workers) w.join();
    for (const auto& e : errors)
      if (e) std::rethrow_exception(e);
  } else {
    for (std::size_t i = 0; i < regs.size(); ++i) out.runs[i] = run_experiment(configs[i]);
  }

  Index max_k = 0;
  for (const auto& run : out.runs)
    if (!run.result.trace.empty()) max_k = std::max(max_k, run.result.trace.back().k);
  std::string table = "k";
  for (const auto& reg : regs) table += ",rel_error_" + reg;
  table += "\n";
  for (Index k = 1; k <= max_k; ++k) {
    std::string line = std::to_string(k);
    bool any = false;
    for (const auto& run : out.runs) {
      line += ",";
      for (const auto& rec : run.result.trace) {
        if (rec.k == k) {
          line += format_real(rec.rel_error);
          any = true;
        }
      }
    }
    if (any) table += line + "\n";
  }
  out.table = std::move(table);

  out.exit_code = 0;
  for (std::size_t i = 0; i < regs.size(); ++i) {
    out.summary += out.runs[i].summary + "\n";
    if (out.runs[i].exit_code != 0) out.exit_code = out.runs[i].exit_code;
  }
  return out;
}

EstimatorReport estimator_report(const ExperimentConfig& config) {
  ProblemCore core = make_problem(config.problem, config.n);
  const Index n = core.oracle.cols();
  if (n > config.dense_limit) {
    throw InvalidConfiguration("estimator-report needs n <= dense-limit (" +
                               std::to_string(config.dense_limit) + ")");
  }
  if (config.max_k < 1) throw InvalidConfiguration("max-k must be >= 1");
  CrossApproximation aca(core.oracle, aca_options(config, n));
  DenseResidual dense(core.oracle);
  EstimatorReport report;
  report.a_fro = dense.matrix().norm();
  report.csv = std::string(kEstimatorHeader) + "\n";
  for (Index k = 1; k <= config.max_k; ++k) {
    try {
      aca.step();
    } catch (const RankExhausted&) {
      break;
    }
    dense.catch_up(aca.model());
    EstimatorRow row;
    row.k = aca.model().rank();
    row.S_k = aca.estimate_error(config.sk_mode).value;
    row.resid_fro = dense.matrix().norm();
    row.resid_spectral = dense.spectral_norm();
    report.csv += std::to_string(row.k) + "," + format_real(row.S_k) + "," +
                  format_real(row.resid_spectral) + "," + format_real(row.resid_fro) + "\n";
    report.rows.push_back(row);
  }
  return report;
}

void write_file_atomic(const std::string& path, std::string_view contents) {
  const std::filesystem::path target(path);
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot open " + tmp.string() + " for writing");
    f.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!f) throw Error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, target);
}

}  // namespace acatik

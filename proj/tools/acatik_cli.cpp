// Command-line harness: run, sweep and estimator-report.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "acatik/errors.hpp"
#include "acatik/experiment.hpp"

namespace {

using acatik::ExperimentConfig;

struct Flags {
  std::map<std::string, std::string> values;
  std::string config_path;
};

// Every experiment flag is captured as text and applied through the same
// setter as the config file, so flags override file entries uniformly.
void add_experiment_flags(CLI::App* cmd, Flags& flags) {
  static const std::vector<std::pair<std::string, std::string>> kFlags = {
      {"problem", "gravity | baart | phillips | baart2d | rank1"},
      {"n", "problem size (baart2d: total size, a perfect square)"},
      {"delta", "absolute noise bound"},
      {"delta-rel", "relative noise level, delta = value * ||g_exact||"},
      {"mu-rule", "stop | discrepancy: how the reported solution's mu is chosen"},
      {"eta", "discrepancy factor for --mu-rule discrepancy"},
      {"eta1", "stopping factor for S_k ||x||"},
      {"eta2", "stopping factor for the residual"},
      {"reg", "l0 | l1 | l2 | l0kron | l1kron | l2kron"},
      {"max-k", "maximum number of cross approximation steps"},
      {"seed", "noise seed (probes use seed + 1)"},
      {"probe-factor", "probe count per matrix row"},
      {"sk-mode", "consistent | paper-literal"},
      {"probe-guided", "restart pivot rows from large probe residuals (true/false)"},
      {"dense-limit", "largest n with dense reference norms"},
      {"stride", "evaluate the stopping rule every stride steps"},
      {"full-trace", "continue to max-k after acceptance (true/false)"},
      {"out", "output CSV path"},
  };
  for (const auto& [name, help] : kFlags) {
    cmd->add_option_function<std::string>(
        "--" + name, [&flags, key = name](const std::string& v) { flags.values[key] = v; }, help);
  }
  cmd->add_option("--config", flags.config_path, "plain-text key = value config file");
}

ExperimentConfig resolve(const Flags& flags) {
  ExperimentConfig config;
  if (!flags.config_path.empty()) {
    std::ifstream in(flags.config_path);
    if (!in) throw acatik::InvalidConfiguration("cannot read config file " + flags.config_path);
    std::stringstream text;
    text << in.rdbuf();
    config = acatik::parse_config(text.str());
  }
  for (const auto& [key, value] : flags.values) acatik::apply_setting(config, key, value);
  return config;
}

std::string sibling_path(const std::string& out, const std::string& reg) {
  std::filesystem::path p(out);
  std::filesystem::path ext = p.extension();
  p.replace_extension();
  p += "." + reg;
  p += ext.empty() ? std::filesystem::path(".csv") : ext;
  return p.string();
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ','))
    if (!item.empty()) items.push_back(item);
  return items;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive cross approximation with general-form Tikhonov regularization"};
  app.require_subcommand(1);

  Flags run_flags, sweep_flags, est_flags;
  auto* run = app.add_subcommand("run", "run the solver on one configuration");
  add_experiment_flags(run, run_flags);

  auto* sweep = app.add_subcommand("sweep", "run one configuration per regularizer");
  add_experiment_flags(sweep, sweep_flags);
  std::string regs_text = "l0,l1,l2";
  bool parallel = false;
  sweep->add_option("--regs", regs_text, "comma-separated regularizers");
  sweep->add_flag("--parallel", parallel, "run the regularizers concurrently");

  auto* est = app.add_subcommand("estimator-report", "compare S_k with dense residual norms");
  add_experiment_flags(est, est_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (run->parsed()) {
      const ExperimentConfig config = resolve(run_flags);
      const auto outcome = acatik::run_experiment(config);
      if (config.out.empty()) {
        std::cout << outcome.csv;
        std::cerr << outcome.summary << "\n";
      } else {
        acatik::write_file_atomic(config.out, outcome.csv);
        std::cout << outcome.summary << "\n";
      }
      return outcome.exit_code;
    }
    if (sweep->parsed()) {
      const ExperimentConfig config = resolve(sweep_flags);
      const auto outcome = acatik::sweep(config, split_list(regs_text), parallel);
      if (config.out.empty()) {
        std::cout << outcome.table;
        std::cerr << outcome.summary;
      } else {
        for (std::size_t i = 0; i < outcome.regs.size(); ++i) {
          acatik::write_file_atomic(sibling_path(config.out, outcome.regs[i]),
                                    outcome.runs[i].csv);
        }
        acatik::write_file_atomic(config.out, outcome.table);
        std::cout << outcome.summary;
      }
      return outcome.exit_code;
    }
    if (est->parsed()) {
      const ExperimentConfig config = resolve(est_flags);
      const auto report = acatik::estimator_report(config);
      if (config.out.empty()) {
        std::cout << report.csv;
      } else {
        acatik::write_file_atomic(config.out, report.csv);
      }
      return 0;
    }
  } catch (const acatik::InvalidConfiguration& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

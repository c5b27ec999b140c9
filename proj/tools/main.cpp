#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "riskenv/parallel.hpp"
#include "riskenv/version.hpp"
#include "selftest.hpp"

namespace {

using riskenv::cli::CommandResult;
using riskenv::cli::Options;

constexpr int kExitPass = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitInputError = 2;
constexpr int kExitNumericError = 3;

struct CommonFlags {
  std::string model_path;
  std::string out_path;
};

void add_common(CLI::App* cmd, CommonFlags& common, Options& opt) {
  cmd->add_option("--model", common.model_path, "model file (JSON)")
      ->required();
  cmd->add_option("--out", common.out_path, "write the report here");
  cmd->add_option("--t", opt.t, "evaluation level");
  cmd->add_option("--seed", opt.seed, "random seed");
  cmd->add_option("--budget", opt.budget, "sampling budget");
  cmd->add_option("--tol", opt.tol, "check tolerance");
  cmd->add_option("--format", opt.format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}));
}

void emit(const CommandResult& result, const CommonFlags& common) {
  std::string body =
      result.csv.empty() ? result.report.dump(2) + "\n" : result.csv;
  if (common.out_path.empty()) {
    std::cout << body;
  } else {
    std::ofstream out(common.out_path, std::ios::binary);
    if (!out)
      throw riskenv::InputError("cannot write to '" + common.out_path + "'");
    out << body;
  }
}

int thread_cap_from_env() {
  const char* env = std::getenv("RISKENV_THREADS");
  if (!env) return 1;
  try {
    int n = std::stoi(env);
    if (n < 1) throw riskenv::InputError("RISKENV_THREADS must be >= 1");
    return n;
  } catch (const riskenv::InputError&) {
    throw;
  } catch (const std::exception&) {
    throw riskenv::InputError("RISKENV_THREADS is not an integer");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dynamic risk measures on scenario trees"};
  app.set_version_flag("--version", riskenv::kToolVersion);
  app.require_subcommand(0, 1);
  bool selftest_flag = false;
  app.add_flag("--selftest", selftest_flag, "run the canonical example suite");

  CommonFlags common;
  Options opt;
  std::string measure, payoff, generator, scenario, n_list_raw, axioms_raw;

  auto* eval = app.add_subcommand("eval", "risk profiles at a level");
  add_common(eval, common, opt);
  eval->add_option("--measure", measure, "measure name (default: all)");
  eval->add_option("--payoff", payoff, "payoff name");

  auto* envelope =
      app.add_subcommand("envelope", "attainment and duality checks");
  add_common(envelope, common, opt);
  envelope->add_option("--measure", measure, "source measure");
  envelope->add_option("--payoff", payoff, "payoff name");
  envelope->add_option("--kind", opt.kind, "member kind")
      ->check(CLI::IsMember({"monetary", "star", "cone"}));

  auto* bsde = app.add_subcommand("bsde", "backward solution of the driver");
  add_common(bsde, common, opt);
  bsde->add_option("--generator", generator, "generator name")->required();
  bsde->add_option("--payoff", payoff, "payoff name");

  auto* convergence =
      app.add_subcommand("convergence", "refinement study against the oracle");
  add_common(convergence, common, opt);
  convergence->add_option("--generator", generator, "generator name")
      ->required();
  convergence->add_option("--N-list", n_list_raw, "comma-separated levels")
      ->required();
  convergence->add_option("--gamma", [&opt](const CLI::results_t& vals) {
    opt.gamma = std::stod(vals.front());
    return true;
  }, "entropic gamma");

  auto* axioms = app.add_subcommand("axioms", "randomized axiom falsifier");
  add_common(axioms, common, opt);
  axioms->add_option("--measure", measure, "measure name");
  axioms->add_option("--axioms", axioms_raw, "comma-separated subset of A1..A6");

  auto* consistency =
      app.add_subcommand("consistency", "nesting checks or witness search");
  add_common(consistency, common, opt);
  consistency->add_option("--measure", measure, "measure name");
  consistency->add_option("--payoff", payoff, "payoff name (check mode)");
  consistency->add_option("--mode", opt.mode, "check or search")
      ->check(CLI::IsMember({"check", "search"}));

  auto* sensitivity = app.add_subcommand("sensitivity", "relevance diagnostics");
  add_common(sensitivity, common, opt);
  sensitivity->add_option("--measure", measure, "measure name");
  sensitivity->add_option("--Q", scenario, "probe scenario name");
  sensitivity->add_flag("--coherent", opt.coherent,
                        "declare the coherent continuous-from-above regime");

  auto* selftest =
      app.add_subcommand("selftest", "run the canonical example suite");
  (void)selftest;

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitPass : kExitInputError;
  }

  try {
    riskenv::set_thread_cap(thread_cap_from_env());

    if (selftest->parsed() || selftest_flag) {
      int failures = riskenv::cli::run_selftest(std::cout);
      return failures == 0 ? kExitPass : kExitCheckFailed;
    }
    if (app.get_subcommands().empty()) {
      std::cerr << app.help();
      return kExitInputError;
    }

    if (!measure.empty()) opt.measure = measure;
    if (!payoff.empty()) opt.payoff = payoff;
    if (!generator.empty()) opt.generator = generator;
    if (!scenario.empty()) opt.scenario = scenario;
    if (!n_list_raw.empty()) {
      std::stringstream ss(n_list_raw);
      std::string item;
      while (std::getline(ss, item, ','))
        opt.n_list.push_back(std::stoi(item));
    }
    if (!axioms_raw.empty()) {
      std::stringstream ss(axioms_raw);
      std::string item;
      while (std::getline(ss, item, ',')) opt.axioms.push_back(item);
    }

    riskenv::Model model = riskenv::load_model(common.model_path);

    CommandResult result;
    if (eval->parsed())
      result = riskenv::cli::run_eval(model, opt);
    else if (envelope->parsed())
      result = riskenv::cli::run_envelope(model, opt);
    else if (bsde->parsed())
      result = riskenv::cli::run_bsde(model, opt);
    else if (convergence->parsed())
      result = riskenv::cli::run_convergence(model, opt);
    else if (axioms->parsed())
      result = riskenv::cli::run_axioms(model, opt);
    else if (consistency->parsed())
      result = riskenv::cli::run_consistency(model, opt);
    else if (sensitivity->parsed())
      result = riskenv::cli::run_sensitivity(model, opt);
    else
      throw riskenv::InputError("no command given");

    emit(result, common);
    return result.checks_passed ? kExitPass : kExitCheckFailed;
  } catch (const riskenv::InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const riskenv::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumericError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumericError;
  }
}

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "riskenv/model.hpp"

namespace riskenv::cli {

// Shared command options; commands ignore what they do not use.
struct Options {
  std::optional<std::string> measure;
  std::optional<std::string> payoff;
  std::optional<std::string> generator;
  std::optional<std::string> scenario;   // sensitivity probe
  std::string kind = "monetary";         // envelope member kind
  int t = 0;
  int budget = 1000;
  std::uint64_t seed = 1;
  double tol = kSoftTol;
  std::vector<int> n_list;
  std::optional<double> gamma;
  std::vector<std::string> axioms;       // empty = all
  std::string mode = "check";            // consistency: check | search
  std::vector<double> grid = {0.0, 1.0, 2.0, 3.0};
  bool coherent = false;
  std::string format = "json";           // json | csv
};

// A command produces a report plus the pass/fail verdict of its checks.
struct CommandResult {
  json report;
  bool checks_passed = true;
  std::string csv;  // filled when format == "csv"
};

CommandResult run_eval(const Model& model, const Options& opt);
CommandResult run_envelope(const Model& model, const Options& opt);
CommandResult run_bsde(const Model& model, const Options& opt);
CommandResult run_convergence(const Model& model, const Options& opt);
CommandResult run_axioms(const Model& model, const Options& opt);
CommandResult run_consistency(const Model& model, const Options& opt);
CommandResult run_sensitivity(const Model& model, const Options& opt);

// Resolves names with single-entry defaults so small models need no flags.
std::string resolve_measure(const Model& model, const Options& opt);
std::string resolve_payoff(const Model& model, const Options& opt);

json report_envelope(const Model& model, const std::string& command,
                     std::uint64_t seed);

}  // namespace riskenv::cli

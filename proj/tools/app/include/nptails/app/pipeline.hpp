#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nptails/app/config.hpp"
#include "nptails/app/io.hpp"
#include "nptails/app/pool.hpp"
#include "nptails/time_integral.hpp"

namespace nptails::app {

namespace fs = std::filesystem;

// Writes <out>/model.csv.
void run_model(const RunConfig& cfg, const fs::path& out, int points = 400);

struct ConstantsRun {
  NpReport report;
  std::vector<TimeIntegralData> chain;
};

// I0 alone when cfg.orders == 0, else the chain up to cfg.orders.
ConstantsRun compute_constants(const RunConfig& cfg);

// Writes <out>/npreport.json and, with `construct`, <out>/chain_<k>.csv.
NpReport run_constants(const RunConfig& cfg, bool construct, const fs::path& out);

// Writes <out>/<curve>.csv per observer and <out>/diagnostics.json.
EvolutionResult run_evolve(const RunConfig& cfg, const fs::path& out);

struct FitOutcome {
  ScenarioSpec spec;
  std::optional<TailFit> fit;
  std::string error;  // "<module>: <code>: <message>" when the fit failed
};

std::vector<FitOutcome> fit_scenarios(const RunConfig& cfg,
                                      const std::map<std::string, SeriesTable>& series,
                                      const NpReport& report);

// Reads <out>/<curve>.csv and <out>/npreport.json, writes <out>/tailfit_<id>.json.
std::vector<FitOutcome> run_tail(const RunConfig& cfg, const fs::path& out);

nlohmann::json to_json(const FitOutcome& f);
std::string fit_table(const std::vector<FitOutcome>& fits);

struct ConvergenceField {
  std::string curve, field;
  std::vector<double> differences;  // max |f_l - f_{l+1}|
  std::vector<double> factors;      // ratios of consecutive differences
  bool exact = false;               // all levels agree to roundoff
};

struct ConvergenceReport {
  GridSpec grid;
  std::vector<double> h;
  double stored_spacing = 0.0;
  std::vector<ConvergenceField> fields;
  std::vector<Diagnostics> diagnostics;
};

// Levels h, h/2, ... on cfg.convergence's grid (or cfg.grid). Rejects fewer than 3.
ConvergenceReport convergence_study(const RunConfig& cfg, int levels, WorkerPool& pool);
nlohmann::json to_json(const ConvergenceReport& r);

// Writes <out>/convergence.json and <out>/convergence_diagnostics.json.
ConvergenceReport run_convergence(const RunConfig& cfg, int levels, const fs::path& out);

// Full pipeline; writes <out>/verify.json. Returns the process exit status.
int run_verify(const RunConfig& cfg, const fs::path& out, nlohmann::json* report = nullptr);

}  // namespace nptails::app

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "nptails/app/pipeline.hpp"
#include "nptails/error.hpp"

using namespace nptails;
using namespace nptails::app;

namespace {

struct Common {
  std::string config;
  std::string out;
  int threads = 0;
  double budget_cells = 0.0;
};

void add_common(CLI::App* sub, Common& c, bool config_required = true) {
  auto* opt = sub->add_option("--config", c.config, "run configuration (JSON)");
  if (config_required) opt->required();
  sub->add_option("--out", c.out, "output directory (default: $NPTAILS_OUT or ./nptails-out)");
  sub->add_option("--threads", c.threads, "worker threads for independent runs")
      ->check(CLI::PositiveNumber);
  sub->add_option("--budget-cells", c.budget_cells, "refuse runs with more grid cells")
      ->check(CLI::PositiveNumber);
}

RunConfig load(const Common& c) {
  RunConfig cfg = load_config(c.config);
  if (!c.out.empty()) cfg.output = c.out;
  if (c.threads > 0) cfg.threads = c.threads;
  if (c.budget_cells > 0.0) cfg.evolve.budget_cells = static_cast<std::uint64_t>(c.budget_cells);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Late-time tails of spherical waves on static black-hole backgrounds"};
  app.require_subcommand(1);

  Common common;
  int points = 400;
  auto* model = app.add_subcommand("model", "tabulate r, D, D' and r* as CSV");
  add_common(model, common);
  model->add_option("--points", points, "rows in the table")->check(CLI::PositiveNumber);

  bool construct = false;
  auto* constants = app.add_subcommand("constants", "Newman-Penrose constant and its time-inverted versions");
  add_common(constants, common);
  constants->add_flag("--construct", construct, "also write the constructed chain as CSV");

  auto* evolve_cmd = app.add_subcommand("evolve", "evolve the data and sample the observer curves");
  add_common(evolve_cmd, common);

  std::string csv, report, scenario, field = "psi";
  int k = 0;
  auto* tail = app.add_subcommand("tail", "fit late-time power laws to observer series");
  add_common(tail, common, false);
  tail->add_option("--csv", csv, "single observer CSV (instead of the config's scenarios)");
  tail->add_option("--report", report, "NpReport JSON for --csv");
  tail->add_option("--scenario", scenario, "scenario name for --csv");
  tail->add_option("--field", field, "column for --csv (psi, Tpsi, T2psi, phi, Tphi, T2phi, v2dvphi)");
  tail->add_option("--k", k, "time-derivative order for the scenario");

  int levels = 0;
  auto* conv = app.add_subcommand("convergence", "self-convergence over successive halvings of h");
  add_common(conv, common);
  conv->add_option("--levels", levels, "number of resolutions (at least 3)");

  auto* verify = app.add_subcommand("verify", "constants, evolution, fits and checks in one pass");
  add_common(verify, common);

  CLI11_PARSE(app, argc, argv);

  try {
    if (tail->parsed() && !csv.empty()) {
      if (report.empty() || scenario.empty())
        throw Error(ErrorCode::InvalidArgument, "cli", "--csv needs --report and --scenario");
      const fs::path out = common.out.empty() ? default_output_dir() : fs::path(common.out);
      const Scenario sc = scenario_from_string(scenario);
      SeriesTable t = read_observer_csv(csv);
      const NpReport rep = npreport_from_json(read_json(report));
      FitOutcome f{ScenarioSpec{t.id + "_" + field, sc, t.id, field, k}, std::nullopt, {}};
      FitOptions opt;
      if (!common.config.empty()) opt = load(common).fit;
      f.fit = extrapolate_and_compare(fit_input(t, field, sc), rep, sc, k, opt);
      write_json(out / ("tailfit_" + f.spec.id + ".json"), to_json(f));
      std::cout << fit_table({f});
      return 0;
    }
    if (tail->parsed() && common.config.empty())
      throw Error(ErrorCode::InvalidArgument, "cli", "tail needs --config or --csv");

    const RunConfig cfg = load(common);
    const fs::path out = cfg.output;
    if (model->parsed()) {
      run_model(cfg, out, points);
      std::cout << (out / "model.csv").string() << '\n';
    } else if (constants->parsed()) {
      const NpReport rep = run_constants(cfg, construct, out);
      std::printf("I0 = %.12g +/- %.2g\n", rep.I0.value, rep.I0.error);
      if (rep.C0) std::printf("C0 = %.12g +/- %.2g\n", rep.C0->value, rep.C0->error);
      for (const auto& c : rep.inverted)
        std::printf("I0^(%d) = %.12g +/- %.2g (%s)\n", c.k, c.value, c.error, to_string(c.method));
    } else if (evolve_cmd->parsed()) {
      const EvolutionResult res = run_evolve(cfg, out);
      std::printf("%llu cells, %zu observers, %.2f s\n",
                  static_cast<unsigned long long>(res.diagnostics.cells), res.observers.size(),
                  res.diagnostics.wall_seconds);
    } else if (tail->parsed()) {
      const auto fits = run_tail(cfg, out);
      std::cout << fit_table(fits);
      for (const auto& f : fits)
        if (!f.fit) return 1;
    } else if (conv->parsed()) {
      const int n = levels > 0 ? levels : (cfg.convergence ? cfg.convergence->levels : 3);
      const ConvergenceReport rep = run_convergence(cfg, n, out);
      for (const auto& f : rep.fields) {
        std::printf("%-10s %-4s", f.curve.c_str(), f.field.c_str());
        if (f.exact) std::printf(" exact");
        else
          for (double x : f.factors) std::printf(" %.4f", x);
        std::printf("\n");
      }
    } else if (verify->parsed()) {
      nlohmann::json doc;
      const int status = run_verify(cfg, out, &doc);
      for (const auto& c : doc["checks"])
        std::printf("%-4s %-18s %s\n", c["pass"].get<bool>() ? "PASS" : "FAIL",
                    c["kind"].get<std::string>().c_str(), c["name"].get<std::string>().c_str());
      for (const auto& e : doc["errors"])
        std::fprintf(stderr, "error in %s: %s: %s: %s\n", e["stage"].get<std::string>().c_str(),
                     e["module"].get<std::string>().c_str(), e["code"].get<std::string>().c_str(),
                     e["message"].get<std::string>().c_str());
      std::printf("%s\n", status == 0 ? "verify: pass" : "verify: FAIL");
      return status;
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "nptails: %s: %s: %s\n", e.module().c_str(),
                 std::string(to_string(e.code())).c_str(), e.what());
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "nptails: cli: IoError: %s\n", e.what());
    return 2;
  }
  return 0;
}

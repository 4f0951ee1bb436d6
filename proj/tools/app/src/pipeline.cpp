#include "nptails/app/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>

#include "nptails/error.hpp"

namespace nptails::app {

namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

std::string describe(const Error& e) {
  return e.module() + ": " + std::string(to_string(e.code())) + ": " + e.what();
}

json error_json(const Error& e) {
  return {{"module", e.module()}, {"code", std::string(to_string(e.code()))}, {"message", e.what()}};
}

NullGrid grid_of(const GridSpec& g, double v0) { return make_grid(g.h, g.u_max, v0, g.v_max); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::map<std::string, SeriesTable> tables_of(const EvolutionResult& res) {
  std::map<std::string, SeriesTable> out;
  for (const auto& o : res.observers) out.emplace(o.spec.id, to_table(o));
  return out;
}

double max_abs_difference(const std::vector<double>& a, const std::vector<double>& b) {
  double e = 0.0;
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i)
    if (std::isfinite(a[i]) && std::isfinite(b[i])) e = std::max(e, std::abs(a[i] - b[i]));
  return e;
}

double max_abs(const std::vector<double>& a) {
  double m = 0.0;
  for (double x : a)
    if (std::isfinite(x)) m = std::max(m, std::abs(x));
  return m;
}

ConvergenceField compare_levels(std::string curve, std::string field,
                                const std::vector<std::vector<double>>& levels) {
  ConvergenceField f{std::move(curve), std::move(field), {}, {}, false};
  double scale = 0.0;
  for (const auto& l : levels) scale = std::max(scale, max_abs(l));
  for (std::size_t l = 0; l + 1 < levels.size(); ++l)
    f.differences.push_back(max_abs_difference(levels[l], levels[l + 1]));
  const double roundoff = 1e-13 * std::max(1.0, scale);
  f.exact = true;
  for (double d : f.differences) f.exact = f.exact && d <= roundoff;
  for (std::size_t l = 0; l + 1 < f.differences.size(); ++l)
    f.factors.push_back(f.exact ? kNaN : f.differences[l] / f.differences[l + 1]);
  return f;
}

struct CheckResult {
  std::string kind, name;
  bool pass = false;
  json measured = json::object();
  json limits = json::object();
  std::string detail;
};

json to_json(const CheckResult& c) {
  json j{{"kind", c.kind}, {"name", c.name}, {"pass", c.pass}, {"measured", c.measured},
         {"limits", c.limits}};
  if (!c.detail.empty()) j["detail"] = c.detail;
  return j;
}

const char* kind_name(CheckKind k) {
  switch (k) {
    case CheckKind::Tail: return "tail";
    case CheckKind::Ladder: return "ladder";
    case CheckKind::InvertedConstant: return "inverted_constant";
    case CheckKind::Huygens: return "huygens";
    case CheckKind::NpDrift: return "np_drift";
    case CheckKind::Convergence: return "convergence";
    case CheckKind::TwoOracle: return "two_oracle";
  }
  return "unknown";
}

struct VerifyState {
  const RunConfig* cfg = nullptr;
  std::optional<NpReport> report;
  std::optional<EvolutionResult> run;
  std::vector<FitOutcome> fits;
  std::optional<ConvergenceReport> convergence;
};

const TailFit* find_fit(const VerifyState& s, const std::string& id, std::string& why) {
  for (const auto& f : s.fits)
    if (f.spec.id == id) {
      if (f.fit) return &*f.fit;
      why = "fit '" + id + "' failed: " + f.error;
      return nullptr;
    }
  why = "fit '" + id + "' did not run";
  return nullptr;
}

CheckResult evaluate(const CheckSpec& c, const VerifyState& s) {
  CheckResult r;
  r.kind = kind_name(c.kind);
  const double h = s.cfg->grid.h;
  switch (c.kind) {
    case CheckKind::Tail: {
      r.name = c.scenario;
      r.limits = {{"exponent", c.exponent_tolerance}, {"amplitude", c.amplitude_tolerance}};
      const TailFit* f = find_fit(s, c.scenario, r.detail);
      if (!f) return r;
      const double dp = std::abs(f->p_inf.value - f->p_theory);
      r.measured = {{"p_inf", num(f->p_inf.value)}, {"p_theory", f->p_theory},
                    {"exponent_offset", num(dp)}, {"amplitude", num(f->amplitude.value)},
                    {"target", num(f->target)}, {"deviation", num(f->deviation)}};
      r.pass = dp <= c.exponent_tolerance && f->deviation <= c.amplitude_tolerance;
      return r;
    }
    case CheckKind::Ladder: {
      r.name = c.ladder.front();
      r.limits = {{"tolerance", c.tolerance}};
      std::vector<double> p;
      for (const auto& id : c.ladder) {
        const TailFit* f = find_fit(s, id, r.detail);
        if (!f) return r;
        p.push_back(f->p_inf.value);
      }
      json steps = json::array();
      r.pass = true;
      for (std::size_t k = 1; k < p.size(); ++k) {
        const double step = p[k] - p[0];
        steps.push_back(num(step));
        r.pass = r.pass && std::abs(step - double(k)) <= c.tolerance;
      }
      r.measured = {{"steps", steps}};
      return r;
    }
    case CheckKind::InvertedConstant: {
      r.name = "I0^(" + std::to_string(c.k) + ")";
      r.limits = {{"expect", c.expect}, {"tolerance", c.tolerance}};
      const InvertedConstant* ic = s.report ? s.report->order(c.k) : nullptr;
      if (!ic) {
        r.detail = "constant of order " + std::to_string(c.k) + " was not computed";
        return r;
      }
      r.measured = {{"value", num(ic->value)}, {"error", num(ic->error)}};
      r.pass = std::abs(ic->value - c.expect) <= c.tolerance;
      return r;
    }
    case CheckKind::TwoOracle: {
      r.name = "closed form vs constructed limit";
      r.limits = {{"tolerance", c.tolerance}};
      if (!s.report || s.report->inverted.empty()) {
        r.detail = "no inverted constants were computed";
        return r;
      }
      double worst = 0.0;
      for (const auto& ic : s.report->inverted) {
        const double a = ic.closed_form.value_or(kNaN), b = ic.constructed.value_or(kNaN);
        const double d = std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
        worst = std::isnan(d) ? d : std::max(worst, d);
      }
      r.measured = {{"difference", num(worst)}};
      r.pass = worst <= c.tolerance;
      return r;
    }
    case CheckKind::Huygens: {
      r.name = c.curve;
      r.limits = {{"bound", c.amplitude_tolerance * h * h}, {"after_v", c.after_v}};
      if (!s.run) {
        r.detail = "evolution did not run";
        return r;
      }
      for (const auto& o : s.run->observers) {
        if (o.spec.id != c.curve) continue;
        double peak = 0.0;
        std::size_t n = 0;
        for (const auto& x : o.samples)
          if (x.v > c.after_v) {
            peak = std::max(peak, std::abs(x.psi));
            ++n;
          }
        r.measured = {{"max_abs_psi", num(peak)}, {"samples", n}};
        r.pass = n > 0 && peak <= c.amplitude_tolerance * h * h;
      }
      return r;
    }
    case CheckKind::NpDrift: {
      r.name = "v^2 d_v phi / 2 along the outer column";
      r.limits = {{"tolerance", c.tolerance}};
      if (!s.run) {
        r.detail = "evolution did not run";
        return r;
      }
      std::vector<double> u;
      for (double x = 0.0; x <= s.run->grid.u_max + 1e-9; x += 50.0 * s.cfg->evolve.sample_dt)
        u.push_back(x);
      try {
        const auto np = sample_np_scalar(*s.run, u);
        double drift = 0.0;
        for (const auto& x : np) drift = std::max(drift, std::abs(x.I0 - np.front().I0));
        drift /= std::abs(np.front().I0);
        r.measured = {{"I0_start", num(np.front().I0)}, {"I0_end", num(np.back().I0)},
                      {"drift", num(drift)}};
        r.pass = drift <= c.tolerance;
      } catch (const Error& e) {
        r.detail = describe(e);
      }
      return r;
    }
    case CheckKind::Convergence: {
      r.name = "grid phi";
      r.limits = {{"lo", c.lo}, {"hi", c.hi}};
      if (!s.convergence) {
        r.detail = "convergence study did not run";
        return r;
      }
      for (const auto& f : s.convergence->fields) {
        if (f.curve != "grid") continue;
        json fs = json::array();
        for (double x : f.factors) fs.push_back(num(x));
        r.measured = {{"factors", fs}, {"exact", f.exact}};
        r.pass = true;
        if (!f.exact)
          for (double x : f.factors) r.pass = r.pass && x >= c.lo && x <= c.hi;
      }
      return r;
    }
  }
  return r;
}

}  // namespace

void run_model(const RunConfig& cfg, const fs::path& out, int points) {
  write_model_csv(out / "model.csv", *cfg.make_coordinate_map(), points);
}

ConstantsRun compute_constants(const RunConfig& cfg) {
  const MixedSurfaceData surface = cfg.make_surface();
  ConstantsRun run;
  if (cfg.orders > 0) run.chain = iterate_time_integral(surface, cfg.orders);
  run.report = summarize_chain(surface, run.chain);
  return run;
}

NpReport run_constants(const RunConfig& cfg, bool construct, const fs::path& out) {
  ConstantsRun run = compute_constants(cfg);
  write_json(out / "npreport.json", to_json(run.report));
  if (construct)
    for (const auto& t : run.chain) {
      const CharacteristicData& d = t.characteristic();
      write_chain_csv(out / ("chain_" + std::to_string(t.order) + ".csv"), t, d.v0, d.v_max, 2001);
    }
  return run.report;
}

EvolutionResult run_evolve(const RunConfig& cfg, const fs::path& out) {
  const CharacteristicData data = cfg.make_characteristic();
  EvolutionResult res = evolve(data, grid_of(cfg.grid, data.v0), cfg.observers, cfg.evolve);
  for (const auto& o : res.observers) write_observer_csv(out / (o.spec.id + ".csv"), to_table(o));
  write_json(out / "diagnostics.json", {{"schema", 1}, {"evolve", to_json(res.diagnostics)}});
  return res;
}

std::vector<FitOutcome> fit_scenarios(const RunConfig& cfg,
                                      const std::map<std::string, SeriesTable>& series,
                                      const NpReport& report) {
  std::vector<FitOutcome> out;
  for (const auto& s : cfg.scenarios) {
    FitOutcome f{s, std::nullopt, {}};
    try {
      auto it = series.find(s.curve);
      if (it == series.end())
        throw Error(ErrorCode::InvalidArgument, "cli", "no series for curve '" + s.curve + "'");
      f.fit = extrapolate_and_compare(fit_input(it->second, s.field, s.scenario), report,
                                      s.scenario, s.k, cfg.fit);
    } catch (const Error& e) {
      f.error = describe(e);
    }
    out.push_back(std::move(f));
  }
  return out;
}

json to_json(const FitOutcome& f) {
  if (!f.fit) return {{"id", f.spec.id}, {"curve", f.spec.curve}, {"field", f.spec.field}, {"error", f.error}};
  json j = to_json(*f.fit);
  j["id"] = f.spec.id;
  return j;
}

std::vector<FitOutcome> run_tail(const RunConfig& cfg, const fs::path& out) {
  const NpReport report = npreport_from_json(read_json(out / "npreport.json"));
  std::map<std::string, SeriesTable> series;
  for (const auto& s : cfg.scenarios)
    if (!series.count(s.curve)) {
      SeriesTable t = read_observer_csv(out / (s.curve + ".csv"));
      t.id = s.curve;
      series.emplace(s.curve, std::move(t));
    }
  auto fits = fit_scenarios(cfg, series, report);
  for (const auto& f : fits)
    if (f.fit) write_json(out / ("tailfit_" + f.spec.id + ".json"), to_json(f));
  return fits;
}

std::string fit_table(const std::vector<FitOutcome>& fits) {
  std::string s;
  char line[256];
  std::snprintf(line, sizeof line, "%-14s %-10s %-7s %9s %8s %6s %13s %13s %9s\n", "scenario",
                "curve", "field", "p_inf", "+/-", "p", "amplitude", "target", "deviation");
  s += line;
  for (const auto& f : fits) {
    if (!f.fit) {
      std::snprintf(line, sizeof line, "%-14s %-10s %-7s  %s\n", f.spec.id.c_str(),
                    f.spec.curve.c_str(), f.spec.field.c_str(), f.error.c_str());
    } else {
      const TailFit& t = *f.fit;
      std::snprintf(line, sizeof line, "%-14s %-10s %-7s %9.4f %8.4f %6.1f %13.6g %13.6g %8.2f%%\n",
                    f.spec.id.c_str(), f.spec.curve.c_str(), f.spec.field.c_str(), t.p_inf.value,
                    t.p_inf.error, t.p_theory, t.amplitude.value, t.target,
                    100.0 * t.deviation);
    }
    s += line;
  }
  return s;
}

ConvergenceReport convergence_study(const RunConfig& cfg, int levels, WorkerPool& pool) {
  if (levels < 3)
    throw Error(ErrorCode::InvalidArgument, "cli", "convergence needs at least 3 levels");
  ConvergenceReport rep;
  rep.grid = cfg.convergence ? cfg.convergence->grid : cfg.grid;
  const CharacteristicData data = cfg.make_characteristic(rep.grid.v_max);
  const NullGrid coarse = grid_of(rep.grid, data.v0);
  const double fine_h = rep.grid.h / double(1 << (levels - 1));
  const NullGrid fine = make_grid(fine_h, rep.grid.u_max, data.v0, rep.grid.v_max);
  if (fine.cells() > cfg.evolve.budget_cells)
    throw Error(ErrorCode::BudgetExceeded, "cli",
                "finest level needs " + std::to_string(fine.cells()) + " cells");

  // Compare on the coarse lattice, thinned to a few million points.
  int m = 1;
  while (double(coarse.nu / m + 1) * double(coarse.nv / m + 1) > 4e6 && coarse.nu % (2 * m) == 0 &&
         coarse.nv % (2 * m) == 0)
    m *= 2;
  rep.stored_spacing = rep.grid.h * m;

  std::vector<ObserverSpec> obs;
  for (const auto& o : cfg.observers)
    if (o.kind == CurveKind::ConstantR || o.kind == CurveKind::Scri) obs.push_back(o);

  std::vector<std::future<EvolutionResult>> jobs;
  for (int l = 0; l < levels; ++l) {
    const double h = rep.grid.h / double(1 << l);
    rep.h.push_back(h);
    jobs.push_back(pool.submit([&cfg, &data, &obs, h, l, m, g = rep.grid] {
      EvolveOptions opt = cfg.evolve;
      opt.snapshot_stride = m << l;
      return evolve(data, make_grid(h, g.u_max, data.v0, g.v_max), obs, opt);
    }));
  }
  std::vector<EvolutionResult> runs;
  for (auto& j : jobs) runs.push_back(j.get());

  std::vector<std::vector<double>> grid_phi;
  for (const auto& r : runs) {
    grid_phi.push_back(r.snapshot->values);
    rep.diagnostics.push_back(r.diagnostics);
  }
  rep.fields.push_back(compare_levels("grid", "phi", grid_phi));
  for (std::size_t k = 0; k < obs.size(); ++k)
    for (const char* field : {"phi", "psi"}) {
      std::vector<std::vector<double>> per;
      for (const auto& r : runs) per.push_back(to_table(r.observers[k]).column(field));
      rep.fields.push_back(compare_levels(obs[k].id, field, per));
    }
  return rep;
}

json to_json(const ConvergenceReport& r) {
  json fields = json::array();
  for (const auto& f : r.fields) {
    json d = json::array(), q = json::array();
    for (double x : f.differences) d.push_back(num(x));
    for (double x : f.factors) q.push_back(num(x));
    fields.push_back({{"curve", f.curve}, {"field", f.field}, {"differences", d}, {"factors", q},
                      {"exact", f.exact}});
  }
  return {{"schema", 1},
          {"grid", {{"h", r.grid.h}, {"u_max", r.grid.u_max}, {"v_max", r.grid.v_max}}},
          {"h", r.h},
          {"stored_spacing", r.stored_spacing},
          {"fields", fields}};
}

ConvergenceReport run_convergence(const RunConfig& cfg, int levels, const fs::path& out) {
  WorkerPool pool(cfg.threads);
  ConvergenceReport rep = convergence_study(cfg, levels, pool);
  write_json(out / "convergence.json", to_json(rep));
  json diag = json::array();
  for (const auto& d : rep.diagnostics) diag.push_back(to_json(d));
  write_json(out / "convergence_diagnostics.json", {{"schema", 1}, {"levels", diag}});
  return rep;
}

int run_verify(const RunConfig& cfg, const fs::path& out, json* report_out) {
  const auto t0 = std::chrono::steady_clock::now();
  VerifyState s;
  s.cfg = &cfg;
  json errors = json::array();
  auto stage = [&](const char* name, auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      json j = error_json(e);
      j["stage"] = name;
      errors.push_back(j);
    }
  };

  WorkerPool pool(cfg.threads);
  // The convergence levels are independent of the main run; start them first.
  std::optional<std::future<ConvergenceReport>> conv;
  if (cfg.convergence)
    conv = pool.submit([&cfg] {
      WorkerPool inner(1);
      return convergence_study(cfg, cfg.convergence->levels, inner);
    });

  stage("constants", [&] {
    ConstantsRun c = compute_constants(cfg);
    write_json(out / "npreport.json", to_json(c.report));
    for (const auto& t : c.chain) {
      const CharacteristicData& d = t.characteristic();
      write_chain_csv(out / ("chain_" + std::to_string(t.order) + ".csv"), t, d.v0, d.v_max, 2001);
    }
    s.report = std::move(c.report);
  });
  stage("evolve", [&] { s.run = run_evolve(cfg, out); });
  stage("tail", [&] {
    if (!s.run || !s.report) return;
    s.fits = fit_scenarios(cfg, tables_of(*s.run), *s.report);
  });
  json conv_diag = json::array();
  if (conv)
    stage("convergence", [&] {
      s.convergence = conv->get();
      for (const auto& d : s.convergence->diagnostics) conv_diag.push_back(to_json(d));
    });

  json fits = json::array();
  for (const auto& f : s.fits) fits.push_back(to_json(f));
  json checks = json::array();
  bool pass = errors.empty();
  for (const auto& c : cfg.checks) {
    const CheckResult r = evaluate(c, s);
    pass = pass && r.pass;
    checks.push_back(to_json(r));
  }

  json doc{{"schema", 1},
           {"name", cfg.name},
           {"grid", {{"h", cfg.grid.h}, {"u_max", cfg.grid.u_max}, {"v_max", cfg.grid.v_max}}},
           {"np_report", s.report ? to_json(*s.report) : json(nullptr)},
           {"tail_fits", fits},
           {"convergence", s.convergence ? to_json(*s.convergence) : json(nullptr)},
           {"checks", checks},
           {"errors", errors},
           {"pass", pass}};
  write_json(out / "verify.json", doc);
  json diag{{"schema", 1},
            {"evolve", s.run ? to_json(s.run->diagnostics) : json(nullptr)},
            {"convergence", conv_diag},
            {"wall_seconds", seconds_since(t0)}};
  write_json(out / "diagnostics.json", diag);
  if (report_out) *report_out = std::move(doc);
  return pass ? 0 : 1;
}

}  // namespace nptails::app

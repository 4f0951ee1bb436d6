#include "nptails/app/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <set>

#include "nptails/error.hpp"

namespace nptails::app {

namespace {

using nlohmann::json;

[[noreturn]] void schema_fail(const std::string& path, const std::string& msg) {
  throw Error(ErrorCode::SchemaError, "cli", "schema error at " + path + ": " + msg);
}

std::string join(const std::string& path, const std::string& key) { return path + "/" + key; }

void only_keys(const json& obj, const std::string& path, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) schema_fail(path, "expected an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : obj.items())
    if (!allowed.count(k)) schema_fail(join(path, k), "unknown key");
}

const json& member(const json& obj, const std::string& path, const char* key) {
  if (!obj.contains(key)) schema_fail(join(path, key), "missing required key");
  return obj.at(key);
}

double number(const json& obj, const std::string& path, const char* key,
              std::optional<double> fallback = std::nullopt) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    schema_fail(join(path, key), "missing required key");
  }
  const json& v = obj.at(key);
  if (!v.is_number()) schema_fail(join(path, key), "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) schema_fail(join(path, key), "expected a finite number");
  return x;
}

long long integer(const json& obj, const std::string& path, const char* key,
                  std::optional<long long> fallback = std::nullopt) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    schema_fail(join(path, key), "missing required key");
  }
  const json& v = obj.at(key);
  if (!v.is_number_integer()) schema_fail(join(path, key), "expected an integer");
  return v.get<long long>();
}

std::string text(const json& obj, const std::string& path, const char* key,
                 std::optional<std::string> fallback = std::nullopt) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    schema_fail(join(path, key), "missing required key");
  }
  const json& v = obj.at(key);
  if (!v.is_string()) schema_fail(join(path, key), "expected a string");
  return v.get<std::string>();
}

std::vector<double> numbers(const json& obj, const std::string& path, const char* key) {
  std::vector<double> out;
  if (!obj.contains(key)) return out;
  const json& a = obj.at(key);
  if (!a.is_array()) schema_fail(join(path, key), "expected an array");
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i].is_number()) schema_fail(join(path, key) + "/" + std::to_string(i), "expected a number");
    out.push_back(a[i].get<double>());
  }
  return out;
}

void check_bump(const json& b, const std::string& path) {
  only_keys(b, path, {"center", "width", "amplitude"});
  number(b, path, "center");
  if (number(b, path, "width") <= 0.0) schema_fail(join(path, "width"), "must be positive");
  number(b, path, "amplitude", 1.0);
}

void check_data(const json& d, const std::string& path) {
  if (!d.is_object()) schema_fail(path, "expected an object");
  const std::string family = text(d, path, "family");
  if (family == "bump") {
    only_keys(d, path, {"family", "center", "width", "amplitude", "ell"});
    check_bump(json{{"center", member(d, path, "center")},
                    {"width", member(d, path, "width")},
                    {"amplitude", d.value("amplitude", json(1.0))}},
               path);
  } else if (family == "tail") {
    only_keys(d, path, {"family", "I0", "p", "beta", "phi0", "ell"});
    number(d, path, "I0");
    numbers(d, path, "p");
    number(d, path, "beta", 1.0);
    number(d, path, "phi0", 0.0);
  } else if (family == "superpose") {
    only_keys(d, path, {"family", "a", "A", "b", "B", "tune"});
    number(d, path, "a");
    number(d, path, "b", 1.0);
    check_data(member(d, path, "A"), join(path, "A"));
    check_data(member(d, path, "B"), join(path, "B"));
    if (d.contains("tune") && text(d, path, "tune") != "zero_I0_1")
      schema_fail(join(path, "tune"), "only \"zero_I0_1\" is supported");
  } else if (family == "mixed") {
    only_keys(d, path, {"family", "foliation", "slice", "cone"});
    const std::string f = text(d, path, "foliation");
    if (f != "null_ray" && f != "time_symmetric")
      schema_fail(join(path, "foliation"), "expected \"null_ray\" or \"time_symmetric\"");
    const json& s = member(d, path, "slice");
    const std::string sp = join(path, "slice");
    only_keys(s, sp, {"psi", "Tpsi"});
    check_bump(member(s, sp, "psi"), join(sp, "psi"));
    check_bump(member(s, sp, "Tpsi"), join(sp, "Tpsi"));
    const json& c = member(d, path, "cone");
    if (text(c, join(path, "cone"), "family") == "mixed")
      schema_fail(join(path, "cone/family"), "cone data must be characteristic");
    check_data(c, join(path, "cone"));
  } else {
    schema_fail(join(path, "family"), "unknown family '" + family + "'");
  }
  if (d.contains("ell") && integer(d, path, "ell") < 0) schema_fail(join(path, "ell"), "must be >= 0");
}

GridSpec parse_grid(const json& g, const std::string& path) {
  only_keys(g, path, {"h", "u_max", "v_max"});
  GridSpec s;
  s.h = number(g, path, "h", s.h);
  s.u_max = number(g, path, "u_max", s.u_max);
  s.v_max = number(g, path, "v_max", s.v_max);
  if (!(s.h > 0.0)) schema_fail(join(path, "h"), "must be positive");
  if (!(s.u_max > 0.0)) schema_fail(join(path, "u_max"), "must be positive");
  return s;
}

ObserverSpec parse_observer(const json& o, const std::string& path) {
  only_keys(o, path, {"kind", "value", "id"});
  const std::string kind = text(o, path, "kind");
  ObserverSpec s;
  try {
    switch (curve_kind_from_string(kind)) {
      case CurveKind::ConstantR: s = constant_r(number(o, path, "value")); break;
      case CurveKind::ConstantRstar: s = constant_rstar(number(o, path, "value")); break;
      case CurveKind::Scri: s = scri_proxy(); break;
      case CurveKind::GammaAlpha: s = gamma_alpha(number(o, path, "value")); break;
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::SchemaError) throw;
    schema_fail(join(path, "kind"), e.what());
  }
  if (o.contains("id")) s.id = text(o, path, "id");
  return s;
}

const std::set<std::string> kFields{"psi", "Tpsi", "T2psi", "phi", "Tphi", "T2phi", "v2dvphi"};

ScenarioSpec parse_scenario(const json& o, const std::string& path) {
  only_keys(o, path, {"id", "scenario", "curve", "field", "k"});
  ScenarioSpec s;
  s.id = text(o, path, "id");
  try {
    s.scenario = scenario_from_string(text(o, path, "scenario"));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::SchemaError) throw;
    schema_fail(join(path, "scenario"), e.what());
  }
  s.curve = text(o, path, "curve");
  s.field = text(o, path, "field", "psi");
  if (!kFields.count(s.field)) schema_fail(join(path, "field"), "unknown field '" + s.field + "'");
  s.k = static_cast<int>(integer(o, path, "k", 0));
  if (s.k < 0) schema_fail(join(path, "k"), "must be >= 0");
  return s;
}

CheckSpec parse_check(const json& o, const std::string& path) {
  const std::string kind = text(o, path, "kind");
  CheckSpec c;
  if (kind == "tail") {
    only_keys(o, path, {"kind", "scenario", "exponent_tolerance", "amplitude_tolerance"});
    c.kind = CheckKind::Tail;
    c.scenario = text(o, path, "scenario");
    c.exponent_tolerance = number(o, path, "exponent_tolerance");
    c.amplitude_tolerance = number(o, path, "amplitude_tolerance");
  } else if (kind == "ladder") {
    only_keys(o, path, {"kind", "fits", "tolerance"});
    c.kind = CheckKind::Ladder;
    const json& a = member(o, path, "fits");
    if (!a.is_array() || a.size() < 2) schema_fail(join(path, "fits"), "expected at least two fit ids");
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (!a[i].is_string()) schema_fail(join(path, "fits") + "/" + std::to_string(i), "expected a string");
      c.ladder.push_back(a[i].get<std::string>());
    }
    c.tolerance = number(o, path, "tolerance");
  } else if (kind == "inverted_constant") {
    only_keys(o, path, {"kind", "k", "expect", "tolerance"});
    c.kind = CheckKind::InvertedConstant;
    c.k = static_cast<int>(integer(o, path, "k"));
    c.expect = number(o, path, "expect");
    c.tolerance = number(o, path, "tolerance");
  } else if (kind == "huygens") {
    only_keys(o, path, {"kind", "curve", "after_v", "bound"});
    c.kind = CheckKind::Huygens;
    c.curve = text(o, path, "curve");
    c.after_v = number(o, path, "after_v");
    c.amplitude_tolerance = number(o, path, "bound");
  } else if (kind == "np_drift") {
    only_keys(o, path, {"kind", "tolerance"});
    c.kind = CheckKind::NpDrift;
    c.tolerance = number(o, path, "tolerance");
  } else if (kind == "convergence") {
    only_keys(o, path, {"kind", "lo", "hi"});
    c.kind = CheckKind::Convergence;
    c.lo = number(o, path, "lo");
    c.hi = number(o, path, "hi");
  } else if (kind == "two_oracle") {
    only_keys(o, path, {"kind", "tolerance"});
    c.kind = CheckKind::TwoOracle;
    c.tolerance = number(o, path, "tolerance");
  } else {
    schema_fail(join(path, "kind"), "unknown check kind '" + kind + "'");
  }
  return c;
}

Bump parse_bump(const json& b) {
  return Bump{b.at("center").get<double>(), b.at("width").get<double>(),
              b.value("amplitude", 1.0)};
}

CharacteristicData build_characteristic(const json& d, std::shared_ptr<const CoordinateMap> map,
                                        double v_max) {
  const std::string family = d.at("family").get<std::string>();
  const int ell = d.value("ell", 0);
  if (family == "bump")
    return bump_data(map, d.at("center").get<double>(), d.at("width").get<double>(),
                     d.value("amplitude", 1.0), ell, v_max);
  if (family == "tail")
    return tail_data(map, d.at("I0").get<double>(), d.value("p", std::vector<double>{}),
                     d.value("beta", 1.0), ell, v_max, d.value("phi0", 0.0));
  if (family == "superpose") {
    auto A = build_characteristic(d.at("A"), map, v_max);
    auto B = build_characteristic(d.at("B"), map, v_max);
    const double a = d.at("a").get<double>();
    double b = d.value("b", 1.0);
    if (d.contains("tune")) b = -a * time_inverted_I0(A).value / time_inverted_I0(B).value;
    return superpose(a, A, b, B);
  }
  throw Error(ErrorCode::InvalidArgument, "cli", "family '" + family + "' has no cone data");
}

}  // namespace

SpacetimeModel parse_model(const json& m, const std::string& path) {
  only_keys(m, path, {"kind", "M", "e", "beta", "R", "coefficients"});
  const std::string kind = text(m, path, "kind");
  ModelKind k;
  try {
    k = model_kind_from_string(kind);
  } catch (const Error& e) {
    schema_fail(join(path, "kind"), e.what());
  }
  std::optional<double> R;
  if (m.contains("R")) R = number(m, path, "R");
  const double beta = number(m, path, "beta", 1.0);
  if (k == ModelKind::Custom) {
    if (!m.contains("coefficients")) schema_fail(join(path, "coefficients"), "missing required key");
    return make_custom_model(numbers(m, path, "coefficients"), beta, R);
  }
  const double M = number(m, path, "M", k == ModelKind::Minkowski ? 0.0 : 1.0);
  return make_model(k, M, number(m, path, "e", 0.0), beta, nullptr, R);
}

RunConfig parse_config(const json& doc, const std::string& source) {
  const std::string root = "";
  only_keys(doc, "/", {"schema", "name", "model", "data", "grid", "observers", "scenarios",
                       "checks", "orders", "convergence", "evolve", "fit", "output", "threads",
                       "budget_cells"});
  if (integer(doc, root, "schema") != kSchemaVersion)
    schema_fail("/schema", "unsupported schema version (expected " +
                               std::to_string(kSchemaVersion) + ")");
  RunConfig c;
  c.name = text(doc, root, "name", std::filesystem::path(source).stem().string());
  c.model = member(doc, root, "model");
  parse_model(c.model);
  c.data = member(doc, root, "data");
  check_data(c.data, "/data");
  if (doc.contains("grid")) c.grid = parse_grid(doc.at("grid"), "/grid");

  if (doc.contains("observers")) {
    const json& a = doc.at("observers");
    if (!a.is_array()) schema_fail("/observers", "expected an array");
    for (std::size_t i = 0; i < a.size(); ++i)
      c.observers.push_back(parse_observer(a[i], "/observers/" + std::to_string(i)));
  }
  std::set<std::string> curves;
  for (const auto& o : c.observers)
    if (!curves.insert(o.id).second) schema_fail("/observers", "duplicate curve id '" + o.id + "'");

  std::set<std::string> ids;
  if (doc.contains("scenarios")) {
    const json& a = doc.at("scenarios");
    if (!a.is_array()) schema_fail("/scenarios", "expected an array");
    for (std::size_t i = 0; i < a.size(); ++i) {
      const std::string p = "/scenarios/" + std::to_string(i);
      ScenarioSpec s = parse_scenario(a[i], p);
      if (!curves.count(s.curve)) schema_fail(p + "/curve", "no observer with id '" + s.curve + "'");
      if (!ids.insert(s.id).second) schema_fail(p + "/id", "duplicate scenario id '" + s.id + "'");
      c.scenarios.push_back(std::move(s));
    }
  }
  if (doc.contains("checks")) {
    const json& a = doc.at("checks");
    if (!a.is_array()) schema_fail("/checks", "expected an array");
    for (std::size_t i = 0; i < a.size(); ++i) {
      const std::string p = "/checks/" + std::to_string(i);
      CheckSpec k = parse_check(a[i], p);
      if (k.kind == CheckKind::Tail && !ids.count(k.scenario))
        schema_fail(p + "/scenario", "no scenario with id '" + k.scenario + "'");
      for (const auto& f : k.ladder)
        if (!ids.count(f)) schema_fail(p + "/fits", "no scenario with id '" + f + "'");
      if (k.kind == CheckKind::Huygens && !curves.count(k.curve))
        schema_fail(p + "/curve", "no observer with id '" + k.curve + "'");
      c.checks.push_back(std::move(k));
    }
  }

  c.orders = static_cast<int>(integer(doc, root, "orders", 1));
  if (c.orders < 0) schema_fail("/orders", "must be >= 0");

  if (doc.contains("convergence")) {
    const json& b = doc.at("convergence");
    only_keys(b, "/convergence", {"levels", "grid"});
    ConvergenceSpec s;
    s.levels = static_cast<int>(integer(b, "/convergence", "levels", 3));
    if (s.levels < 3) schema_fail("/convergence/levels", "at least 3 levels are required");
    if (b.contains("grid")) s.grid = parse_grid(b.at("grid"), "/convergence/grid");
    c.convergence = s;
  }
  if (doc.contains("evolve")) {
    const json& e = doc.at("evolve");
    only_keys(e, "/evolve", {"sample_dt", "audit_fraction", "audit_seed", "rows_per_block"});
    c.evolve.sample_dt = number(e, "/evolve", "sample_dt", c.evolve.sample_dt);
    c.evolve.audit_fraction = number(e, "/evolve", "audit_fraction", c.evolve.audit_fraction);
    c.evolve.audit_seed = static_cast<std::uint64_t>(integer(e, "/evolve", "audit_seed", 1));
    c.evolve.rows_per_block = static_cast<int>(integer(e, "/evolve", "rows_per_block", 4));
    const int b = c.evolve.rows_per_block;
    if (b != 1 && b != 2 && b != 4) schema_fail("/evolve/rows_per_block", "expected 1, 2 or 4");
  }
  if (doc.contains("fit")) {
    const json& f = doc.at("fit");
    only_keys(f, "/fit", {"exponent_lo", "exponent_hi", "amplitude_decades"});
    c.fit.exponent_lo = number(f, "/fit", "exponent_lo", c.fit.exponent_lo);
    c.fit.exponent_hi = number(f, "/fit", "exponent_hi", c.fit.exponent_hi);
    c.fit.amplitude_decades = number(f, "/fit", "amplitude_decades", c.fit.amplitude_decades);
  }
  c.output = doc.contains("output") ? std::filesystem::path(text(doc, root, "output"))
                                    : default_output_dir();
  c.threads = static_cast<int>(integer(doc, root, "threads", 1));
  if (c.threads < 1) schema_fail("/threads", "must be >= 1");
  if (doc.contains("budget_cells")) {
    const double b = number(doc, root, "budget_cells");
    if (!(b > 0.0)) schema_fail("/budget_cells", "must be positive");
    c.evolve.budget_cells = static_cast<std::uint64_t>(b);
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::IoError, "cli", "cannot open config " + file.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::SchemaError, "cli", file.string() + ": " + e.what());
  }
  return parse_config(doc, file.string());
}

std::filesystem::path default_output_dir() {
  if (const char* env = std::getenv("NPTAILS_OUT"); env && *env) return env;
  return "nptails-out";
}

std::shared_ptr<const CoordinateMap> RunConfig::make_coordinate_map() const {
  return make_map(parse_model(model));
}

CharacteristicData RunConfig::make_characteristic(std::optional<double> v_max) const {
  const json& d = data.at("family") == "mixed" ? data.at("cone") : data;
  return build_characteristic(d, make_coordinate_map(), v_max.value_or(grid.v_max));
}

MixedSurfaceData RunConfig::make_surface() const {
  auto map = make_coordinate_map();
  if (data.at("family") != "mixed") return as_surface(build_characteristic(data, map, grid.v_max));
  const json& s = data.at("slice");
  auto slice = std::make_shared<BumpSlice>(parse_bump(s.at("psi")), parse_bump(s.at("Tpsi")));
  const FoliationSpec f = data.at("foliation") == "time_symmetric" ? FoliationSpec::time_symmetric()
                                                                   : FoliationSpec::null_ray();
  return mixed_data(f, slice, build_characteristic(data.at("cone"), map, grid.v_max));
}

}  // namespace nptails::app

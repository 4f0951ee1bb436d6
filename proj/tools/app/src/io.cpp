#include "nptails/app/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "nptails/error.hpp"

namespace nptails::app {

namespace {

using nlohmann::json;

[[noreturn]] void io_fail(const std::string& msg) { throw Error(ErrorCode::IoError, "cli", msg); }

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const char* const kColumns[] = {"tau", "u", "v", "r", "phi", "psi", "Tpsi", "T2psi", "v2dvphi"};

std::vector<double>* column_ptr(SeriesTable& t, const std::string& name) {
  if (name == "tau") return &t.tau;
  if (name == "u") return &t.u;
  if (name == "v") return &t.v;
  if (name == "r") return &t.r;
  if (name == "phi") return &t.phi;
  if (name == "psi") return &t.psi;
  if (name == "Tpsi") return &t.Tpsi;
  if (name == "T2psi") return &t.T2psi;
  if (name == "v2dvphi") return &t.v2dvphi;
  return nullptr;
}

std::ofstream open_out(const std::filesystem::path& file) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary);
  if (!out) io_fail("cannot write " + file.string());
  return out;
}

// JSON has no NaN; missing values are null.
json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

double number_from(const json& j) { return j.is_number() ? j.get<double>() : kNaN; }

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, end);
}

const std::vector<double>& SeriesTable::column(const std::string& name) const {
  auto* p = column_ptr(const_cast<SeriesTable&>(*this), name);
  if (!p) throw Error(ErrorCode::InvalidArgument, "cli", "unknown column '" + name + "'");
  return *p;
}

SeriesTable to_table(const ObserverSeries& s) {
  SeriesTable t;
  t.id = s.spec.id;
  for (const auto& x : s.samples) {
    t.tau.push_back(x.tau);
    t.u.push_back(x.u);
    t.v.push_back(x.v);
    t.r.push_back(x.r);
    t.phi.push_back(x.phi);
    t.psi.push_back(x.psi);
    t.Tpsi.push_back(x.Tpsi);
    t.T2psi.push_back(x.T2psi);
    t.v2dvphi.push_back(x.v2dvphi);
  }
  return t;
}

void write_observer_csv(const std::filesystem::path& file, const SeriesTable& t) {
  std::ofstream out = open_out(file);
  std::string line;
  for (std::size_t c = 0; c < std::size(kColumns); ++c) line += (c ? "," : "") + std::string(kColumns[c]);
  out << line << '\n';
  for (std::size_t i = 0; i < t.tau.size(); ++i) {
    line.clear();
    for (std::size_t c = 0; c < std::size(kColumns); ++c) {
      if (c) line += ',';
      line += format_double(t.column(kColumns[c])[i]);
    }
    out << line << '\n';
  }
  if (!out) io_fail("write failed for " + file.string());
}

SeriesTable read_observer_csv(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) io_fail("cannot open " + file.string());
  SeriesTable t;
  t.id = file.stem().string();
  std::string line;
  if (!std::getline(in, line)) io_fail(file.string() + " is empty");
  std::vector<std::vector<double>*> cols;
  {
    std::stringstream ss(line);
    std::string name;
    while (std::getline(ss, name, ',')) {
      auto* p = column_ptr(t, name);
      if (!p) io_fail(file.string() + ": unknown column '" + name + "'");
      cols.push_back(p);
    }
  }
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::size_t c = 0, pos = 0;
    while (pos <= line.size()) {
      const std::size_t end = std::min(line.find(',', pos), line.size());
      if (c >= cols.size()) io_fail(file.string() + ": too many fields on line " + std::to_string(row));
      double x;
      auto [p, ec] = std::from_chars(line.data() + pos, line.data() + end, x);
      if (ec != std::errc() || p != line.data() + end)
        io_fail(file.string() + ": bad number on line " + std::to_string(row));
      cols[c++]->push_back(x);
      pos = end + 1;
    }
    if (c != cols.size()) io_fail(file.string() + ": too few fields on line " + std::to_string(row));
  }
  for (const char* name : kColumns)
    if (t.column(name).size() != t.tau.size()) io_fail(file.string() + ": missing column " + name);
  return t;
}

std::vector<double> centred_difference(const std::vector<double>& t, const std::vector<double>& y) {
  std::vector<double> d(y.size(), kNaN);
  for (std::size_t i = 1; i + 1 < y.size(); ++i) d[i] = (y[i + 1] - y[i - 1]) / (t[i + 1] - t[i - 1]);
  return d;
}

FitInput fit_input(const SeriesTable& t, const std::string& field, Scenario scenario) {
  FitInput in;
  in.curve_id = t.id;
  in.field_id = field;
  in.tau = scenario == Scenario::HorizonZeroNP ? t.v : t.tau;
  in.v = t.v;
  if (field == "Tphi") {
    in.y = centred_difference(t.u, t.phi);
  } else if (field == "T2phi") {
    in.y = centred_difference(t.u, centred_difference(t.u, t.phi));
  } else {
    in.y = t.column(field);
  }
  return in;
}

json to_json(const Estimate& e) {
  return {{"value", number_or_null(e.value)}, {"error", number_or_null(e.error)}};
}

json to_json(const NpReport& r) {
  json j;
  j["schema"] = 1;
  j["I0"] = to_json(r.I0);
  j["C0"] = r.C0 ? to_json(*r.C0) : json(nullptr);
  j["normalization"] = "mode";
  json inv = json::array();
  for (const auto& c : r.inverted) {
    json e{{"k", c.k},
           {"value", number_or_null(c.value)},
           {"error", number_or_null(c.error)},
           {"method", to_string(c.method)}};
    if (c.closed_form) e["closed_form"] = number_or_null(*c.closed_form);
    if (c.constructed) e["constructed"] = number_or_null(*c.constructed);
    if (c.agreement) e["agreement"] = number_or_null(*c.agreement);
    json p = json::array();
    for (double x : c.expansion) p.push_back(number_or_null(x));
    e["expansion"] = p;
    inv.push_back(e);
  }
  j["inverted"] = inv;
  return j;
}

NpReport npreport_from_json(const json& j) {
  NpReport r;
  try {
    r.I0 = {number_from(j.at("I0").at("value")), number_from(j.at("I0").at("error"))};
    if (j.contains("C0") && j.at("C0").is_object())
      r.C0 = Estimate{number_from(j.at("C0").at("value")), number_from(j.at("C0").at("error"))};
    for (const auto& e : j.at("inverted")) {
      InvertedConstant c;
      c.k = e.at("k").get<int>();
      c.value = number_from(e.at("value"));
      c.error = number_from(e.at("error"));
      const std::string m = e.at("method").get<std::string>();
      c.method = m == "both" ? ConstantMethod::Both
                 : m == "constructed_limit" ? ConstantMethod::ConstructedLimit
                                            : ConstantMethod::ClosedForm;
      r.inverted.push_back(c);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaError, "cli", std::string("malformed NpReport: ") + e.what());
  }
  return r;
}

json to_json(const TailFit& f) {
  json idx_tau = json::array(), idx_p = json::array();
  for (std::size_t i = 0; i < f.index.tau.size(); ++i) {
    idx_tau.push_back(number_or_null(f.index.tau[i]));
    idx_p.push_back(number_or_null(f.index.p[i]));
  }
  return {{"schema", 1},
          {"curve", f.curve_id},
          {"field", f.field_id},
          {"scenario", to_string(f.scenario)},
          {"k", f.k},
          {"window", {number_or_null(f.window_lo), number_or_null(f.window_hi)}},
          {"amplitude_window", {number_or_null(f.amp_window_lo), number_or_null(f.amp_window_hi)}},
          {"index", {{"tau", idx_tau}, {"p", idx_p}, {"power_law", f.index.power_law}}},
          {"p_inf", to_json(f.p_inf)},
          {"p_theory", f.p_theory},
          {"amplitude", to_json(f.amplitude)},
          {"target", {{"formula", f.formula}, {"value", number_or_null(f.target)}}},
          {"deviation", number_or_null(f.deviation)},
          {"relative", f.relative}};
}

json to_json(const Diagnostics& d) {
  return {{"cells", d.cells},
          {"residual_samples", d.residual_samples},
          {"residual_max", number_or_null(d.residual_max)},
          {"residual_rms", number_or_null(d.residual_rms)},
          {"rows_per_block", d.rows_per_block},
          {"wall_seconds", d.wall_seconds}};
}

void write_json(const std::filesystem::path& file, const json& j) {
  std::ofstream out = open_out(file);
  out << j.dump(2) << '\n';
  if (!out) io_fail("write failed for " + file.string());
}

json read_json(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) io_fail("cannot open " + file.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::SchemaError, "cli", file.string() + ": " + e.what());
  }
}

void write_model_csv(const std::filesystem::path& file, const CoordinateMap& map, int points) {
  const SpacetimeModel& m = map.model();
  const double s = m.length_scale();
  std::ofstream out = open_out(file);
  out << "r,D,dD,rstar\n";
  for (int i = 0; i < points; ++i) {
    // r - r_min from 1e-3 s to 1e4 s.
    const double r = m.r_min() + s * std::pow(10.0, -3.0 + 7.0 * i / std::max(points - 1, 1));
    out << format_double(r) << ',' << format_double(m.D(r)) << ',' << format_double(m.dD(r))
        << ',' << format_double(map.tortoise(r)) << '\n';
  }
}

void write_chain_csv(const std::filesystem::path& file, const TimeIntegralData& t, double v0,
                     double v_max, int points) {
  std::ofstream out = open_out(file);
  out << "v,phi\n";
  for (int i = 0; i < points; ++i) {
    const double v = v0 + (v_max - v0) * i / std::max(points - 1, 1);
    out << format_double(v) << ',' << format_double(t.cone->phi_v(v)) << '\n';
  }
}

}  // namespace nptails::app

#include <doctest.h>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <limits>

#include "nptails/app/config.hpp"
#include "nptails/app/io.hpp"
#include "nptails/error.hpp"

using namespace nptails;
using namespace nptails::app;
using nlohmann::json;

namespace {

json minimal() {
  return json::parse(R"({"schema": 1, "model": {"kind": "schwarzschild", "M": 1.0},
                         "data": {"family": "bump", "center": 40.0, "width": 10.0}})");
}

std::string schema_message(const json& doc) {
  try {
    parse_config(doc, "test.json");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SchemaError);
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("format_double keeps 17 significant digits") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(1500.0) == "1500");
  CHECK(format_double(-2.5e-300) == "-2.5e-300");
  CHECK(format_double(1.0 / 3.0) == "0.33333333333333331");
  CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
  for (double x : {M_PI, -1.0 / 3.0, 6.02214076e23, 4.9e-324}) {
    const std::string s = format_double(x);
    double back = 0.0;
    std::from_chars(s.data(), s.data() + s.size(), back);
    CHECK(back == x);
  }
}

TEST_CASE("observer CSV round trip") {
  SeriesTable t;
  t.id = "r10";
  for (int i = 0; i < 5; ++i) {
    const double u = 0.5 * i;
    for (auto* c : {&t.tau, &t.u, &t.v, &t.r, &t.phi, &t.psi, &t.Tpsi, &t.T2psi, &t.v2dvphi})
      c->push_back(u / 3.0 + double(c - &t.tau));
  }
  t.Tpsi[0] = std::numeric_limits<double>::quiet_NaN();
  const auto file = std::filesystem::temp_directory_path() / "nptails_roundtrip" / "r10.csv";
  write_observer_csv(file, t);
  const SeriesTable back = read_observer_csv(file);
  CHECK(back.id == "r10");
  CHECK(back.phi == t.phi);
  CHECK(std::isnan(back.Tpsi[0]));
  CHECK(back.T2psi == t.T2psi);
  std::filesystem::remove_all(file.parent_path());
}

TEST_CASE("centred differences and derived phi fields") {
  SeriesTable t;
  for (int i = 0; i < 6; ++i) {
    t.u.push_back(i * 0.5);
    t.tau.push_back(i * 0.5);
    t.v.push_back(100.0);
    t.phi.push_back(3.0 * i * 0.5 * i * 0.5);
  }
  const FitInput in = fit_input(t, "Tphi", Scenario::ScriZeroNP);
  CHECK(std::isnan(in.y.front()));
  CHECK(in.y[2] == doctest::Approx(6.0 * 1.0));
  const FitInput in2 = fit_input(t, "T2phi", Scenario::ScriZeroNP);
  CHECK(in2.y[2] == doctest::Approx(6.0));
  CHECK(fit_input(t, "phi", Scenario::HorizonZeroNP).tau == t.v);
}

TEST_CASE("minimal config takes the documented defaults") {
  const RunConfig c = parse_config(minimal(), "dir/minimal.json");
  CHECK(c.name == "minimal");
  CHECK(c.grid.h == 1.0 / 32.0);
  CHECK(c.grid.u_max == 1500.0);
  CHECK(c.grid.v_max == 3000.0);
  CHECK(c.orders == 1);
  CHECK(c.threads == 1);
  CHECK_FALSE(c.convergence);
  const auto d = c.make_characteristic(200.0);
  CHECK(d.v_max == 200.0);
  CHECK(d.model().kind() == ModelKind::Schwarzschild);
}

TEST_CASE("schema errors name the offending path") {
  auto doc = minimal();
  doc["schema"] = 2;
  CHECK(schema_message(doc).find("/schema") != std::string::npos);

  doc = minimal();
  doc["model"]["kind"] = "kerr";
  CHECK(schema_message(doc).find("/model/kind") != std::string::npos);

  doc = minimal();
  doc["data"]["width"] = "wide";
  CHECK(schema_message(doc).find("/data/width") != std::string::npos);

  doc = minimal();
  doc["grid"] = {{"h", 0.1}, {"umax", 3.0}};
  CHECK(schema_message(doc).find("/grid/umax") != std::string::npos);

  doc = minimal();
  doc["observers"] = json::array({{{"kind", "constant_r"}, {"value", 10.0}}});
  doc["scenarios"] = json::array({{{"id", "a"}, {"scenario", "interior_zeroNP"}, {"curve", "r12"}}});
  CHECK(schema_message(doc).find("/scenarios/0/curve") != std::string::npos);

  doc = minimal();
  doc["convergence"] = {{"levels", 2}};
  CHECK(schema_message(doc).find("/convergence/levels") != std::string::npos);

  doc = minimal();
  doc["data"] = {{"family", "superpose"}, {"a", 1.0}, {"A", {{"family", "bump"}, {"center", 4.0}}},
                 {"B", {{"family", "tail"}, {"I0", 0.0}}}};
  CHECK(schema_message(doc).find("/data/A/width") != std::string::npos);

  doc = minimal();
  doc["checks"] = json::array({{{"kind", "tail"}, {"scenario", "missing"},
                                {"exponent_tolerance", 0.1}, {"amplitude_tolerance", 0.1}}});
  CHECK(schema_message(doc).find("/checks/0/scenario") != std::string::npos);
}

TEST_CASE("superpose tuning cancels I0^(1)") {
  auto doc = minimal();
  doc["data"] = json::parse(R"({"family": "superpose", "a": 1.0,
      "A": {"family": "bump", "center": 40.0, "width": 10.0},
      "B": {"family": "bump", "center": 80.0, "width": 10.0}, "tune": "zero_I0_1"})");
  const RunConfig c = parse_config(doc, "tuned.json");
  const auto d = c.make_characteristic();
  CHECK(std::abs(time_inverted_I0(d).value) < 1e-10);
}

TEST_CASE("NpReport JSON round trip") {
  NpReport r;
  r.I0 = {0.0, 1e-12};
  r.C0 = Estimate{-6.8, 1e-9};
  InvertedConstant c;
  c.k = 1;
  c.value = -6.8;
  c.error = 2e-8;
  c.method = ConstantMethod::Both;
  r.inverted.push_back(c);
  const json j = to_json(r);
  CHECK(j["schema"] == 1);
  CHECK(j["inverted"][0]["method"] == "both");
  const NpReport back = npreport_from_json(j);
  CHECK(back.order(1)->value == -6.8);
  CHECK(back.C0->error == 1e-9);
  CHECK_THROWS_AS(npreport_from_json(json::object()), Error);
}

#include <doctest.h>

#include <cmath>

#include "nptails/asymptotics.hpp"
#include "nptails/error.hpp"

using namespace nptails;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::InvalidArgument;
}

FitInput synthetic(auto&& f, double t_end = 1500.0, double dt = 0.5) {
  FitInput in;
  in.curve_id = "synthetic";
  in.field_id = "psi";
  for (double t = dt; t <= t_end; t += dt) {
    in.tau.push_back(t);
    in.y.push_back(f(t));
  }
  return in;
}

NpReport report_with(double I0, double I01) {
  NpReport r;
  r.I0 = {I0, 0.0};
  InvertedConstant c;
  c.k = 1;
  c.value = I01;
  r.inverted.push_back(c);
  return r;
}

}  // namespace

TEST_CASE("local index of an exact power law") {
  auto in = synthetic([](double t) { return 3.0 / (t * t * t); });
  auto p = local_power_index(in.tau, in.y);
  REQUIRE(p.p.size() > 100);
  for (double v : p.p) CHECK(v == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(p.power_law);
  // 40 points per decade.
  CHECK(p.tau[40] / p.tau[0] == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("exponential decay is not a power law") {
  auto in = synthetic([](double t) { return std::exp(-t / 20.0); }, 600.0);
  CHECK_FALSE(local_power_index(in.tau, in.y).power_law);
}

TEST_CASE("sign changes are rejected by the index") {
  auto in = synthetic([](double t) { return std::cos(t / 50.0) / (t * t); }, 200.0);
  CHECK(code_of([&] { local_power_index(in.tau, in.y); }) == ErrorCode::SignChangeInWindow);
}

TEST_CASE("interior fit of -8 Q / tau^3 with a correction") {
  const double Q = -6.8;
  auto exact = synthetic([&](double t) { return -8.0 * Q / (t * t * t); });
  auto f = extrapolate_and_compare(exact, report_with(0.0, Q), Scenario::InteriorZeroNP);
  CHECK(f.p_inf.value == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(f.amplitude.value == doctest::Approx(-8.0 * Q).epsilon(1e-9));
  CHECK(f.target == doctest::Approx(-8.0 * Q));
  CHECK(f.deviation < 1e-9);
  CHECK(f.window_lo == doctest::Approx(375.0));
  CHECK(f.window_hi == doctest::Approx(1500.0));

  auto corrected = synthetic([&](double t) { return -8.0 * Q / (t * t * t) + 30.0 * Q / std::pow(t, 4); });
  auto g = extrapolate_and_compare(corrected, report_with(0.0, Q), Scenario::InteriorZeroNP);
  CHECK(std::abs(g.p_inf.value - 3.0) < 0.01);
  CHECK(g.deviation < 0.01);

  auto shifted = synthetic([](double t) { return std::pow(t, -3.0) * (1.0 + 5.0 / t); });
  auto s = extrapolate_and_compare(shifted, report_with(0.0, -0.125), Scenario::InteriorZeroNP);
  CHECK(std::abs(s.p_inf.value - 3.0) < 0.01);
  CHECK(s.amplitude.value == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("fits are equivariant under scaling") {
  auto base = synthetic([](double t) { return std::pow(t, -2.0) * (1.0 + 7.0 / t); });
  auto scaled = base;
  for (double& y : scaled.y) y *= -3.5;
  auto a = extrapolate_and_compare(base, report_with(0.25, 0.0), Scenario::InteriorNonzeroNP);
  auto b = extrapolate_and_compare(scaled, report_with(0.25, 0.0), Scenario::InteriorNonzeroNP);
  CHECK(std::abs(a.p_inf.value - b.p_inf.value) <= 1e-12);
  CHECK(std::abs(b.amplitude.value + 3.5 * a.amplitude.value) <= 1e-12 * std::abs(b.amplitude.value));
  CHECK(a.deviation == doctest::Approx(0.0).epsilon(1e-3));
}

TEST_CASE("ringing before the tail is skipped") {
  auto in = synthetic([](double t) {
    return 50.0 * std::pow(t, -3.0) + std::exp(-0.1 * t) * std::sin(0.11 * t);
  });
  auto f = extrapolate_and_compare(in, report_with(0.0, -50.0 / 8.0), Scenario::InteriorZeroNP);
  CHECK(std::abs(f.p_inf.value - 3.0) < 1e-3);
  CHECK(f.deviation < 1e-3);
}

TEST_CASE("farfield rescaling on gamma_alpha") {
  const double Q = 2.0;
  FitInput in;
  in.curve_id = "gamma0.8";
  in.field_id = "psi";
  for (double u = 1.0; u <= 1500.0; u += 1.0) {
    double v = u + std::pow(u, 0.8) * 1.5;
    in.tau.push_back(u);
    in.v.push_back(v);
    in.y.push_back(-4.0 * Q * (1.0 + u / v) / (u * u * v));
  }
  auto f = extrapolate_and_compare(in, report_with(0.0, Q), Scenario::FarfieldZeroNP);
  CHECK(f.amplitude.value == doctest::Approx(-4.0 * Q).epsilon(1e-9));
}

TEST_CASE("scenario targets") {
  auto t = scenario_target(Scenario::InteriorNonzeroNP, 1);
  CHECK(t.exponent == 3.0);
  CHECK(t.coefficient == -8.0);
  CHECK(scenario_target(Scenario::InteriorNonzeroNP, 2).coefficient == 24.0);
  CHECK(scenario_target(Scenario::ScriTk, 2).coefficient == 4.0);
  CHECK(scenario_target(Scenario::HigherOrder).coefficient == 24.0);
  // d/dtau of -8 tau^-3 is 24 tau^-4, then -96 tau^-5.
  CHECK(scenario_target(Scenario::InteriorZeroNP, 1).exponent == 4.0);
  CHECK(scenario_target(Scenario::InteriorZeroNP, 1).coefficient == 24.0);
  CHECK(scenario_target(Scenario::HorizonZeroNP, 2).coefficient == -96.0);
  CHECK(scenario_target(Scenario::HigherOrder).constant_order == 2);
  CHECK(scenario_from_string("scri_zeroNP") == Scenario::ScriZeroNP);
  CHECK(code_of([] { scenario_from_string("nope"); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("fit failures") {
  auto in = synthetic([](double t) { return std::pow(t, -3.0); });
  NpReport bare;
  CHECK(code_of([&] { extrapolate_and_compare(in, bare, Scenario::HigherOrder); }) ==
        ErrorCode::MissingConstant);
  FitInput shortrec;
  for (double t = 100.0; t <= 800.0; t += 1.0) {
    shortrec.tau.push_back(t);
    shortrec.y.push_back(std::pow(t, -3.0));
  }
  CHECK(code_of([&] {
          extrapolate_and_compare(shortrec, report_with(0.0, 1.0), Scenario::InteriorZeroNP);
        }) == ErrorCode::WindowTooShort);
}

TEST_CASE("fit_inverse_powers recovers a polynomial in 1/tau") {
  std::vector<double> t, y;
  for (double x = 100.0; x <= 1000.0; x += 10.0) {
    t.push_back(x);
    y.push_back(2.0 - 30.0 / x + 400.0 / (x * x));
  }
  auto c = fit_inverse_powers(t, y, 2);
  CHECK(c[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(c[1] == doctest::Approx(-30.0 / 1000.0).epsilon(1e-10));
  CHECK(c[2] == doctest::Approx(400.0 / 1e6).epsilon(1e-9));
}

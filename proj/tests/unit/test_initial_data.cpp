#include <doctest.h>

#include <cmath>

#include "nptails/error.hpp"
#include "nptails/initial_data.hpp"
#include "nptails/np_constants.hpp"

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

}  // namespace

TEST_CASE("bump profile peaks at its centre and has compact support") {
  Bump b{40.0, 10.0, 2.5};
  CHECK(b.value(40.0) == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(b.value(30.0) == 0.0);
  CHECK(b.value(50.0) == 0.0);
  CHECK(b.value(29.0) == 0.0);
  CHECK(b.derivative(40.0) == doctest::Approx(0.0).epsilon(1e-15));
  // Derivative against a centred difference.
  for (double x : {31.0, 35.5, 44.0, 49.0}) {
    const double fd = (b.value(x + 1e-5) - b.value(x - 1e-5)) / 2e-5;
    CHECK(b.derivative(x) == doctest::Approx(fd).epsilon(1e-7));
  }
}

TEST_CASE("bump_data places the profile on the cone") {
  auto map = make_map(make_model(ModelKind::Schwarzschild, 1.0));
  auto d = bump_data(map, 40.0, 10.0, 1.0, 0, 3000.0);
  CHECK(d.v0 == 20.0);
  CHECK(d.cone->phi_v(40.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(d.cone->phi_v(25.0) == 0.0);
  CHECK(d.ray->phi(5.0) == 0.0);
  REQUIRE(d.support);
  CHECK(d.support->first == 30.0);
  CHECK(d.support->second == 50.0);
  // r-parametrized view agrees with the v view through the map.
  const double r = map->inverse_tortoise(20.0);
  CHECK(d.cone->phi_r(r) == doctest::Approx(1.0).epsilon(1e-12));

  CHECK(code_of([&] { bump_data(map, 25.0, 10.0, 1.0, 0, 3000.0); }) ==
        ErrorCode::SupportOutsideGrid);
  CHECK(code_of([&] { bump_data(map, 2995.0, 10.0, 1.0, 0, 3000.0); }) ==
        ErrorCode::SupportOutsideGrid);
  CHECK(code_of([&] { bump_data(map, 40.0, 0.0, 1.0, 0, 3000.0); }) ==
        ErrorCode::InvalidArgument);
}

TEST_CASE("tail_data reproduces its prescribed expansion") {
  auto flat = make_map(make_model(ModelKind::Minkowski, 0.0));
  auto d = tail_data(flat, 1.0, {}, 1.0, 0, 3000.0);
  for (double r : {10.0, 37.0, 500.0, 1e5}) CHECK(d.cone->r2_dphi_dr(r) == doctest::Approx(1.0));

  auto sch = make_map(make_model(ModelKind::Schwarzschild, 1.0));
  auto e = tail_data(sch, 0.0, {1.0}, 1.0, 0, 3000.0);
  for (double r : {10.0, 80.0, 640.0}) CHECK(e.cone->r2_dphi_dr(r) == doctest::Approx(1.0 / r));

  auto c = tail_data(sch, 0.5, {}, 1.0, 0, 3000.0, 0.25);
  CHECK(c.ray->phi(3.0) == 0.25);
  CHECK(c.cone->phi_r(10.0) == doctest::Approx(0.25));
  CHECK(c.ray_at_u(100.0) == 0.25);
}

TEST_CASE("estimate_I0 round trips tail data") {
  auto sch = make_map(make_model(ModelKind::Schwarzschild, 1.0));
  auto d = tail_data(sch, 5.0, {-3.0, 2.0}, 1.0, 0, 3000.0);
  const LimitFit f = estimate_I0(d);
  CHECK(std::abs(f.value - 5.0) <= std::max(f.error, 1e-12 * 5.0));
  CHECK(f.radii.size() >= 4);

  auto p1 = tail_data(sch, 0.0, {1.0}, 1.0, 0, 3000.0);
  const LimitFit g = estimate_I0(p1);
  CHECK(std::abs(g.value) <= std::max(10.0 * g.error, 1e-12));
  // Sub-leading coefficient of the fit in powers of 1/r.
  CHECK(g.coefficients[1] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("compact bump has vanishing I0") {
  auto sch = make_map(make_model(ModelKind::Schwarzschild, 1.0));
  const LimitFit f = estimate_I0(bump_data(sch, 40.0, 10.0, 3.0, 0, 3000.0));
  CHECK(std::abs(f.value) < 1e-8 * 3.0);
}

TEST_CASE("superpose is bilinear") {
  auto sch = make_map(make_model(ModelKind::Schwarzschild, 1.0));
  auto A = bump_data(sch, 40.0, 10.0, 1.0, 0, 3000.0);
  auto B = bump_data(sch, 80.0, 15.0, 1.0, 0, 3000.0);

  auto zero = superpose(1.0, A, -1.0, A);
  for (double v : {32.0, 40.0, 47.0}) CHECK(zero.cone->phi_v(v) == 0.0);

  auto S = superpose(0.7, A, -1.3, B);
  for (double v : {35.0, 45.0, 70.0, 90.0}) {
    const double expect = 0.7 * A.cone->phi_v(v) - 1.3 * B.cone->phi_v(v);
    CHECK(S.cone->phi_v(v) == doctest::Approx(expect).epsilon(1e-12));
  }
  REQUIRE(S.support);
  CHECK(S.support->first == 30.0);
  CHECK(S.support->second == 95.0);

  const double ia = time_inverted_I0(A).value, ib = time_inverted_I0(B).value;
  const double is = time_inverted_I0(S).value;
  CHECK(std::abs(is - (0.7 * ia - 1.3 * ib)) <= 1e-10 * (std::abs(ia) + std::abs(ib)));

  auto flat = make_map(make_model(ModelKind::Minkowski, 0.0));
  CHECK(code_of([&] { superpose(1.0, A, 1.0, bump_data(flat, 40.0, 10.0, 1.0, 0, 3000.0)); }) ==
        ErrorCode::GridMismatch);
  CHECK(code_of([&] { superpose(1.0, A, 1.0, bump_data(sch, 40.0, 10.0, 1.0, 1, 3000.0)); }) ==
        ErrorCode::ModeMismatch);
}

TEST_CASE("mixed_data validates the junction and the bifurcation sphere") {
  auto sch = make_map(make_model(ModelKind::Schwarzschild, 1.0));
  auto cone = tail_data(sch, 0.0, {}, 1.0, 0, 3000.0);
  auto inside = std::make_shared<BumpSlice>(Bump{6.0, 2.0, 1.0}, Bump{6.0, 2.0, 0.0});
  CHECK_NOTHROW(mixed_data(FoliationSpec::time_symmetric(), inside, cone));

  auto at_R = std::make_shared<BumpSlice>(Bump{9.0, 2.0, 1.0}, Bump{9.0, 2.0, 0.0});
  CHECK(code_of([&] { mixed_data(FoliationSpec::time_symmetric(), at_R, cone); }) ==
        ErrorCode::JunctionMismatch);

  auto near_horizon = std::make_shared<BumpSlice>(Bump{3.0, 0.99, 1.0}, Bump{3.0, 0.99, 0.0});
  CHECK(code_of([&] { mixed_data(FoliationSpec::time_symmetric(), near_horizon, cone); }) ==
        ErrorCode::BifurcationSphereSupport);
  // A null slice never reaches the bifurcation sphere.
  CHECK_NOTHROW(mixed_data(FoliationSpec::null_ray(), near_horizon, cone));
}

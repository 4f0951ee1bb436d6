#include <doctest.h>

#include <cmath>
#include <limits>

#include "nptails/error.hpp"
#include "nptails/evolution.hpp"

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

EvolutionResult run(const CharacteristicData& d, double h, double u_max, double v_max,
                    std::vector<ObserverSpec> obs = {}, int block = 4, int stride = 1) {
  EvolveOptions opt;
  opt.snapshot_stride = stride;
  opt.rows_per_block = block;
  return evolve(d, make_grid(h, u_max, d.v0, v_max), obs, opt);
}

}  // namespace

TEST_CASE("make_grid and observer ids") {
  auto g = make_grid(0.25, 10.0, 20.0, 40.0);
  CHECK(g.nu == 40);
  CHECK(g.nv == 80);
  CHECK(g.cells() == 3200);
  CHECK(code_of([] { make_grid(0.3, 10.0, 20.0, 40.0); }) == ErrorCode::InvalidArgument);
  CHECK(constant_r(10).id == "r10");
  CHECK(constant_rstar(-50).id == "rstar-50");
  CHECK(scri_proxy().id == "scri");
  CHECK(gamma_alpha(0.8).id == "gamma0.8");
  CHECK(curve_kind_from_string("scri_proxy") == CurveKind::Scri);
  CHECK(code_of([] { curve_kind_from_string("nowhere"); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("Minkowski transport is exact") {
  auto flat = make_map(make_model(ModelKind::Minkowski, 0.0));
  auto d = bump_data(flat, 40.0, 10.0, 1.0, 0, 200.0);
  auto res = run(d, 0.125, 60.0, 100.0);
  const GridField& phi = *res.snapshot;
  double err = 0.0;
  for (int i = 0; i <= phi.nu; ++i)
    for (int j = 0; j <= phi.nv; ++j) err = std::max(err, std::abs(phi.at(i, j) - d.cone->phi_v(phi.v(j))));
  CHECK(err <= 1e-13);
}

TEST_CASE("strong Huygens in Minkowski") {
  auto flat = make_map(make_model(ModelKind::Minkowski, 0.0));
  auto d = bump_data(flat, 40.0, 10.0, 1.0, 0, 200.0);
  const double h = 0.125;
  std::vector<ObserverSpec> obs{constant_r(10.0)};
  auto res = run(d, h, 100.0, 200.0, obs, 4, 0);
  const auto& s = res.observers[0].samples;
  REQUIRE(!s.empty());
  double peak = 0.0, after = 0.0;
  for (const auto& p : s) {
    peak = std::max(peak, std::abs(p.psi));
    if (p.v > 50.0) after = std::max(after, std::abs(p.psi));
  }
  CHECK(peak > 0.05);
  CHECK(after <= 10.0 * h * h);
}

TEST_CASE("wavefront depth does not change the result") {
  auto sch = make_map(make_model(ModelKind::Schwarzschild, 1.0));
  auto d = bump_data(sch, 40.0, 10.0, 1.0, 0, 200.0);
  std::vector<ObserverSpec> obs{constant_r(10.0), scri_proxy()};
  auto a = run(d, 0.25, 50.0, 120.0, obs, 1);
  for (int b : {2, 4}) {
    auto c = run(d, 0.25, 50.0, 120.0, obs, b);
    CHECK(c.diagnostics.rows_per_block == b);
    CHECK(c.snapshot->values == a.snapshot->values);
    CHECK(c.final_row == a.final_row);
    for (std::size_t k = 0; k < obs.size(); ++k)
      for (std::size_t n = 0; n < a.observers[k].samples.size(); ++n)
        CHECK(c.observers[k].samples[n].psi == a.observers[k].samples[n].psi);
  }
}

TEST_CASE("evolution is linear") {
  auto sch = make_map(make_model(ModelKind::Schwarzschild, 1.0));
  auto A = bump_data(sch, 40.0, 10.0, 1.0, 0, 200.0);
  auto B = tail_data(sch, 0.0, {1.0}, 1.0, 0, 200.0, 0.0);
  const double a = 0.3, b = -2.1;
  auto ra = run(A, 0.25, 50.0, 120.0), rb = run(B, 0.25, 50.0, 120.0);
  auto rs = run(superpose(a, A, b, B), 0.25, 50.0, 120.0);
  double err = 0.0, mag = 0.0;
  for (std::size_t n = 0; n < rs.snapshot->values.size(); ++n) {
    const double lin = a * ra.snapshot->values[n] + b * rb.snapshot->values[n];
    err = std::max(err, std::abs(rs.snapshot->values[n] - lin));
    mag = std::max(mag, std::abs(lin));
  }
  CHECK(err <= 1e-12 * mag);

  auto r4 = run(superpose(4.0, A, 0.0, A), 0.25, 50.0, 120.0);
  for (std::size_t n = 0; n < r4.snapshot->values.size(); n += 97)
    CHECK(r4.snapshot->values[n] == 4.0 * ra.snapshot->values[n]);
}

TEST_CASE("Schwarzschild self-convergence is second order") {
  auto sch = make_map(make_model(ModelKind::Schwarzschild, 1.0));
  auto d = bump_data(sch, 40.0, 10.0, 1.0, 0, 200.0);
  // Snapshots on the coarse lattice (spacing 1/2) compare directly.
  auto r1 = run(d, 0.125, 40.0, 100.0, {}, 4, 4);
  auto r2 = run(d, 0.0625, 40.0, 100.0, {}, 4, 8);
  auto r3 = run(d, 0.03125, 40.0, 100.0, {}, 4, 16);
  double e12 = 0.0, e23 = 0.0;
  for (std::size_t n = 0; n < r1.snapshot->values.size(); ++n) {
    e12 = std::max(e12, std::abs(r1.snapshot->values[n] - r2.snapshot->values[n]));
    e23 = std::max(e23, std::abs(r2.snapshot->values[n] - r3.snapshot->values[n]));
  }
  CHECK(e12 / e23 > 3.6);
  CHECK(e12 / e23 < 4.4);
}

TEST_CASE("audit residual is small and reported") {
  auto sch = make_map(make_model(ModelKind::Schwarzschild, 1.0));
  auto d = bump_data(sch, 40.0, 10.0, 1.0, 0, 200.0);
  auto res = run(d, 0.125, 50.0, 120.0, {}, 4, 0);
  CHECK(res.diagnostics.cells == 400ull * 800ull);
  CHECK(res.diagnostics.residual_samples > 0);
  CHECK(res.diagnostics.residual_max < 1e-2);
  CHECK(res.diagnostics.residual_rms <= res.diagnostics.residual_max);
  CHECK_FALSE(res.snapshot);
}

TEST_CASE("observer samples") {
  auto sch = make_map(make_model(ModelKind::Schwarzschild, 1.0));
  auto d = tail_data(sch, 1.0, {}, 1.0, 0, 400.0);
  std::vector<ObserverSpec> obs{constant_r(10.0), constant_rstar(-20.0), scri_proxy(),
                                gamma_alpha(0.8)};
  auto res = run(d, 0.125, 60.0, 400.0, obs, 4, 0);
  REQUIRE(res.observers.size() == 4);
  const auto& r10 = res.observers[0];
  REQUIRE(r10.samples.size() > 10);
  for (const auto& s : r10.samples) {
    CHECK(s.r == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(s.psi == doctest::Approx(s.phi / s.r).epsilon(1e-14));
  }
  CHECK(std::isnan(r10.samples.front().Tpsi));
  CHECK(std::isfinite(r10.samples[5].T2psi));
  // sample_dt = 0.5 in u.
  CHECK(r10.samples[1].u - r10.samples[0].u == doctest::Approx(0.5));
  const auto& rs = res.observers[1];
  for (const auto& s : rs.samples) CHECK(s.v - s.u == doctest::Approx(-40.0).epsilon(1e-12));
  const auto& sc = res.observers[2];
  CHECK(sc.samples.back().v == 400.0);
  for (const auto& s : res.observers[3].samples)
    CHECK(s.v - std::pow(s.v, 0.8) == doctest::Approx(s.u).epsilon(1e-10));

  std::vector<double> u{0.0, 30.0, 60.0};
  auto np = sample_np_scalar(res, u);
  REQUIRE(np.size() == 3);
  CHECK(np[0].I0 == doctest::Approx(1.0).epsilon(0.05));
  // v_max = 400 leaves a few percent of ln v / v truncation.
  CHECK(np[2].I0 == doctest::Approx(np[0].I0).epsilon(0.03));
  std::vector<double> bad{61.0};
  CHECK(code_of([&] { sample_np_scalar(res, bad); }) == ErrorCode::ColumnNotRetained);

  auto bare = run(d, 0.125, 10.0, 400.0, {constant_r(10.0)}, 4, 0);
  CHECK(code_of([&] { sample_np_scalar(bare, u); }) == ErrorCode::ColumnNotRetained);
}

TEST_CASE("evolve rejects bad setups") {
  auto sch = make_map(make_model(ModelKind::Schwarzschild, 1.0));
  auto d = bump_data(sch, 40.0, 10.0, 1.0, 0, 200.0);
  EvolveOptions small;
  small.budget_cells = 1000;
  CHECK(code_of([&] { evolve(d, make_grid(0.25, 10.0, 20.0, 100.0), {}, small); }) ==
        ErrorCode::BudgetExceeded);
  CHECK(code_of([&] { evolve(d, make_grid(0.25, 10.0, 22.0, 100.0), {}); }) ==
        ErrorCode::GridMismatch);
  EvolveOptions snap;
  snap.snapshot_stride = 3;
  CHECK(code_of([&] { evolve(d, make_grid(0.25, 10.0, 20.0, 100.0), {}, snap); }) ==
        ErrorCode::GridMismatch);
  std::vector<ObserverSpec> inside{constant_r(1.5)};
  CHECK(code_of([&] { evolve(d, make_grid(0.25, 10.0, 20.0, 100.0), inside); }) ==
        ErrorCode::InvalidArgument);

  const double nan = std::numeric_limits<double>::quiet_NaN();
  CharacteristicData broken = d;
  broken.cone = std::make_shared<FunctionCone>(
      sch, [nan](double v) { return v > 60.0 ? nan : 0.0; }, [](double) { return 0.0; });
  CHECK(code_of([&] { evolve(broken, make_grid(0.25, 10.0, 20.0, 100.0), {}); }) ==
        ErrorCode::NaNDetected);
}

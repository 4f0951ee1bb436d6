#include <doctest.h>

#include <cmath>
#include <numbers>

#include "nptails/quadrature.hpp"

using namespace nptails;

TEST_CASE("Gauss-Kronrod panel integrates polynomials of degree 22 exactly") {
  auto f = [](double x) { return std::pow(x, 22) + 3 * x * x; };
  const double exact = std::pow(2.0, 23) / 23 - 1.0 / 23 + (8.0 - 1.0);
  CHECK(gauss_kronrod15(f, 1.0, 2.0).value == doctest::Approx(exact).epsilon(1e-14));
}

TEST_CASE("adaptive integration resolves a peaked integrand") {
  auto f = [](double x) { return 1.0 / (1e-4 + x * x); };
  const double exact = 2.0 * std::atan(1.0 / 1e-2) / 1e-2;
  const auto r = integrate_adaptive(f, -1.0, 1.0, 0.0, 1e-13);
  CHECK(std::abs(r.value - exact) < 1e-11 * exact);
  CHECK(r.error < 1e-12 * exact);
}

TEST_CASE("Gauss-Legendre weights sum to two and integrate exp") {
  for (int n : {2, 5, 10, 16}) {
    GaussLegendre gl(n);
    double s = 0.0;
    for (double w : gl.weights()) s += w;
    CHECK(s == doctest::Approx(2.0).epsilon(1e-14));
  }
  GaussLegendre gl(10);
  CHECK(gl.integrate([](double x) { return std::exp(x); }, 0.0, 1.0) ==
        doctest::Approx(std::numbers::e - 1.0).epsilon(1e-15));
}

TEST_CASE("breakpoints are merged, clipped and sorted") {
  std::vector<double> extra{0.5, -1.0, 0.25, 0.5, 3.0};
  auto b = merge_breakpoints(0.0, 1.0, extra);
  REQUIRE(b.size() == 4);
  CHECK(b[1] == 0.25);
  CHECK(b[2] == 0.5);
}

#include "nptails/np_constants.hpp"

#include <algorithm>
#include <cmath>

#include "nptails/error.hpp"
#include "nptails/quadrature.hpp"

namespace nptails {

namespace {

[[noreturn]] void fail(ErrorCode code, const std::string& msg) {
  throw Error(code, "np_constants", msg);
}

constexpr int kRadii = 6;

// Value at x = 0 of the polynomial through (x_i, y_i), Neville's scheme.
double neville_at_zero(const double* x, const double* y, int n) {
  double p[8];
  for (int i = 0; i < n; ++i) p[i] = y[i];
  for (int k = 1; k < n; ++k)
    for (int i = 0; i + k < n; ++i)
      p[i] = (x[i + k] * p[i] - x[i] * p[i + 1]) / (x[i + k] - x[i]);
  return p[0];
}

std::vector<double> extraction_radii(const ConeProfile& cone, const SpacetimeModel& model) {
  // Start beyond every feature of the profile so the 1/r expansion has
  // converged; never inside 50 max(M, 1).
  double base = 50.0 * model.length_scale();
  for (double b : cone.breakpoints_r())
    if (std::isfinite(b)) base = std::max(base, 4.0 * b);
  std::vector<double> r;
  for (int j = 0; j < kRadii; ++j) {
    const double rj = base * std::ldexp(1.0, j);
    if (rj <= cone.r_valid_max()) r.push_back(rj);
  }
  if (r.size() < 4)
    fail(ErrorCode::InsufficientRange, "fewer than four extraction radii inside the profile range");
  return r;
}

LimitFit extrapolate(std::vector<double> radii, std::vector<double> y) {
  LimitFit f;
  const int n = static_cast<int>(radii.size());
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) x[i] = 1.0 / radii[i];
  // Orders 1..3 through the outermost d + 1 samples.
  double prev = y[n - 1], value = y[n - 1];
  for (int d = 1; d <= 3; ++d) {
    prev = value;
    value = neville_at_zero(x.data() + (n - 1 - d), y.data() + (n - 1 - d), d + 1);
  }
  f.value = value;
  f.error = std::abs(value - prev);
  // Cubic coefficients through the outermost four samples (Newton form expanded).
  const double* xs = x.data() + (n - 4);
  const double* ys = y.data() + (n - 4);
  double dd[4] = {ys[0], ys[1], ys[2], ys[3]};
  for (int k = 1; k < 4; ++k)
    for (int i = 3; i >= k; --i) dd[i] = (dd[i] - dd[i - 1]) / (xs[i] - xs[i - k]);
  std::array<double, 4> c{dd[3], 0.0, 0.0, 0.0};  // Horner on the Newton form
  for (int k = 2; k >= 0; --k) {
    std::array<double, 4> nc{};
    for (int m = 0; m < 3; ++m) {
      nc[m + 1] += c[m];
      nc[m] -= xs[k] * c[m];
    }
    nc[0] += dd[k];
    c = nc;
  }
  f.coefficients = c;
  f.radii = std::move(radii);
  f.samples = std::move(y);
  return f;
}

}  // namespace

double slice_integrand(const MixedSurfaceData& d, double rho) {
  const SliceProfile& s = *d.slice;
  if (d.foliation.kind() == FoliationKind::NullRay) return 2.0 * rho * s.dphi(rho);
  const SpacetimeModel& m = d.model();
  const double h = d.foliation.h(m, rho);
  const double Dh = d.foliation.Dh(m, rho);
  const double T = s.Tphi(rho);
  const double hT = T == 0.0 ? 0.0 : h * T;  // h = 1/D may be huge where T phi = 0
  return 2.0 * (1.0 - Dh) * rho * s.dphi(rho) - (2.0 - Dh) * rho * hT -
         rho * d.foliation.dDh(m, rho) * s.phi(rho);
}

bool vanishes(const Estimate& e, double scale, double floor) {
  return std::abs(e.value) <= std::max(10.0 * e.error, floor * scale);
}

double data_scale(const MixedSurfaceData& data) {
  const SpacetimeModel& m = data.model();
  const double R = m.reference_radius();
  const ConeProfile& c = *data.cone.cone;
  double s = 0.0;
  for (int i = 0; i <= 128; ++i) {
    const double r = R * std::pow(1e3, i / 128.0);
    if (r > c.r_valid_max()) break;
    s = std::max({s, std::abs(c.phi_r(r)) * r, std::abs(c.r2_dphi_dr(r))});
  }
  const double lo = m.r_min();
  for (int i = 1; i <= 128; ++i) {
    const double rho = lo + (R - lo) * i / 128.0;
    s = std::max({s, std::abs(data.slice->phi(rho)) * rho,
                  std::abs(data.slice->dphi(rho)) * rho * rho,
                  std::abs(data.slice->Tphi(rho)) * rho * rho});
  }
  return s;
}

LimitFit estimate_I0(const ConeProfile& cone, const SpacetimeModel& model) {
  auto r = extraction_radii(cone, model);
  std::vector<double> y(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) y[i] = cone.r2_dphi_dr(r[i]);
  return extrapolate(std::move(r), std::move(y));
}

LimitFit estimate_I0(const CharacteristicData& data) {
  return estimate_I0(*data.cone, data.model());
}

LimitFit cubic_limit(const ConeProfile& cone, const SpacetimeModel& model, double I0) {
  auto r = extraction_radii(cone, model);
  std::vector<double> y(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) y[i] = r[i] * (cone.r2_dphi_dr(r[i]) - I0);
  return extrapolate(std::move(r), std::move(y));
}

namespace {

struct Preconditions {
  LimitFit I0;
  LimitFit cubic;
  double scale;
};

Preconditions check_preconditions(const MixedSurfaceData& data, double floor) {
  if (data.cone.ell != 0)
    fail(ErrorCode::ModeMismatch, "time-integral constants are defined for the l = 0 mode only");
  Preconditions p;
  p.scale = data_scale(data);
  p.I0 = estimate_I0(*data.cone.cone, data.model());
  if (!vanishes(p.I0, p.scale, floor))
    fail(ErrorCode::NonvanishingI0, "time integral needs I0 = 0, found " +
                                        std::to_string(p.I0.value) + " +- " +
                                        std::to_string(p.I0.error));
  p.cubic = cubic_limit(*data.cone.cone, data.model(), p.I0.value);
  const auto& s = p.cubic.samples;
  const std::size_t n = s.size();
  if (std::abs(s[n - 1] - s[n - 3]) > 0.5 * std::abs(s[n - 3]) + 1e-8 * p.scale &&
      std::abs(s[n - 1]) > std::abs(s[n - 3]))
    fail(ErrorCode::DivergentCubicLimit, "r^3 d_r phi grows along the cone");
  return p;
}

Estimate compute_C0_impl(const MixedSurfaceData& data, const Preconditions& pre) {
  const SpacetimeModel& m = data.model();
  const ConeProfile& cone = *data.cone.cone;
  const double R = m.reference_radius();
  const double I0 = pre.I0.value;

  Estimate out;
  out.value = R * (2.0 - data.foliation.Dh(m, R)) * cone.phi_r(R);

  // 2 int_{N0} r d_v phi dv = 2 int_0^{1/R} r^3 d_r phi dx with x = 1/r.
  auto cone_integrand = [&](double x) { return (cone.r2_dphi_dr(1.0 / x) - I0) / x; };
  std::vector<double> extra;
  for (double b : cone.breakpoints_r())
    if (std::isfinite(b) && b > R) extra.push_back(1.0 / b);
  for (int k = 1; k <= 60; ++k) extra.push_back(std::ldexp(1.0 / R, -k));
  const auto xb = merge_breakpoints(0.0, 1.0 / R, extra);
  const double tol = 1e-16 * std::max(pre.scale, 1e-300);
  const QuadratureResult c = integrate_piecewise(cone_integrand, xb, tol, 1e-13);
  out.value += 2.0 * c.value;
  out.error += 2.0 * c.error;

  if (data.foliation.kind() != FoliationKind::NullRay ||
      !dynamic_cast<const ConstantSlice*>(data.slice.get())) {
    auto s = [&](double rho) { return slice_integrand(data, rho); };
    std::vector<double> sb = data.slice->breakpoints();
    const double lo = m.r_min();
    for (int k = 1; k < 16; ++k) sb.push_back(lo + (R - lo) * k / 16.0);
    const QuadratureResult q = integrate_piecewise(s, merge_breakpoints(lo, R, sb), tol, 1e-13);
    out.value -= q.value;
    out.error += q.error;
  }
  out.error += 1e-15 * std::abs(out.value);
  return out;
}

}  // namespace

Estimate compute_C0(const MixedSurfaceData& data, double vanishing_floor) {
  return compute_C0_impl(data, check_preconditions(data, vanishing_floor));
}

Estimate compute_C0(const CharacteristicData& data) { return compute_C0(as_surface(data)); }

Estimate time_inverted_I0(const MixedSurfaceData& data, double vanishing_floor) {
  const Preconditions pre = check_preconditions(data, vanishing_floor);
  const Estimate C0 = compute_C0_impl(data, pre);
  const double M = data.model().mass();
  return {-pre.cubic.value + M * C0.value, pre.cubic.error + M * C0.error};
}

Estimate time_inverted_I0(const CharacteristicData& data) {
  return time_inverted_I0(as_surface(data));
}

double slice_flux(const MixedSurfaceData& data, double rho) {
  const double lo = data.model().r_min();
  auto s = [&](double x) { return slice_integrand(data, x); };
  std::vector<double> sb = data.slice->breakpoints();
  return integrate_piecewise(s, merge_breakpoints(lo, rho, sb), 1e-300, 1e-13).value;
}

const char* to_string(ConstantMethod m) noexcept {
  switch (m) {
    case ConstantMethod::ClosedForm: return "closed_form";
    case ConstantMethod::ConstructedLimit: return "constructed_limit";
    case ConstantMethod::Both: return "both";
  }
  return "unknown";
}

const InvertedConstant* NpReport::order(int k) const {
  for (const auto& c : inverted)
    if (c.k == k) return &c;
  return nullptr;
}

}  // namespace nptails

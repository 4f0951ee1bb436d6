#include "nptails/time_integral.hpp"

#include <algorithm>
#include <cmath>

#include "nptails/error.hpp"
#include "nptails/quadrature.hpp"

namespace nptails {

namespace {

[[noreturn]] void fail(ErrorCode code, const std::string& msg) {
  throw Error(code, "time_integral", msg);
}

constexpr int N = PanelPolynomial::kNodes;

struct LegendreTables {
  std::array<double, N> t{}, w{};
  // Monomial coefficients of P_n and the matrix mapping node values to
  // monomial coefficients of the interpolant.
  std::array<std::array<double, N>, N> P{}, to_monomial{};

  LegendreTables() {
    const GaussLegendre gl(N);
    std::array<std::pair<double, double>, N> tw;
    for (int i = 0; i < N; ++i) tw[i] = {gl.nodes()[i], gl.weights()[i]};
    std::sort(tw.begin(), tw.end());
    for (int i = 0; i < N; ++i) std::tie(t[i], w[i]) = tw[i];
    P[0][0] = 1.0;
    P[1][1] = 1.0;
    for (int n = 1; n + 1 < N; ++n)
      for (int m = 0; m < N; ++m) {
        const double up = m > 0 ? P[n][m - 1] : 0.0;
        P[n + 1][m] = ((2 * n + 1) * up - n * P[n - 1][m]) / (n + 1);
      }
    // coefficient_m = sum_n sum_i (2n+1)/2 w_i P_n(t_i) f_i P[n][m]
    for (int i = 0; i < N; ++i)
      for (int n = 0; n < N; ++n) {
        double pn = 0.0;
        for (int m = N - 1; m >= 0; --m) pn = pn * t[i] + P[n][m];
        const double lc = 0.5 * (2 * n + 1) * w[i] * pn;
        for (int m = 0; m < N; ++m) to_monomial[m][i] += lc * P[n][m];
      }
  }
};

const LegendreTables& tables() {
  static const LegendreTables tab;
  return tab;
}

double ipow_m1(int n) { return (n % 2 == 0) ? 1.0 : -1.0; }

}  // namespace

PanelPolynomial::PanelPolynomial(double a, double b, const std::array<double, kNodes>& f)
    : mid_(0.5 * (a + b)), hw_(0.5 * (b - a)) {
  const auto& tab = tables();
  for (int m = 0; m < N; ++m) {
    double c = 0.0;
    for (int i = 0; i < N; ++i) c += tab.to_monomial[m][i] * f[i];
    c_[m] = c;
  }
}

std::array<double, PanelPolynomial::kNodes> PanelPolynomial::nodes(double a, double b) {
  std::array<double, N> x;
  const double mid = 0.5 * (a + b), hw = 0.5 * (b - a);
  for (int i = 0; i < N; ++i) x[i] = mid + hw * tables().t[i];
  return x;
}

double PanelPolynomial::value(double x) const {
  const double t = (x - mid_) / hw_;
  double p = 0.0;
  for (int m = N - 1; m >= 0; --m) p = p * t + c_[m];
  return p;
}

double PanelPolynomial::integral(double x) const {
  const double t = (x - mid_) / hw_;
  double s = 0.0, tp = t;
  for (int n = 0; n < N; ++n, tp *= t) s += c_[n] * (tp - ipow_m1(n + 1)) / (n + 1);
  return hw_ * s;
}

double PanelPolynomial::double_integral(double x) const {
  // int_{-1}^t (t - tau) tau^n dtau
  const double t = (x - mid_) / hw_;
  double s = 0.0, tp = t * t;
  for (int n = 0; n < N; ++n, tp *= t)
    s += c_[n] * ((tp - t * ipow_m1(n + 1)) / (n + 1) - (tp - ipow_m1(n + 2)) / (n + 2));
  return hw_ * hw_ * s;
}

double PanelPolynomial::moment(double x) const {
  const double t = (x - mid_) / hw_;
  double s = 0.0, tp = t * t;
  for (int n = 0; n < N; ++n, tp *= t) s += c_[n] * (tp - ipow_m1(n + 2)) / (n + 2);
  return mid_ * integral(x) + hw_ * hw_ * s;
}

// --- cone -------------------------------------------------------------------

TabulatedCone::TabulatedCone(std::shared_ptr<const CoordinateMap> map, std::vector<Panel> panels,
                             std::vector<double> breakpoints_r, double r_max)
    : map_(std::move(map)), panels_(std::move(panels)), breaks_(std::move(breakpoints_r)),
      r_max_(r_max) {}

const TabulatedCone::Panel& TabulatedCone::find(double x) const {
  auto it = std::upper_bound(panels_.begin(), panels_.end(), x,
                             [](double q, const Panel& p) { return q < p.x1; });
  if (it == panels_.end()) return panels_.back();
  return *it;
}

double TabulatedCone::psi_x(double x) const {
  const Panel& p = find(x);
  return p.psi0 + p.dpsi0 * (x - p.x0) + p.d2psi.double_integral(x);
}

double TabulatedCone::phi_r(double r) const {
  const double x = 1.0 / r;
  const Panel& p = find(x);
  if (x == 0.0) return p.dpsi0;
  return psi_x(x) * r;
}

double TabulatedCone::r2_dphi_dr(double r) const {
  const double x = 1.0 / r;
  const Panel& p = find(x);
  if (x == 0.0) return -0.5 * p.d2psi.value(0.0);
  const double q = p.q0 - p.d2psi.moment(x);
  return q * r * r;
}

double TabulatedCone::phi_v(double v) const { return phi_r(map_->inverse_tortoise(0.5 * v)); }

double TabulatedCone::dphi_dv(double v) const {
  const double r = map_->inverse_tortoise(0.5 * v);
  return map_->model().D(r) / (2.0 * r * r) * r2_dphi_dr(r);
}

// --- slice ------------------------------------------------------------------

TabulatedSlice::TabulatedSlice(std::shared_ptr<const CoordinateMap> map, std::vector<Panel> panels,
                               double shift, std::shared_ptr<const SliceProfile> source,
                               std::vector<double> breakpoints)
    : map_(std::move(map)), panels_(std::move(panels)), shift_(shift), source_(std::move(source)),
      breaks_(std::move(breakpoints)) {}

const TabulatedSlice::Panel& TabulatedSlice::find(double y) const {
  auto it = std::upper_bound(panels_.begin(), panels_.end(), y,
                             [](double q, const Panel& p) { return q < p.y1; });
  if (it == panels_.end()) return panels_.back();
  return *it;
}

double TabulatedSlice::psi(double rho) const {
  const double y = std::max(rho - map_->model().r_min(), 0.0);
  const Panel& p = find(y);
  return p.psi0 + p.dpsi.integral(y);
}

double TabulatedSlice::dpsi_at_offset(double y) const {
  const SpacetimeModel& m = map_->model();
  const Panel& p = find(y);
  if (shift_ == 0.0 && y < 1e-7 * m.length_scale()) return p.dpsi.value(y);
  const double rho = m.r_min() + y;
  const double Q = p.Q0 + p.S.integral(y);
  return (shift_ - Q) / (m.D_near(y) * rho * rho);
}

double TabulatedSlice::phi(double rho) const { return rho * psi(rho); }

double TabulatedSlice::dphi(double rho) const {
  const double y = std::max(rho - map_->model().r_min(), 0.0);
  return psi(rho) + rho * dpsi_at_offset(y);
}

// --- construction -----------------------------------------------------------

namespace {

std::vector<double> cone_edges_x(const SpacetimeModel& m, const ConeProfile& source) {
  const double s = m.length_scale();
  const double R = m.reference_radius();
  const double r_top = std::min(1e12 * s, source.r_valid_max());
  double feature = R;
  std::vector<double> br;
  for (double b : source.breakpoints_r())
    if (std::isfinite(b) && b > R && b < r_top) {
      br.push_back(b);
      feature = std::max(feature, b);
    }
  const double r_a = std::max(R + 10.0 * s, 2.0 * feature);
  std::vector<double> r;
  const int n_uniform = static_cast<int>(std::ceil((r_a - R) / (0.25 * s)));
  for (int k = 0; k <= n_uniform; ++k) r.push_back(R + (r_a - R) * k / n_uniform);
  for (double x = r_a * 1.02; x < r_top; x *= 1.02) r.push_back(x);
  r.push_back(r_top);
  r.insert(r.end(), br.begin(), br.end());
  std::vector<double> x{0.0};
  for (double ri : r) x.push_back(1.0 / ri);
  std::sort(x.begin(), x.end());
  std::vector<double> out;
  for (double xi : x)
    if (out.empty() || xi - out.back() > 1e-12 * xi) out.push_back(xi);
  out.back() = 1.0 / R;
  return out;
}

std::shared_ptr<const TabulatedCone> build_cone(const MixedSurfaceData& d, double I0, double C0) {
  const SpacetimeModel& m = d.model();
  const ConeProfile& src = *d.cone.cone;
  const auto xe = cone_edges_x(m, src);
  std::vector<TabulatedCone::Panel> panels;
  panels.reserve(xe.size());
  double psi = 0.0, dpsi = -C0, q = 0.0, J = 0.0;
  std::array<double, N> s_val, d2_val;
  for (std::size_t k = 0; k + 1 < xe.size(); ++k) {
    const double a = xe[k], b = xe[k + 1];
    const auto xs = PanelPolynomial::nodes(a, b);
    for (int i = 0; i < N; ++i) s_val[i] = (src.r2_dphi_dr(1.0 / xs[i]) - I0) / xs[i];
    const PanelPolynomial sp(a, b, s_val);
    for (int i = 0; i < N; ++i) {
      const double r = 1.0 / xs[i];
      const double D = m.D(r);
      const double Ji = J + 2.0 * sp.integral(xs[i]);
      d2_val[i] = 2.0 * s_val[i] / D - (C0 - Ji) * m.dD(r) * r * r / (D * D);
    }
    TabulatedCone::Panel p{a, b, psi, dpsi, q, PanelPolynomial(a, b, d2_val)};
    psi += dpsi * (b - a) + p.d2psi.double_integral(b);
    dpsi += p.d2psi.integral(b);
    q -= p.d2psi.moment(b);
    J += 2.0 * sp.integral(b);
    panels.push_back(p);
  }
  return std::make_shared<TabulatedCone>(d.cone.map, std::move(panels), src.breakpoints_r(),
                                         1.0 / xe[1]);
}

std::shared_ptr<const TabulatedSlice> build_slice(const MixedSurfaceData& d, double psi_R,
                                                  double shift) {
  const SpacetimeModel& m = d.model();
  const double lo = m.r_min(), R = m.reference_radius();
  const double top = R - lo;
  std::vector<double> ye;
  constexpr int kUniform = 1024;
  for (int k = 0; k <= kUniform; ++k) ye.push_back(top * k / kUniform);
  for (double b : d.slice->breakpoints())
    if (b > lo && b < R) ye.push_back(b - lo);
  std::sort(ye.begin(), ye.end());
  ye.erase(std::unique(ye.begin(), ye.end(),
                       [&](double a, double b) { return b - a <= 1e-12 * top; }),
           ye.end());
  ye.back() = top;

  std::vector<TabulatedSlice::Panel> panels;
  panels.reserve(ye.size());
  double Q = 0.0;
  std::array<double, N> S_val, dpsi_val;
  for (std::size_t k = 0; k + 1 < ye.size(); ++k) {
    const double a = ye[k], b = ye[k + 1];
    const auto ys = PanelPolynomial::nodes(a, b);
    for (int i = 0; i < N; ++i) S_val[i] = slice_integrand(d, lo + ys[i]);
    const PanelPolynomial Sp(a, b, S_val);
    for (int i = 0; i < N; ++i) {
      const double rho = lo + ys[i];
      dpsi_val[i] = (shift - (Q + Sp.integral(ys[i]))) / (m.D_near(ys[i]) * rho * rho);
    }
    panels.push_back({a, b, Q, 0.0, Sp, PanelPolynomial(a, b, dpsi_val)});
    Q += Sp.integral(b);
  }
  double psi = psi_R;
  for (auto it = panels.rbegin(); it != panels.rend(); ++it) {
    psi -= it->dpsi.integral(it->y1);
    it->psi0 = psi;
  }
  return std::make_shared<TabulatedSlice>(d.cone.map, std::move(panels), shift, d.slice,
                                          d.slice->breakpoints());
}

}  // namespace

TimeIntegralData construct_time_integral(const MixedSurfaceData& d, double floor, double shift) {
  const SpacetimeModel& m = d.model();
  TimeIntegralData out;
  out.c0_shift = shift;
  out.C0 = compute_C0(d, floor);
  out.closed_form = time_inverted_I0(d, floor);
  out.C0.value += shift;
  const double I0 = estimate_I0(*d.cone.cone, m).value;

  out.cone = build_cone(d, I0, out.C0.value);
  const double R = m.reference_radius();
  out.slice = build_slice(d, out.cone->psi_x(1.0 / R), shift);

  CharacteristicData c;
  c.ell = d.cone.ell;
  c.map = d.cone.map;
  c.cone = out.cone;
  if (d.foliation.kind() == FoliationKind::NullRay) {
    c.ray = out.slice;
  } else {
    // Only the slice is reconstructed; the ray v = v0 carries psi^(1)(R).
    const double psi_R = out.cone->psi_x(1.0 / R);
    c.ray = std::make_shared<FunctionSlice>([psi_R](double rho) { return psi_R * rho; },
                                            [psi_R](double) { return psi_R; });
  }
  c.v0 = d.cone.v0;
  c.v_max = d.cone.v_max;
  out.data = mixed_data(d.foliation, out.slice, std::move(c));
  out.I0 = estimate_I0(*out.cone, m);
  return out;
}

TimeIntegralData construct_time_integral(const CharacteristicData& data) {
  return construct_time_integral(as_surface(data));
}

std::vector<TimeIntegralData> iterate_time_integral(const MixedSurfaceData& data, int k) {
  if (k < 1) fail(ErrorCode::InvalidArgument, "chain order must be at least 1");
  std::vector<TimeIntegralData> chain;
  chain.reserve(k);
  for (int j = 0; j < k; ++j) {
    const MixedSurfaceData& src = j == 0 ? data : chain.back().data;
    const double floor = 1e-10 * std::pow(10.0, j);
    try {
      chain.push_back(construct_time_integral(src, floor));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NonvanishingI0) throw;
      fail(ErrorCode::PreconditionChainBroken,
           "I0^(" + std::to_string(j) + ") does not vanish: " + e.what());
    }
    chain.back().order = j + 1;
  }
  return chain;
}

std::vector<TimeIntegralData> iterate_time_integral(const CharacteristicData& data, int k) {
  return iterate_time_integral(as_surface(data), k);
}

NpReport summarize_chain(const MixedSurfaceData& data, const std::vector<TimeIntegralData>& chain) {
  NpReport rep;
  const LimitFit I0 = estimate_I0(*data.cone.cone, data.model());
  rep.I0 = {I0.value, I0.error};
  if (!chain.empty()) rep.C0 = chain.front().C0;
  for (const auto& t : chain) {
    InvertedConstant c;
    c.k = t.order;
    c.method = ConstantMethod::Both;
    c.closed_form = t.closed_form.value;
    c.constructed = t.I0.value;
    const double diff = std::abs(t.closed_form.value - t.I0.value);
    const double mag = std::max(std::abs(t.closed_form.value), std::abs(t.I0.value));
    c.agreement = mag > 0.0 ? diff / mag : 0.0;
    c.value = t.closed_form.value;
    c.error = std::max({t.closed_form.error, t.I0.error, diff});
    c.expansion.assign(t.I0.coefficients.begin(), t.I0.coefficients.end());
    rep.inverted.push_back(std::move(c));
  }
  return rep;
}

NpReport time_inverted_I0_kth(const MixedSurfaceData& data, int k) {
  return summarize_chain(data, iterate_time_integral(data, k));
}

NpReport time_inverted_I0_kth(const CharacteristicData& data, int k) {
  return time_inverted_I0_kth(as_surface(data), k);
}

GridField propagate_time_integral(const GridField& psi, const TimeIntegralData& tdata) {
  const CharacteristicData& c = tdata.characteristic();
  const CoordinateMap& map = *c.map;
  const SpacetimeModel& m = map.model();
  if (std::abs(psi.v0 - c.v0) > 1e-12 * std::max(1.0, std::abs(c.v0)) || psi.nu < 0 ||
      psi.nv < 0 || psi.values.size() != std::size_t(psi.nu + 1) * (psi.nv + 1))
    fail(ErrorCode::GridMismatch, "field does not start on the data vertex");
  if (psi.v(psi.nv) > c.v_max + 1e-9 * c.v_max)
    fail(ErrorCode::GridMismatch, "field extends beyond the cone data");
  GridField out = psi;
  for (int j = 0; j <= psi.nv; ++j) {
    const double r = map.inverse_tortoise(0.5 * psi.v(j));
    out.at(0, j) = c.cone->phi_r(r) / r;
  }
  for (int i = 1; i <= psi.nu; ++i) {
    const double rs = 0.5 * (psi.v0 - psi.u(i));
    if (!m.has_horizon() && rs <= map.rstar_floor())
      fail(ErrorCode::TableDomainExceeded, "ray v = v0 passes the centre r = 0");
    const double r = map.inverse_tortoise(rs);
    out.at(i, 0) = c.ray->phi(r) / r;
  }
  const double half = 0.5 * psi.h;
  for (int i = 1; i <= psi.nu; ++i)
    for (int j = 1; j <= psi.nv; ++j)
      out.at(i, j) = out.at(i - 1, j - 1) + half * (psi.at(i - 1, j - 1) + psi.at(i, j));
  return out;
}

}  // namespace nptails

#include "nptails/initial_data.hpp"

#include <algorithm>
#include <cmath>

#include "nptails/error.hpp"
#include "nptails/quadrature.hpp"

namespace nptails {

namespace {

[[noreturn]] void fail(ErrorCode code, const std::string& msg) {
  throw Error(code, "initial_data", msg);
}

double cone_r_of_v(const CoordinateMap& map, double v) { return map.inverse_tortoise(0.5 * v); }

class BumpCone final : public ConeProfile {
 public:
  BumpCone(std::shared_ptr<const CoordinateMap> map, Bump b) : map_(std::move(map)), b_(b) {
    r_lo_ = cone_r_of_v(*map_, b_.lo());
    r_hi_ = cone_r_of_v(*map_, b_.hi());
  }
  double phi_v(double v) const override { return b_.value(v); }
  double dphi_dv(double v) const override { return b_.derivative(v); }
  double phi_r(double r) const override {
    if (r <= r_lo_ || r >= r_hi_) return 0.0;
    return b_.value(2.0 * map_->tortoise(r));
  }
  double r2_dphi_dr(double r) const override {
    if (r <= r_lo_ || r >= r_hi_) return 0.0;
    return 2.0 * r * r / map_->model().D(r) * b_.derivative(2.0 * map_->tortoise(r));
  }
  std::vector<double> breakpoints_r() const override {
    return {r_lo_, cone_r_of_v(*map_, b_.center), r_hi_};
  }

 private:
  std::shared_ptr<const CoordinateMap> map_;
  Bump b_;
  double r_lo_, r_hi_;
};

class TailCone final : public ConeProfile {
 public:
  TailCone(std::shared_ptr<const CoordinateMap> map, double I0, std::vector<double> p,
           double phi0)
      : map_(std::move(map)), I0_(I0), p_(std::move(p)), phi0_(phi0) {}
  double phi_v(double v) const override { return phi_r(cone_r_of_v(*map_, v)); }
  double dphi_dv(double v) const override {
    const double r = cone_r_of_v(*map_, v);
    return map_->model().D(r) / (2.0 * r * r) * r2_dphi_dr(r);
  }
  double phi_r(double r) const override {
    const double R = map_->model().reference_radius();
    double s = phi0_ + I0_ * (1.0 / R - 1.0 / r);
    double pR = 1.0 / R, pr = 1.0 / r;
    for (std::size_t m = 0; m < p_.size(); ++m) {
      pR /= R;
      pr /= r;
      s += p_[m] * (pR - pr) / (m + 1.0);
    }
    return s;
  }
  double r2_dphi_dr(double r) const override {
    double s = I0_, q = 1.0;
    for (double pm : p_) {
      q /= r;
      s += pm * q;
    }
    return s;
  }

 private:
  std::shared_ptr<const CoordinateMap> map_;
  double I0_;
  std::vector<double> p_;
  double phi0_;
};

class LinearCone final : public ConeProfile {
 public:
  LinearCone(double a, std::shared_ptr<const ConeProfile> A, double b,
             std::shared_ptr<const ConeProfile> B)
      : a_(a), b_(b), A_(std::move(A)), B_(std::move(B)) {}
  double phi_v(double v) const override { return a_ * A_->phi_v(v) + b_ * B_->phi_v(v); }
  double dphi_dv(double v) const override { return a_ * A_->dphi_dv(v) + b_ * B_->dphi_dv(v); }
  double phi_r(double r) const override { return a_ * A_->phi_r(r) + b_ * B_->phi_r(r); }
  double r2_dphi_dr(double r) const override {
    return a_ * A_->r2_dphi_dr(r) + b_ * B_->r2_dphi_dr(r);
  }
  std::vector<double> breakpoints_r() const override {
    auto x = A_->breakpoints_r();
    auto y = B_->breakpoints_r();
    x.insert(x.end(), y.begin(), y.end());
    return x;
  }
  double r_valid_max() const override { return std::min(A_->r_valid_max(), B_->r_valid_max()); }

 private:
  double a_, b_;
  std::shared_ptr<const ConeProfile> A_, B_;
};

class LinearSlice final : public SliceProfile {
 public:
  LinearSlice(double a, std::shared_ptr<const SliceProfile> A, double b,
              std::shared_ptr<const SliceProfile> B)
      : a_(a), b_(b), A_(std::move(A)), B_(std::move(B)) {}
  double phi(double x) const override { return a_ * A_->phi(x) + b_ * B_->phi(x); }
  double dphi(double x) const override { return a_ * A_->dphi(x) + b_ * B_->dphi(x); }
  double Tphi(double x) const override { return a_ * A_->Tphi(x) + b_ * B_->Tphi(x); }
  std::vector<double> breakpoints() const override {
    auto x = A_->breakpoints();
    auto y = B_->breakpoints();
    x.insert(x.end(), y.begin(), y.end());
    return x;
  }

 private:
  double a_, b_;
  std::shared_ptr<const SliceProfile> A_, B_;
};

bool same_model(const SpacetimeModel& a, const SpacetimeModel& b) {
  return a.kind() == b.kind() && a.mass() == b.mass() && a.charge() == b.charge() &&
         a.reference_radius() == b.reference_radius() && a.beta() == b.beta() &&
         a.asymptotic_coefficients() == b.asymptotic_coefficients();
}

}  // namespace

double Bump::value(double x) const {
  const double t = (x - lo()) / (2.0 * width);
  if (!(t > 0.0 && t < 1.0)) return 0.0;
  return amplitude * std::exp(4.0 - 1.0 / (t * (1.0 - t)));
}

double Bump::derivative(double x) const {
  const double t = (x - lo()) / (2.0 * width);
  if (!(t > 0.0 && t < 1.0)) return 0.0;
  const double q = t * (1.0 - t);
  return amplitude * std::exp(4.0 - 1.0 / q) * (1.0 - 2.0 * t) / (q * q) / (2.0 * width);
}

std::vector<double> BumpSlice::breakpoints() const {
  return {psi_.lo(), psi_.center, psi_.hi(), Tpsi_.lo(), Tpsi_.center, Tpsi_.hi()};
}

FunctionSlice::FunctionSlice(std::function<double(double)> phi,
                             std::function<double(double)> dphi,
                             std::function<double(double)> Tphi, std::vector<double> breaks)
    : phi_(std::move(phi)), dphi_(std::move(dphi)), Tphi_(std::move(Tphi)),
      breaks_(std::move(breaks)) {}

FunctionCone::FunctionCone(std::shared_ptr<const CoordinateMap> map,
                           std::function<double(double)> phi, std::function<double(double)> dphi,
                           std::vector<double> breaks_v)
    : map_(std::move(map)), phi_(std::move(phi)), dphi_(std::move(dphi)),
      breaks_v_(std::move(breaks_v)) {}

double FunctionCone::phi_r(double r) const { return phi_(2.0 * map_->tortoise(r)); }

double FunctionCone::r2_dphi_dr(double r) const {
  return 2.0 * r * r / map_->model().D(r) * dphi_(2.0 * map_->tortoise(r));
}

std::vector<double> FunctionCone::breakpoints_r() const {
  std::vector<double> out;
  for (double v : breaks_v_)
    if (v > 2.0 * map_->model().reference_radius()) out.push_back(cone_r_of_v(*map_, v));
  return out;
}

// ---------------------------------------------------------------------------

FoliationSpec FoliationSpec::null_ray() { return {}; }

FoliationSpec FoliationSpec::time_symmetric() {
  FoliationSpec f;
  f.kind_ = FoliationKind::TimeSymmetric;
  return f;
}

FoliationSpec FoliationSpec::custom(std::function<double(double)> h,
                                    std::function<double(double)> dh) {
  FoliationSpec f;
  f.kind_ = FoliationKind::Custom;
  f.h_ = std::move(h);
  f.dh_ = std::move(dh);
  return f;
}

double FoliationSpec::h(const SpacetimeModel& m, double rho) const {
  switch (kind_) {
    case FoliationKind::NullRay: return 0.0;
    case FoliationKind::TimeSymmetric: return 1.0 / m.D(rho);
    case FoliationKind::Custom: return h_(rho);
  }
  return 0.0;
}

double FoliationSpec::Dh(const SpacetimeModel& m, double rho) const {
  switch (kind_) {
    case FoliationKind::NullRay: return 0.0;
    case FoliationKind::TimeSymmetric: return 1.0;
    case FoliationKind::Custom: return m.D(rho) * h_(rho);
  }
  return 0.0;
}

double FoliationSpec::dDh(const SpacetimeModel& m, double rho) const {
  switch (kind_) {
    case FoliationKind::NullRay:
    case FoliationKind::TimeSymmetric: return 0.0;
    case FoliationKind::Custom: return m.dD(rho) * h_(rho) + m.D(rho) * dh_(rho);
  }
  return 0.0;
}

double FoliationSpec::v_sigma(const CoordinateMap& map, double rho) const {
  const double R = map.model().reference_radius();
  switch (kind_) {
    case FoliationKind::NullRay: return 2.0 * R;
    case FoliationKind::TimeSymmetric: return R + map.tortoise(rho);
    case FoliationKind::Custom:
      return 2.0 * R - integrate_adaptive(h_, rho, R, 1e-14, 1e-13).value;
  }
  return 2.0 * R;
}

double CharacteristicData::ray_at_u(double u) const {
  const double rs = 0.5 * (v0 - u);
  if (!model().has_horizon() && rs <= map->rstar_floor()) return ray->phi(0.0);
  return ray->phi(map->inverse_tortoise(rs));
}

MixedSurfaceData as_surface(const CharacteristicData& data) {
  return MixedSurfaceData{FoliationSpec::null_ray(), data.ray, data};
}

std::shared_ptr<const CoordinateMap> make_map(const SpacetimeModel& model) {
  return std::make_shared<const CoordinateMap>(model);
}

CharacteristicData bump_data(std::shared_ptr<const CoordinateMap> map, double v_center,
                             double width, double amplitude, int ell, double v_max) {
  if (ell < 0) fail(ErrorCode::InvalidArgument, "ell must be nonnegative");
  if (!(width > 0.0)) fail(ErrorCode::InvalidArgument, "bump width must be positive");
  const double v0 = 2.0 * map->model().reference_radius();
  if (!(v0 < v_center - width) || !(v_center + width < v_max))
    fail(ErrorCode::SupportOutsideGrid, "bump support must lie inside (v0, v_max)");
  CharacteristicData d;
  d.ell = ell;
  d.cone = std::make_shared<BumpCone>(map, Bump{v_center, width, amplitude});
  d.ray = std::make_shared<ConstantSlice>(0.0);
  d.map = std::move(map);
  d.v0 = v0;
  d.v_max = v_max;
  d.support = std::make_pair(v_center - width, v_center + width);
  return d;
}

CharacteristicData tail_data(std::shared_ptr<const CoordinateMap> map, double I0,
                             std::vector<double> p, double beta, int ell, double v_max,
                             double phi0) {
  if (ell < 0) fail(ErrorCode::InvalidArgument, "ell must be nonnegative");
  const double v0 = 2.0 * map->model().reference_radius();
  if (!(v_max > v0)) fail(ErrorCode::SupportOutsideGrid, "v_max must exceed v0");
  CharacteristicData d;
  d.ell = ell;
  d.cone = std::make_shared<TailCone>(map, I0, p, phi0);
  d.ray = std::make_shared<ConstantSlice>(phi0);
  d.map = std::move(map);
  d.v0 = v0;
  d.v_max = v_max;
  d.tail = TailParameters{I0, std::move(p), beta};
  return d;
}

CharacteristicData superpose(double a, const CharacteristicData& A, double b,
                             const CharacteristicData& B) {
  if (A.ell != B.ell) fail(ErrorCode::ModeMismatch, "superposed data carry different ell");
  if (!same_model(A.model(), B.model()) || A.v0 != B.v0 || A.v_max != B.v_max)
    fail(ErrorCode::GridMismatch, "superposed data live on different models or grids");
  CharacteristicData d;
  d.ell = A.ell;
  d.map = A.map;
  d.v0 = A.v0;
  d.v_max = A.v_max;
  d.cone = std::make_shared<LinearCone>(a, A.cone, b, B.cone);
  d.ray = std::make_shared<LinearSlice>(a, A.ray, b, B.ray);
  const bool ca = A.support || a == 0.0, cb = B.support || b == 0.0;
  if (ca && cb) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (auto [c, s] : {std::pair{a, A.support}, std::pair{b, B.support}})
      if (c != 0.0 && s) {
        lo = std::min(lo, s->first);
        hi = std::max(hi, s->second);
      }
    if (lo <= hi) d.support = std::make_pair(lo, hi);
    else d.support = std::make_pair(d.v0, d.v0);
  }
  if (A.tail && B.tail) {
    TailParameters t;
    t.I0 = a * A.tail->I0 + b * B.tail->I0;
    t.beta = std::min(A.tail->beta, B.tail->beta);
    t.p.assign(std::max(A.tail->p.size(), B.tail->p.size()), 0.0);
    for (std::size_t m = 0; m < A.tail->p.size(); ++m) t.p[m] += a * A.tail->p[m];
    for (std::size_t m = 0; m < B.tail->p.size(); ++m) t.p[m] += b * B.tail->p[m];
    d.tail = t;
  }
  return d;
}

MixedSurfaceData superpose(double a, const MixedSurfaceData& A, double b,
                           const MixedSurfaceData& B) {
  if (A.foliation.kind() != B.foliation.kind() || A.foliation.kind() == FoliationKind::Custom)
    fail(ErrorCode::GridMismatch, "superposed surface data use different foliations");
  MixedSurfaceData d;
  d.foliation = A.foliation;
  d.cone = superpose(a, A.cone, b, B.cone);
  d.slice = std::make_shared<LinearSlice>(a, A.slice, b, B.slice);
  return d;
}

MixedSurfaceData mixed_data(FoliationSpec foliation, std::shared_ptr<const SliceProfile> slice,
                            CharacteristicData cone) {
  const SpacetimeModel& m = cone.model();
  const double R = m.reference_radius();
  const double a = slice->phi(R), b = cone.cone->phi_r(R);
  if (std::abs(a - b) > 1e-12 * std::max({1.0, std::abs(a), std::abs(b)}))
    fail(ErrorCode::JunctionMismatch, "slice and cone values differ at r = R");
  if (m.has_horizon() && foliation.kind() == FoliationKind::TimeSymmetric) {
    const double rp = m.r_min(), eps = 1e-2 * (R - rp);
    for (int i = 1; i <= 64; ++i) {
      const double rho = rp + eps * i / 64.0;
      if (slice->phi(rho) != 0.0 || slice->dphi(rho) != 0.0 || slice->Tphi(rho) != 0.0)
        fail(ErrorCode::BifurcationSphereSupport,
             "data on a t = const slice must vanish near the bifurcation sphere");
    }
  }
  return MixedSurfaceData{std::move(foliation), std::move(slice), std::move(cone)};
}

}  // namespace nptails

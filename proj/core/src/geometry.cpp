#include "nptails/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "nptails/error.hpp"
#include "nptails/quadrature.hpp"

namespace nptails {

namespace {

[[noreturn]] void fail(ErrorCode code, const std::string& msg) {
  throw Error(code, "geometry", msg);
}

// Below this distance from the horizon (in units of the length scale) D is
// taken from its second-order Taylor polynomial in custom models.
constexpr double kTaylorDelta = 1e-7;
// Tortoise table: geometric in r - r_min from 1e-6 to 1e12 length scales.
constexpr double kTableLo = 1e-6;
constexpr double kTableHi = 1e12;
constexpr int kNodesPerDecade = 40;

}  // namespace

const char* to_string(ModelKind kind) noexcept {
  switch (kind) {
    case ModelKind::Minkowski: return "minkowski";
    case ModelKind::Schwarzschild: return "schwarzschild";
    case ModelKind::ReissnerNordstrom: return "reissner_nordstrom";
    case ModelKind::Custom: return "custom";
  }
  return "unknown";
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "minkowski") return ModelKind::Minkowski;
  if (name == "schwarzschild") return ModelKind::Schwarzschild;
  if (name == "reissner_nordstrom" || name == "rn") return ModelKind::ReissnerNordstrom;
  if (name == "custom") return ModelKind::Custom;
  fail(ErrorCode::InvalidArgument, "unknown model kind '" + name + "'");
}

double SpacetimeModel::D(double r) const {
  switch (kind_) {
    case ModelKind::Minkowski: return 1.0;
    case ModelKind::Schwarzschild: return 1.0 - 2.0 * M_ / r;
    case ModelKind::ReissnerNordstrom: return 1.0 - 2.0 * M_ / r + e_ * e_ / (r * r);
    case ModelKind::Custom: return custom_->D(r);
  }
  return 1.0;
}

double SpacetimeModel::dD(double r) const {
  switch (kind_) {
    case ModelKind::Minkowski: return 0.0;
    case ModelKind::Schwarzschild: return 2.0 * M_ / (r * r);
    case ModelKind::ReissnerNordstrom: return 2.0 * M_ / (r * r) - 2.0 * e_ * e_ / (r * r * r);
    case ModelKind::Custom: return custom_->dD(r);
  }
  return 0.0;
}

double SpacetimeModel::d2D(double r) const {
  switch (kind_) {
    case ModelKind::Minkowski: return 0.0;
    case ModelKind::Schwarzschild: return -4.0 * M_ / (r * r * r);
    case ModelKind::ReissnerNordstrom:
      return -4.0 * M_ / (r * r * r) + 6.0 * e_ * e_ / (r * r * r * r);
    case ModelKind::Custom: return custom_->d2D(r);
  }
  return 0.0;
}

double SpacetimeModel::D_near(double delta) const {
  const double r = r_plus_ + delta;
  switch (kind_) {
    case ModelKind::Schwarzschild: return delta / r;
    case ModelKind::ReissnerNordstrom: return delta * (r - r_minus_) / (r * r);
    case ModelKind::Custom:
      if (r_plus_ > 0.0 && delta < kTaylorDelta * scale_)
        return delta * (kappa2_ + 0.5 * d2D(r_plus_) * delta);
      return D(r);
    default: return D(r);
  }
}

void SpacetimeModel::finish(std::optional<double> R) {
  scale_ = std::max(M_, 1.0);
  R_ = R.value_or(10.0 * scale_);
  if (!(R_ > r_plus_)) fail(ErrorCode::InvalidArgument, "reference radius must exceed r_plus");
  kappa2_ = r_plus_ > 0.0 ? dD(r_plus_) : 0.0;
  audit();
}

void SpacetimeModel::audit() const {
  const double top = 1e3 * scale_;
  const ErrorCode code =
      kind_ == ModelKind::Custom ? ErrorCode::CustomSignViolation : ErrorCode::InvalidArgument;
  if (r_plus_ > 0.0) {
    if (!(std::abs(kappa2_) * r_plus_ > 1e-8) || kappa2_ < 0.0)
      fail(kind_ == ModelKind::Custom ? code : ErrorCode::ExtremalOrSuperextremal,
           "D'(r_plus) must be positive (non-degenerate horizon)");
    for (int i = 0; i <= 400; ++i) {
      const double delta = 1e-6 * scale_ * std::pow(top / (1e-6 * scale_), i / 400.0);
      const double d = D_near(delta);
      if (!(d > 0.0) || !std::isfinite(d))
        fail(code, "D must be positive above r_plus; fails at r = " +
                       std::to_string(r_plus_ + delta));
    }
  } else {
    double dmin = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 400; ++i) {
      const double r = top * i / 400.0;
      const double d = D(r);
      if (!std::isfinite(d)) fail(code, "D is not finite at r = " + std::to_string(r));
      dmin = std::min(dmin, d);
    }
    if (!(dmin > 0.0)) fail(code, "Case II requires D bounded below by a positive constant");
  }
  // |D - 1 + 2M/r| r^{1+beta} must stay bounded for r >= R.
  double lo = 0.0, hi = 0.0;
  const int n = 200;
  for (int i = 0; i <= n; ++i) {
    const double r = R_ * std::pow(std::max(top, 10.0 * R_) / R_, double(i) / n);
    const double c = std::abs(D(r) - 1.0 + 2.0 * M_ / r) * std::pow(r, 1.0 + beta_);
    (i <= n / 2 ? lo : hi) = std::max(i <= n / 2 ? lo : hi, c);
  }
  if (hi > 4.0 * lo + 1e-9 * scale_)
    fail(code, "D - 1 + 2M/r does not decay like r^{-1-beta}");
}

SpacetimeModel make_model(ModelKind kind, double M, double e, double beta,
                          const MetricFunction* custom, std::optional<double> R) {
  if (M < 0.0) fail(ErrorCode::NegativeMass, "mass must be nonnegative");
  if (!(beta > 0.0)) fail(ErrorCode::InvalidArgument, "beta must be positive");
  SpacetimeModel m;
  m.kind_ = kind;
  m.M_ = M;
  m.beta_ = beta;
  switch (kind) {
    case ModelKind::Minkowski:
      m.M_ = 0.0;
      break;
    case ModelKind::Schwarzschild:
      if (M == 0.0) fail(ErrorCode::InvalidArgument, "Schwarzschild needs M > 0");
      m.r_plus_ = 2.0 * M;
      m.d_ = {-2.0 * M};
      break;
    case ModelKind::ReissnerNordstrom: {
      if (!(std::abs(e) < M))
        fail(ErrorCode::ExtremalOrSuperextremal, "Reissner-Nordstrom needs |e| < M");
      const double s = std::sqrt((M - e) * (M + e));
      m.e_ = e;
      m.r_plus_ = M + s;
      m.r_minus_ = e * e / m.r_plus_;  // = M - s without cancellation
      m.d_ = {-2.0 * M, e * e};
      break;
    }
    case ModelKind::Custom: {
      if (!custom || !custom->D || !custom->dD || !custom->d2D)
        fail(ErrorCode::InvalidArgument, "custom model needs D, D', D''");
      m.custom_ = std::make_shared<MetricFunction>(*custom);
      m.d_ = {-2.0 * M};
      // Largest root of D, scanning down from far out.
      const double s = std::max(M, 1.0);
      const int n = 4000;
      double prev_r = 1e3 * s;
      if (!(custom->D(prev_r) > 0.0))
        fail(ErrorCode::CustomSignViolation, "D must be positive at large r");
      for (int i = 1; i <= n; ++i) {
        const double r = 1e3 * s * std::pow(1e-9, double(i) / n);
        if (!(custom->D(r) > 0.0)) {
          double a = r, b = prev_r;
          for (int it = 0; it < 200 && b - a > 1e-15 * b; ++it) {
            const double mid = 0.5 * (a + b);
            (custom->D(mid) > 0.0 ? b : a) = mid;
          }
          m.r_plus_ = b;
          // Polish with Newton since D has a simple root.
          for (int it = 0; it < 3; ++it) {
            const double step = custom->D(m.r_plus_) / custom->dD(m.r_plus_);
            if (std::isfinite(step) && std::abs(step) < (b - a) + 1e-12 * b) m.r_plus_ -= step;
          }
          break;
        }
        prev_r = r;
      }
      break;
    }
  }
  m.finish(R);
  return m;
}

SpacetimeModel make_custom_model(std::vector<double> d, double beta, std::optional<double> R) {
  if (d.empty()) d.push_back(0.0);
  auto coeffs = std::make_shared<std::vector<double>>(d);
  MetricFunction f;
  f.D = [coeffs](double r) {
    double s = 1.0, p = 1.0 / r;
    for (double c : *coeffs) {
      s += c * p;
      p /= r;
    }
    return s;
  };
  f.dD = [coeffs](double r) {
    double s = 0.0, p = 1.0 / (r * r);
    for (std::size_t m = 0; m < coeffs->size(); ++m) {
      s -= (m + 1.0) * (*coeffs)[m] * p;
      p /= r;
    }
    return s;
  };
  f.d2D = [coeffs](double r) {
    double s = 0.0, p = 1.0 / (r * r * r);
    for (std::size_t m = 0; m < coeffs->size(); ++m) {
      s += (m + 1.0) * (m + 2.0) * (*coeffs)[m] * p;
      p /= r;
    }
    return s;
  };
  const double M = -0.5 * d[0];
  if (M < 0.0) fail(ErrorCode::NegativeMass, "d_0 = -2M must be nonpositive");
  SpacetimeModel m = make_model(ModelKind::Custom, M, 0.0, beta, &f, R);
  m.d_ = std::move(d);
  return m;
}

double potential(const SpacetimeModel& model, int ell, double r) {
  if (ell < 0) fail(ErrorCode::InvalidArgument, "ell must be nonnegative");
  if (!(r > model.r_min()))
    fail(ErrorCode::BelowHorizon, "potential evaluated at r <= r_min");
  const double D = model.D(r);
  return 0.25 * D * (ell * (ell + 1.0) / (r * r) + model.dD(r) / r);
}

// ---------------------------------------------------------------------------

CoordinateMap::CoordinateMap(SpacetimeModel model) : model_(std::move(model)) {
  const double s = model_.length_scale();
  const double rmin = model_.r_min();
  const double R = model_.reference_radius();
  if (model_.has_horizon()) {
    const double k = model_.surface_slope();
    w_plus_ = -model_.d2D(rmin) / (2.0 * k * k) - 1.0;
  }
  const double lo = kTableLo * s;
  const int n = static_cast<int>(std::ceil(std::log10(kTableHi / kTableLo) * kNodesPerDecade));
  r_nodes_.reserve(n + 2);
  for (int i = 0; i <= n; ++i) r_nodes_.push_back(rmin + lo * std::pow(10.0, double(i) / kNodesPerDecade));
  r_nodes_.push_back(R);
  std::sort(r_nodes_.begin(), r_nodes_.end());
  r_nodes_.erase(std::unique(r_nodes_.begin(), r_nodes_.end()), r_nodes_.end());
  const auto iR = static_cast<std::size_t>(
      std::lower_bound(r_nodes_.begin(), r_nodes_.end(), R) - r_nodes_.begin());

  // w subtracts 1/D, so its roundoff floor is a few ulps of 1/D; asking for
  // less only spins the adaptive loop.
  auto wf = [this](double r) { return w(r); };
  auto piece = [&](double a, double b) {
    const double Da = model_.has_horizon() ? model_.D_near(a - rmin) : model_.D(a);
    const double floor = 1e-15 * (b - a) * (1.0 + 1.0 / std::abs(Da));
    return integrate_adaptive(wf, a, b, floor, 1e-15).value;
  };
  W_nodes_.assign(r_nodes_.size(), 0.0);
  for (std::size_t i = iR + 1; i < r_nodes_.size(); ++i)
    W_nodes_[i] = W_nodes_[i - 1] + piece(r_nodes_[i - 1], r_nodes_[i]);
  for (std::size_t i = iR; i-- > 0;) W_nodes_[i] = W_nodes_[i + 1] - piece(r_nodes_[i], r_nodes_[i + 1]);
  W_nodes_[iR] = 0.0;
  W_plus_ = W_nodes_[0] - piece(rmin, r_nodes_[0]);

  rs_nodes_.resize(r_nodes_.size());
  for (std::size_t i = 0; i < r_nodes_.size(); ++i)
    rs_nodes_[i] = r_nodes_[i] + singular_part(r_nodes_[i]) + W_nodes_[i];
  rs_nodes_[iR] = R;
  rstar_floor_ = model_.has_horizon() ? -std::numeric_limits<double>::infinity()
                                      : W_plus_;  // r*(0) = 0 + W(0)
}

double CoordinateMap::w(double r) const {
  const double D = model_.D(r);
  if (!model_.has_horizon()) return 1.0 / D - 1.0;
  const double delta = r - model_.r_min();
  if (delta < kTaylorDelta * model_.length_scale()) return w_plus_;
  return 1.0 / model_.D_near(delta) - 1.0 - 1.0 / (model_.surface_slope() * delta);
}

double CoordinateMap::singular_part(double r) const {
  if (!model_.has_horizon()) return 0.0;
  const double rp = model_.r_min();
  return std::log((r - rp) / (model_.reference_radius() - rp)) / model_.surface_slope();
}

double CoordinateMap::regular_integral(double r) const {
  auto wf = [this](double x) { return w(x); };
  if (r < r_nodes_.front()) return W_nodes_.front() - gauss_kronrod15(wf, r, r_nodes_.front()).value;
  if (r >= r_nodes_.back()) {
    auto g = [this](double t) {
      const double x = std::exp(t);
      return w(x) * x;
    };
    return W_nodes_.back() +
           integrate_adaptive(g, std::log(r_nodes_.back()), std::log(r), 1e-18, 1e-15).value;
  }
  const auto k = static_cast<std::size_t>(
      std::upper_bound(r_nodes_.begin(), r_nodes_.end(), r) - r_nodes_.begin() - 1);
  if (r == r_nodes_[k]) return W_nodes_[k];
  return W_nodes_[k] + gauss_kronrod15(wf, r_nodes_[k], r).value;
}

double CoordinateMap::tortoise(double r) const {
  if (model_.has_horizon()) {
    if (!(r > model_.r_min()))
      fail(ErrorCode::BelowHorizon, "tortoise coordinate requested at r <= r_plus");
  } else if (!(r >= 0.0)) {
    fail(ErrorCode::BelowHorizon, "tortoise coordinate requested at r < 0");
  }
  if (model_.kind() == ModelKind::Minkowski) return r;
  return r + singular_part(r) + regular_integral(r);
}

double CoordinateMap::inverse_tortoise(double rstar) const {
  const double delta = inverse_tortoise_delta(rstar);
  const double r = model_.r_min() + delta;
  return r > model_.r_min() || !model_.has_horizon()
             ? r
             : std::nextafter(model_.r_min(), std::numeric_limits<double>::infinity());
}

double CoordinateMap::inverse_tortoise_delta(double y) const {
  if (model_.kind() == ModelKind::Minkowski) {
    if (y < 0.0) fail(ErrorCode::TableDomainExceeded, "r* below r = 0 in a regular spacetime");
    return y;
  }
  const double rp = model_.r_min();
  const bool horizon = model_.has_horizon();
  if (!horizon && y < rstar_floor_)
    fail(ErrorCode::TableDomainExceeded, "r* below r = 0 in a regular spacetime");
  const double k2 = model_.surface_slope();
  const double R = model_.reference_radius();

  if (horizon && y < rs_nodes_.front()) {
    // r* = r_plus + (1 + w_plus) delta + ln(delta/(R - r_plus))/D'(r_plus) + W(r_plus)
    double delta = 0.0;
    for (int it = 0; it < 6; ++it)
      delta = (R - rp) * std::exp(k2 * (y - rp - W_plus_ - (1.0 + w_plus_) * delta));
    return delta;
  }

  auto rstar_of = [&](double delta) {
    const double r = rp + delta;
    const double sing = horizon ? std::log(delta / (R - rp)) / k2 : 0.0;
    return r + sing + regular_integral(r);
  };
  auto D_of = [&](double delta) { return model_.D_near(delta); };

  double a, b, delta;
  if (y >= rs_nodes_.back()) {
    a = r_nodes_.back() - rp;
    b = std::numeric_limits<double>::infinity();
    delta = std::max(a, y - rp);
  } else {
    std::size_t k;
    if (y < rs_nodes_.front()) {  // Case II, between r = 0 and the first node
      a = 0.0;
      b = r_nodes_.front() - rp;
      const double ya = rstar_floor_, yb = rs_nodes_.front();
      delta = a + (b - a) * (y - ya) / (yb - ya);
    } else {
      k = static_cast<std::size_t>(
          std::upper_bound(rs_nodes_.begin(), rs_nodes_.end(), y) - rs_nodes_.begin() - 1);
      a = r_nodes_[k] - rp;
      b = r_nodes_[k + 1] - rp;
      const double ya = rs_nodes_[k], yb = rs_nodes_[k + 1];
      if (y == ya) return a;
      // Cubic Hermite guess in r* using dr/dr* = D at both ends.
      const double H = yb - ya, t = (y - ya) / H;
      const double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
      const double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
      delta = h00 * a + h10 * H * D_of(a) + h01 * b + h11 * H * D_of(b);
      if (!(delta > a && delta < b)) delta = a + (b - a) * t;
    }
  }
  for (int it = 0; it < 20; ++it) {
    const double f = rstar_of(delta) - y;
    double step = f * D_of(delta);
    double next = delta - step;
    if (!(next > a)) next = 0.5 * (a + delta);
    if (!(next < b)) next = 0.5 * (delta + b);
    const double change = std::abs(next - delta);
    delta = next;
    if (change <= 1e-16 * (rp + delta)) break;
  }
  return delta;
}

double CoordinateMap::potential_at_rstar(int ell, double rstar) const {
  const double delta = inverse_tortoise_delta(rstar);
  const double r = model_.r_min() + delta;
  const double D = model_.D_near(delta);
  if (r == 0.0) return 0.0;
  return 0.25 * D * (ell * (ell + 1.0) / (r * r) + model_.dD(r) / r);
}

}  // namespace nptails

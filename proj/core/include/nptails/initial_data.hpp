#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "nptails/geometry.hpp"

namespace nptails {

// phi = r psi restricted to the outgoing cone u = 0, r >= R. Profiles are
// evaluable both in v and in r (v = 2 r*(r) on the cone).
class ConeProfile {
 public:
  virtual ~ConeProfile() = default;
  virtual double phi_v(double v) const = 0;
  virtual double dphi_dv(double v) const = 0;
  virtual double phi_r(double r) const = 0;
  // r^2 d_r phi along the cone.
  virtual double r2_dphi_dr(double r) const = 0;
  // Radii where the profile starts, stops or changes character; quadratures
  // split there.
  virtual std::vector<double> breakpoints_r() const { return {}; }
  // Largest radius at which the profile may be evaluated.
  virtual double r_valid_max() const { return std::numeric_limits<double>::infinity(); }
};

// phi and its derivatives on a radial slice r in [r_min, R]: either the
// ingoing ray v = v0 or the spacelike part of the initial hypersurface.
// d_rho is the derivative along the slice, T = d_v in (v, r) coordinates.
class SliceProfile {
 public:
  virtual ~SliceProfile() = default;
  virtual double phi(double rho) const = 0;
  virtual double dphi(double rho) const = 0;
  virtual double Tphi(double rho) const = 0;
  virtual std::vector<double> breakpoints() const { return {}; }
};

enum class FoliationKind { NullRay, TimeSymmetric, Custom };

// Slope h = dv/drho of the initial hypersurface inside r <= R. h = 0 is the
// ingoing null ray v = v0 bounding the evolution rectangle; h = 1/D is a
// t = const slice.
class FoliationSpec {
 public:
  static FoliationSpec null_ray();
  static FoliationSpec time_symmetric();
  static FoliationSpec custom(std::function<double(double)> h, std::function<double(double)> dh);

  FoliationKind kind() const { return kind_; }
  double h(const SpacetimeModel& m, double rho) const;
  // D h and (D h)'
  double Dh(const SpacetimeModel& m, double rho) const;
  double dDh(const SpacetimeModel& m, double rho) const;
  // v along the slice, with v(R) = 2 r*(R) = 2R.
  double v_sigma(const CoordinateMap& map, double rho) const;

 private:
  FoliationKind kind_ = FoliationKind::NullRay;
  std::function<double(double)> h_, dh_;
};

struct TailParameters {
  double I0 = 0.0;
  std::vector<double> p;  // r^2 d_r phi = I0 + sum_m p_m r^{-m}, m = 1, 2, ...
  double beta = 1.0;
};

struct CharacteristicData {
  int ell = 0;
  std::shared_ptr<const CoordinateMap> map;
  std::shared_ptr<const ConeProfile> cone;
  std::shared_ptr<const SliceProfile> ray;  // phi(u, v0) as a function of r
  double v0 = 0.0;
  double v_max = 0.0;
  std::optional<std::pair<double, double>> support;  // compact support in v
  std::optional<TailParameters> tail;

  const SpacetimeModel& model() const { return map->model(); }
  // Ingoing data at retarded time u; continues with the r = 0 value past the
  // centre of a regular spacetime.
  double ray_at_u(double u) const;
};

struct MixedSurfaceData {
  FoliationSpec foliation;
  std::shared_ptr<const SliceProfile> slice;
  CharacteristicData cone;

  const CoordinateMap& map() const { return *cone.map; }
  const SpacetimeModel& model() const { return cone.map->model(); }
};

// Characteristic data seen as data on the degenerate (null) slice.
MixedSurfaceData as_surface(const CharacteristicData& data);

std::shared_ptr<const CoordinateMap> make_map(const SpacetimeModel& model);

// A exp(-1/(x(1-x))) e^4 with x = (v - v_center + width)/(2 width); zero ray.
CharacteristicData bump_data(std::shared_ptr<const CoordinateMap> map, double v_center,
                             double width, double amplitude, int ell, double v_max);

// Data with prescribed r^2 d_r phi = I0 + sum_m p_m r^{-m} on the cone and
// phi(0, v0) = phi0 on the (constant) ray.
CharacteristicData tail_data(std::shared_ptr<const CoordinateMap> map, double I0,
                             std::vector<double> p, double beta, int ell, double v_max,
                             double phi0 = 0.0);

CharacteristicData superpose(double a, const CharacteristicData& A, double b,
                             const CharacteristicData& B);
MixedSurfaceData superpose(double a, const MixedSurfaceData& A, double b,
                           const MixedSurfaceData& B);

MixedSurfaceData mixed_data(FoliationSpec foliation, std::shared_ptr<const SliceProfile> slice,
                            CharacteristicData cone);

// --- concrete profiles ---------------------------------------------------

class ConstantSlice final : public SliceProfile {
 public:
  explicit ConstantSlice(double value) : value_(value) {}
  double phi(double) const override { return value_; }
  double dphi(double) const override { return 0.0; }
  double Tphi(double) const override { return 0.0; }

 private:
  double value_;
};

// Slice profile from callables; Tphi defaults to zero.
class FunctionSlice final : public SliceProfile {
 public:
  FunctionSlice(std::function<double(double)> phi, std::function<double(double)> dphi,
                std::function<double(double)> Tphi = {}, std::vector<double> breaks = {});
  double phi(double rho) const override { return phi_(rho); }
  double dphi(double rho) const override { return dphi_(rho); }
  double Tphi(double rho) const override { return Tphi_ ? Tphi_(rho) : 0.0; }
  std::vector<double> breakpoints() const override { return breaks_; }

 private:
  std::function<double(double)> phi_, dphi_, Tphi_;
  std::vector<double> breaks_;
};

// Smooth compactly supported bump, its derivative, and the support edges.
struct Bump {
  double center = 0.0, width = 1.0, amplitude = 0.0;
  double value(double x) const;
  double derivative(double x) const;
  double lo() const { return center - width; }
  double hi() const { return center + width; }
};

// Slice data psi = bump_psi(rho), T psi = bump_Tpsi(rho) (phi = rho psi).
class BumpSlice final : public SliceProfile {
 public:
  BumpSlice(Bump psi, Bump Tpsi) : psi_(psi), Tpsi_(Tpsi) {}
  double phi(double rho) const override { return rho * psi_.value(rho); }
  double dphi(double rho) const override { return psi_.value(rho) + rho * psi_.derivative(rho); }
  double Tphi(double rho) const override { return rho * Tpsi_.value(rho); }
  std::vector<double> breakpoints() const override;

 private:
  Bump psi_, Tpsi_;
};

// Cone profile from callables in v (phi, d_v phi); r-parametrized values are
// derived through the coordinate map.
class FunctionCone final : public ConeProfile {
 public:
  FunctionCone(std::shared_ptr<const CoordinateMap> map, std::function<double(double)> phi,
               std::function<double(double)> dphi, std::vector<double> breaks_v = {});
  double phi_v(double v) const override { return phi_(v); }
  double dphi_dv(double v) const override { return dphi_(v); }
  double phi_r(double r) const override;
  double r2_dphi_dr(double r) const override;
  std::vector<double> breakpoints_r() const override;

 private:
  std::shared_ptr<const CoordinateMap> map_;
  std::function<double(double)> phi_, dphi_;
  std::vector<double> breaks_v_;
};

}  // namespace nptails

#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace nptails {

enum class ModelKind { Minkowski, Schwarzschild, ReissnerNordstrom, Custom };

const char* to_string(ModelKind kind) noexcept;
ModelKind model_kind_from_string(const std::string& name);

// User-supplied metric function with its first two derivatives.
struct MetricFunction {
  std::function<double(double)> D;
  std::function<double(double)> dD;
  std::function<double(double)> d2D;
};

// Metric function D(r) of -D dv^2 + 2 dv dr + r^2 dOmega^2 together with the
// quantities derived from it. Case I has a simple horizon at r_plus; Case II
// is regular down to r = 0.
class SpacetimeModel {
 public:
  ModelKind kind() const { return kind_; }
  double mass() const { return M_; }
  double charge() const { return e_; }
  double beta() const { return beta_; }
  double reference_radius() const { return R_; }
  bool has_horizon() const { return r_plus_ > 0.0; }
  double horizon_radius() const { return r_plus_; }  // 0 in Case II
  double r_min() const { return r_plus_; }
  double length_scale() const { return scale_; }  // max(M, 1)
  // D = 1 + sum_m d_m r^{-m-1}
  const std::vector<double>& asymptotic_coefficients() const { return d_; }

  double D(double r) const;
  double dD(double r) const;
  double d2D(double r) const;
  // D evaluated at r = r_min + delta without cancellation near the horizon.
  double D_near(double delta) const;
  // D'(r_plus); zero in Case II.
  double surface_slope() const { return kappa2_; }

  friend SpacetimeModel make_model(ModelKind, double, double, double,
                                   const MetricFunction*, std::optional<double>);
  friend SpacetimeModel make_custom_model(std::vector<double>, double, std::optional<double>);

 private:
  void finish(std::optional<double> R);
  void audit() const;

  ModelKind kind_ = ModelKind::Minkowski;
  double M_ = 0.0, e_ = 0.0, beta_ = 1.0, R_ = 10.0;
  double r_plus_ = 0.0, r_minus_ = 0.0, kappa2_ = 0.0, scale_ = 1.0;
  std::vector<double> d_;
  std::shared_ptr<const MetricFunction> custom_;
};

// R defaults to 10*max(M, 1). For kind == Custom, `custom` must be non-null and
// M is the mass used in the asymptotic-flatness audit.
SpacetimeModel make_model(ModelKind kind, double M, double e = 0.0, double beta = 1.0,
                          const MetricFunction* custom = nullptr,
                          std::optional<double> R = std::nullopt);

// Custom model given by finitely many coefficients, D = 1 + sum_m d_m r^{-m-1}.
SpacetimeModel make_custom_model(std::vector<double> coefficients, double beta = 1.0,
                                 std::optional<double> R = std::nullopt);

// V in d_u d_v phi = -V phi for the l-mode of phi = r psi.
double potential(const SpacetimeModel& model, int ell, double r);

// Tortoise coordinate and its inverse, backed by a table geometric in r - r_min.
class CoordinateMap {
 public:
  explicit CoordinateMap(SpacetimeModel model);

  const SpacetimeModel& model() const { return model_; }

  double tortoise(double r) const;
  double inverse_tortoise(double rstar) const;
  // r - r_min for the given r*, accurate even where r itself rounds to r_min.
  double inverse_tortoise_delta(double rstar) const;
  // Potential at the areal radius belonging to r*.
  double potential_at_rstar(int ell, double rstar) const;

  // Smallest admissible r*: -infinity in Case I, r*(0) in Case II.
  double rstar_floor() const { return rstar_floor_; }
  double table_rmax() const { return r_nodes_.back(); }
  std::size_t table_size() const { return r_nodes_.size(); }

 private:
  double w(double r) const;
  double singular_part(double r) const;
  double regular_integral(double r) const;

  SpacetimeModel model_;
  double w_plus_ = 0.0;     // limit of w at r_plus
  double W_plus_ = 0.0;     // regular integral evaluated at r_plus
  double rstar_floor_ = 0.0;
  std::vector<double> r_nodes_, W_nodes_, rs_nodes_;
};

}  // namespace nptails

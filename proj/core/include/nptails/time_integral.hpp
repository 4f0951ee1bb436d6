#pragma once

#include <array>
#include <memory>
#include <vector>

#include "nptails/evolution.hpp"
#include "nptails/np_constants.hpp"

namespace nptails {

// Degree-9 polynomial on [a, b] through the values at the 10 Gauss-Legendre
// nodes, with closed-form running integrals.
class PanelPolynomial {
 public:
  static constexpr int kNodes = 10;
  PanelPolynomial() = default;
  PanelPolynomial(double a, double b, const std::array<double, kNodes>& node_values);

  // Nodes of [a, b] in increasing order.
  static std::array<double, kNodes> nodes(double a, double b);

  double value(double x) const;
  double integral(double x) const;         // int_a^x f
  double double_integral(double x) const;  // int_a^x (x - y) f(y) dy
  double moment(double x) const;           // int_a^x y f(y) dy

 private:
  double mid_ = 0.0, hw_ = 1.0;
  std::array<double, kNodes> c_{};  // monomial coefficients in t = (x - mid) / hw
};

// phi^(k) = r psi^(k) on the cone, held in x = 1/r. psi, psi' and
// q = psi - x psi' are panelwise closed-form integrals of psi'', so
// r^2 d_r phi^(k) = q / x^2 carries no cancellation as x -> 0.
class TabulatedCone final : public ConeProfile {
 public:
  struct Panel {
    double x0, x1;
    double psi0, dpsi0, q0;  // at x0
    PanelPolynomial d2psi;
  };

  TabulatedCone(std::shared_ptr<const CoordinateMap> map, std::vector<Panel> panels,
                std::vector<double> breakpoints_r, double r_max);

  double phi_v(double v) const override;
  double dphi_dv(double v) const override;
  double phi_r(double r) const override;
  double r2_dphi_dr(double r) const override;
  std::vector<double> breakpoints_r() const override { return breaks_; }
  double r_valid_max() const override { return r_max_; }

  double psi_x(double x) const;

 private:
  const Panel& find(double x) const;

  std::shared_ptr<const CoordinateMap> map_;
  std::vector<Panel> panels_;
  std::vector<double> breaks_;
  double r_max_;
};

// psi^(k) on the slice [r_min, R], parametrized by y = rho - r_min.
// D rho^2 d_rho psi^(k) = shift - int_{r_min}^rho S with S the slice
// integrand of the source data; shift = 0 is the regular solution.
class TabulatedSlice final : public SliceProfile {
 public:
  struct Panel {
    double y0, y1;
    double Q0;    // int_{r_min}^{r_min + y0} S
    double psi0;  // psi at y0
    PanelPolynomial S;
    PanelPolynomial dpsi;
  };

  TabulatedSlice(std::shared_ptr<const CoordinateMap> map, std::vector<Panel> panels,
                 double shift, std::shared_ptr<const SliceProfile> source,
                 std::vector<double> breakpoints);

  double phi(double rho) const override;
  double dphi(double rho) const override;
  double Tphi(double rho) const override { return source_->phi(rho); }
  std::vector<double> breakpoints() const override { return breaks_; }

  double psi(double rho) const;
  // d_rho psi from its defining relation, evaluated at r_min + y.
  double dpsi_at_offset(double y) const;

 private:
  const Panel& find(double y) const;

  std::shared_ptr<const CoordinateMap> map_;
  std::vector<Panel> panels_;
  double shift_;
  std::shared_ptr<const SliceProfile> source_;
  std::vector<double> breaks_;
};

struct TimeIntegralData {
  int order = 1;
  Estimate C0;            // constant used (including any shift)
  LimitFit I0;            // lim r^2 d_r phi^(k) extracted from the constructed cone
  Estimate closed_form;   // -lim r^3 d_r phi^(k-1) + M C0 from the source
  double c0_shift = 0.0;
  std::shared_ptr<const TabulatedCone> cone;
  std::shared_ptr<const TabulatedSlice> slice;
  MixedSurfaceData data;  // psi^(k) as data on the same surface

  const CharacteristicData& characteristic() const { return data.cone; }
};

// psi^(1) with T psi^(1) = psi and psi^(1) -> 0 at infinity. A nonzero
// `c0_shift` perturbs C0 to expose the singular branch at r_min.
TimeIntegralData construct_time_integral(const MixedSurfaceData& data,
                                         double vanishing_floor = 1e-10, double c0_shift = 0.0);
TimeIntegralData construct_time_integral(const CharacteristicData& data);

// psi^(1), ..., psi^(k). The vanishing floor of level j is 1e-10 * 10^j.
std::vector<TimeIntegralData> iterate_time_integral(const MixedSurfaceData& data, int k);
std::vector<TimeIntegralData> iterate_time_integral(const CharacteristicData& data, int k);

// Report of an already constructed chain; an empty chain gives I0 alone.
NpReport summarize_chain(const MixedSurfaceData& data, const std::vector<TimeIntegralData>& chain);

// psi^(1) on the stored grid of psi by trapezoidal transport along the
// diagonals v - u = const, starting from the cone u = 0 and the ray v = v0.
GridField propagate_time_integral(const GridField& psi, const TimeIntegralData& tdata);

}  // namespace nptails

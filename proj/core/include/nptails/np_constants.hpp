#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "nptails/initial_data.hpp"

namespace nptails {

struct Estimate {
  double value = 0.0;
  double error = 0.0;
};

// Limit r -> infinity extracted from samples at r_j = r_base 2^j by
// polynomial extrapolation in 1/r.
struct LimitFit : Estimate {
  std::vector<double> radii;
  std::vector<double> samples;
  // Cubic through the four outermost samples, in powers of 1/r.
  std::array<double, 4> coefficients{};
};

// Gate for the exact conditions "I0 = 0" etc.: |value| <= max(10 err, floor*scale).
bool vanishes(const Estimate& e, double scale, double floor = 1e-10);

// Magnitude of the data used to scale vanishing tolerances.
double data_scale(const MixedSurfaceData& data);

// lim r^2 d_r phi along the cone (the mode-level Newman-Penrose constant).
LimitFit estimate_I0(const ConeProfile& cone, const SpacetimeModel& model);
LimitFit estimate_I0(const CharacteristicData& data);

// lim r^3 d_r phi along the cone, after removing the (vanishing) I0 part.
LimitFit cubic_limit(const ConeProfile& cone, const SpacetimeModel& model, double I0 = 0.0);

// Regularity constant C0 = lim r^2 d_rho psi^(1) fixed by the data.
// `vanishing_floor` is the relative floor of the I0 = 0 gate.
Estimate compute_C0(const MixedSurfaceData& data, double vanishing_floor = 1e-10);
Estimate compute_C0(const CharacteristicData& data);

// I0^(1) = -lim r^3 d_r phi + M C0.
Estimate time_inverted_I0(const MixedSurfaceData& data, double vanishing_floor = 1e-10);
Estimate time_inverted_I0(const CharacteristicData& data);

// 2(1 - hD) rho d_rho phi - (2 - Dh) rho h T phi - rho (Dh)' phi on the slice.
double slice_integrand(const MixedSurfaceData& data, double rho);

// Integral of the slice integrand over [r_min, rho]; it vanishes at rho = r_min
// and equals -D rho^2 d_rho psi^(1) on the slice.
double slice_flux(const MixedSurfaceData& data, double rho);

enum class ConstantMethod { ClosedForm, ConstructedLimit, Both };
const char* to_string(ConstantMethod m) noexcept;

struct InvertedConstant {
  int k = 0;
  double value = 0.0;
  double error = 0.0;
  ConstantMethod method = ConstantMethod::ClosedForm;
  std::optional<double> closed_form;
  std::optional<double> constructed;
  std::optional<double> agreement;  // |closed - constructed| / max(|closed|, |constructed|)
  // Leading coefficients of r^2 d_r phi^(k) = sum_m p_m r^{-m} on the cone.
  std::vector<double> expansion;
};

struct NpReport {
  Estimate I0;
  std::optional<Estimate> C0;
  std::vector<InvertedConstant> inverted;

  const InvertedConstant* order(int k) const;
};

// Chain psi -> psi^(1) -> ... -> psi^(k) with both oracles at every level.
NpReport time_inverted_I0_kth(const MixedSurfaceData& data, int k);
NpReport time_inverted_I0_kth(const CharacteristicData& data, int k);

}  // namespace nptails

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nptails/np_constants.hpp"

namespace nptails {

struct PowerIndex {
  std::vector<double> tau;
  std::vector<double> p;  // -d ln|y| / d ln tau
  bool power_law = true;  // false when p keeps growing over the last half of the range
};

// Local index on a log-spaced resampling (40 points per decade) of (tau, y).
// tau must be increasing and positive; y must not change sign.
PowerIndex local_power_index(std::span<const double> tau, std::span<const double> y);

enum class Scenario {
  InteriorZeroNP,     // psi ~ -8 I0^(1) tau^-3; T^k psi by differentiation
  FarfieldZeroNP,     // psi ~ -4 I0^(1) (1 + u/v) / (u^2 v) on gamma_alpha
  ScriZeroNP,         // r psi ~ -2 I0^(1) u^-2
  HorizonZeroNP,      // psi ~ -8 I0^(1) v^-3; T^k psi likewise
  InteriorNonzeroNP,  // T^k psi ~ 4 (-1)^k (k+1)! I0 tau^-(k+2)
  ScriTk,             // T^k (r psi) ~ (-1)^k k! 2 I0 u^-(k+1)
  HigherOrder,        // psi ~ 24 I0^(2) tau^-4
  NpScalar,           // v^2 d_v phi ~ 2 I0
};

const char* to_string(Scenario s) noexcept;
Scenario scenario_from_string(const std::string& name);

struct Target {
  double exponent = 0.0;
  double coefficient = 0.0;  // multiplies the constant
  int constant_order = 0;    // 0: I0, 1: I0^(1), 2: I0^(2)
  std::string formula;
};

Target scenario_target(Scenario s, int k = 0);

struct FitInput {
  std::string curve_id;
  std::string field_id;
  std::vector<double> tau;  // time variable of the fit (u, or v on the horizon)
  std::vector<double> y;
  std::vector<double> v;    // advanced time per sample; FarfieldZeroNP only
};

struct FitOptions {
  // Exponent window as fractions of the last tau; amplitude window is the
  // last `amplitude_decades` decades. The lower edge sits past the ringing
  // that survives the last sign change by a few hundred M.
  double exponent_lo = 0.25;
  double exponent_hi = 1.0;
  double amplitude_decades = 0.5;
};

struct TailFit {
  std::string curve_id, field_id;
  Scenario scenario = Scenario::InteriorZeroNP;
  int k = 0;
  double window_lo = 0.0, window_hi = 0.0;        // exponent window
  double amp_window_lo = 0.0, amp_window_hi = 0.0;
  PowerIndex index;
  Estimate p_inf;
  double p_theory = 0.0;
  Estimate amplitude;
  double target = 0.0;
  std::string formula;
  double deviation = 0.0;  // relative, or absolute when target = 0
  bool relative = true;
};

TailFit extrapolate_and_compare(const FitInput& in, const NpReport& report, Scenario scenario,
                                int k = 0, const FitOptions& opt = {});

// Least-squares polynomial in 1/tau: returns coefficients c_0 .. c_deg of
// sum c_m (tau_ref / tau)^m with tau_ref the largest tau.
std::vector<double> fit_inverse_powers(std::span<const double> tau, std::span<const double> y,
                                       int degree);

}  // namespace nptails
